#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "gen.hpp"
#include "touchsig/error.hpp"
#include "touchsig/eval.hpp"
#include "touchsig/synth.hpp"

using namespace touchsig;

namespace {

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::UsageError;
}

// Feature 0 holds the class index, so a classifier reading it is perfect.
FeatureMatrix leaky(const std::vector<std::string>& classes, const std::vector<int>& counts, gen::Rng& rng) {
    FeatureMatrix m;
    m.phase = Phase::Phase2;
    m.layout = {"class", "noise"};
    for (std::size_t c = 0; c < classes.size(); ++c) {
        for (int i = 0; i < counts[c]; ++i) {
            m.labels.push_back(classes[c]);
            m.rows.push_back({double(c), gen::sequence(rng, 1)[0]});
        }
    }
    return m;
}

std::vector<std::string> digit_names() {
    std::vector<std::string> d;
    for (int i = 0; i < 10; ++i) d.push_back("digit:" + std::to_string(i));
    return d;
}

}  // namespace

TEST_CASE("kfold_split partitions, balances and is deterministic") {
    std::vector<std::string> labels;
    for (int i = 0; i < 880; ++i) labels.push_back("c" + std::to_string(i % 8));
    const auto folds = kfold_split(880, 10, 1, labels);
    REQUIRE(folds.size() == 10);
    std::set<std::size_t> seen;
    for (const auto& f : folds) {
        CHECK(f.size() == 88);
        std::map<std::string, int> per;
        for (auto i : f) {
            CHECK(seen.insert(i).second);
            ++per[labels[i]];
        }
        for (const auto& [l, n] : per) CHECK(n == 11);
    }
    CHECK(seen.size() == 880);
    CHECK(kfold_split(880, 10, 1, labels) == folds);
    CHECK_FALSE(kfold_split(880, 10, 2, labels) == folds);

    const std::vector<std::string> ten(10, "x");
    const auto loo = kfold_split(10, 10, 3, ten);
    for (const auto& f : loo) CHECK(f.size() == 1);

    gen::Rng rng(1);
    for (int round = 0; round < 50; ++round) {
        const auto n = gen::length(rng, 1, 200);
        const auto k = gen::length(rng, 1, n);
        std::vector<std::string> lab(n);
        for (auto& l : lab) l = std::string(1, char('a' + rng() % 5));
        const auto fs = kfold_split(n, k, rng(), lab);
        REQUIRE(fs.size() == k);
        std::size_t lo = n, hi = 0, total = 0;
        std::set<std::size_t> all;
        for (const auto& f : fs) {
            lo = std::min(lo, f.size());
            hi = std::max(hi, f.size());
            total += f.size();
            all.insert(f.begin(), f.end());
        }
        CHECK(hi - lo <= 1);
        CHECK(total == n);
        CHECK(all.size() == n);
    }

    CHECK(code_of([&] { kfold_split(5, 6, 0, std::vector<std::string>(5, "a")); }) == ErrorCode::KTooLarge);
    CHECK(code_of([&] { kfold_split(5, 0, 0, std::vector<std::string>(5, "a")); }) == ErrorCode::KTooLarge);
}

TEST_CASE("class_order follows table order") {
    const std::vector<std::string> mixed{"digit:3", "action:zoom_out", "zeta", "action:click", "digit:0", "alpha"};
    CHECK(class_order(mixed) ==
          std::vector<std::string>{"action:click", "action:zoom_out", "digit:0", "digit:3", "alpha", "zeta"});
}

TEST_CASE("confusion matrix arithmetic") {
    ConfusionMatrix cm({"a", "b"});
    cm.add("a", "a");
    cm.add("a", "b");
    cm.add("a", "a");
    cm.add("b", "b");
    CHECK(cm.total() == 4);
    CHECK(cm.actual_total(0) == 3);
    CHECK(cm.percent(0, 0) == doctest::Approx(200.0 / 3.0));
    CHECK(cm.percent(1, 1) == 100.0);
    CHECK(cm.overall_rate() == 0.75);
    CHECK(code_of([&] { cm.add("c", "a"); }) == ErrorCode::DimensionMismatch);
    ConfusionMatrix empty({"a"});
    CHECK(empty.percent(0, 0) == 0.0);
}

TEST_CASE("constant classifier scores the class prevalence") {
    gen::Rng rng(2);
    const auto m = leaky({"A", "B", "C"}, {20, 10, 10}, rng);
    const Trainer constant = [](const FeatureMatrix&) -> RankedPredictor {
        return [](std::span<const double>) { return std::vector<std::string>{"A"}; };
    };
    const auto r = cross_validate(m, constant, 10, 1);
    CHECK(r.overall_rate == doctest::Approx(0.5));
    CHECK(r.confusion.total() == 40);
    CHECK_FALSE(r.guess.has_value());
}

TEST_CASE("leaked labels give a diagonal matrix") {
    gen::Rng rng(3);
    const std::vector<std::string> classes{"A", "B", "C", "D"};
    const auto m = leaky(classes, {7, 9, 5, 11}, rng);
    const Trainer oracle = [&](const FeatureMatrix&) -> RankedPredictor {
        return [&](std::span<const double> x) { return std::vector<std::string>{classes[std::size_t(x[0])]}; };
    };
    const auto r = cross_validate(m, oracle, 5, 9);
    CHECK(r.overall_rate == 1.0);
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t p = 0; p < 4; ++p) CHECK(r.confusion.counts[a][p] == (a == p ? r.confusion.actual_total(a) : 0));
    }
    CHECK(r.folds == 5);
    CHECK(r.seed == 9);

    FeatureMatrix one = m;
    std::fill(one.labels.begin(), one.labels.end(), "A");
    CHECK(code_of([&] { cross_validate(one, oracle, 5, 1); }) == ErrorCode::DegenerateSplit);
}

TEST_CASE("guess curve from explicit rankings") {
    const std::vector<std::string> classes{"x", "y", "z"};
    const std::vector<std::string> truth{"x", "y", "z", "z"};
    const std::vector<std::vector<std::string>> rankings{
        {"x", "y", "z"}, {"x", "y", "z"}, {"x", "y", "z"}, {"z", "x", "y"}};
    const auto g = guess_curve(classes, truth, rankings);
    CHECK(g.samples == 4);
    CHECK(g.average == std::vector<double>{0.5, 0.75, 1.0});
    CHECK(g.per_class[2] == std::vector<double>{0.5, 0.5, 1.0});
}

TEST_CASE("zero-weight model gives the random-guess curve on a balanced set") {
    gen::Rng rng(4);
    auto m = leaky(digit_names(), std::vector<int>(10, 6), rng);
    MlpModel zero(2, 3, 10);
    zero.set_classes(digit_names());
    const auto g = guess_curve(zero, m);
    REQUIRE(g.average.size() == 10);
    for (std::size_t r = 0; r < 10; ++r) CHECK(std::abs(g.average[r] - double(r + 1) / 10.0) <= 0.02);
    CHECK(g.average.back() == 1.0);
}

TEST_CASE("cross-validated kNN and ANN on synthetic data") {
    auto spec = GenSpec::for_family(ClassFamily::Actions);
    spec.separation = 16.0;
    spec.per_class = 10;
    const auto actions = build_matrix(gen_dataset(spec), Phase::Phase1);
    const auto a = cross_validate(actions, two_stage_trainer(), 10, 1);
    CHECK(a.overall_rate >= 0.9);
    CHECK(a.confusion.total() == actions.size());
    for (std::size_t c = 0; c < a.confusion.classes.size(); ++c) {
        double col = 0.0;
        for (std::size_t p = 0; p < a.confusion.classes.size(); ++p) col += a.confusion.percent(c, p);
        CHECK(std::abs(col - 100.0) <= 0.01);
    }
    const auto again = cross_validate(actions, two_stage_trainer(), 10, 1);
    CHECK(again.confusion.counts == a.confusion.counts);

    const auto flat = cross_validate(actions, knn_trainer(3, Metric::CityBlock), 5, 2);
    CHECK(flat.confusion.total() == actions.size());

    auto dspec = GenSpec::for_family(ClassFamily::Digits);
    dspec.separation = 16.0;
    dspec.per_class = 10;
    const auto digits = build_matrix(gen_dataset(dspec), Phase::Phase2);
    ScgConfig cfg;
    cfg.max_epochs = 200;
    cfg.seed = 1;
    const auto d = cross_validate(digits, ann_trainer(20, cfg), 5, 1);
    REQUIRE(d.guess.has_value());
    CHECK(d.guess->average.front() == doctest::Approx(d.overall_rate));
    CHECK(d.guess->average.back() == 1.0);
    CHECK(std::is_sorted(d.guess->average.begin(), d.guess->average.end()));
    for (const auto& pc : d.guess->per_class) CHECK(std::is_sorted(pc.begin(), pc.end()));
}
