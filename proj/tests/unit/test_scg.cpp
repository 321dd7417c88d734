#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "gen.hpp"
#include "touchsig/error.hpp"
#include "touchsig/matrix.hpp"
#include "touchsig/scg.hpp"
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

LabeledBatch toy() {
    LabeledBatch b;
    b.inputs.resize(4, 2);
    b.inputs << 0, 0,
                1, 1,
                0, 1,
                1, 0;
    b.targets = {0, 0, 1, 1};  // XOR
    return b;
}

LabeledBatch blobs(gen::Rng& rng, int per_class, int classes, int dim) {
    LabeledBatch b;
    b.inputs.resize(per_class * classes, dim);
    std::normal_distribution<double> noise(0.0, 0.7);
    for (int c = 0; c < classes; ++c) {
        for (int i = 0; i < per_class; ++i) {
            const int row = c * per_class + i;
            for (int d = 0; d < dim; ++d) b.inputs(row, d) = (d % classes == c ? 2.0 : 0.0) + noise(rng);
            b.targets.push_back(c);
        }
    }
    return b;
}

FeatureMatrix labelled(const std::vector<std::string>& labels, std::size_t dim = 3) {
    FeatureMatrix m;
    m.phase = Phase::Phase2;
    for (std::size_t k = 0; k < dim; ++k) m.layout.push_back("f" + std::to_string(k));
    m.labels = labels;
    for (std::size_t i = 0; i < labels.size(); ++i) m.rows.push_back(std::vector<double>(dim, double(i)));
    return m;
}

}  // namespace

TEST_CASE("config validation") {
    ScgConfig c;
    CHECK_NOTHROW(c.validate());
    c.sigma0 = 0.0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidSpec);
    c = {};
    c.lambda0 = -1.0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidSpec);
    c = {};
    c.max_epochs = -1;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidSpec);

    SplitSpec s;
    CHECK_NOTHROW(s.validate());
    s.test = 0.2;
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidSpec);
    s = {0.5, 0.6, -0.1, 0};
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("toy problem converges and accepted losses strictly decrease") {
    ScgConfig cfg;
    cfg.max_epochs = 200;
    const auto batch = toy();
    const auto init = mlp_init(2, 4, 2, 3);
    const auto r = scg_train(init, batch, nullptr, cfg);
    INFO("stop " << r.stop_reason << " after " << r.history.size() << " epochs");
    CHECK(r.best_train_loss < 0.01);
    CHECK(r.history.size() <= 200);
    CHECK(loss_and_grad(r.model, batch).first == doctest::Approx(r.best_train_loss).epsilon(1e-12));

    double last = r.initial_train_loss;
    int accepted = 0;
    for (const auto& e : r.history) {
        if (e.epoch == 0) {
            CHECK(e.train_loss == r.initial_train_loss);
            continue;
        }
        if (!e.accepted) continue;
        CHECK(e.train_loss < last);
        last = e.train_loss;
        ++accepted;
    }
    CHECK(accepted > 0);
    CHECK(r.best_train_loss <= r.initial_train_loss);
}

TEST_CASE("zero-weight start has loss ln 10 and training is deterministic") {
    gen::Rng rng(1);
    const auto batch = blobs(rng, 6, 10, 12);
    ScgConfig cfg;
    cfg.max_epochs = 30;
    const auto r = scg_train(MlpModel(12, 5, 10), batch, nullptr, cfg);
    CHECK(std::abs(r.initial_train_loss - std::numbers::ln10) < 1e-9);

    const auto init = mlp_init(12, 5, 10, 9);
    const auto a = scg_train(init, batch, nullptr, cfg);
    const auto b = scg_train(init, batch, nullptr, cfg);
    CHECK(a.model == b.model);
    CHECK(a.history.size() == b.history.size());
    CHECK(a.stop_reason == b.stop_reason);
}

TEST_CASE("early stopping returns the best validation weights") {
    gen::Rng rng(2);
    const auto train = blobs(rng, 8, 3, 6);
    const auto val = blobs(rng, 4, 3, 6);
    ScgConfig cfg;
    cfg.max_epochs = 500;
    const auto r = scg_train(mlp_init(6, 30, 3, 1), train, &val, cfg);
    const double best_val = loss_and_grad(r.model, val).first;
    CHECK(best_val == doctest::Approx(r.best_val_loss).epsilon(1e-12));
    for (const auto& e : r.history) CHECK(best_val <= e.val_loss + 1e-15);
    CHECK(r.best_train_loss <= r.initial_train_loss);
    CHECK((r.stop_reason == "validation" || r.stop_reason == "min_grad" || r.stop_reason == "max_epochs"));
    if (r.stop_reason == "validation") {
        int since = 0;
        for (auto it = r.history.rbegin(); it != r.history.rend() && it->epoch > r.best_epoch; ++it) since += it->accepted;
        CHECK(since == cfg.early_stop_patience);
    }
}

TEST_CASE("divergent objective is reported as NonFiniteLoss") {
    LabeledBatch b;
    b.inputs.resize(1, 1);
    b.inputs << std::numeric_limits<double>::infinity();
    b.targets = {0};
    CHECK(code_of([&] { scg_train(mlp_init(1, 2, 2, 0), b, nullptr, ScgConfig{}); }) == ErrorCode::NonFiniteLoss);
}

TEST_CASE("stratified split rounds each class and keeps indices disjoint") {
    std::vector<std::string> labels;
    for (int c = 0; c < 10; ++c) {
        for (int i = 0; i < 30; ++i) labels.push_back("digit:" + std::to_string(c));
    }
    const auto s = stratified_split(labels, SplitSpec{0.70, 0.15, 0.15, 4});
    CHECK(s.train.size() == 210);
    CHECK(s.validation.size() == 50);  // round(4.5) = 5 per class
    CHECK(s.test.size() == 40);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.validation.begin(), s.validation.end());
    all.insert(s.test.begin(), s.test.end());
    CHECK(all.size() == 300);
    std::map<std::string, int> per;
    for (auto i : s.test) ++per[labels[i]];
    for (const auto& [l, n] : per) CHECK(n == 4);
    CHECK(per.size() == 10);

    const auto again = stratified_split(labels, SplitSpec{0.70, 0.15, 0.15, 4});
    CHECK(again.train == s.train);
    const auto other = stratified_split(labels, SplitSpec{0.70, 0.15, 0.15, 5});
    CHECK_FALSE(other.train == s.train);
}

TEST_CASE("train_ann fits, splits and rejects degenerate data") {
    auto spec = GenSpec::for_family(ClassFamily::Digits);
    spec.separation = 16.0;
    spec.per_class = 12;
    const auto m = build_matrix(gen_dataset(spec), Phase::Phase2);
    ScgConfig cfg;
    cfg.max_epochs = 100;
    cfg.seed = 3;
    const auto t = train_ann(m, 20, cfg, SplitSpec{0.70, 0.15, 0.15, 3});
    CHECK(t.model.in_dim() == 150);
    CHECK(t.model.hidden() == 20);
    CHECK(t.model.classes().size() == 10);
    CHECK(std::is_sorted(t.model.classes().begin(), t.model.classes().end()));
    CHECK(t.split.train.size() + t.split.validation.size() + t.split.test.size() == m.size());
    int correct = 0;
    for (auto i : t.split.test) correct += predict_ranked(t.model, m.rows[i])[0].label == m.labels[i];
    CHECK(double(correct) / double(t.split.test.size()) >= 0.8);

    const auto single = labelled({"digit:1", "digit:1", "digit:1", "digit:2"});
    CHECK(code_of([&] { train_ann(single, 4, cfg, SplitSpec{0.3, 0.35, 0.35, 0}); }) == ErrorCode::DegenerateSplit);
}

TEST_CASE("a 10000-wide hidden layer trains") {
    gen::Rng rng(5);
    const auto batch = blobs(rng, 3, 10, 150);
    ScgConfig cfg;
    cfg.max_epochs = 3;
    const auto r = scg_train(mlp_init(150, 10000, 10, 1), batch, nullptr, cfg);
    CHECK(r.model.param_count() == 10000 * 150 + 10000 + 10 * 10000 + 10);
    CHECK(r.best_train_loss <= r.initial_train_loss);
    CHECK(std::isfinite(r.best_train_loss));
}
