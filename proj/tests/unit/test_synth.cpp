#include <doctest.h>

#include <map>

#include "oracles.hpp"
#include "touchsig/error.hpp"
#include "touchsig/matrix.hpp"
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

GenSpec actions(double separation, int per_class, std::uint64_t seed = 1) {
    auto spec = GenSpec::for_family(ClassFamily::Actions);
    spec.separation = separation;
    spec.per_class = per_class;
    spec.seed = seed;
    return spec;
}

double min_centroid_distance(const FeatureMatrix& m) {
    std::map<std::string, std::pair<std::vector<double>, int>> sums;
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto& [sum, n] = sums[m.labels[i]];
        sum.resize(m.dim(), 0.0);
        for (std::size_t k = 0; k < m.dim(); ++k) sum[k] += m.rows[i][k];
        ++n;
    }
    std::vector<std::vector<double>> centroids;
    for (auto& [label, s] : sums) {
        for (auto& v : s.first) v /= s.second;
        centroids.push_back(s.first);
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < centroids.size(); ++a) {
        for (std::size_t b = a + 1; b < centroids.size(); ++b) {
            best = std::min(best, oracle::euclidean(centroids[a], centroids[b]));
        }
    }
    return best;
}

}  // namespace

TEST_CASE("gen_trace is deterministic in seed, label and draw index") {
    const auto spec = actions(4.0, 5, 7);
    const Label click = TouchAction::Click;
    CHECK(gen_trace(click, spec, 3) == gen_trace(click, spec, 3));
    CHECK_FALSE(gen_trace(click, spec, 3) == gen_trace(click, spec, 4));
    auto other = spec;
    other.seed = 8;
    CHECK_FALSE(gen_trace(click, spec, 3) == gen_trace(click, other, 3));
    CHECK(gen_trace(click, spec, 3).label == click);
}

TEST_CASE("sequence lengths follow profile rates and duration") {
    CHECK(samples_for(20.0, 750.0) == 15);
    CHECK(samples_for(60.0, 1000.0) == 60);
    CHECK(samples_for(1.0, 10.0) == 2);

    auto spec = GenSpec::for_family(ClassFamily::Digits);
    spec.profile = DeviceProfile::iphone5();
    const auto t = gen_trace(Digit{4}, spec, 0);
    for (Channel ch : kSensorChannels) CHECK(t.seq(ch).size() == 15);

    spec.profile = DeviceProfile::nexus5();
    const auto u = gen_trace(Digit{4}, spec, 0);
    CHECK(u.seq(Channel::MX).size() == 45);
    CHECK(u.seq(Channel::OX).size() == 33);
    CHECK(u.interval_ms == doctest::Approx(1000.0 / 60.0));
}

TEST_CASE("gen_dataset yields a uniform, shuffled, reproducible set") {
    auto spec = actions(16.0, 10);
    const auto a = gen_dataset(spec);
    CHECK(a.size() == 80);
    std::map<std::string, int> hist;
    for (const auto& t : a) ++hist[t.label.str()];
    CHECK(hist.size() == 8);
    for (const auto& [label, n] : hist) CHECK(n == 10);
    CHECK(gen_dataset(spec) == a);
    // Not grouped by class.
    const bool grouped = a[0].label == a[1].label && a[1].label == a[2].label && a[2].label == a[3].label;
    CHECK_FALSE(grouped);

    auto digits = GenSpec::for_family(ClassFamily::Digits);
    digits.per_class = 10;
    const auto d = gen_dataset(digits);
    CHECK(d.size() == 100);
    std::map<std::string, int> dh;
    for (const auto& t : d) ++dh[t.label.str()];
    CHECK(dh.size() == 10);
    for (const auto& [label, n] : dh) CHECK(n == 10);
}

TEST_CASE("generated traces satisfy the group-length invariant") {
    for (auto family : {ClassFamily::Actions, ClassFamily::Digits}) {
        for (auto profile : {DeviceProfile::iphone5(), DeviceProfile::nexus5()}) {
            auto spec = GenSpec::for_family(family);
            spec.profile = profile;
            spec.per_class = 2;
            for (const auto& t : gen_dataset(spec)) {
                CHECK_NOTHROW(validate(t));
                for (SensorGroup g : kSensorGroups) {
                    const auto ch = channels_of(g);
                    CHECK(t.seq(ch[0]).size() == t.seq(ch[1]).size());
                    CHECK(t.seq(ch[1]).size() == t.seq(ch[2]).size());
                }
            }
        }
    }
}

TEST_CASE("invalid specs and foreign labels are rejected") {
    auto spec = actions(0.0, 5);
    CHECK(code_of([&] { spec.validate(); }) == ErrorCode::InvalidSpec);
    CHECK(code_of([&] { gen_dataset(spec); }) == ErrorCode::InvalidSpec);
    spec.separation = -1.0;
    CHECK(code_of([&] { spec.validate(); }) == ErrorCode::InvalidSpec);
    spec = actions(1.0, 0);
    CHECK(code_of([&] { spec.validate(); }) == ErrorCode::InvalidSpec);
    spec = actions(1.0, 1);
    spec.classes.clear();
    CHECK(code_of([&] { spec.validate(); }) == ErrorCode::InvalidSpec);
    spec = actions(1.0, 1);
    CHECK(code_of([&] { gen_trace(Digit{3}, spec, 0); }) == ErrorCode::LabelNotInSpec);
    CHECK(code_of([] { DeviceProfile::by_name("pixel"); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("class centroids separate as separation grows") {
    double prev = 0.0;
    for (double sep : {1.0, 4.0, 16.0}) {
        const auto traces = gen_dataset(actions(sep, 20));
        const auto d = min_centroid_distance(build_matrix(traces, Phase::Phase1));
        INFO("separation " << sep << " min centroid distance " << d);
        CHECK(d > prev);
        prev = d;
    }
}

TEST_CASE("separation 16 gives a near-perfect 1-NN leave-one-out") {
    for (std::uint64_t seed : {1u, 2u}) {
        const auto m = build_matrix(gen_dataset(actions(16.0, 10, seed)), Phase::Phase1);
        int correct = 0;
        for (std::size_t q = 0; q < m.size(); ++q) {
            std::size_t best = q;
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (i == q) continue;
                const double d = oracle::euclidean(m.rows[i], m.rows[q]);
                if (d < bd) bd = d, best = i;
            }
            correct += m.labels[best] == m.labels[q];
        }
        INFO("seed " << seed);
        CHECK(double(correct) / double(m.size()) >= 0.99);
    }
}
