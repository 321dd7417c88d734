#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "gen.hpp"
#include "oracles.hpp"
#include "touchsig/error.hpp"
#include "touchsig/features.hpp"
#include "touchsig/matrix.hpp"

using namespace touchsig;
using V = std::vector<double>;

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

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST_CASE("baseline_shift examples") {
    CHECK(baseline_shift(V{5, 7, 6}) == V{0, 2, 1});
    CHECK(baseline_shift(V{0, 0, 0}) == V{0, 0, 0});
    CHECK(baseline_shift(V{-3}) == V{0});
    CHECK(code_of([] { baseline_shift(V{}); }) == ErrorCode::EmptySequence);
}

TEST_CASE("derivative examples and reconstruction") {
    CHECK(derivative(V{2, 5, 3}) == V{3, -2});
    CHECK(derivative(V{1, 1, 1, 1}) == V{0, 0, 0});
    CHECK(derivative(V{4}).empty());
    CHECK(code_of([] { derivative(V{}); }) == ErrorCode::EmptySequence);

    // derivative of a prefix sum gives back the tail of the increments.
    gen::Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const auto inc = gen::dyadic_sequence(rng, gen::length(rng, 1, 60));
        V cum(inc.size());
        std::partial_sum(inc.begin(), inc.end(), cum.begin());
        CHECK(derivative(cum) == V(inc.begin() + 1, inc.end()));
    }
}

TEST_CASE("dac examples and oracle") {
    CHECK(dac(V{0, 3}, V{0, 4}, V{0, 0}) == V{5});
    CHECK(dac(V{2, 2, 2}, V{-1, -1, -1}, V{7, 7, 7}) == V{0, 0});
    CHECK(code_of([] { dac(V{1, 2}, V{1}, V{1, 2}); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] { dac(V{}, V{}, V{}); }) == ErrorCode::EmptySequence);

    gen::Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        const auto x = gen::sequence(rng, 50), y = gen::sequence(rng, 50), z = gen::sequence(rng, 50);
        const auto got = dac(x, y, z);
        const auto want = oracle::dac(x, y, z);
        REQUIRE(got.size() == 49);
        for (std::size_t k = 0; k < got.size(); ++k) {
            CHECK(got[k] >= 0.0);
            CHECK(rel_close(got[k], want[k], 1e-12));
        }
    }
}

TEST_CASE("stats examples and oracle") {
    CHECK(stats(V{1, 2, 3}) == SeqStats{3, 1, 2, 14});
    CHECK(stats(V{-1, -1}) == SeqStats{-1, -1, -1, 2});
    CHECK(code_of([] { stats(V{}); }) == ErrorCode::EmptySequence);

    gen::Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto v = gen::sequence(rng, 100, 1e3);
        const auto s = stats(v);
        const auto o = oracle::stats(v);
        CHECK(s.max == o.max);
        CHECK(s.min == o.min);
        CHECK(rel_close(s.mean, o.mean, 1e-12));
        CHECK(rel_close(s.energy, o.energy, 1e-12));
        CHECK(s.min <= s.mean);
        CHECK(s.mean <= s.max);
    }
    // Constant input keeps min <= mean <= max despite rounding.
    const auto c = stats(V(37, 0.1));
    CHECK(c.mean >= c.min);
    CHECK(c.mean <= c.max);
}

TEST_CASE("fft_features examples and naive DFT oracle") {
    CHECK(fft_features(V{2, 2, 2, 2}) == SeqStats{8, 0, 2, 64});
    const auto nyq = fft_features(V{1, -1, 1, -1});
    CHECK(nyq.max == doctest::Approx(4));
    CHECK(nyq.min == doctest::Approx(0));
    CHECK(nyq.mean == doctest::Approx(1));
    CHECK(nyq.energy == doctest::Approx(16));
    CHECK(code_of([] { fft_features(V{1}); }) == ErrorCode::TooShort);

    gen::Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const auto n = i == 0 ? 37 : gen::length(rng, 2, 120);
        const auto v = gen::sequence(rng, n);
        const auto s = fft_features(v);
        const auto o = oracle::stats(oracle::dft_magnitudes(v));
        CHECK(rel_close(s.max, o.max, 1e-9));
        CHECK(std::abs(s.min - o.min) <= 1e-9 * std::max(1.0, o.max));
        CHECK(rel_close(s.mean, o.mean, 1e-9));
        CHECK(rel_close(s.energy, o.energy, 1e-9));
    }
}

TEST_CASE("energy_interval_length examples, oracle and monotonicity") {
    CHECK(energy_interval_length(V{0, 0, 1, 0, 0}) == 1);
    CHECK(energy_interval_length(V{1, 1, 1, 1, 1}) == 5);
    CHECK(energy_interval_length(V{0, 2, 0, 0}) == 1);
    // CoE = 0.5 exactly: ties round to index 0, window [0,1] clipped to length 3.
    CHECK(energy_interval_length(V{1, 1}) == 3);
    CHECK(code_of([] { energy_interval_length(V{0, 0}); }) == ErrorCode::ZeroEnergy);
    CHECK(code_of([] { energy_interval_length(V{}); }) == ErrorCode::EmptySequence);
    CHECK(code_of([] { energy_interval_length(V{1}, 0.0); }) == ErrorCode::InvalidSpec);
    CHECK(code_of([] { energy_interval_length(V{1}, 1.5); }) == ErrorCode::InvalidSpec);

    gen::Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        auto v = gen::sequence(rng, gen::length(rng, 1, 80));
        // Sparse spikes make off-centre energy and clipping common.
        if (i % 3 == 0) {
            for (auto& x : v) x = (rng() % 4 == 0) ? x : 0.0;
            v[rng() % v.size()] = 1.0;
        }
        CHECK(energy_interval_length(v) == oracle::energy_interval(v));
        std::size_t prev = 0;
        for (double f : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            const auto len = energy_interval_length(v, f);
            CHECK(len == oracle::energy_interval(v, f));
            CHECK(len >= prev);
            prev = len;
        }
    }
}

TEST_CASE("layouts have the documented shape") {
    const auto& p1 = FeatureLayout::of(Phase::Phase1);
    const auto& p2 = FeatureLayout::of(Phase::Phase2);
    CHECK(p1.names.size() == 164);
    CHECK(p2.names.size() == 150);
    using S = std::vector<std::pair<Section, std::size_t>>;
    CHECK(p1.sections == S{{Section::TimeRaw, 48}, {Section::TimeDerivative, 48}, {Section::TimeDac, 6},
                           {Section::Frequency, 48}, {Section::EnergyInterval, 14}});
    CHECK(p2.sections == S{{Section::TimeRaw, 48}, {Section::TimeDerivative, 48}, {Section::TimeDac, 6},
                           {Section::Frequency, 48}});
    CHECK(std::set<std::string>(p1.names.begin(), p1.names.end()).size() == 164);
    CHECK(std::equal(p2.names.begin(), p2.names.end(), p1.names.begin()));
    CHECK(p1.names.front() == "raw.OX.max");
    CHECK(p1.names[96] == "dac.acc.max");
    CHECK(p1.names.back() == "eil.dac.grav");
}

TEST_CASE("extract matches a hand-assembled vector") {
    gen::Rng rng(6);
    for (int i = 0; i < 20; ++i) {
        const auto t = gen::trace(rng);
        const auto fv = extract(t, Phase::Phase1);
        REQUIRE(fv.values.size() == 164);
        V want;
        std::array<V, 12> shifted;
        for (std::size_t c = 0; c < 12; ++c) {
            const auto& s = t.sequences[c];
            for (double x : s) shifted[c].push_back(x - s[0]);
        }
        const auto push = [&](const oracle::Stats& s) { want.insert(want.end(), {s.max, s.min, s.mean, s.energy}); };
        for (const auto& s : shifted) push(oracle::stats(s));
        for (const auto& s : shifted) push(oracle::stats(oracle::derivative(s)));
        const auto acc = oracle::dac(shifted[3], shifted[4], shifted[5]);
        const auto grav = oracle::dac(shifted[6], shifted[7], shifted[8]);
        for (const auto* d : {&acc, &grav}) {
            const auto s = oracle::stats(*d);
            want.insert(want.end(), {s.max, s.min, s.mean});
        }
        for (const auto& s : shifted) push(oracle::stats(oracle::dft_magnitudes(s)));
        for (std::size_t c = 3; c < 9; ++c) want.push_back(double(oracle::energy_interval(shifted[c])));
        for (std::size_t c = 3; c < 9; ++c) want.push_back(double(oracle::energy_interval(oracle::derivative(shifted[c]))));
        want.push_back(double(oracle::energy_interval(acc)));
        want.push_back(double(oracle::energy_interval(grav)));
        REQUIRE(want.size() == 164);
        for (std::size_t k = 0; k < 164; ++k) {
            INFO("feature " << FeatureLayout::of(Phase::Phase1).names[k]);
            CHECK(rel_close(fv.values[k], want[k], 1e-9));
        }
        const auto fv2 = extract(t, Phase::Phase2);
        CHECK(fv2.values == V(fv.values.begin(), fv.values.begin() + 150));
    }
}

TEST_CASE("extract of constant sequences is all zeros") {
    LabeledTrace t;
    for (std::size_t c = 0; c < 12; ++c) t.sequences[c] = V(10, 3.25 + double(c));
    const auto fv = extract(t, Phase::Phase1);
    for (double v : fv.values) CHECK(v == 0.0);
}

TEST_CASE("extract is pure and baseline invariant") {
    gen::Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        const auto t = gen::trace(rng, true);
        auto shifted = t;
        for (auto& s : shifted.sequences) {
            const double offset = std::ldexp(double(int(rng() % 4001) - 2000), -10);
            for (auto& x : s) x += offset;
        }
        CHECK(extract(t, Phase::Phase1).values == extract(t, Phase::Phase1).values);
        CHECK(extract(shifted, Phase::Phase1).values == extract(t, Phase::Phase1).values);
    }
}

TEST_CASE("extract errors") {
    gen::Rng rng(9);
    auto t = gen::trace(rng);
    for (Channel ch : channels_of(SensorGroup::Gravity)) t.seq(ch) = V{1.0};
    CHECK(code_of([&] { extract(t, Phase::Phase1); }) == ErrorCode::SequenceTooShort);
    t.seq(Channel::MGX) = V{};
    CHECK(code_of([&] { extract(t, Phase::Phase1); }) == ErrorCode::InvalidTrace);
}

TEST_CASE("matrix file round-trips") {
    gen::Rng rng(10);
    std::vector<LabeledTrace> traces;
    for (int i = 0; i < 12; ++i) traces.push_back(gen::trace(rng));
    const auto m = build_matrix(traces, Phase::Phase2);
    CHECK(m.size() == 12);
    CHECK(m.dim() == 150);
    CHECK(m.labels[3] == traces[3].label.str());
    const auto path = std::filesystem::temp_directory_path() / ("touchsig_matrix_" + std::to_string(::getpid()));
    write_matrix(path, m);
    const auto back = read_matrix(path);
    CHECK(back.phase == m.phase);
    CHECK(back.layout == m.layout);
    CHECK(back.labels == m.labels);
    CHECK(back.rows == m.rows);
    std::filesystem::remove(path);

    const auto sub = m.subset(std::vector<std::size_t>{4, 1});
    CHECK(sub.rows[0] == m.rows[4]);
    CHECK(sub.labels[1] == m.labels[1]);
    CHECK(layout_hash(m.layout) != layout_hash(FeatureLayout::of(Phase::Phase1).names));
}
