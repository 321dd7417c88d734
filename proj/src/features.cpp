#include "touchsig/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <span>
#include <cmath>
#include <complex>
#include <mutex>

#include "touchsig/error.hpp"

namespace touchsig {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

constexpr std::array<std::string_view, 4> kStatNames = {"max", "min", "mean", "energy"};

constexpr std::array<Channel, 6> kAccelAxes = {Channel::MX, Channel::MY, Channel::MZ,
                                               Channel::MGX, Channel::MGY, Channel::MGZ};

void push_stats(std::vector<double>& out, const SeqStats& s) {
    out.push_back(s.max);
    out.push_back(s.min);
    out.push_back(s.mean);
    out.push_back(s.energy);
}

// A 1-sample source has an empty derivative/DAC; its statistics are zeros so
// the layout length never changes.
SeqStats stats_or_zero(std::span<const double> seq) { return seq.empty() ? SeqStats{} : stats(seq); }

// A silent sequence has no centre of energy; its interval feature is 0.
std::size_t interval_or_zero(std::span<const double> seq) {
    if (seq.empty()) return 0;
    try {
        return energy_interval_length(seq);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroEnergy) throw;
        return 0;
    }
}

FeatureLayout build_layout(Phase phase) {
    FeatureLayout layout{phase, {}, {}};
    auto& n = layout.names;
    for (Channel ch : kSensorChannels) {
        for (auto s : kStatNames) n.push_back("raw." + std::string(to_string(ch)) + "." + std::string(s));
    }
    layout.sections.emplace_back(Section::TimeRaw, n.size());
    for (Channel ch : kSensorChannels) {
        for (auto s : kStatNames) n.push_back("diff." + std::string(to_string(ch)) + "." + std::string(s));
    }
    layout.sections.emplace_back(Section::TimeDerivative, 48);
    for (std::string_view src : {"acc", "grav"}) {
        for (auto s : std::span(kStatNames).first<3>()) n.push_back("dac." + std::string(src) + "." + std::string(s));
    }
    layout.sections.emplace_back(Section::TimeDac, 6);
    for (Channel ch : kSensorChannels) {
        for (auto s : kStatNames) n.push_back("fft." + std::string(to_string(ch)) + "." + std::string(s));
    }
    layout.sections.emplace_back(Section::Frequency, 48);
    if (phase == Phase::Phase1) {
        for (Channel ch : kAccelAxes) n.push_back("eil.raw." + std::string(to_string(ch)));
        for (Channel ch : kAccelAxes) n.push_back("eil.diff." + std::string(to_string(ch)));
        n.push_back("eil.dac.acc");
        n.push_back("eil.dac.grav");
        layout.sections.emplace_back(Section::EnergyInterval, 14);
    }
    return layout;
}

}  // namespace

std::string_view to_string(Phase p) noexcept { return p == Phase::Phase1 ? "1" : "2"; }

Phase parse_phase(std::string_view text) {
    if (text == "1") return Phase::Phase1;
    if (text == "2") return Phase::Phase2;
    throw Error(ErrorCode::UsageError, "phase must be 1 or 2");
}

Sequence baseline_shift(std::span<const double> seq) {
    if (seq.empty()) throw Error(ErrorCode::EmptySequence, "baseline_shift");
    Sequence out(seq.size());
    const double first = seq[0];
    for (std::size_t i = 0; i < seq.size(); ++i) out[i] = seq[i] - first;
    return out;
}

std::vector<double> derivative(std::span<const double> seq) {
    if (seq.empty()) throw Error(ErrorCode::EmptySequence, "derivative");
    std::vector<double> out;
    out.reserve(seq.size() - 1);
    for (std::size_t i = 1; i < seq.size(); ++i) out.push_back(seq[i] - seq[i - 1]);
    return out;
}

std::vector<double> dac(std::span<const double> x, std::span<const double> y, std::span<const double> z) {
    if (x.size() != y.size() || x.size() != z.size()) throw Error(ErrorCode::LengthMismatch, "dac");
    if (x.empty()) throw Error(ErrorCode::EmptySequence, "dac");
    std::vector<double> out;
    out.reserve(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double dx = x[i] - x[i - 1];
        const double dy = y[i] - y[i - 1];
        const double dz = z[i] - z[i - 1];
        out.push_back(std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    return out;
}

SeqStats stats(std::span<const double> seq) {
    if (seq.empty()) throw Error(ErrorCode::EmptySequence, "stats");
    SeqStats s{seq[0], seq[0], 0.0, 0.0};
    double sum = 0.0;
    for (double v : seq) {
        s.max = std::max(s.max, v);
        s.min = std::min(s.min, v);
        sum += v;
        s.energy += v * v;
    }
    // Rounding can push the mean a hair outside [min, max] for constant input.
    s.mean = std::clamp(sum / static_cast<double>(seq.size()), s.min, s.max);
    return s;
}

SeqStats fft_features(std::span<const double> seq) {
    const auto n = seq.size();
    if (n < 2) throw Error(ErrorCode::TooShort, "fft_features needs at least 2 samples");

    std::vector<double> in(seq.begin(), seq.end());
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }

    // Real input: bin k and bin n-k share a magnitude.
    std::vector<double> mags(n);
    for (std::size_t k = 0; k < n; ++k) mags[k] = std::abs(out[k <= n / 2 ? k : n - k]);
    return stats(mags);
}

std::size_t energy_interval_length(std::span<const double> seq, double fraction) {
    if (seq.empty()) throw Error(ErrorCode::EmptySequence, "energy_interval_length");
    if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::InvalidSpec, "fraction must lie in (0, 1]");

    const auto n = seq.size();
    double total = 0.0;
    double weighted = 0.0;
    std::size_t first = n, last = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = seq[i] * seq[i];
        total += e;
        weighted += static_cast<double>(i) * e;
        if (e > 0.0) {
            first = std::min(first, i);
            last = i;
        }
    }
    if (!(total > 0.0)) throw Error(ErrorCode::ZeroEnergy, "energy_interval_length");

    const double coe = weighted / total;
    auto centre = static_cast<std::size_t>(std::ceil(coe - 0.5));
    centre = std::min(centre, n - 1);

    const double target = fraction * total;
    double window = seq[centre] * seq[centre];
    for (std::size_t h = 0;; ++h) {
        if (h > 0) {
            if (h <= centre) window += seq[centre - h] * seq[centre - h];
            if (centre + h < n) window += seq[centre + h] * seq[centre + h];
        }
        // Holding every non-zero sample is full energy, whatever the rounding says.
        const bool covers_all = centre - std::min(h, centre) <= first && centre + h >= last;
        if (window >= target || covers_all) return 2 * h + 1;
    }
}

const FeatureLayout& FeatureLayout::of(Phase phase) {
    static const FeatureLayout phase1 = build_layout(Phase::Phase1);
    static const FeatureLayout phase2 = build_layout(Phase::Phase2);
    return phase == Phase::Phase1 ? phase1 : phase2;
}

FeatureVector extract(const LabeledTrace& trace, Phase phase) {
    validate(trace);
    std::array<Sequence, kSensorChannelCount> shifted;
    std::array<std::vector<double>, kSensorChannelCount> diffs;
    for (std::size_t i = 0; i < kSensorChannelCount; ++i) {
        const auto& s = trace.sequences[i];
        if (s.size() < 2) {
            throw Error(ErrorCode::SequenceTooShort,
                        std::string(to_string(kSensorChannels[i])) + " has " + std::to_string(s.size()) + " sample(s)");
        }
        shifted[i] = baseline_shift(s);
        diffs[i] = derivative(shifted[i]);
    }
    const auto at = [&](Channel ch) -> const Sequence& { return shifted[static_cast<std::size_t>(ch)]; };
    const auto dac_acc = dac(at(Channel::MX), at(Channel::MY), at(Channel::MZ));
    const auto dac_grav = dac(at(Channel::MGX), at(Channel::MGY), at(Channel::MGZ));

    FeatureVector fv{phase, {}};
    auto& v = fv.values;
    v.reserve(phase == Phase::Phase1 ? kPhase1Features : kPhase2Features);

    for (const auto& s : shifted) push_stats(v, stats(s));
    for (const auto& d : diffs) push_stats(v, stats_or_zero(d));
    for (const auto* d : {&dac_acc, &dac_grav}) {
        const auto s = stats_or_zero(*d);
        v.push_back(s.max);
        v.push_back(s.min);
        v.push_back(s.mean);
    }
    for (const auto& s : shifted) push_stats(v, fft_features(s));

    if (phase == Phase::Phase1) {
        for (Channel ch : kAccelAxes) v.push_back(static_cast<double>(interval_or_zero(at(ch))));
        for (Channel ch : kAccelAxes) {
            v.push_back(static_cast<double>(interval_or_zero(diffs[static_cast<std::size_t>(ch)])));
        }
        v.push_back(static_cast<double>(interval_or_zero(dac_acc)));
        v.push_back(static_cast<double>(interval_or_zero(dac_grav)));
    }
    return fv;
}

}  // namespace touchsig
