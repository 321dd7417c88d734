#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "touchsig/model.hpp"

namespace touchsig {

enum class Phase { Phase1, Phase2 };

std::string_view to_string(Phase p) noexcept;
Phase parse_phase(std::string_view text);  // "1" | "2"

struct SeqStats {
    double max = 0.0;
    double min = 0.0;
    double mean = 0.0;
    double energy = 0.0;  // sum of squares

    friend bool operator==(const SeqStats&, const SeqStats&) = default;
};

/// Subtracts the first value from every value; output[0] == 0.
Sequence baseline_shift(std::span<const double> seq);

/// First difference d_i = v_i - v_{i-1}; one element shorter than the input.
std::vector<double> derivative(std::span<const double> seq);

/// Device acceleration change: per-step Euclidean norm of the consecutive
/// differences of an (x, y, z) triple. One element shorter than the inputs.
std::vector<double> dac(std::span<const double> x, std::span<const double> y, std::span<const double> z);

SeqStats stats(std::span<const double> seq);

/// Max/min/mean/energy of the magnitudes of all n DFT bins of `seq` (no
/// padding, no windowing). Requires at least two samples.
SeqStats fft_features(std::span<const double> seq);

/// Length (2h+1) of the shortest window centred on the centre of energy that
/// holds at least `fraction` of the total energy. The centre is the
/// energy-weighted mean index rounded to the nearest index, ties to the lower
/// one; windows are clipped at the sequence ends.
std::size_t energy_interval_length(std::span<const double> seq, double fraction = 0.7);

enum class Section { TimeRaw, TimeDerivative, TimeDac, Frequency, EnergyInterval };

/// Feature names in emission order. Stable per phase: changing names or
/// order is a breaking change for stored matrices and models.
struct FeatureLayout {
    Phase phase;
    std::vector<std::string> names;
    std::vector<std::pair<Section, std::size_t>> sections;  // (section, size) in order

    static const FeatureLayout& of(Phase phase);
};

inline constexpr std::size_t kPhase1Features = 164;
inline constexpr std::size_t kPhase2Features = 150;

struct FeatureVector {
    Phase phase = Phase::Phase1;
    std::vector<double> values;

    const std::vector<std::string>& layout() const { return FeatureLayout::of(phase).names; }
};

/// Baseline-shifts all 12 sequences and emits the phase's feature layout.
/// Throws Error(SequenceTooShort) if any sequence has fewer than 2 samples.
FeatureVector extract(const LabeledTrace& trace, Phase phase);

}  // namespace touchsig
