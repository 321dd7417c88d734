#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "touchsig/model.hpp"

namespace touchsig {

struct KeypadCell {
    int row = 0;
    int col = 0;
};

/// Browser sampling rates and sensor noise of one device/browser pair, plus
/// its on-screen keypad geometry (4 rows; digits 1-9 in a 3x3 block, 0 below 8).
struct DeviceProfile {
    std::string name;
    double motion_hz = 0.0;
    double orientation_hz = 0.0;
    std::array<double, 4> noise_sigma{};  // indexed by SensorGroup
    int keypad_rows = 4;
    int keypad_cols = 3;
    std::array<KeypadCell, 10> keypad{};  // indexed by digit

    static DeviceProfile iphone5();  // Safari, 20 Hz motion / 20 Hz orientation
    static DeviceProfile nexus5();   // Chrome, 60 Hz motion / 44 Hz orientation
    static DeviceProfile by_name(std::string_view name);
};

enum class ClassFamily { Actions, Digits };

struct GenSpec {
    std::vector<Label> classes;
    int per_class = 10;
    double separation = 1.0;  // signal amplitude relative to the noise floor
    std::uint64_t seed = 0;
    DeviceProfile profile = DeviceProfile::nexus5();
    double action_duration_ms = 1000.0;
    double digit_duration_ms = 750.0;

    static GenSpec for_family(ClassFamily family);  // all 8 actions or all 10 digits

    /// Throws Error(InvalidSpec) on an empty class set, per_class < 1,
    /// separation <= 0, non-positive rates or durations.
    void validate() const;
};

/// Number of readings a window of `duration_ms` yields at `hz` (at least 2).
std::size_t samples_for(double hz, double duration_ms);

/// Deterministic in (spec.seed, label, draw_index). Throws Error(LabelNotInSpec).
LabeledTrace gen_trace(const Label& label, const GenSpec& spec, std::uint64_t draw_index);

/// Exactly spec.per_class traces per class, shuffled by spec.seed.
std::vector<LabeledTrace> gen_dataset(const GenSpec& spec);

}  // namespace touchsig
