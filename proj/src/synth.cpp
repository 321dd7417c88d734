#include "touchsig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "touchsig/error.hpp"

namespace touchsig {

namespace {

// Signature waveforms are written in units of the group's noise sigma and
// scaled by `separation`, so separation 1 means roughly unit SNR.
using ChannelValues = std::array<double, kSensorChannelCount>;

double pulse(double u, double centre, double width) {
    const double z = (u - centre) / width;
    return std::exp(-0.5 * z * z);
}

// Derivative-shaped bipolar bump, peak magnitude 1.
double bipolar(double u, double centre, double width) {
    const double z = (u - centre) / width;
    return z * std::exp(0.5 - 0.5 * z * z);
}

double smoothstep(double u, double lo, double hi) {
    const double t = std::clamp((u - lo) / (hi - lo), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

double plateau(double u, double lo, double hi, double edge) {
    return smoothstep(u, lo - edge, lo + edge) * (1.0 - smoothstep(u, hi - edge, hi + edge));
}

void set(ChannelValues& v, Channel ch, double value) { v[static_cast<std::size_t>(ch)] += value; }

ChannelValues action_signature(TouchAction a, double u) {
    // Features are unnormalised, so classes must differ in per-channel energy,
    // not only in sign or time order. Click/hold and the two zooms share
    // channels and differ by modest loadings; scroll directions differ more.
    ChannelValues v{};
    switch (a) {
        case TouchAction::Click: {
            const double p = pulse(u, 0.5, 0.06);
            set(v, Channel::MZ, -1.5 * p);
            set(v, Channel::MGZ, -1.5 * p);
            set(v, Channel::OY, 1.2 * p);
            set(v, Channel::rBeta, 2.0 * bipolar(u, 0.5, 0.06));
            break;
        }
        case TouchAction::Hold: {
            const double p = plateau(u, 0.3, 0.7, 0.05);
            set(v, Channel::MZ, -1.0 * p);
            set(v, Channel::MGZ, -1.0 * p);
            set(v, Channel::OY, 0.9 * p);
            set(v, Channel::rBeta, 1.8 * (bipolar(u, 0.3, 0.05) - bipolar(u, 0.7, 0.05)));
            break;
        }
        case TouchAction::ScrollUp:
        case TouchAction::ScrollDown:
        case TouchAction::ScrollRight:
        case TouchAction::ScrollLeft: {
            const bool vertical = a == TouchAction::ScrollUp || a == TouchAction::ScrollDown;
            const bool forward = a == TouchAction::ScrollUp || a == TouchAction::ScrollRight;
            const double sign = forward ? 1.0 : -1.0;
            // A thumb pushing away tilts more and turns less than one pulling back.
            const double tilt = forward ? 3.5 : 1.5;
            const double turn = forward ? 3.5 : 6.0;
            const double ramp = smoothstep(u, 0.2, 0.8);
            set(v, vertical ? Channel::OY : Channel::OX, sign * tilt * ramp);
            set(v, vertical ? Channel::MY : Channel::MX, sign * 1.5 * bipolar(u, 0.5, 0.15));
            set(v, vertical ? Channel::MGY : Channel::MGX, sign * 1.5 * ramp);
            set(v, vertical ? Channel::rBeta : Channel::rGama, sign * turn * pulse(u, 0.5, 0.15));
            set(v, Channel::MZ, -0.8 * plateau(u, 0.2, 0.8, 0.05));
            break;
        }
        case TouchAction::ZoomIn:
        case TouchAction::ZoomOut: {
            // Two fingers pinch: a pulse pair of opposite polarity; zoom-out
            // plays the pair in reverse order and twists less.
            const bool in = a == TouchAction::ZoomIn;
            const double first = in ? 1.0 : -1.0;
            const double pair = first * (pulse(u, 0.35, 0.08) - pulse(u, 0.65, 0.08));
            set(v, Channel::MZ, 1.2 * pair);
            set(v, Channel::MGZ, 1.2 * pair);
            set(v, Channel::rAlpha, (in ? 2.4 : 1.9) * pair);
            set(v, Channel::OZ, (in ? 0.9 : 1.4) * pair);
            break;
        }
    }
    return v;
}

ChannelValues digit_signature(const DeviceProfile& profile, Digit d, double u) {
    ChannelValues v{};
    const auto cell = profile.keypad[static_cast<std::size_t>(d.value)];
    // Offset of the key from the keypad centre drives tilt toward that corner.
    const double ry = cell.row - (profile.keypad_rows - 1) / 2.0;
    const double cx = cell.col - (profile.keypad_cols - 1) / 2.0;
    const double p = pulse(u, 0.5, 0.1);
    const double b = bipolar(u, 0.5, 0.1);
    set(v, Channel::OY, 1.0 * ry * p);
    set(v, Channel::OX, 1.0 * cx * p);
    set(v, Channel::MZ, -1.5 * p);
    set(v, Channel::MGZ, -1.5 * p);
    set(v, Channel::MY, 0.8 * ry * p);
    set(v, Channel::MX, 0.8 * cx * p);
    set(v, Channel::MGY, 0.8 * ry * p);
    set(v, Channel::MGX, 0.8 * cx * p);
    set(v, Channel::rBeta, 1.5 * ry * b);
    set(v, Channel::rGama, 1.5 * cx * b);
    return v;
}

std::uint64_t label_code(const Label& label) {
    return label.is_action() ? static_cast<std::uint64_t>(label.action()) : 100 + label.digit().value;
}

}  // namespace

DeviceProfile DeviceProfile::iphone5() {
    DeviceProfile p;
    p.name = "iphone5";
    p.motion_hz = 20.0;
    p.orientation_hz = 20.0;
    p.noise_sigma = {0.5, 0.05, 0.05, 1.0};
    p.keypad_cols = 3;
    p.keypad = {{{3, 1}, {0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}, {2, 0}, {2, 1}, {2, 2}}};
    return p;
}

DeviceProfile DeviceProfile::nexus5() {
    DeviceProfile p;
    p.name = "nexus5";
    p.motion_hz = 60.0;
    p.orientation_hz = 44.0;
    p.noise_sigma = {0.5, 0.05, 0.05, 1.0};
    p.keypad_cols = 4;  // the fourth column holds '-', '.', 'X' and '>'
    p.keypad = {{{3, 1}, {0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}, {2, 0}, {2, 1}, {2, 2}}};
    return p;
}

DeviceProfile DeviceProfile::by_name(std::string_view name) {
    if (name == "iphone5") return iphone5();
    if (name == "nexus5") return nexus5();
    throw Error(ErrorCode::InvalidSpec, "unknown device profile '" + std::string(name) + "'");
}

GenSpec GenSpec::for_family(ClassFamily family) {
    GenSpec spec;
    if (family == ClassFamily::Actions) {
        for (auto a : kTouchActions) spec.classes.emplace_back(a);
    } else {
        for (int d = 0; d < 10; ++d) spec.classes.emplace_back(Digit{d});
    }
    return spec;
}

void GenSpec::validate() const {
    if (classes.empty()) throw Error(ErrorCode::InvalidSpec, "class set is empty");
    if (per_class < 1) throw Error(ErrorCode::InvalidSpec, "per-class count must be >= 1");
    if (!(separation > 0.0) || !std::isfinite(separation)) {
        throw Error(ErrorCode::InvalidSpec, "separation must be a positive real");
    }
    if (!(profile.motion_hz > 0.0) || !(profile.orientation_hz > 0.0)) {
        throw Error(ErrorCode::InvalidSpec, "sampling rates must be positive");
    }
    if (!(action_duration_ms > 0.0) || !(digit_duration_ms > 0.0)) {
        throw Error(ErrorCode::InvalidSpec, "durations must be positive");
    }
    for (double s : profile.noise_sigma) {
        if (!(s >= 0.0)) throw Error(ErrorCode::InvalidSpec, "noise sigma must be non-negative");
    }
}

std::size_t samples_for(double hz, double duration_ms) {
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(hz * duration_ms / 1000.0)));
}

LabeledTrace gen_trace(const Label& label, const GenSpec& spec, std::uint64_t draw_index) {
    spec.validate();
    if (std::find(spec.classes.begin(), spec.classes.end(), label) == spec.classes.end()) {
        throw Error(ErrorCode::LabelNotInSpec, label.str());
    }

    const auto code = label_code(label);
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(code), static_cast<std::uint32_t>(draw_index),
                      static_cast<std::uint32_t>(draw_index >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const auto& profile = spec.profile;
    const double duration = label.is_action() ? spec.action_duration_ms : spec.digit_duration_ms;
    const auto n_motion = samples_for(profile.motion_hz, duration);
    const auto n_orient = samples_for(profile.orientation_hz, duration);

    // Resting device pose; removed again by baseline shifting.
    ChannelValues rest{};
    std::uniform_real_distribution<double> alpha(0.0, 360.0), beta(-10.0, 40.0), gamma(-20.0, 20.0);
    std::uniform_real_distribution<double> gx(-1.0, 1.0), gy(2.0, 6.0), gz(7.0, 9.5);
    rest[static_cast<std::size_t>(Channel::OX)] = gamma(rng);
    rest[static_cast<std::size_t>(Channel::OY)] = beta(rng);
    rest[static_cast<std::size_t>(Channel::OZ)] = alpha(rng);
    rest[static_cast<std::size_t>(Channel::MGX)] = gx(rng);
    rest[static_cast<std::size_t>(Channel::MGY)] = gy(rng);
    rest[static_cast<std::size_t>(Channel::MGZ)] = gz(rng);

    LabeledTrace trace;
    trace.label = label;
    for (Channel ch : kSensorChannels) {
        const auto group = group_of(ch);
        const auto n = group == SensorGroup::Orientation ? n_orient : n_motion;
        const double sigma = profile.noise_sigma[static_cast<std::size_t>(group)];
        auto& out = trace.seq(ch);
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(n - 1);
            const auto sig = label.is_action() ? action_signature(label.action(), u)
                                               : digit_signature(profile, label.digit(), u);
            const auto c = static_cast<std::size_t>(ch);
            out[i] = rest[c] + spec.separation * sigma * sig[c] + sigma * gauss(rng);
        }
    }
    trace.interval_ms = 1000.0 / profile.motion_hz;
    trace.meta.user_id = "synthetic";
    trace.meta.device = profile.name;
    trace.meta.browser = "synthetic";
    trace.meta.hand_mode = HandMode::Unknown;
    trace.meta.collected_at = static_cast<double>(draw_index);
    return trace;
}

std::vector<LabeledTrace> gen_dataset(const GenSpec& spec) {
    spec.validate();
    std::vector<LabeledTrace> traces;
    traces.reserve(spec.classes.size() * static_cast<std::size_t>(spec.per_class));
    for (const auto& label : spec.classes) {
        for (int d = 0; d < spec.per_class; ++d) traces.push_back(gen_trace(label, spec, static_cast<std::uint64_t>(d)));
    }
    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(traces.begin(), traces.end(), rng);
    return traces;
}

}  // namespace touchsig
