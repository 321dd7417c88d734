#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace touchsig {

// Wire channel vocabulary of the in-browser listener. Note OX carries the
// orientation *gamma* angle and OZ carries *alpha*, exactly as emitted.
enum class Channel {
    OX,
    OY,
    OZ,
    MX,
    MY,
    MZ,
    MGX,
    MGY,
    MGZ,
    rAlpha,
    rBeta,
    rGama,
    interval,
};

inline constexpr std::size_t kChannelCount = 13;
inline constexpr std::size_t kSensorChannelCount = 12;

inline constexpr std::array<Channel, kSensorChannelCount> kSensorChannels = {
    Channel::OX,  Channel::OY,  Channel::OZ,  Channel::MX,     Channel::MY,    Channel::MZ,
    Channel::MGX, Channel::MGY, Channel::MGZ, Channel::rAlpha, Channel::rBeta, Channel::rGama,
};

/// Readings arrive in triples per DOM event; each group shares one length.
enum class SensorGroup { Orientation, Acceleration, Gravity, Rotation };

inline constexpr std::array<SensorGroup, 4> kSensorGroups = {
    SensorGroup::Orientation, SensorGroup::Acceleration, SensorGroup::Gravity, SensorGroup::Rotation};

std::string_view to_string(Channel ch) noexcept;
std::optional<Channel> parse_channel(std::string_view name) noexcept;
SensorGroup group_of(Channel ch);
std::array<Channel, 3> channels_of(SensorGroup group) noexcept;
std::string_view to_string(SensorGroup group) noexcept;

enum class TouchAction { Click, Hold, ScrollUp, ScrollDown, ScrollRight, ScrollLeft, ZoomIn, ZoomOut };

inline constexpr std::array<TouchAction, 8> kTouchActions = {
    TouchAction::Click,      TouchAction::Hold,       TouchAction::ScrollUp, TouchAction::ScrollDown,
    TouchAction::ScrollRight, TouchAction::ScrollLeft, TouchAction::ZoomIn,   TouchAction::ZoomOut,
};

std::string_view to_string(TouchAction a) noexcept;
std::optional<TouchAction> parse_touch_action(std::string_view name) noexcept;
bool is_scroll(TouchAction a) noexcept;

struct Digit {
    int value = 0;  // 0..9
    friend bool operator==(Digit, Digit) = default;
};

/// Either a touch action or a PIN digit. Canonical text form is `action:<name>`
/// or `digit:<0-9>`, used on the wire, in datasets and in feature matrices.
class Label {
public:
    Label() = default;
    Label(TouchAction a) : value_(a) {}
    Label(Digit d);

    bool is_action() const noexcept { return std::holds_alternative<TouchAction>(value_); }
    bool is_digit() const noexcept { return std::holds_alternative<Digit>(value_); }
    TouchAction action() const;
    Digit digit() const;

    std::string str() const;
    static Label parse(std::string_view text);  // throws Error(MalformedRecord)

    friend bool operator==(const Label&, const Label&) = default;

private:
    std::variant<TouchAction, Digit> value_{TouchAction::Click};
};

enum class HandMode { OneHand, TwoHand, Unknown };

std::string_view to_string(HandMode h) noexcept;
HandMode parse_hand_mode(std::string_view text);  // "one" | "two" | "unknown"

struct TraceMeta {
    std::string user_id;
    std::string device;
    std::string browser;
    HandMode hand_mode = HandMode::Unknown;
    double collected_at = 0.0;  // ms since session start of the opening marker

    friend bool operator==(const TraceMeta&, const TraceMeta&) = default;
};

using Sequence = std::vector<double>;

/// One segmented, labeled recording: the 12 sensor sequences plus the
/// reported reading interval.
struct LabeledTrace {
    std::array<Sequence, kSensorChannelCount> sequences;
    double interval_ms = 0.0;
    Label label;
    TraceMeta meta;

    const Sequence& seq(Channel ch) const;
    Sequence& seq(Channel ch);

    friend bool operator==(const LabeledTrace&, const LabeledTrace&) = default;
};

/// Throws Error(InvalidTrace) when a sequence is empty or non-finite, or when
/// the three sequences of a sensor group differ in length.
void validate(const LabeledTrace& trace);

}  // namespace touchsig
