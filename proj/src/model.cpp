#include "touchsig/model.hpp"

#include <cmath>

#include "touchsig/error.hpp"

namespace touchsig {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::UnknownChannel: return "UnknownChannel";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::NoOpenSegment: return "NoOpenSegment";
        case ErrorCode::EmptySegment: return "EmptySegment";
        case ErrorCode::StorageFailure: return "StorageFailure";
        case ErrorCode::BindFailure: return "BindFailure";
        case ErrorCode::LabelNotInSpec: return "LabelNotInSpec";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::EmptySequence: return "EmptySequence";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::ZeroEnergy: return "ZeroEnergy";
        case ErrorCode::SequenceTooShort: return "SequenceTooShort";
        case ErrorCode::InvalidTrace: return "InvalidTrace";
        case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorCode::InconsistentDimensions: return "InconsistentDimensions";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::BadDimensions: return "BadDimensions";
        case ErrorCode::DegenerateSplit: return "DegenerateSplit";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::ModelNotFound: return "ModelNotFound";
        case ErrorCode::BadModelFile: return "BadModelFile";
        case ErrorCode::UsageError: return "UsageError";
    }
    return "Unknown";
}

namespace {

constexpr std::array<std::string_view, kChannelCount> kChannelNames = {
    "OX", "OY", "OZ", "MX", "MY", "MZ", "MGX", "MGY", "MGZ", "rAlpha", "rBeta", "rGama", "interval",
};

constexpr std::array<std::string_view, 8> kActionNames = {
    "click", "hold", "scroll_up", "scroll_down", "scroll_right", "scroll_left", "zoom_in", "zoom_out",
};

}  // namespace

std::string_view to_string(Channel ch) noexcept { return kChannelNames[static_cast<std::size_t>(ch)]; }

std::optional<Channel> parse_channel(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kChannelNames.size(); ++i) {
        if (kChannelNames[i] == name) return static_cast<Channel>(i);
    }
    return std::nullopt;
}

SensorGroup group_of(Channel ch) {
    switch (ch) {
        case Channel::OX:
        case Channel::OY:
        case Channel::OZ: return SensorGroup::Orientation;
        case Channel::MX:
        case Channel::MY:
        case Channel::MZ: return SensorGroup::Acceleration;
        case Channel::MGX:
        case Channel::MGY:
        case Channel::MGZ: return SensorGroup::Gravity;
        case Channel::rAlpha:
        case Channel::rBeta:
        case Channel::rGama: return SensorGroup::Rotation;
        case Channel::interval: break;
    }
    throw Error(ErrorCode::UnknownChannel, "interval is not part of a sensor group");
}

std::array<Channel, 3> channels_of(SensorGroup group) noexcept {
    switch (group) {
        case SensorGroup::Orientation: return {Channel::OX, Channel::OY, Channel::OZ};
        case SensorGroup::Acceleration: return {Channel::MX, Channel::MY, Channel::MZ};
        case SensorGroup::Gravity: return {Channel::MGX, Channel::MGY, Channel::MGZ};
        case SensorGroup::Rotation: return {Channel::rAlpha, Channel::rBeta, Channel::rGama};
    }
    return {};
}

std::string_view to_string(SensorGroup group) noexcept {
    switch (group) {
        case SensorGroup::Orientation: return "orientation";
        case SensorGroup::Acceleration: return "acceleration";
        case SensorGroup::Gravity: return "gravity";
        case SensorGroup::Rotation: return "rotation";
    }
    return "?";
}

std::string_view to_string(TouchAction a) noexcept { return kActionNames[static_cast<std::size_t>(a)]; }

std::optional<TouchAction> parse_touch_action(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kActionNames.size(); ++i) {
        if (kActionNames[i] == name) return static_cast<TouchAction>(i);
    }
    return std::nullopt;
}

bool is_scroll(TouchAction a) noexcept {
    return a == TouchAction::ScrollUp || a == TouchAction::ScrollDown || a == TouchAction::ScrollRight ||
           a == TouchAction::ScrollLeft;
}

Label::Label(Digit d) : value_(d) {
    if (d.value < 0 || d.value > 9) throw Error(ErrorCode::MalformedRecord, "digit out of range");
}

TouchAction Label::action() const {
    if (!is_action()) throw Error(ErrorCode::MalformedRecord, "label is not a touch action");
    return std::get<TouchAction>(value_);
}

Digit Label::digit() const {
    if (!is_digit()) throw Error(ErrorCode::MalformedRecord, "label is not a digit");
    return std::get<Digit>(value_);
}

std::string Label::str() const {
    if (is_action()) return "action:" + std::string(to_string(action()));
    return "digit:" + std::to_string(digit().value);
}

Label Label::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw Error(ErrorCode::MalformedRecord, "label '" + std::string(text) + "' lacks a kind prefix");
    }
    const auto kind = text.substr(0, colon);
    const auto value = text.substr(colon + 1);
    if (kind == "action") {
        if (auto a = parse_touch_action(value)) return Label(*a);
    } else if (kind == "digit") {
        if (value.size() == 1 && value[0] >= '0' && value[0] <= '9') return Label(Digit{value[0] - '0'});
    }
    throw Error(ErrorCode::MalformedRecord, "unrecognised label '" + std::string(text) + "'");
}

std::string_view to_string(HandMode h) noexcept {
    switch (h) {
        case HandMode::OneHand: return "one";
        case HandMode::TwoHand: return "two";
        case HandMode::Unknown: return "unknown";
    }
    return "unknown";
}

HandMode parse_hand_mode(std::string_view text) {
    if (text == "one") return HandMode::OneHand;
    if (text == "two") return HandMode::TwoHand;
    if (text == "unknown") return HandMode::Unknown;
    throw Error(ErrorCode::MalformedRecord, "hand mode must be one|two|unknown");
}

const Sequence& LabeledTrace::seq(Channel ch) const {
    if (ch == Channel::interval) throw Error(ErrorCode::UnknownChannel, "interval has no sequence");
    return sequences[static_cast<std::size_t>(ch)];
}

Sequence& LabeledTrace::seq(Channel ch) {
    if (ch == Channel::interval) throw Error(ErrorCode::UnknownChannel, "interval has no sequence");
    return sequences[static_cast<std::size_t>(ch)];
}

void validate(const LabeledTrace& trace) {
    for (Channel ch : kSensorChannels) {
        const auto& s = trace.seq(ch);
        if (s.empty()) throw Error(ErrorCode::InvalidTrace, std::string(to_string(ch)) + " is empty");
        for (double v : s) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::InvalidTrace, std::string(to_string(ch)) + " holds a non-finite value");
            }
        }
    }
    for (SensorGroup g : kSensorGroups) {
        const auto chs = channels_of(g);
        const auto n = trace.seq(chs[0]).size();
        if (trace.seq(chs[1]).size() != n || trace.seq(chs[2]).size() != n) {
            throw Error(ErrorCode::InvalidTrace, std::string(to_string(g)) + " triple has unequal lengths");
        }
    }
    if (!std::isfinite(trace.interval_ms)) throw Error(ErrorCode::InvalidTrace, "interval is not finite");
}

}  // namespace touchsig
