#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "touchsig/model.hpp"

namespace touchsig {

/// One timestamped reading on one channel. `session_id` is filled in by the
/// session that receives it; data records on the wire do not repeat it.
struct SensorEvent {
    std::string session_id;
    double timestamp_ms = 0.0;
    Channel channel = Channel::OX;
    double value = 0.0;

    friend bool operator==(const SensorEvent&, const SensorEvent&) = default;
};

struct SegmentMarker {
    enum class Kind { Start, End };
    Kind kind = Kind::Start;
    Label label;
    double timestamp_ms = 0.0;

    friend bool operator==(const SegmentMarker&, const SegmentMarker&) = default;
};

/// First record of every connection.
struct Hello {
    std::string session_id;
    std::string device;
    std::string browser;
    HandMode hand = HandMode::Unknown;

    friend bool operator==(const Hello&, const Hello&) = default;
};

using WireRecord = std::variant<SensorEvent, SegmentMarker, Hello>;

/// Decodes one newline-delimited wire record:
///   data    {"t":<ms>,"ch":"<channel>","v":<number>}
///   marker  {"t":<ms>,"marker":"start"|"end","label":"<kind>:<value>"}
///   hello   {"session":"<id>","device":"<str>","browser":"<str>","hand":"one"|"two"|"unknown"}
/// Throws Error with MalformedRecord, UnknownChannel or NonFiniteValue.
WireRecord parse_event(std::string_view line);

std::string encode_record(const WireRecord& record);

}  // namespace touchsig
