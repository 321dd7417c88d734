#include "touchsig/wire.hpp"

#include <cmath>

#include <json.hpp>

#include "touchsig/error.hpp"

namespace touchsig {

using nlohmann::json;

namespace {

double finite_number(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw Error(ErrorCode::MalformedRecord, std::string(key) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorCode::NonFiniteValue, std::string(key) + " is not finite");
    return d;
}

double timestamp(const json& j) {
    const double t = finite_number(j, "t");
    if (t < 0.0) throw Error(ErrorCode::MalformedRecord, "timestamp is negative");
    return t;
}

std::string string_field(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_string()) throw Error(ErrorCode::MalformedRecord, std::string(key) + " must be a string");
    return v.get<std::string>();
}

}  // namespace

WireRecord parse_event(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::out_of_range& e) {
        // 406: a number literal too large for a double, e.g. 1e999.
        throw Error(e.id == 406 ? ErrorCode::NonFiniteValue : ErrorCode::MalformedRecord, e.what());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::MalformedRecord, "record is not an object");

    try {
        if (j.contains("ch")) {
            SensorEvent ev;
            const auto name = string_field(j, "ch");
            const auto ch = parse_channel(name);
            if (!ch) throw Error(ErrorCode::UnknownChannel, "'" + name + "'");
            ev.channel = *ch;
            ev.timestamp_ms = timestamp(j);
            ev.value = finite_number(j, "v");
            return ev;
        }
        if (j.contains("marker")) {
            SegmentMarker m;
            const auto kind = string_field(j, "marker");
            if (kind == "start") {
                m.kind = SegmentMarker::Kind::Start;
            } else if (kind == "end") {
                m.kind = SegmentMarker::Kind::End;
            } else {
                throw Error(ErrorCode::MalformedRecord, "marker must be start|end");
            }
            m.label = Label::parse(string_field(j, "label"));
            m.timestamp_ms = timestamp(j);
            return m;
        }
        if (j.contains("session")) {
            Hello h;
            h.session_id = string_field(j, "session");
            h.device = j.contains("device") ? string_field(j, "device") : std::string();
            h.browser = j.contains("browser") ? string_field(j, "browser") : std::string();
            h.hand = j.contains("hand") ? parse_hand_mode(string_field(j, "hand")) : HandMode::Unknown;
            return h;
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, e.what());
    }
    throw Error(ErrorCode::MalformedRecord, "record is neither data, marker nor hello");
}

std::string encode_record(const WireRecord& record) {
    // Field order follows the documented wire examples, not json's sorted keys.
    if (const auto* ev = std::get_if<SensorEvent>(&record)) {
        return R"({"t":)" + json(ev->timestamp_ms).dump() + R"(,"ch":")" + std::string(to_string(ev->channel)) +
               R"(","v":)" + json(ev->value).dump() + "}";
    }
    if (const auto* m = std::get_if<SegmentMarker>(&record)) {
        return R"({"t":)" + json(m->timestamp_ms).dump() + R"(,"marker":")" +
               (m->kind == SegmentMarker::Kind::Start ? "start" : "end") + R"(","label":")" + m->label.str() +
               R"("})";
    }
    const auto& h = std::get<Hello>(record);
    return R"({"session":)" + json(h.session_id).dump() + R"(,"device":)" + json(h.device).dump() +
           R"(,"browser":)" + json(h.browser).dump() + R"(,"hand":")" + std::string(to_string(h.hand)) + R"("})";
}

}  // namespace touchsig
