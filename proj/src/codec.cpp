#include "touchsig/codec.hpp"

#include <json.hpp>

#include "touchsig/error.hpp"

namespace touchsig {

using nlohmann::json;

std::string encode_trace(const LabeledTrace& trace) {
    validate(trace);
    json seq = json::object();
    for (Channel ch : kSensorChannels) seq[std::string(to_string(ch))] = trace.seq(ch);
    json j = {
        {"label", trace.label.str()},
        {"interval", trace.interval_ms},
        {"meta",
         {
             {"user", trace.meta.user_id},
             {"device", trace.meta.device},
             {"browser", trace.meta.browser},
             {"hand", to_string(trace.meta.hand_mode)},
             {"collected_at", trace.meta.collected_at},
         }},
        {"seq", std::move(seq)},
    };
    return j.dump();
}

LabeledTrace decode_trace(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedRecord, e.what());
    }
    LabeledTrace trace;
    try {
        trace.label = Label::parse(j.at("label").get<std::string>());
        trace.interval_ms = j.at("interval").get<double>();
        const auto& meta = j.at("meta");
        trace.meta.user_id = meta.at("user").get<std::string>();
        trace.meta.device = meta.at("device").get<std::string>();
        trace.meta.browser = meta.at("browser").get<std::string>();
        trace.meta.hand_mode = parse_hand_mode(meta.at("hand").get<std::string>());
        trace.meta.collected_at = meta.at("collected_at").get<double>();
        const auto& seq = j.at("seq");
        for (Channel ch : kSensorChannels) {
            trace.seq(ch) = seq.at(std::string(to_string(ch))).get<Sequence>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, e.what());
    }
    validate(trace);
    return trace;
}

}  // namespace touchsig
