#include "touchsig/session.hpp"

#include <algorithm>

#include "touchsig/error.hpp"

namespace touchsig {

IngestCounters& IngestCounters::operator+=(const IngestCounters& o) {
    traces += o.traces;
    malformed_records += o.malformed_records;
    out_of_order += o.out_of_order;
    empty_segments += o.empty_segments;
    no_open_segment += o.no_open_segment;
    unbalanced_markers += o.unbalanced_markers;
    ragged_groups += o.ragged_groups;
    disconnect_mid_segment += o.disconnect_mid_segment;
    return *this;
}

SessionState::SessionState(Hello hello) : hello_(std::move(hello)) {}

void SessionState::add_event(const SensorEvent& ev) {
    auto& buf = buffers_[static_cast<std::size_t>(ev.channel)];
    if (!buf.empty() && ev.timestamp_ms < buf.back().t) ++counters_.out_of_order;
    buf.push_back({ev.timestamp_ms, ev.value});
}

void SessionState::open_segment(const SegmentMarker& start) {
    if (open_) ++counters_.unbalanced_markers;
    open_ = start;
}

LabeledTrace SessionState::assemble_trace(const SegmentMarker& end) {
    if (!open_) throw Error(ErrorCode::NoOpenSegment, "end marker at t=" + std::to_string(end.timestamp_ms));
    const SegmentMarker start = *open_;
    open_.reset();

    const auto in_window = [&](const Reading& r) { return r.t >= start.timestamp_ms && r.t <= end.timestamp_ms; };

    LabeledTrace trace;
    for (Channel ch : kSensorChannels) {
        auto& out = trace.seq(ch);
        for (const auto& r : readings(ch)) {
            if (in_window(r)) out.push_back(r.v);
        }
    }

    bool ragged = false;
    for (SensorGroup g : kSensorGroups) {
        const auto chs = channels_of(g);
        std::size_t shortest = trace.seq(chs[0]).size();
        for (Channel ch : chs) shortest = std::min(shortest, trace.seq(ch).size());
        if (shortest == 0) {
            ++counters_.empty_segments;
            throw Error(ErrorCode::EmptySegment, std::string(to_string(g)) + " has no readings in [" +
                                                     std::to_string(start.timestamp_ms) + ", " +
                                                     std::to_string(end.timestamp_ms) + "]");
        }
        for (Channel ch : chs) {
            if (trace.seq(ch).size() != shortest) {
                trace.seq(ch).resize(shortest);
                ragged = true;
            }
        }
    }
    if (ragged) ++counters_.ragged_groups;

    // Reading interval: mean of in-window reports, else the last one before
    // the window closed, else 0.
    double sum = 0.0;
    std::size_t count = 0;
    std::optional<double> last;
    for (const auto& r : readings(Channel::interval)) {
        if (in_window(r)) {
            sum += r.v;
            ++count;
        } else if (r.t < start.timestamp_ms) {
            last = r.v;
        }
    }
    trace.interval_ms = count > 0 ? sum / static_cast<double>(count) : last.value_or(0.0);

    trace.label = start.label;
    trace.meta.user_id = hello_.session_id;
    trace.meta.device = hello_.device;
    trace.meta.browser = hello_.browser;
    trace.meta.hand_mode = hello_.hand;
    trace.meta.collected_at = start.timestamp_ms;
    ++counters_.traces;
    return trace;
}

std::optional<LabeledTrace> SessionState::handle(const WireRecord& record) {
    if (const auto* ev = std::get_if<SensorEvent>(&record)) {
        SensorEvent tagged = *ev;
        tagged.session_id = hello_.session_id;
        add_event(tagged);
        return std::nullopt;
    }
    if (const auto* m = std::get_if<SegmentMarker>(&record)) {
        if (m->kind == SegmentMarker::Kind::Start) {
            open_segment(*m);
            return std::nullopt;
        }
        if (!open_) {
            ++counters_.no_open_segment;
            return std::nullopt;
        }
        try {
            return assemble_trace(*m);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptySegment) throw;
            return std::nullopt;
        }
    }
    // A repeated hello mid-session carries nothing new.
    ++counters_.malformed_records;
    return std::nullopt;
}

void SessionState::close() {
    if (open_) {
        ++counters_.disconnect_mid_segment;
        open_.reset();
    }
}

std::vector<LabeledTrace> assemble_session(std::span<const std::string> lines, IngestCounters* counters) {
    std::vector<LabeledTrace> traces;
    std::size_t first = 0;
    while (first < lines.size() && lines[first].empty()) ++first;
    if (first == lines.size()) throw Error(ErrorCode::MalformedRecord, "session has no hello record");
    const auto hello = parse_event(lines[first]);
    if (!std::holds_alternative<Hello>(hello)) {
        throw Error(ErrorCode::MalformedRecord, "first record of a session must be a hello");
    }

    SessionState session(std::get<Hello>(hello));
    std::size_t malformed = 0;
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        try {
            if (auto trace = session.handle(parse_event(lines[i]))) traces.push_back(std::move(*trace));
        } catch (const Error&) {
            ++malformed;
        }
    }
    session.close();
    if (counters) {
        IngestCounters c = session.counters();
        c.malformed_records += malformed;
        *counters += c;
    }
    return traces;
}

}  // namespace touchsig
