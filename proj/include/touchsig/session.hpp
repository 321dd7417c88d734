#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "touchsig/model.hpp"
#include "touchsig/wire.hpp"

namespace touchsig {

struct IngestCounters {
    std::size_t traces = 0;
    std::size_t malformed_records = 0;
    std::size_t out_of_order = 0;        // timestamp went backwards within a channel
    std::size_t empty_segments = 0;      // a sensor group had no readings in the window
    std::size_t no_open_segment = 0;     // End marker without a Start
    std::size_t unbalanced_markers = 0;  // Start while a segment was already open
    std::size_t ragged_groups = 0;       // triple lengths differed; truncated to the shortest
    std::size_t disconnect_mid_segment = 0;

    IngestCounters& operator+=(const IngestCounters& o);
    friend bool operator==(const IngestCounters&, const IngestCounters&) = default;
};

/// Per-connection state: every received reading (the raw session log), the
/// open segment if any, and the client metadata from the hello record.
class SessionState {
public:
    struct Reading {
        double t;
        double v;
    };

    explicit SessionState(Hello hello);

    const Hello& hello() const noexcept { return hello_; }
    const IngestCounters& counters() const noexcept { return counters_; }
    const std::optional<SegmentMarker>& open_segment() const noexcept { return open_; }
    const std::vector<Reading>& readings(Channel ch) const { return buffers_[static_cast<std::size_t>(ch)]; }

    void add_event(const SensorEvent& ev);
    void open_segment(const SegmentMarker& start);

    /// Closes the open segment and builds the trace from readings with
    /// start <= t <= end. The open segment is cleared on success and on
    /// EmptySegment. Throws Error(NoOpenSegment) or Error(EmptySegment).
    LabeledTrace assemble_trace(const SegmentMarker& end);

    /// Routes one record. Returns a trace when an End marker completes one;
    /// NoOpenSegment / EmptySegment are counted instead of thrown.
    std::optional<LabeledTrace> handle(const WireRecord& record);

    /// Connection ended; an open segment is discarded and counted.
    void close();

private:
    Hello hello_;
    std::array<std::vector<Reading>, kChannelCount> buffers_;
    std::optional<SegmentMarker> open_;
    IngestCounters counters_;
};

/// Offline assembly of one recorded wire session (hello line first). Bad
/// records are counted and skipped; a missing hello throws MalformedRecord.
std::vector<LabeledTrace> assemble_session(std::span<const std::string> lines, IngestCounters* counters = nullptr);

}  // namespace touchsig
