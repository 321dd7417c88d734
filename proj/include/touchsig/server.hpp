#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <variant>

#include "touchsig/model.hpp"
#include "touchsig/session.hpp"
#include "touchsig/store.hpp"

namespace touchsig {

struct ServerConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 picks an ephemeral port
    std::filesystem::path out;
    std::filesystem::path raw_log;  // empty: no raw session log
};

/// Ingest server. Accepts plain-TCP or WebSocket clients speaking the
/// newline-delimited wire format. Every connection owns its SessionState; all
/// completed traces go through one appender thread into the dataset file.
class IngestServer {
public:
    /// Binds and starts serving. Throws Error(BindFailure) or Error(StorageFailure).
    explicit IngestServer(ServerConfig config);
    ~IngestServer();

    IngestServer(const IngestServer&) = delete;
    IngestServer& operator=(const IngestServer&) = delete;

    std::uint16_t port() const noexcept { return port_; }

    /// Graceful shutdown: stops accepting, ends every session (open segments
    /// are discarded and counted), drains the appender. Idempotent.
    void stop();

    IngestCounters counters() const;
    std::size_t sessions_closed() const noexcept { return sessions_closed_.load(); }
    std::size_t traces_persisted() const noexcept { return persisted_.load(); }

    /// Blocks until `sessions` connections have finished and all their traces
    /// are on disk, or the timeout expires.
    bool wait_for_sessions(std::size_t sessions, std::chrono::milliseconds timeout);

private:
    struct RawLine {
        std::string session;
        std::string line;
    };
    using SinkItem = std::variant<LabeledTrace, RawLine>;

    struct Connection {
        int fd = -1;
        std::thread worker;
        std::atomic<bool> done{false};
    };

    void accept_loop();
    void handle(Connection& conn);
    void sink_loop();
    void enqueue(SinkItem item);
    void reap(bool all);

    ServerConfig config_;
    std::unique_ptr<DatasetStore> store_;  // written by the sink thread only
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    bool stopped_ = false;

    std::thread acceptor_;
    std::list<std::unique_ptr<Connection>> connections_;  // touched by the acceptor only

    std::thread sink_;
    mutable std::mutex sink_mutex_;
    std::condition_variable sink_cv_;
    std::condition_variable drained_cv_;
    std::deque<SinkItem> queue_;
    bool sink_exit_ = false;
    std::size_t in_flight_ = 0;

    mutable std::mutex counters_mutex_;
    IngestCounters counters_;
    std::atomic<std::size_t> sessions_closed_{0};
    std::atomic<std::size_t> persisted_{0};
};

inline std::unique_ptr<IngestServer> serve(ServerConfig config) {
    return std::make_unique<IngestServer>(std::move(config));
}

/// Loopback client: connects over plain TCP, sends `lines` newline-terminated
/// and closes. Throws Error(BindFailure) when the connection cannot be made.
void send_session(const std::string& host, std::uint16_t port, std::span<const std::string> lines);

}  // namespace touchsig
