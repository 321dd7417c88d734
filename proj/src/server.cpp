#include "touchsig/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>

#include <json.hpp>

#include "touchsig/error.hpp"
#include "touchsig/store.hpp"
#include "touchsig/websocket.hpp"

namespace touchsig {

namespace {

constexpr int kPollMs = 50;
constexpr std::size_t kMaxLine = 1 << 20;

bool send_all(int fd, std::string_view data) {
    while (!data.empty()) {
        const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

// Splits a byte stream into lines; strips a trailing '\r'.
class LineSplitter {
public:
    template <typename Fn>
    bool feed(std::string_view bytes, Fn&& on_line) {
        buffer_.append(bytes);
        std::size_t start = 0;
        for (;;) {
            const auto nl = buffer_.find('\n', start);
            if (nl == std::string::npos) break;
            std::string_view line(buffer_.data() + start, nl - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            on_line(line);
            start = nl + 1;
        }
        buffer_.erase(0, start);
        return buffer_.size() <= kMaxLine;
    }

    template <typename Fn>
    void flush(Fn&& on_line) {
        if (!buffer_.empty()) on_line(std::string_view(buffer_));
        buffer_.clear();
    }

private:
    std::string buffer_;
};

}  // namespace

IngestServer::IngestServer(ServerConfig config) : config_(std::move(config)) {
    store_ = std::make_unique<DatasetStore>(config_.out);

    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(ErrorCode::BindFailure, std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(config_.port);
    if (::inet_pton(AF_INET, config_.host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw Error(ErrorCode::BindFailure, "bad IPv4 address '" + config_.host + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 || ::listen(listen_fd_, 64) < 0) {
        const std::string why = std::strerror(errno);
        ::close(listen_fd_);
        throw Error(ErrorCode::BindFailure, config_.host + ":" + std::to_string(config_.port) + ": " + why);
    }
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);

    sink_ = std::thread([this] { sink_loop(); });
    acceptor_ = std::thread([this] { accept_loop(); });
}

IngestServer::~IngestServer() { stop(); }

void IngestServer::stop() {
    if (stopped_) return;
    stopped_ = true;
    stopping_ = true;
    if (acceptor_.joinable()) acceptor_.join();
    reap(true);
    ::close(listen_fd_);
    {
        std::lock_guard lock(sink_mutex_);
        sink_exit_ = true;
    }
    sink_cv_.notify_all();
    if (sink_.joinable()) sink_.join();
}

IngestCounters IngestServer::counters() const {
    std::lock_guard lock(counters_mutex_);
    return counters_;
}

bool IngestServer::wait_for_sessions(std::size_t sessions, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (sessions_closed_.load() < sessions) {
        if (std::chrono::steady_clock::now() >= deadline) return false;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    std::unique_lock lock(sink_mutex_);
    return drained_cv_.wait_until(lock, deadline, [&] { return queue_.empty() && in_flight_ == 0; });
}

void IngestServer::accept_loop() {
    while (!stopping_) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, kPollMs);
        reap(false);
        if (ready <= 0 || !(pfd.revents & POLLIN)) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        auto conn = std::make_unique<Connection>();
        conn->fd = fd;
        auto* raw = conn.get();
        conn->worker = std::thread([this, raw] {
            handle(*raw);
            raw->done = true;
        });
        connections_.push_back(std::move(conn));
    }
}

void IngestServer::reap(bool all) {
    for (auto it = connections_.begin(); it != connections_.end();) {
        if (all || (*it)->done) {
            (*it)->worker.join();
            it = connections_.erase(it);
        } else {
            ++it;
        }
    }
}

void IngestServer::handle(Connection& conn) {
    std::optional<SessionState> session;
    std::size_t malformed = 0;
    bool alive = true;

    const auto on_line = [&](std::string_view line) {
        if (!alive || line.empty()) return;
        try {
            auto record = parse_event(line);
            if (!session) {
                if (!std::holds_alternative<Hello>(record)) {
                    ++malformed;
                    alive = false;  // protocol requires hello first
                    return;
                }
                session.emplace(std::get<Hello>(std::move(record)));
                return;
            }
            if (!config_.raw_log.empty()) enqueue(RawLine{session->hello().session_id, std::string(line)});
            if (auto trace = session->handle(record)) enqueue(std::move(*trace));
        } catch (const Error&) {
            ++malformed;
        }
    };

    std::optional<WebSocketFramer> ws;
    LineSplitter lines;
    bool sniffed = false;
    std::string head;
    char buf[8192];

    const auto consume = [&](std::string_view bytes) {
        if (!ws) {
            if (!lines.feed(bytes, on_line)) alive = false;
            return;
        }
        auto out = ws->feed(bytes);
        if (!out.reply.empty() && !send_all(conn.fd, out.reply)) alive = false;
        for (const auto& msg : out.messages) {
            // A message is a complete record or several newline-separated ones.
            lines.feed(msg, on_line);
            lines.flush(on_line);
        }
        if (out.closed) alive = false;
    };

    while (alive && !stopping_) {
        pollfd pfd{conn.fd, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, kPollMs);
        if (ready <= 0) continue;
        const auto n = ::recv(conn.fd, buf, sizeof(buf), 0);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            break;
        }
        std::string_view bytes(buf, static_cast<std::size_t>(n));
        if (!sniffed) {
            head.append(bytes);
            if (head.size() < 4 && head.find('\n') == std::string::npos) continue;
            sniffed = true;
            if (head.rfind("GET ", 0) == 0) ws.emplace();
            bytes = head;
        }
        consume(bytes);
    }
    if (!ws && alive) lines.flush(on_line);
    ::close(conn.fd);

    IngestCounters c;
    if (session) {
        session->close();
        c = session->counters();
    }
    c.malformed_records += malformed;
    {
        std::lock_guard lock(counters_mutex_);
        counters_ += c;
    }
    ++sessions_closed_;
}

void IngestServer::enqueue(SinkItem item) {
    {
        std::lock_guard lock(sink_mutex_);
        queue_.push_back(std::move(item));
    }
    sink_cv_.notify_one();
}

void IngestServer::sink_loop() {
    std::ofstream raw;
    if (!config_.raw_log.empty()) raw.open(config_.raw_log, std::ios::app);

    std::unique_lock lock(sink_mutex_);
    for (;;) {
        sink_cv_.wait(lock, [&] { return sink_exit_ || !queue_.empty(); });
        if (queue_.empty()) {
            if (sink_exit_) break;
            continue;
        }
        auto item = std::move(queue_.front());
        queue_.pop_front();
        ++in_flight_;
        lock.unlock();
        try {
            if (auto* trace = std::get_if<LabeledTrace>(&item)) {
                store_->persist(*trace);
                ++persisted_;
            } else if (raw) {
                const auto& r = std::get<RawLine>(item);
                raw << R"({"session":)" << nlohmann::json(r.session).dump() << R"(,"record":)" << r.line << "}\n";
                raw.flush();
            }
        } catch (const Error& e) {
            std::cerr << "ingest: " << e.what() << '\n';
        }
        lock.lock();
        --in_flight_;
        if (queue_.empty()) drained_cv_.notify_all();
    }
}

void send_session(const std::string& host, std::uint16_t port, std::span<const std::string> lines) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
        throw Error(ErrorCode::BindFailure, "cannot resolve " + host);
    }
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0 || ::connect(fd, res->ai_addr, res->ai_addrlen) < 0) {
        const std::string why = std::strerror(errno);
        ::freeaddrinfo(res);
        if (fd >= 0) ::close(fd);
        throw Error(ErrorCode::BindFailure, "connect " + host + ":" + std::to_string(port) + ": " + why);
    }
    ::freeaddrinfo(res);
    std::string payload;
    for (const auto& l : lines) {
        payload += l;
        payload += '\n';
    }
    const bool ok = send_all(fd, payload);
    ::shutdown(fd, SHUT_WR);
    // Wait for the server to close its side so the whole session is consumed.
    char sink[256];
    while (::recv(fd, sink, sizeof(sink), 0) > 0) {
    }
    ::close(fd);
    if (!ok) throw Error(ErrorCode::BindFailure, "send to " + host + " failed");
}

}  // namespace touchsig
