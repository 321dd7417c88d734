#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "gen.hpp"
#include "touchsig/codec.hpp"
#include "touchsig/server.hpp"
#include "touchsig/session.hpp"
#include "touchsig/websocket.hpp"

using namespace touchsig;
namespace fs = std::filesystem;

namespace {

const std::string kHandshake =
    "GET /ingest HTTP/1.1\r\n"
    "Host: localhost\r\n"
    "Upgrade: websocket\r\n"
    "Connection: Upgrade\r\n"
    "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\n"
    "Sec-WebSocket-Version: 13\r\n\r\n";

std::string read_until(int fd, const std::string& marker) {
    std::string got;
    char buf[1024];
    while (got.find(marker) == std::string::npos) {
        pollfd p{fd, POLLIN, 0};
        if (::poll(&p, 1, 5000) <= 0) break;
        const auto n = ::recv(fd, buf, sizeof(buf), 0);
        if (n <= 0) break;
        got.append(buf, std::size_t(n));
    }
    return got;
}

}  // namespace

TEST_CASE("accept key matches the published example") {
    CHECK(websocket_accept_key("dGhlIHNhbXBsZSBub25jZQ==") == "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
}

TEST_CASE("framer: handshake, masked text, fragments, ping, close") {
    WebSocketFramer f;
    auto out = f.feed(kHandshake.substr(0, 20));
    CHECK_FALSE(f.handshake_done());
    CHECK(out.reply.empty());
    out = f.feed(kHandshake.substr(20));
    REQUIRE(f.handshake_done());
    CHECK(out.reply.find("101") != std::string::npos);
    CHECK(out.reply.find("s3pPLMBiTxaQ9kYGzzhZRbK+xOo=") != std::string::npos);

    // A frame split across two reads.
    const auto frame = encode_client_frame("hello", 0x37fa213d);
    out = f.feed(frame.substr(0, 3));
    CHECK(out.messages.empty());
    out = f.feed(frame.substr(3));
    REQUIRE(out.messages.size() == 1);
    CHECK(out.messages[0] == "hello");

    // Fragmented message: text frame without FIN, then a continuation with FIN.
    auto first = encode_client_frame("frag", 1, 0x1);
    first[0] = static_cast<char>(first[0] & 0x7f);
    out = f.feed(first + encode_client_frame("ment", 2, 0x0));
    REQUIRE(out.messages.size() == 1);
    CHECK(out.messages[0] == "fragment");

    // Payloads over 125 and 65535 bytes use the extended length forms.
    const std::string mid(300, 'm'), big(70000, 'b');
    out = f.feed(encode_client_frame(mid, 3) + encode_client_frame(big, 4));
    REQUIRE(out.messages.size() == 2);
    CHECK(out.messages[0] == mid);
    CHECK(out.messages[1] == big);

    out = f.feed(encode_client_frame("p", 5, 0x9));
    CHECK(out.reply == encode_server_frame("p", 0xA));
    CHECK_FALSE(out.closed);

    out = f.feed(encode_client_frame("", 6, 0x8));
    CHECK(out.closed);
}

TEST_CASE("framer: a bad handshake or an unmasked frame closes the connection") {
    WebSocketFramer a;
    CHECK(a.feed("GET / HTTP/1.1\r\nHost: x\r\n\r\n").closed);

    WebSocketFramer b;
    b.feed(kHandshake);
    CHECK(b.feed(encode_server_frame("x", 0x1)).closed);
}

TEST_CASE("server accepts a WebSocket collector") {
    const auto dir = fs::temp_directory_path() / ("touchsig_ws_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    gen::Rng rng(4);
    const auto s = gen::session(rng, "browser", 3);

    auto server = serve({"127.0.0.1", 0, dir / "out.jsonl", {}});
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(server->port());
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    REQUIRE(::send(fd, kHandshake.data(), kHandshake.size(), 0) == ssize_t(kHandshake.size()));
    const auto response = read_until(fd, "\r\n\r\n");
    CHECK(response.find("s3pPLMBiTxaQ9kYGzzhZRbK+xOo=") != std::string::npos);

    // One record per message, except the last two which share one message.
    std::string frames;
    for (std::size_t i = 0; i + 2 < s.lines.size(); ++i) frames += encode_client_frame(s.lines[i], 0x01020304u + i);
    frames += encode_client_frame(s.lines[s.lines.size() - 2] + "\n" + s.lines.back(), 99);
    frames += encode_client_frame("", 7, 0x8);
    REQUIRE(::send(fd, frames.data(), frames.size(), 0) == ssize_t(frames.size()));
    REQUIRE(server->wait_for_sessions(1, std::chrono::seconds(10)));
    ::close(fd);
    server->stop();

    std::ifstream in(dir / "out.jsonl");
    std::ostringstream got;
    got << in.rdbuf();
    std::string expected;
    for (const auto& t : assemble_session(s.lines)) expected += encode_trace(t) + "\n";
    CHECK(got.str() == expected);
    CHECK(server->traces_persisted() == 3);
    fs::remove_all(dir);
}
