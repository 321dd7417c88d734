#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace touchsig {

/// Value of Sec-WebSocket-Accept for a client's Sec-WebSocket-Key.
std::string websocket_accept_key(std::string_view client_key);

/// Server side of a WebSocket connection: performs the HTTP upgrade, then
/// unmasks client frames and reassembles fragmented text messages. Only what
/// a sensor collector needs; no extensions and no subprotocols.
class WebSocketFramer {
public:
    struct Output {
        std::vector<std::string> messages;  // complete text/binary payloads
        std::string reply;                  // bytes to send back (handshake, pong, close)
        bool closed = false;                // peer closed or protocol violation
    };

    Output feed(std::string_view bytes);
    bool handshake_done() const noexcept { return handshake_done_; }

private:
    Output handshake(Output out);

    bool handshake_done_ = false;
    bool closed_ = false;
    std::string buffer_;
    std::string fragments_;
};

/// Client-to-server frame (always masked, FIN set), as a browser would send.
std::string encode_client_frame(std::string_view payload, std::uint32_t mask, std::uint8_t opcode = 0x1);

/// Server-to-client frame (never masked).
std::string encode_server_frame(std::string_view payload, std::uint8_t opcode);

}  // namespace touchsig
