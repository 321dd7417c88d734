#include "touchsig/websocket.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <cctype>

namespace touchsig {

namespace {

constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
constexpr std::size_t kMaxMessage = 1 << 20;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string frame(std::string_view payload, std::uint8_t opcode, bool masked, std::uint32_t mask) {
    std::string out;
    out.push_back(static_cast<char>(0x80 | (opcode & 0x0F)));
    const std::uint8_t mask_bit = masked ? 0x80 : 0x00;
    const auto n = payload.size();
    if (n < 126) {
        out.push_back(static_cast<char>(mask_bit | n));
    } else if (n <= 0xFFFF) {
        out.push_back(static_cast<char>(mask_bit | 126));
        out.push_back(static_cast<char>((n >> 8) & 0xFF));
        out.push_back(static_cast<char>(n & 0xFF));
    } else {
        out.push_back(static_cast<char>(mask_bit | 127));
        for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((std::uint64_t(n) >> shift) & 0xFF));
    }
    if (!masked) {
        out.append(payload);
        return out;
    }
    const std::array<std::uint8_t, 4> key = {
        static_cast<std::uint8_t>(mask >> 24), static_cast<std::uint8_t>(mask >> 16),
        static_cast<std::uint8_t>(mask >> 8), static_cast<std::uint8_t>(mask)};
    for (auto b : key) out.push_back(static_cast<char>(b));
    for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>(payload[i] ^ key[i % 4]));
    return out;
}

}  // namespace

std::string websocket_accept_key(std::string_view client_key) {
    const std::string input = std::string(client_key) + std::string(kGuid);
    std::array<unsigned char, SHA_DIGEST_LENGTH> digest{};
    SHA1(reinterpret_cast<const unsigned char*>(input.data()), input.size(), digest.data());
    std::array<unsigned char, 4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1> encoded{};
    const int len = EVP_EncodeBlock(encoded.data(), digest.data(), SHA_DIGEST_LENGTH);
    return std::string(reinterpret_cast<const char*>(encoded.data()), static_cast<std::size_t>(len));
}

std::string encode_client_frame(std::string_view payload, std::uint32_t mask, std::uint8_t opcode) {
    return frame(payload, opcode, true, mask);
}

std::string encode_server_frame(std::string_view payload, std::uint8_t opcode) {
    return frame(payload, opcode, false, 0);
}

WebSocketFramer::Output WebSocketFramer::handshake(Output out) {
    const auto end = buffer_.find("\r\n\r\n");
    if (end == std::string::npos) {
        if (buffer_.size() > 16384) out.closed = closed_ = true;
        return out;
    }
    const std::string_view head(buffer_.data(), end);
    std::string key;
    std::size_t pos = head.find("\r\n");
    while (pos != std::string_view::npos && pos < head.size()) {
        const auto next = head.find("\r\n", pos + 2);
        const auto line = head.substr(pos + 2, (next == std::string_view::npos ? head.size() : next) - pos - 2);
        const auto colon = line.find(':');
        if (colon != std::string_view::npos && lower(trim(line.substr(0, colon))) == "sec-websocket-key") {
            key = std::string(trim(line.substr(colon + 1)));
        }
        pos = next;
    }
    if (key.empty()) {
        out.reply = "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\n\r\n";
        out.closed = closed_ = true;
        return out;
    }
    out.reply =
        "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Accept: " +
        websocket_accept_key(key) + "\r\n\r\n";
    buffer_.erase(0, end + 4);
    handshake_done_ = true;
    return out;
}

WebSocketFramer::Output WebSocketFramer::feed(std::string_view bytes) {
    Output out;
    if (closed_) {
        out.closed = true;
        return out;
    }
    buffer_.append(bytes);
    if (!handshake_done_) {
        out = handshake(std::move(out));
        if (!handshake_done_) return out;
    }

    for (;;) {
        if (buffer_.size() < 2) break;
        const auto b0 = static_cast<std::uint8_t>(buffer_[0]);
        const auto b1 = static_cast<std::uint8_t>(buffer_[1]);
        const bool fin = b0 & 0x80;
        const std::uint8_t opcode = b0 & 0x0F;
        const bool masked = b1 & 0x80;
        std::uint64_t len = b1 & 0x7F;
        std::size_t header = 2;
        if (len == 126) {
            if (buffer_.size() < 4) break;
            len = (std::uint64_t(std::uint8_t(buffer_[2])) << 8) | std::uint8_t(buffer_[3]);
            header = 4;
        } else if (len == 127) {
            if (buffer_.size() < 10) break;
            len = 0;
            for (int i = 0; i < 8; ++i) len = (len << 8) | std::uint8_t(buffer_[2 + i]);
            header = 10;
        }
        // Clients must mask; oversized messages are refused.
        if (!masked || len > kMaxMessage) {
            out.reply += encode_server_frame("", 0x8);
            out.closed = closed_ = true;
            return out;
        }
        if (buffer_.size() < header + 4 + len) break;
        const auto* key = reinterpret_cast<const std::uint8_t*>(buffer_.data() + header);
        std::string payload(buffer_.data() + header + 4, static_cast<std::size_t>(len));
        for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ key[i % 4]);
        buffer_.erase(0, header + 4 + static_cast<std::size_t>(len));

        switch (opcode) {
            case 0x0:  // continuation
            case 0x1:  // text
            case 0x2:  // binary
                fragments_ += payload;
                if (fragments_.size() > kMaxMessage) {
                    out.reply += encode_server_frame("", 0x8);
                    out.closed = closed_ = true;
                    return out;
                }
                if (fin) {
                    out.messages.push_back(std::move(fragments_));
                    fragments_.clear();
                }
                break;
            case 0x8:
                out.reply += encode_server_frame(payload.substr(0, std::min<std::size_t>(payload.size(), 2)), 0x8);
                out.closed = closed_ = true;
                return out;
            case 0x9:
                out.reply += encode_server_frame(payload, 0xA);
                break;
            case 0xA:
                break;
            default:
                out.reply += encode_server_frame("", 0x8);
                out.closed = closed_ = true;
                return out;
        }
    }
    return out;
}

}  // namespace touchsig
