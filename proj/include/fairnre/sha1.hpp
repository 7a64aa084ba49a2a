#pragma once
// Minimal SHA-1, used for git-blob-style content hashes in report provenance.
// Hand-rolled so reports carry identical hashes on every platform without an
// OpenSSL dependency.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "fairnre/types.hpp"

namespace fairnre {

namespace detail {
inline std::uint32_t rol32(std::uint32_t v, int n) { return (v << n) | (v >> (32 - n)); }
}  // namespace detail

inline std::string sha1_hex(const std::string& data) {
    std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};

    std::string msg = data;
    const std::uint64_t bitlen = static_cast<std::uint64_t>(data.size()) * 8;
    msg += static_cast<char>(0x80);
    while (msg.size() % 64 != 56) msg += '\0';
    for (int i = 7; i >= 0; --i) msg += static_cast<char>((bitlen >> (i * 8)) & 0xFF);

    for (std::size_t chunk = 0; chunk < msg.size(); chunk += 64) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i) {
            const unsigned char* p =
                reinterpret_cast<const unsigned char*>(msg.data()) + chunk + 4 * i;
            w[i] = (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
                   (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
        }
        for (int i = 16; i < 80; ++i)
            w[i] = detail::rol32(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);

        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            std::uint32_t t = detail::rol32(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = detail::rol32(b, 30);
            b = a;
            a = t;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }

    char out[41];
    std::snprintf(out, sizeof(out), "%08x%08x%08x%08x%08x", h[0], h[1], h[2], h[3], h[4]);
    return std::string(out, 40);
}

// Same value `git hash-object` would print for the content.
inline std::string git_blob_sha1(const std::string& content) {
    std::string full = "blob " + std::to_string(content.size());
    full += '\0';
    full += content;
    return sha1_hex(full);
}

inline std::string file_blob_sha1(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for hashing: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return git_blob_sha1(ss.str());
}

}  // namespace fairnre
