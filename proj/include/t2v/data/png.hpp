#pragma once

#include <zlib.h>

#include <string>
#include <vector>

#include "t2v/data/tensor_io.hpp"

namespace t2v {

namespace detail {

inline void put_u32be(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

inline std::uint32_t get_u32be(const unsigned char* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline void png_chunk(std::string& out, const char type[4], const std::string& data) {
    put_u32be(out, static_cast<std::uint32_t>(data.size()));
    std::string body(type, 4);
    body += data;
    out += body;
    const auto crc = crc32(crc32(0L, nullptr, 0),
                           reinterpret_cast<const Bytef*>(body.data()),
                           static_cast<uInt>(body.size()));
    put_u32be(out, static_cast<std::uint32_t>(crc));
}

inline std::string zlib_deflate(const std::string& raw) {
    uLongf cap = compressBound(static_cast<uLong>(raw.size()));
    std::string out(cap, '\0');
    if (compress2(reinterpret_cast<Bytef*>(out.data()), &cap,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  6) != Z_OK)
        throw std::runtime_error("zlib compression failed");
    out.resize(cap);
    return out;
}

inline std::string zlib_inflate(const std::string& comp, size_t expected) {
    std::string out(expected, '\0');
    uLongf got = static_cast<uLongf>(expected);
    if (uncompress(reinterpret_cast<Bytef*>(out.data()), &got,
                   reinterpret_cast<const Bytef*>(comp.data()),
                   static_cast<uLong>(comp.size())) != Z_OK || got != expected)
        throw std::invalid_argument("zlib decompression failed");
    return out;
}

}  // namespace detail

// 8-bit RGB PNG, single IDAT, filter type 0 on every row.
inline void write_png(const std::string& path, const std::vector<unsigned char>& rgb, i64 h,
                      i64 w) {
    if (static_cast<i64>(rgb.size()) != h * w * 3)
        throw std::invalid_argument("write_png: pixel buffer does not match dimensions");
    std::string out("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    detail::put_u32be(ihdr, static_cast<std::uint32_t>(w));
    detail::put_u32be(ihdr, static_cast<std::uint32_t>(h));
    ihdr += '\x08';  // bit depth
    ihdr += '\x02';  // truecolor
    ihdr += '\x00';  // deflate
    ihdr += '\x00';  // adaptive filtering
    ihdr += '\x00';  // no interlace
    detail::png_chunk(out, "IHDR", ihdr);
    std::string raw;
    raw.reserve(static_cast<size_t>(h * (1 + w * 3)));
    for (i64 y = 0; y < h; ++y) {
        raw += '\x00';
        raw.append(reinterpret_cast<const char*>(rgb.data() + y * w * 3),
                   static_cast<size_t>(w * 3));
    }
    detail::png_chunk(out, "IDAT", detail::zlib_deflate(raw));
    detail::png_chunk(out, "IEND", "");
    detail::write_file_bytes(path, out);
}

// Reads PNGs of the exact profile write_png emits.
inline std::vector<unsigned char> read_png(const std::string& path, i64* out_h, i64* out_w) {
    const std::string data = detail::read_file_bytes(path);
    if (data.size() < 8 || data.compare(0, 8, "\x89PNG\r\n\x1a\n", 8) != 0)
        throw std::invalid_argument("not a PNG file: " + path);
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    size_t pos = 8;
    i64 h = 0, w = 0;
    std::string idat;
    while (pos + 8 <= data.size()) {
        const std::uint32_t len = detail::get_u32be(p + pos);
        const std::string type = data.substr(pos + 4, 4);
        if (pos + 12 + len > data.size()) throw std::invalid_argument("truncated PNG: " + path);
        const char* body = data.data() + pos + 8;
        if (type == "IHDR") {
            w = detail::get_u32be(reinterpret_cast<const unsigned char*>(body));
            h = detail::get_u32be(reinterpret_cast<const unsigned char*>(body) + 4);
            if (body[8] != 8 || body[9] != 2)
                throw std::invalid_argument("unsupported PNG profile in " + path);
        } else if (type == "IDAT") {
            idat.append(body, len);
        } else if (type == "IEND") {
            break;
        }
        pos += 12 + len;
    }
    if (h <= 0 || w <= 0) throw std::invalid_argument("missing IHDR in " + path);
    const std::string raw = detail::zlib_inflate(idat, static_cast<size_t>(h * (1 + w * 3)));
    std::vector<unsigned char> rgb(static_cast<size_t>(h * w * 3));
    for (i64 y = 0; y < h; ++y) {
        if (raw[static_cast<size_t>(y * (1 + w * 3))] != 0)
            throw std::invalid_argument("unsupported PNG row filter in " + path);
        std::copy_n(raw.data() + y * (1 + w * 3) + 1, w * 3,
                    reinterpret_cast<char*>(rgb.data()) + y * w * 3);
    }
    if (out_h) *out_h = h;
    if (out_w) *out_w = w;
    return rgb;
}

}  // namespace t2v
