#pragma once

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "t2v/core/tensor.hpp"
#include "t2v/errors.hpp"

namespace t2v {

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32le(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32le(out, bits);
}

inline float get_f32le(const unsigned char* p) {
    const std::uint32_t bits = get_u32le(p);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot read file " + path);
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return data;
}

inline void write_file_bytes(const std::string& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot write file " + path);
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f) throw std::invalid_argument("short write to " + path);
}

}  // namespace detail

// Raw video tensor file: 16-byte header of T,C,H,W as little-endian uint32,
// then T*C*H*W little-endian float32 values in [T,C,H,W] order.
inline void write_rawvid(const std::string& path, const Tensor<float>& video) {
    if (video.rank() != 4) throw std::invalid_argument("write_rawvid: tensor must be [T,C,H,W]");
    std::string out;
    out.reserve(16 + static_cast<size_t>(video.numel()) * 4);
    for (int d = 0; d < 4; ++d) detail::put_u32le(out, static_cast<std::uint32_t>(video.dim(d)));
    for (i64 i = 0; i < video.numel(); ++i) detail::put_f32le(out, video[i]);
    detail::write_file_bytes(path, out);
}

inline Tensor<float> read_rawvid(const std::string& path) {
    const std::string data = detail::read_file_bytes(path);
    if (data.size() < 16) throw std::invalid_argument("rawvid file too short: " + path);
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    std::vector<i64> shape(4);
    for (int d = 0; d < 4; ++d) shape[static_cast<size_t>(d)] = detail::get_u32le(p + 4 * d);
    const i64 n = numel_of(shape);
    if (data.size() != 16 + static_cast<size_t>(n) * 4)
        throw std::invalid_argument("rawvid size mismatch in " + path);
    Tensor<float> t(shape);
    for (i64 i = 0; i < n; ++i) t[i] = detail::get_f32le(p + 16 + 4 * i);
    return t;
}

struct IndexEntry {
    std::string clip_id, source_id, caption;
};

inline void write_index(const std::string& path, const std::vector<IndexEntry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        for (const std::string* s : {&e.clip_id, &e.source_id, &e.caption})
            if (s->find('\t') != std::string::npos || s->find('\n') != std::string::npos)
                throw std::invalid_argument("index fields must not contain tabs or newlines");
        out += e.clip_id + '\t' + e.source_id + '\t' + e.caption + '\n';
    }
    detail::write_file_bytes(path, out);
}

inline std::vector<IndexEntry> read_index(const std::string& path) {
    const std::string data = detail::read_file_bytes(path);
    std::vector<IndexEntry> out;
    size_t pos = 0;
    i64 lineno = 0;
    while (pos < data.size()) {
        size_t end = data.find('\n', pos);
        if (end == std::string::npos) end = data.size();
        const std::string line = data.substr(pos, end - pos);
        pos = end + 1;
        ++lineno;
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw std::invalid_argument("malformed index line " + std::to_string(lineno) + " in " +
                                        path);
        out.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)});
    }
    return out;
}

}  // namespace t2v
