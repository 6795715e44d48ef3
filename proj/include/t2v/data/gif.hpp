#pragma once

#include <string>
#include <vector>

#include "t2v/data/tensor_io.hpp"

namespace t2v {

namespace detail {

// 256-entry palette: 6x6x6 color cube then a 40-step gray ramp.
inline const std::vector<unsigned char>& gif_palette() {
    static const std::vector<unsigned char> pal = [] {
        std::vector<unsigned char> p;
        p.reserve(768);
        for (int r = 0; r < 6; ++r)
            for (int g = 0; g < 6; ++g)
                for (int b = 0; b < 6; ++b) {
                    p.push_back(static_cast<unsigned char>(r * 51));
                    p.push_back(static_cast<unsigned char>(g * 51));
                    p.push_back(static_cast<unsigned char>(b * 51));
                }
        for (int k = 0; k < 40; ++k) {
            const auto v = static_cast<unsigned char>((k * 255 + 19) / 39);
            p.push_back(v);
            p.push_back(v);
            p.push_back(v);
        }
        return p;
    }();
    return pal;
}

inline unsigned char gif_quantize(unsigned char r, unsigned char g, unsigned char b) {
    const auto& pal = gif_palette();
    auto dist_to = [&](int idx) {
        const int dr = r - pal[static_cast<size_t>(idx * 3)];
        const int dg = g - pal[static_cast<size_t>(idx * 3 + 1)];
        const int db = b - pal[static_cast<size_t>(idx * 3 + 2)];
        return dr * dr + dg * dg + db * db;
    };
    const int cube = ((r + 25) / 51) * 36 + ((g + 25) / 51) * 6 + (b + 25) / 51;
    const int gray = 216 + std::min(39, (((r + g + b) / 3) * 39 + 127) / 255);
    return static_cast<unsigned char>(dist_to(gray) < dist_to(cube) ? gray : cube);
}

class LzwBitWriter {
public:
    void put(std::uint32_t code, int bits) {
        acc_ |= static_cast<std::uint64_t>(code) << nbits_;
        nbits_ += bits;
        while (nbits_ >= 8) {
            bytes_.push_back(static_cast<unsigned char>(acc_ & 0xff));
            acc_ >>= 8;
            nbits_ -= 8;
        }
    }
    std::vector<unsigned char> finish() {
        if (nbits_ > 0) bytes_.push_back(static_cast<unsigned char>(acc_ & 0xff));
        return std::move(bytes_);
    }

private:
    std::vector<unsigned char> bytes_;
    std::uint64_t acc_ = 0;
    int nbits_ = 0;
};

inline std::vector<unsigned char> lzw_encode(const std::vector<unsigned char>& indices) {
    constexpr int kMin = 8;
    constexpr std::uint32_t kClear = 1 << kMin, kEnd = kClear + 1;
    LzwBitWriter bw;
    // dictionary: code for (prefix_code << 8 | byte)
    std::vector<std::int32_t> dict;
    std::uint32_t next_code = 0;
    int width = 0;
    auto reset = [&] {
        dict.assign(4096 << 8, -1);
        next_code = kEnd + 1;
        width = kMin + 1;
    };
    reset();
    bw.put(kClear, width);
    std::uint32_t prefix = 0xffffffff;
    for (unsigned char sym : indices) {
        if (prefix == 0xffffffff) {
            prefix = sym;
            continue;
        }
        const size_t key = (static_cast<size_t>(prefix) << 8) | sym;
        if (dict[key] >= 0) {
            prefix = static_cast<std::uint32_t>(dict[key]);
            continue;
        }
        bw.put(prefix, width);
        if (next_code < 4096) {
            dict[key] = static_cast<std::int32_t>(next_code++);
            if (next_code - 1 == (1u << width) && width < 12) ++width;
        } else {
            bw.put(kClear, width);
            reset();
        }
        prefix = sym;
    }
    if (prefix != 0xffffffff) bw.put(prefix, width);
    bw.put(kEnd, width);
    return bw.finish();
}

inline void put_u16le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

// Animated GIF89a with the fixed global palette, infinite loop, constant
// frame delay (centiseconds). Frames are interleaved RGB byte rows.
inline void write_gif(const std::string& path, const std::vector<std::vector<unsigned char>>& frames,
                      i64 h, i64 w, int delay_cs) {
    if (frames.empty()) throw std::invalid_argument("write_gif: no frames");
    for (const auto& f : frames)
        if (static_cast<i64>(f.size()) != h * w * 3)
            throw std::invalid_argument("write_gif: frame size mismatch");
    std::string out = "GIF89a";
    detail::put_u16le(out, static_cast<std::uint32_t>(w));
    detail::put_u16le(out, static_cast<std::uint32_t>(h));
    out += '\xF7';  // global table, 8-bit color resolution, 256 entries
    out += '\x00';  // background index
    out += '\x00';  // aspect
    const auto& pal = detail::gif_palette();
    out.append(reinterpret_cast<const char*>(pal.data()), pal.size());
    // infinite-loop application extension
    out += "\x21\xFF\x0B";
    out += "NETSCAPE2.0";
    out += "\x03\x01";
    out += '\x00';
    out += '\x00';
    out += '\x00';
    for (const auto& frame : frames) {
        out += '\x21';  // graphic control, no transparency
        out += '\xF9';
        out += '\x04';
        out += '\x00';
        detail::put_u16le(out, static_cast<std::uint32_t>(delay_cs));
        out += '\x00';
        out += '\x00';
        out += '\x2C';  // image descriptor
        detail::put_u16le(out, 0);
        detail::put_u16le(out, 0);
        detail::put_u16le(out, static_cast<std::uint32_t>(w));
        detail::put_u16le(out, static_cast<std::uint32_t>(h));
        out += '\x00';
        std::vector<unsigned char> idx(static_cast<size_t>(h * w));
        for (i64 i = 0; i < h * w; ++i)
            idx[static_cast<size_t>(i)] = detail::gif_quantize(
                frame[static_cast<size_t>(3 * i)], frame[static_cast<size_t>(3 * i + 1)],
                frame[static_cast<size_t>(3 * i + 2)]);
        out += '\x08';  // LZW minimum code size
        const auto lzw = detail::lzw_encode(idx);
        for (size_t pos = 0; pos < lzw.size(); pos += 255) {
            const size_t n = std::min<size_t>(255, lzw.size() - pos);
            out += static_cast<char>(n);
            out.append(reinterpret_cast<const char*>(lzw.data() + pos), n);
        }
        out += '\x00';  // block terminator
    }
    out += '\x3B';  // trailer
    detail::write_file_bytes(path, out);
}

// Decodes GIFs of the exact profile write_gif emits; returns palette-index
// frames (palette via detail::gif_palette()).
inline std::vector<std::vector<unsigned char>> read_gif_indices(const std::string& path, i64* out_h,
                                                                i64* out_w) {
    const std::string data = detail::read_file_bytes(path);
    if (data.size() < 13 || data.compare(0, 6, "GIF89a") != 0)
        throw std::invalid_argument("not a GIF89a file: " + path);
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    const i64 w = p[6] | (p[7] << 8);
    const i64 h = p[8] | (p[9] << 8);
    if (out_w) *out_w = w;
    if (out_h) *out_h = h;
    size_t pos = 13;
    if (p[10] & 0x80) pos += 3u << (((p[10] & 7)) + 1);  // skip global palette
    std::vector<std::vector<unsigned char>> frames;
    auto skip_subblocks = [&](size_t at) {
        while (at < data.size() && p[at] != 0) at += 1 + p[at];
        return at + 1;
    };
    while (pos < data.size() && p[pos] != 0x3B) {
        if (p[pos] == 0x21) {  // extension
            pos = skip_subblocks(pos + 2);
            continue;
        }
        if (p[pos] != 0x2C) throw std::invalid_argument("unexpected GIF block in " + path);
        pos += 9;
        if (p[pos] & 0x80) throw std::invalid_argument("local palettes unsupported in " + path);
        ++pos;
        const int min_code = p[pos++];
        std::vector<unsigned char> stream;
        while (pos < data.size() && p[pos] != 0) {
            stream.insert(stream.end(), p + pos + 1, p + pos + 1 + p[pos]);
            pos += 1 + p[pos];
        }
        ++pos;
        // LZW decode
        const std::uint32_t clear = 1u << min_code, end = clear + 1;
        std::vector<std::vector<unsigned char>> table;
        auto reset_table = [&] {
            table.assign(end + 1, {});
            for (std::uint32_t i = 0; i < clear; ++i)
                table[i] = {static_cast<unsigned char>(i)};
        };
        reset_table();
        int width = min_code + 1;
        std::uint64_t acc = 0;
        int nbits = 0;
        size_t bytepos = 0;
        std::vector<unsigned char> out;
        std::vector<unsigned char> prev;
        auto next_code = [&]() -> std::int64_t {
            while (nbits < width) {
                if (bytepos >= stream.size()) return -1;
                acc |= static_cast<std::uint64_t>(stream[bytepos++]) << nbits;
                nbits += 8;
            }
            const auto code = static_cast<std::uint32_t>(acc & ((1u << width) - 1));
            acc >>= width;
            nbits -= width;
            return code;
        };
        for (;;) {
            const std::int64_t c = next_code();
            if (c < 0 || c == static_cast<std::int64_t>(end)) break;
            if (c == static_cast<std::int64_t>(clear)) {
                reset_table();
                width = min_code + 1;
                prev.clear();
                continue;
            }
            std::vector<unsigned char> entry;
            if (c < static_cast<std::int64_t>(table.size())) {
                entry = table[static_cast<size_t>(c)];
            } else if (!prev.empty()) {
                entry = prev;
                entry.push_back(prev[0]);
            } else {
                throw std::invalid_argument("corrupt LZW stream in " + path);
            }
            out.insert(out.end(), entry.begin(), entry.end());
            if (!prev.empty() && table.size() < 4096) {
                auto grown = prev;
                grown.push_back(entry[0]);
                table.push_back(std::move(grown));
                if (table.size() == (1u << width) && width < 12) ++width;
            }
            prev = std::move(entry);
        }
        if (static_cast<i64>(out.size()) != h * w)
            throw std::invalid_argument("GIF frame pixel count mismatch in " + path);
        frames.push_back(std::move(out));
    }
    return frames;
}

}  // namespace t2v
