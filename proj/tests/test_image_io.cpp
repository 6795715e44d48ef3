#include <catch2/catch_amalgamated.hpp>

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "t2v/data/gif.hpp"
#include "t2v/data/image.hpp"
#include "t2v/data/png.hpp"

using namespace t2v;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

std::uint32_t be32(const unsigned char* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

// GIF-flavor LZW decoder written from the format rules: LSB-first bit
// packing, 8-bit symbols, clear/end codes, width grows when the table fills
// the current code space (cap 12 bits).
std::vector<unsigned char> reference_lzw_decode(const std::vector<unsigned char>& bytes) {
    constexpr std::uint32_t kClear = 256, kEnd = 257;
    std::vector<std::vector<unsigned char>> table;
    int width = 9;
    auto reset = [&] {
        table.clear();
        for (std::uint32_t i = 0; i < 256; ++i) table.push_back({static_cast<unsigned char>(i)});
        table.push_back({});  // clear
        table.push_back({});  // end
        width = 9;
    };
    reset();
    std::uint64_t acc = 0;
    int nbits = 0;
    size_t at = 0;
    std::vector<unsigned char> out, prev;
    for (;;) {
        while (nbits < width) {
            if (at >= bytes.size()) return out;
            acc |= static_cast<std::uint64_t>(bytes[at++]) << nbits;
            nbits += 8;
        }
        const std::uint32_t code = static_cast<std::uint32_t>(acc & ((1u << width) - 1));
        acc >>= width;
        nbits -= width;
        if (code == kEnd) return out;
        if (code == kClear) {
            reset();
            prev.clear();
            continue;
        }
        std::vector<unsigned char> entry;
        if (code < table.size()) {
            entry = table[code];
        } else {
            REQUIRE_FALSE(prev.empty());  // corrupt stream otherwise
            entry = prev;
            entry.push_back(prev[0]);
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
}

}  // namespace

TEST_CASE("png files are well-formed down to the chunk level") {
    const i64 h = 2, w = 3;
    const std::vector<unsigned char> rgb = {10,  20,  30,  40,  50,  60,  70,  80,  90,
                                            100, 110, 120, 130, 140, 150, 160, 170, 180};
    TempFile f("png_chunks_test.png");
    write_png(f.path, rgb, h, w);

    const std::string data = detail::read_file_bytes(f.path);
    REQUIRE(data.size() > 8);
    REQUIRE(data.compare(0, 8, "\x89PNG\r\n\x1a\n", 8) == 0);

    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    size_t pos = 8;
    std::vector<std::string> types;
    std::string idat;
    while (pos + 12 <= data.size()) {
        const std::uint32_t len = be32(p + pos);
        const std::string type = data.substr(pos + 4, 4);
        types.push_back(type);
        REQUIRE(pos + 12 + len <= data.size());
        // CRC covers type + body
        const auto crc = crc32(crc32(0L, nullptr, 0), p + pos + 4, 4 + len);
        REQUIRE(be32(p + pos + 8 + len) == static_cast<std::uint32_t>(crc));
        if (type == "IHDR") {
            REQUIRE(len == 13);
            REQUIRE(be32(p + pos + 8) == w);
            REQUIRE(be32(p + pos + 12) == h);
            REQUIRE(p[pos + 16] == 8);  // bit depth
            REQUIRE(p[pos + 17] == 2);  // truecolor
        } else if (type == "IDAT") {
            idat.append(data, pos + 8, len);
        }
        pos += 12 + len;
    }
    REQUIRE(types == std::vector<std::string>{"IHDR", "IDAT", "IEND"});

    // independent zlib inflate: each row is filter byte 0 plus raw pixels
    const size_t expect = static_cast<size_t>(h * (1 + w * 3));
    std::string raw(expect, '\0');
    uLongf got = static_cast<uLongf>(expect);
    REQUIRE(uncompress(reinterpret_cast<Bytef*>(raw.data()), &got,
                       reinterpret_cast<const Bytef*>(idat.data()),
                       static_cast<uLong>(idat.size())) == Z_OK);
    REQUIRE(got == expect);
    for (i64 y = 0; y < h; ++y) {
        REQUIRE(raw[static_cast<size_t>(y * (1 + w * 3))] == 0);
        REQUIRE(std::memcmp(raw.data() + y * (1 + w * 3) + 1, rgb.data() + y * w * 3,
                            static_cast<size_t>(w * 3)) == 0);
    }
}

TEST_CASE("png round trip and error paths") {
    Rng rng(71);
    const i64 h = 7, w = 5;
    std::vector<unsigned char> rgb(static_cast<size_t>(h * w * 3));
    for (auto& b : rgb) b = static_cast<unsigned char>(rng.next_u64() & 0xff);
    TempFile f("png_roundtrip_test.png");
    write_png(f.path, rgb, h, w);
    i64 rh = 0, rw = 0;
    const auto back = read_png(f.path, &rh, &rw);
    REQUIRE(rh == h);
    REQUIRE(rw == w);
    REQUIRE(back == rgb);

    REQUIRE_THROWS_AS(write_png(f.path, rgb, h, w + 1), std::invalid_argument);
    REQUIRE_THROWS_AS(read_png("does_not_exist.png", nullptr, nullptr), std::invalid_argument);
    TempFile g("png_bogus_test.png");
    detail::write_file_bytes(g.path, "definitely not a png");
    REQUIRE_THROWS_AS(read_png(g.path, nullptr, nullptr), std::invalid_argument);
}

TEST_CASE("byte conversions map the signed range onto octets") {
    REQUIRE(to_u8(-1.0f) == 0);
    REQUIRE(to_u8(1.0f) == 255);
    REQUIRE(to_u8(-2.0f) == 0);    // clamped
    REQUIRE(to_u8(2.0f) == 255);   // clamped
    REQUIRE(to_u8(0.0f) == 128);   // round(127.5)
    for (int v = 0; v <= 255; ++v) {
        const float x = from_u8(static_cast<unsigned char>(v));
        REQUIRE(x >= -1.0f);
        REQUIRE(x <= 1.0f);
        REQUIRE(to_u8(x) == v);
    }

    Tensor<float> img = Tensor<float>::from({3, 1, 2}, {-1.f, 1.f, 0.f, -1.f, 1.f, 0.f});
    const auto rgb = to_rgb8(img);  // interleaved: pixel (0,0) = (-1, 0, 1)
    REQUIRE(rgb == std::vector<unsigned char>{0, 128, 255, 255, 0, 128});
    REQUIRE_THROWS_AS(to_rgb8(Tensor<float>::zeros({1, 2, 2})), std::invalid_argument);
}

TEST_CASE("gif palette is a color cube plus a gray ramp") {
    const auto& pal = detail::gif_palette();
    REQUIRE(pal.size() == 768);
    for (int r = 0; r < 6; ++r)
        for (int g = 0; g < 6; ++g)
            for (int b = 0; b < 6; ++b) {
                const size_t i = static_cast<size_t>((r * 36 + g * 6 + b) * 3);
                REQUIRE(pal[i] == r * 51);
                REQUIRE(pal[i + 1] == g * 51);
                REQUIRE(pal[i + 2] == b * 51);
            }
    for (int k = 0; k < 40; ++k) {
        const size_t i = static_cast<size_t>((216 + k) * 3);
        REQUIRE(pal[i] == pal[i + 1]);
        REQUIRE(pal[i + 1] == pal[i + 2]);
        if (k) REQUIRE(pal[i] > pal[i - 3]);  // strictly increasing ramp
    }
    REQUIRE(pal[216 * 3] == 0);
    REQUIRE(pal[255 * 3] == 255);

    // quantizing an exact palette color is lossless
    for (int idx = 0; idx < 256; ++idx) {
        const unsigned char r = pal[static_cast<size_t>(idx * 3)];
        const unsigned char g = pal[static_cast<size_t>(idx * 3 + 1)];
        const unsigned char b = pal[static_cast<size_t>(idx * 3 + 2)];
        const int q = detail::gif_quantize(r, g, b);
        REQUIRE(pal[static_cast<size_t>(q * 3)] == r);
        REQUIRE(pal[static_cast<size_t>(q * 3 + 1)] == g);
        REQUIRE(pal[static_cast<size_t>(q * 3 + 2)] == b);
    }
}

TEST_CASE("lzw streams decode back to their input") {
    Rng rng(72);

    std::vector<std::vector<unsigned char>> cases;
    cases.push_back({});
    cases.push_back({7});
    cases.push_back(std::vector<unsigned char>(400, 9));  // long run
    std::vector<unsigned char> ab;
    for (int i = 0; i < 300; ++i) ab.push_back(i % 2 ? 1 : 2);
    cases.push_back(ab);
    std::vector<unsigned char> rnd(2000);
    for (auto& b : rnd) b = static_cast<unsigned char>(rng.next_u64() % 256);
    cases.push_back(rnd);  // grows the code width past 9 bits
    std::vector<unsigned char> big(9000);
    for (auto& b : big) b = static_cast<unsigned char>(rng.next_u64() % 251);
    cases.push_back(big);  // overflows the 4096-entry table, forcing a clear

    for (size_t i = 0; i < cases.size(); ++i) {
        INFO("case " << i << " size " << cases[i].size());
        REQUIRE(reference_lzw_decode(detail::lzw_encode(cases[i])) == cases[i]);
    }
}

TEST_CASE("gif files round trip exact palette content") {
    const i64 h = 8, w = 8;
    const auto& pal = detail::gif_palette();
    std::vector<std::vector<unsigned char>> frames;
    std::vector<std::vector<unsigned char>> want_idx;
    for (int f = 0; f < 3; ++f) {
        std::vector<unsigned char> frame(static_cast<size_t>(h * w * 3));
        std::vector<unsigned char> idx(static_cast<size_t>(h * w));
        for (i64 i = 0; i < h * w; ++i) {
            const unsigned char p = static_cast<unsigned char>((i * 31 + f * 7) % 216);
            idx[static_cast<size_t>(i)] = p;
            for (int c = 0; c < 3; ++c)
                frame[static_cast<size_t>(3 * i + c)] = pal[static_cast<size_t>(p * 3 + c)];
        }
        frames.push_back(std::move(frame));
        want_idx.push_back(std::move(idx));
    }

    TempFile f("gif_roundtrip_test.gif");
    write_gif(f.path, frames, h, w, 12);
    i64 rh = 0, rw = 0;
    const auto got = read_gif_indices(f.path, &rh, &rw);
    REQUIRE(rh == h);
    REQUIRE(rw == w);
    REQUIRE(got.size() == 3);
    for (size_t i = 0; i < 3; ++i) REQUIRE(got[i] == want_idx[i]);

    // header, loop extension and frame delay are in the byte stream
    const std::string data = detail::read_file_bytes(f.path);
    REQUIRE(data.compare(0, 6, "GIF89a") == 0);
    REQUIRE(data.find("NETSCAPE2.0") != std::string::npos);
    const auto gce = data.find("\x21\xF9\x04", 6);
    REQUIRE(gce != std::string::npos);
    REQUIRE(static_cast<unsigned char>(data[gce + 4]) == 12);  // delay low byte
    REQUIRE(static_cast<unsigned char>(data[gce + 5]) == 0);

    REQUIRE_THROWS_AS(write_gif(f.path, {}, h, w, 10), std::invalid_argument);
    REQUIRE_THROWS_AS(write_gif(f.path, {std::vector<unsigned char>(3)}, h, w, 10),
                      std::invalid_argument);
    TempFile g("gif_bogus_test.gif");
    detail::write_file_bytes(g.path, "GIF87a??");
    REQUIRE_THROWS_AS(read_gif_indices(g.path, nullptr, nullptr), std::invalid_argument);
}

TEST_CASE("raw video files round trip bit for bit") {
    Rng rng(73);
    Tensor<float> video({3, 2, 4, 5});
    fill_normal(video, rng, 0.0, 2.0);
    video[0] = -0.0f;
    video[1] = 1e-30f;
    TempFile f("rawvid_roundtrip_test.rawvid");
    write_rawvid(f.path, video);

    const std::string data = detail::read_file_bytes(f.path);
    REQUIRE(data.size() == 16 + static_cast<size_t>(video.numel()) * 4);
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    REQUIRE(detail::get_u32le(p) == 3);
    REQUIRE(detail::get_u32le(p + 4) == 2);
    REQUIRE(detail::get_u32le(p + 8) == 4);
    REQUIRE(detail::get_u32le(p + 12) == 5);

    const Tensor<float> back = read_rawvid(f.path);
    REQUIRE(back.shape == video.shape);
    for (i64 i = 0; i < video.numel(); ++i) {
        std::uint32_t a, b;
        std::memcpy(&a, &video[i], 4);
        std::memcpy(&b, &back[i], 4);
        REQUIRE(a == b);
    }

    REQUIRE_THROWS_AS(write_rawvid(f.path, Tensor<float>::zeros({2, 3})), std::invalid_argument);
    TempFile g("rawvid_short_test.rawvid");
    detail::write_file_bytes(g.path, "short");
    REQUIRE_THROWS_AS(read_rawvid(g.path), std::invalid_argument);
    TempFile m("rawvid_mismatch_test.rawvid");
    detail::write_file_bytes(m.path, data.substr(0, data.size() - 4));
    REQUIRE_THROWS_AS(read_rawvid(m.path), std::invalid_argument);
}

TEST_CASE("index files round trip and reject malformed content") {
    TempFile f("index_roundtrip_test.tsv");
    const std::vector<IndexEntry> entries = {{"clip0", "src0", "a red car"},
                                             {"clip1", "src1", "waves on a beach"}};
    write_index(f.path, entries);
    const auto back = read_index(f.path);
    REQUIRE(back.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
        REQUIRE(back[i].clip_id == entries[i].clip_id);
        REQUIRE(back[i].source_id == entries[i].source_id);
        REQUIRE(back[i].caption == entries[i].caption);
    }

    REQUIRE_THROWS_AS(write_index(f.path, {{"a\tb", "s", "c"}}), std::invalid_argument);
    TempFile g("index_malformed_test.tsv");
    detail::write_file_bytes(g.path, "only_one_field\n");
    REQUIRE_THROWS_AS(read_index(g.path), std::invalid_argument);
}

TEST_CASE("bilinear resize identities") {
    Rng rng(74);
    Tensor<float> img({3, 6, 7});
    fill_uniform(img, rng, -1.0, 1.0);
    const Tensor<float> same = resize_bilinear(img, 6, 7);
    for (i64 i = 0; i < img.numel(); ++i) REQUIRE(same[i] == img[i]);

    Tensor<float> flat = Tensor<float>::full({3, 4, 4}, 0.25f);
    const Tensor<float> up = resize_bilinear(flat, 9, 5);
    REQUIRE(up.shape == std::vector<i64>{3, 9, 5});
    for (i64 i = 0; i < up.numel(); ++i) REQUIRE(up[i] == Catch::Approx(0.25f).margin(1e-7));

    // interpolation stays inside the input range
    const Tensor<float> down = resize_bilinear(img, 3, 3);
    float lo = 1e9f, hi = -1e9f;
    for (i64 i = 0; i < img.numel(); ++i) {
        lo = std::min(lo, img[i]);
        hi = std::max(hi, img[i]);
    }
    for (i64 i = 0; i < down.numel(); ++i) {
        REQUIRE(down[i] >= lo - 1e-6f);
        REQUIRE(down[i] <= hi + 1e-6f);
    }
    REQUIRE_THROWS_AS(resize_bilinear(Tensor<float>::zeros({4, 4}), 2, 2), std::invalid_argument);
}
