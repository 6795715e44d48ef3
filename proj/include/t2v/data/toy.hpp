#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "t2v/core/rng.hpp"
#include "t2v/core/tensor.hpp"
#include "t2v/data/tensor_io.hpp"

namespace t2v {

struct ToyCorpusSpec {
    std::vector<std::string> background_colors = {"red", "green", "blue", "yellow"};
    std::vector<std::string> motions = {"right", "left", "up", "down"};
    i64 clips_per_combination = 10;
    double noise_level = 0.02;
    std::uint64_t seed = 0;
    i64 t = 32;
    i64 h = 64;
};

struct ToyClip {
    Tensor<float> video;  // [T,3,H,H] in [-1,1]
    std::string caption;
    std::string clip_id;
    std::string source_id;
};

inline const std::vector<std::pair<std::string, std::array<float, 3>>>& toy_palette() {
    static const std::vector<std::pair<std::string, std::array<float, 3>>> pal = {
        {"red", {1.f, -1.f, -1.f}},    {"green", {-1.f, 1.f, -1.f}},
        {"blue", {-1.f, -1.f, 1.f}},   {"yellow", {1.f, 1.f, -1.f}},
        {"magenta", {1.f, -1.f, 1.f}}, {"cyan", {-1.f, 1.f, 1.f}},
        {"white", {1.f, 1.f, 1.f}},    {"black", {-1.f, -1.f, -1.f}},
    };
    return pal;
}

inline std::array<float, 3> color_by_name(const std::string& name) {
    for (const auto& [n, rgb] : toy_palette())
        if (n == name) return rgb;
    throw std::invalid_argument("unknown color name: " + name);
}

// Unit direction (dy, dx) in image coordinates (y grows downward).
inline std::pair<double, double> motion_direction(const std::string& name) {
    const double s = 1.0 / std::sqrt(2.0);
    if (name == "right") return {0.0, 1.0};
    if (name == "left") return {0.0, -1.0};
    if (name == "up") return {-1.0, 0.0};
    if (name == "down") return {1.0, 0.0};
    if (name == "up-right") return {-s, s};
    if (name == "up-left") return {-s, -s};
    if (name == "down-right") return {s, s};
    if (name == "down-left") return {s, -s};
    throw std::invalid_argument("unknown motion name: " + name);
}

inline std::string toy_caption(const std::string& color, const std::string& motion) {
    return "a shape moving " + motion + " on a " + color + " background";
}

// Inverse of toy_caption; throws on anything else.
inline void parse_toy_caption(const std::string& caption, std::string* color,
                              std::string* motion) {
    const std::string head = "a shape moving ";
    const std::string mid = " on a ";
    const std::string tail = " background";
    if (caption.rfind(head, 0) != 0) throw std::invalid_argument("unparseable caption: " + caption);
    const auto mid_at = caption.find(mid, head.size());
    if (mid_at == std::string::npos || caption.size() < tail.size() ||
        caption.compare(caption.size() - tail.size(), tail.size(), tail) != 0)
        throw std::invalid_argument("unparseable caption: " + caption);
    const std::string m = caption.substr(head.size(), mid_at - head.size());
    const std::string c =
        caption.substr(mid_at + mid.size(), caption.size() - tail.size() - mid_at - mid.size());
    motion_direction(m);
    color_by_name(c);
    if (color) *color = c;
    if (motion) *motion = m;
}

inline void validate_toy_spec(const ToyCorpusSpec& spec) {
    if (spec.background_colors.size() < 2 || spec.motions.size() < 2)
        throw std::invalid_argument("toy corpus needs >=2 colors and >=2 motions");
    if (spec.clips_per_combination < 1)
        throw std::invalid_argument("clips_per_combination must be >=1");
    if (spec.noise_level < 0.0) throw std::invalid_argument("noise_level must be >=0");
    if (spec.t < 2 || spec.h < 8) throw std::invalid_argument("toy clips need t>=2 and h>=8");
    for (const auto& c : spec.background_colors) color_by_name(c);
    for (const auto& m : spec.motions) motion_direction(m);
}

namespace detail {

// Overlap of [lo, lo+1) with [a, b), i.e. box-coverage antialiasing.
inline double cover_1d(double lo, double a, double b) {
    return std::max(0.0, std::min(lo + 1.0, b) - std::max(lo, a));
}

}  // namespace detail

// Renders one frame: solid background with a contrasting axis-aligned square
// of side `side` centered at (cy, cx), rendered with exact box coverage so
// the intensity centroid tracks the float center.
inline void render_toy_frame(float* frame, i64 h, const std::array<float, 3>& bg, double cy,
                             double cx, double side) {
    const std::array<float, 3> fg = {-bg[0], -bg[1], -bg[2]};
    const double y0 = cy - side / 2, y1 = cy + side / 2;
    const double x0 = cx - side / 2, x1 = cx + side / 2;
    for (i64 c = 0; c < 3; ++c)
        for (i64 y = 0; y < h; ++y) {
            const double wy = detail::cover_1d(static_cast<double>(y), y0, y1);
            for (i64 x = 0; x < h; ++x) {
                const double cov = wy * detail::cover_1d(static_cast<double>(x), x0, x1);
                frame[(c * h + y) * h + x] =
                    static_cast<float>(bg[c] + cov * (fg[c] - bg[c]));
            }
        }
}

inline ToyClip synthesize_toy_clip(const ToyCorpusSpec& spec, const std::string& color,
                                   const std::string& motion, i64 k, Rng& root) {
    const std::string clip_id =
        "toy_" + color + "_" + motion + "_" + std::to_string(k);
    Rng rng = root.child(clip_id);
    const auto bg = color_by_name(color);
    const auto [dy, dx] = motion_direction(motion);
    const double side = static_cast<double>(spec.h) / 4.0;
    const double span = (static_cast<double>(spec.h) - side) * 0.7;
    const double speed = rng.uniform(0.9, 1.1);
    const double perp = rng.uniform(-static_cast<double>(spec.h) / 8.0,
                                    static_cast<double>(spec.h) / 8.0);
    const double mid = static_cast<double>(spec.h) / 2.0;
    // perpendicular of (dy,dx) is (-dx,dy)
    const double cy0 = mid + (-dx) * perp - dy * span * speed / 2.0;
    const double cx0 = mid + dy * perp - dx * span * speed / 2.0;
    ToyClip clip;
    clip.clip_id = clip_id;
    clip.source_id = "synthetic";
    clip.caption = toy_caption(color, motion);
    clip.video = Tensor<float>::zeros({spec.t, 3, spec.h, spec.h});
    float* base = clip.video.data();
    const i64 frame_sz = 3 * spec.h * spec.h;
    for (i64 t = 0; t < spec.t; ++t) {
        const double f = static_cast<double>(t) / static_cast<double>(spec.t - 1);
        render_toy_frame(base + t * frame_sz, spec.h, bg, cy0 + dy * span * speed * f,
                         cx0 + dx * span * speed * f, side);
    }
    if (spec.noise_level > 0.0)
        for (i64 i = 0; i < clip.video.numel(); ++i) {
            const double v = static_cast<double>(base[i]) +
                             rng.normal() * spec.noise_level;
            base[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
        }
    return clip;
}

inline std::vector<ToyClip> synthesize_toy_corpus(const ToyCorpusSpec& spec) {
    validate_toy_spec(spec);
    Rng root(spec.seed);
    std::vector<ToyClip> clips;
    clips.reserve(spec.background_colors.size() * spec.motions.size() *
                  static_cast<size_t>(spec.clips_per_combination));
    for (const auto& color : spec.background_colors)
        for (const auto& motion : spec.motions)
            for (i64 k = 0; k < spec.clips_per_combination; ++k)
                clips.push_back(synthesize_toy_clip(spec, color, motion, k, root));
    return clips;
}

}  // namespace t2v
