#pragma once

#include <cmath>

#include "t2v/core/tensor.hpp"

namespace t2v {

// Bilinear resize of a [C, H, W] image (edge-clamped, align-corners-false).
inline Tensor<float> resize_bilinear(const Tensor<float>& img, i64 out_h, i64 out_w) {
    if (img.rank() != 3) throw std::invalid_argument("resize_bilinear: expected [C,H,W]");
    const i64 C = img.dim(0), H = img.dim(1), W = img.dim(2);
    Tensor<float> out({C, out_h, out_w});
    const double sy = static_cast<double>(H) / static_cast<double>(out_h);
    const double sx = static_cast<double>(W) / static_cast<double>(out_w);
    for (i64 oy = 0; oy < out_h; ++oy) {
        const double fy = (static_cast<double>(oy) + 0.5) * sy - 0.5;
        const i64 y0 = static_cast<i64>(std::floor(fy));
        const double wy = fy - static_cast<double>(y0);
        const i64 ya = std::min(std::max<i64>(y0, 0), H - 1);
        const i64 yb = std::min(std::max<i64>(y0 + 1, 0), H - 1);
        for (i64 ox = 0; ox < out_w; ++ox) {
            const double fx = (static_cast<double>(ox) + 0.5) * sx - 0.5;
            const i64 x0 = static_cast<i64>(std::floor(fx));
            const double wx = fx - static_cast<double>(x0);
            const i64 xa = std::min(std::max<i64>(x0, 0), W - 1);
            const i64 xb = std::min(std::max<i64>(x0 + 1, 0), W - 1);
            for (i64 c = 0; c < C; ++c) {
                const double v00 = img[(c * H + ya) * W + xa];
                const double v01 = img[(c * H + ya) * W + xb];
                const double v10 = img[(c * H + yb) * W + xa];
                const double v11 = img[(c * H + yb) * W + xb];
                out[(c * out_h + oy) * out_w + ox] = static_cast<float>(
                    (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11));
            }
        }
    }
    return out;
}

// [-1,1] float channel value -> 8-bit
inline unsigned char to_u8(float v) {
    const double x = (static_cast<double>(v) + 1.0) * 0.5 * 255.0;
    return static_cast<unsigned char>(std::min(255.0, std::max(0.0, std::round(x))));
}

inline float from_u8(unsigned char v) {
    return static_cast<float>(static_cast<double>(v) / 255.0 * 2.0 - 1.0);
}

// [C,H,W] in [-1,1] -> interleaved RGB bytes [H*W*3]
inline std::vector<unsigned char> to_rgb8(const Tensor<float>& img) {
    if (img.rank() != 3 || img.dim(0) != 3) throw std::invalid_argument("to_rgb8: expected [3,H,W]");
    const i64 H = img.dim(1), W = img.dim(2);
    std::vector<unsigned char> out(static_cast<size_t>(H * W * 3));
    for (i64 y = 0; y < H; ++y)
        for (i64 x = 0; x < W; ++x)
            for (i64 c = 0; c < 3; ++c)
                out[static_cast<size_t>((y * W + x) * 3 + c)] = to_u8(img[(c * H + y) * W + x]);
    return out;
}

// [C,H,W] RGB in [0,1] or [-1,1] -> grayscale [H,W] (Rec.601 weights)
inline Tensor<float> to_gray(const Tensor<float>& img) {
    if (img.rank() != 3 || img.dim(0) != 3) throw std::invalid_argument("to_gray: expected [3,H,W]");
    const i64 H = img.dim(1), W = img.dim(2);
    Tensor<float> g({H, W});
    for (i64 i = 0; i < H * W; ++i)
        g[i] = 0.299f * img[i] + 0.587f * img[H * W + i] + 0.114f * img[2 * H * W + i];
    return g;
}

}  // namespace t2v
