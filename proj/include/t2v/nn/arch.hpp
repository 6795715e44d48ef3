#pragma once

#include <array>

#include "t2v/nn/layers.hpp"

namespace t2v {

// Channel schedule for stride-2 pyramids: doubles per level, capped at 8x.
inline i64 pyramid_width(i64 base, i64 level) { return std::min<i64>(base << level, base * 8); }

// Per-axis downsampling plan for one 3-D conv layer given current extents:
// halve while the axis allows it, freeze at 1.
struct AxisPlan {
    std::array<i64, 3> k, s, p, out;
};

inline AxisPlan plan_down_axes(std::array<i64, 3> dims) {
    AxisPlan a{};
    for (int d = 0; d < 3; ++d) {
        if (dims[d] >= 4) {
            a.k[d] = 4; a.s[d] = 2; a.p[d] = 1; a.out[d] = dims[d] / 2;
        } else if (dims[d] >= 2) {
            a.k[d] = 2; a.s[d] = 2; a.p[d] = 0; a.out[d] = dims[d] / 2;
        } else {
            a.k[d] = 1; a.s[d] = 1; a.p[d] = 0; a.out[d] = 1;
        }
    }
    return a;
}

}  // namespace t2v
