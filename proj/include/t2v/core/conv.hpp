#pragma once

#include <array>

#include "t2v/core/gemm.hpp"
#include "t2v/core/tensor.hpp"

namespace t2v {

// All convolutions run through one 3-D im2col+GEMM core; 2-D wraps it with a
// leading unit spatial dim. Transposed convolution reuses the same three
// primitives with the input/output roles swapped.
struct ConvSpec {
    i64 ci = 0, co = 0;
    std::array<i64, 3> in{}, k{}, s{}, p{}, out{};

    i64 K() const { return k[0] * k[1] * k[2]; }
    i64 O() const { return out[0] * out[1] * out[2]; }
    i64 I() const { return in[0] * in[1] * in[2]; }
};

inline ConvSpec make_conv_spec(i64 ci, i64 co, std::array<i64, 3> in, std::array<i64, 3> k,
                               std::array<i64, 3> s, std::array<i64, 3> p) {
    ConvSpec c{ci, co, in, k, s, p, {}};
    for (int d = 0; d < 3; ++d) {
        if (k[d] < 1 || s[d] < 1 || p[d] < 0 || in[d] < 1)
            throw std::invalid_argument("conv: bad spatial spec");
        i64 span = in[d] + 2 * p[d] - k[d];
        if (span < 0) throw std::invalid_argument("conv: kernel larger than padded input");
        c.out[d] = span / s[d] + 1;
    }
    return c;
}

// x [ci, in] -> col [ci*K, O]
template <class T>
void im2col(const T* x, const ConvSpec& c, T* col) {
    const i64 O = c.O();
    const i64 o1o2 = c.out[1] * c.out[2];
    const i64 i1i2 = c.in[1] * c.in[2];
    for (i64 ci = 0; ci < c.ci; ++ci) {
        const T* xc = x + ci * c.I();
        for (i64 k0 = 0; k0 < c.k[0]; ++k0)
            for (i64 k1 = 0; k1 < c.k[1]; ++k1)
                for (i64 k2 = 0; k2 < c.k[2]; ++k2) {
                    T* row = col + (((ci * c.k[0] + k0) * c.k[1] + k1) * c.k[2] + k2) * O;
                    for (i64 o0 = 0; o0 < c.out[0]; ++o0) {
                        const i64 i0 = o0 * c.s[0] - c.p[0] + k0;
                        const bool ok0 = i0 >= 0 && i0 < c.in[0];
                        for (i64 o1 = 0; o1 < c.out[1]; ++o1) {
                            const i64 i1 = o1 * c.s[1] - c.p[1] + k1;
                            const bool ok1 = ok0 && i1 >= 0 && i1 < c.in[1];
                            T* rr = row + o0 * o1o2 + o1 * c.out[2];
                            for (i64 o2 = 0; o2 < c.out[2]; ++o2) {
                                const i64 i2 = o2 * c.s[2] - c.p[2] + k2;
                                rr[o2] = (ok1 && i2 >= 0 && i2 < c.in[2])
                                             ? xc[i0 * i1i2 + i1 * c.in[2] + i2]
                                             : T(0);
                            }
                        }
                    }
                }
    }
}

// col [ci*K, O] scatter-added into x [ci, in]
template <class T>
void col2im(const T* col, const ConvSpec& c, T* x) {
    const i64 O = c.O();
    const i64 o1o2 = c.out[1] * c.out[2];
    const i64 i1i2 = c.in[1] * c.in[2];
    for (i64 ci = 0; ci < c.ci; ++ci) {
        T* xc = x + ci * c.I();
        for (i64 k0 = 0; k0 < c.k[0]; ++k0)
            for (i64 k1 = 0; k1 < c.k[1]; ++k1)
                for (i64 k2 = 0; k2 < c.k[2]; ++k2) {
                    const T* row = col + (((ci * c.k[0] + k0) * c.k[1] + k1) * c.k[2] + k2) * O;
                    for (i64 o0 = 0; o0 < c.out[0]; ++o0) {
                        const i64 i0 = o0 * c.s[0] - c.p[0] + k0;
                        if (i0 < 0 || i0 >= c.in[0]) continue;
                        for (i64 o1 = 0; o1 < c.out[1]; ++o1) {
                            const i64 i1 = o1 * c.s[1] - c.p[1] + k1;
                            if (i1 < 0 || i1 >= c.in[1]) continue;
                            const T* rr = row + o0 * o1o2 + o1 * c.out[2];
                            for (i64 o2 = 0; o2 < c.out[2]; ++o2) {
                                const i64 i2 = o2 * c.s[2] - c.p[2] + k2;
                                if (i2 >= 0 && i2 < c.in[2]) xc[i0 * i1i2 + i1 * c.in[2] + i2] += rr[o2];
                            }
                        }
                    }
                }
    }
}

// x [B, ci, in], w [co, ci*K] -> y [B, co, O]
template <class T>
void conv_fwd(const T* x, const T* w, const ConvSpec& c, i64 batch, T* y) {
    std::vector<T> col(static_cast<size_t>(c.ci * c.K() * c.O()));
    for (i64 b = 0; b < batch; ++b) {
        im2col(x + b * c.ci * c.I(), c, col.data());
        gemm<T>(false, false, c.co, c.O(), c.ci * c.K(), T(1), w, col.data(), T(0),
                y + b * c.co * c.O());
    }
}

// w [co, ci*K], gy [B, co, O] -> gx [B, ci, in] (overwritten)
template <class T>
void conv_igrad(const T* w, const T* gy, const ConvSpec& c, i64 batch, T* gx) {
    std::vector<T> col(static_cast<size_t>(c.ci * c.K() * c.O()));
    std::fill(gx, gx + batch * c.ci * c.I(), T(0));
    for (i64 b = 0; b < batch; ++b) {
        gemm<T>(true, false, c.ci * c.K(), c.O(), c.co, T(1), w, gy + b * c.co * c.O(), T(0),
                col.data());
        col2im(col.data(), c, gx + b * c.ci * c.I());
    }
}

// x [B, ci, in], gy [B, co, O] -> gw [co, ci*K] (accumulated; caller zeroes)
template <class T>
void conv_wgrad(const T* x, const T* gy, const ConvSpec& c, i64 batch, T* gw) {
    std::vector<T> col(static_cast<size_t>(c.ci * c.K() * c.O()));
    for (i64 b = 0; b < batch; ++b) {
        im2col(x + b * c.ci * c.I(), c, col.data());
        gemm<T>(false, true, c.co, c.ci * c.K(), c.O(), T(1), gy + b * c.co * c.O(), col.data(),
                T(1), gw);
    }
}

}  // namespace t2v
