#pragma once

#include "t2v/core/conv.hpp"
#include "t2v/core/graph.hpp"

namespace t2v {

namespace detail {

inline std::array<i64, 3> lift3(const std::vector<i64>& v, i64 fill) {
    if (v.size() == 3) return {v[0], v[1], v[2]};
    if (v.size() == 2) return {fill, v[0], v[1]};
    throw std::invalid_argument("conv: spatial spec must have 2 or 3 entries");
}

}  // namespace detail

// x [B, Ci, D, H, W] (or [B, Ci, H, W]), w [Co, Ci, k...]. No bias here;
// compose with add_channel_bias.
template <class T>
Var<T> conv(const Var<T>& x, const Var<T>& w, std::vector<i64> stride, std::vector<i64> pad) {
    const auto& xs = x.shape();
    const auto& ws = w.shape();
    const bool vol = xs.size() == 5;
    if (!vol && xs.size() != 4) throw std::invalid_argument("conv: input must be rank 4 or 5");
    if (ws.size() != xs.size()) throw std::invalid_argument("conv: weight rank mismatch");
    if (ws[1] != xs[1])
        throw std::invalid_argument("conv: channels " + shape_str(ws) + " vs " + shape_str(xs));
    const i64 B = xs[0];
    std::array<i64, 3> in = vol ? std::array<i64, 3>{xs[2], xs[3], xs[4]}
                                : std::array<i64, 3>{1, xs[2], xs[3]};
    std::array<i64, 3> k = vol ? std::array<i64, 3>{ws[2], ws[3], ws[4]}
                               : std::array<i64, 3>{1, ws[2], ws[3]};
    const ConvSpec spec = make_conv_spec(xs[1], ws[0], in, k, detail::lift3(stride, 1),
                                         detail::lift3(pad, 0));
    std::vector<i64> oshape = vol
        ? std::vector<i64>{B, spec.co, spec.out[0], spec.out[1], spec.out[2]}
        : std::vector<i64>{B, spec.co, spec.out[1], spec.out[2]};
    Tensor<T> y(oshape);
    conv_fwd(x.value().data(), w.value().data(), spec, B, y.data());
    auto xn = x.node(), wn = w.node();
    return make_node<T>(std::move(y), {x, w}, [xn, wn, spec, B](const Tensor<T>& g) {
        if (xn->requires_grad) {
            Tensor<T> gx(xn->value.shape);
            conv_igrad(wn->value.data(), g.data(), spec, B, gx.data());
            xn->accumulate(gx);
        }
        if (wn->requires_grad) {
            Tensor<T>& gw = wn->ensure_grad();
            conv_wgrad(xn->value.data(), g.data(), spec, B, gw.data());
        }
    });
}

// x [B, Ci, ...], w [Ci, Co, k...]; out = (in-1)*stride - 2*pad + k + out_pad.
template <class T>
Var<T> conv_transpose(const Var<T>& x, const Var<T>& w, std::vector<i64> stride,
                      std::vector<i64> pad, std::vector<i64> out_pad) {
    const auto& xs = x.shape();
    const auto& ws = w.shape();
    const bool vol = xs.size() == 5;
    if (!vol && xs.size() != 4) throw std::invalid_argument("conv_transpose: input must be rank 4 or 5");
    if (ws.size() != xs.size()) throw std::invalid_argument("conv_transpose: weight rank mismatch");
    if (ws[0] != xs[1])
        throw std::invalid_argument("conv_transpose: channels " + shape_str(ws) + " vs " +
                                    shape_str(xs));
    const i64 B = xs[0];
    std::array<i64, 3> in = vol ? std::array<i64, 3>{xs[2], xs[3], xs[4]}
                                : std::array<i64, 3>{1, xs[2], xs[3]};
    std::array<i64, 3> k = vol ? std::array<i64, 3>{ws[2], ws[3], ws[4]}
                               : std::array<i64, 3>{1, ws[2], ws[3]};
    const auto s = detail::lift3(stride, 1);
    const auto p = detail::lift3(pad, 0);
    const auto op = detail::lift3(out_pad, 0);
    std::array<i64, 3> out;
    for (int d = 0; d < 3; ++d) {
        out[d] = (in[d] - 1) * s[d] - 2 * p[d] + k[d] + op[d];
        if (op[d] < 0 || op[d] >= s[d])
            throw std::invalid_argument("conv_transpose: out_pad must be in [0, stride)");
        if (out[d] < 1) throw std::invalid_argument("conv_transpose: empty output");
    }
    // The transposed conv is the adjoint of a forward conv mapping the output
    // space back to the input space; build that conv's spec and reuse its
    // primitives with the roles swapped.
    const ConvSpec spec = make_conv_spec(ws[1], ws[0], out, k, s, p);
    for (int d = 0; d < 3; ++d)
        if (spec.out[d] != in[d])
            throw std::invalid_argument("conv_transpose: inconsistent geometry");
    std::vector<i64> oshape = vol ? std::vector<i64>{B, ws[1], out[0], out[1], out[2]}
                                  : std::vector<i64>{B, ws[1], out[1], out[2]};
    Tensor<T> y(oshape);
    conv_igrad(w.value().data(), x.value().data(), spec, B, y.data());
    auto xn = x.node(), wn = w.node();
    return make_node<T>(std::move(y), {x, w}, [xn, wn, spec, B](const Tensor<T>& g) {
        if (xn->requires_grad) {
            Tensor<T> gx(xn->value.shape);
            conv_fwd(g.data(), wn->value.data(), spec, B, gx.data());
            xn->accumulate(gx);
        }
        if (wn->requires_grad) {
            Tensor<T>& gw = wn->ensure_grad();
            conv_wgrad(g.data(), xn->value.data(), spec, B, gw.data());
        }
    });
}

// Per-sample filters: x [B, C, H, W], f [B, Fo, C, ky, kx], stride 1,
// same-padding (odd kernels). Used to apply text-conditioned filters.
template <class T>
Var<T> dynamic_conv2d(const Var<T>& x, const Var<T>& f) {
    const auto& xs = x.shape();
    const auto& fs = f.shape();
    if (xs.size() != 4 || fs.size() != 5)
        throw std::invalid_argument("dynamic_conv2d: expects x [B,C,H,W], f [B,Fo,C,ky,kx]");
    if (fs[0] != xs[0] || fs[2] != xs[1])
        throw std::invalid_argument("dynamic_conv2d: mismatched shapes " + shape_str(xs) + " vs " +
                                    shape_str(fs));
    if (fs[3] % 2 == 0 || fs[4] % 2 == 0)
        throw std::invalid_argument("dynamic_conv2d: kernels must be odd for same-padding");
    const i64 B = xs[0];
    const ConvSpec spec = make_conv_spec(xs[1], fs[1], {1, xs[2], xs[3]}, {1, fs[3], fs[4]},
                                         {1, 1, 1}, {0, fs[3] / 2, fs[4] / 2});
    Tensor<T> y({B, fs[1], xs[2], xs[3]});
    const i64 xstep = spec.ci * spec.I(), ystep = spec.co * spec.O(), fstep = spec.co * spec.ci * spec.K();
    for (i64 b = 0; b < B; ++b)
        conv_fwd(x.value().data() + b * xstep, f.value().data() + b * fstep, spec, 1,
                 y.data() + b * ystep);
    auto xn = x.node(), fn = f.node();
    return make_node<T>(std::move(y), {x, f},
                        [xn, fn, spec, B, xstep, ystep, fstep](const Tensor<T>& g) {
        if (xn->requires_grad) {
            Tensor<T> gx(xn->value.shape);
            for (i64 b = 0; b < B; ++b)
                conv_igrad(fn->value.data() + b * fstep, g.data() + b * ystep, spec, 1,
                           gx.data() + b * xstep);
            xn->accumulate(gx);
        }
        if (fn->requires_grad) {
            Tensor<T>& gf = fn->ensure_grad();
            for (i64 b = 0; b < B; ++b)
                conv_wgrad(xn->value.data() + b * xstep, g.data() + b * ystep, spec, 1,
                           gf.data() + b * fstep);
        }
    });
}

}  // namespace t2v
