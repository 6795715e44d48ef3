#pragma once

#include <cmath>
#include <vector>

#include "t2v/core/gemm.hpp"
#include "t2v/core/graph.hpp"

namespace t2v {

namespace detail {

// Iterate a dst shape in row-major order together with a (possibly
// broadcast) source offset; sstride entries are 0 along expanded dims.
// f(dst_linear, src_offset). Odometer walk, no div/mod per element.
template <class F>
void broadcast_walk(const std::vector<i64>& dshape, const std::vector<i64>& sstride, F&& f) {
    const int r = static_cast<int>(dshape.size());
    i64 total = 1;
    for (i64 d : dshape) total *= d;
    if (total == 0) return;
    std::vector<i64> coord(static_cast<size_t>(r), 0);
    i64 soff = 0;
    for (i64 i = 0; i < total; ++i) {
        f(i, soff);
        for (int d = r - 1; d >= 0; --d) {
            soff += sstride[static_cast<size_t>(d)];
            if (++coord[static_cast<size_t>(d)] < dshape[static_cast<size_t>(d)]) break;
            soff -= sstride[static_cast<size_t>(d)] * dshape[static_cast<size_t>(d)];
            coord[static_cast<size_t>(d)] = 0;
        }
    }
}

inline std::vector<i64> broadcast_strides(const std::vector<i64>& src,
                                          const std::vector<i64>& dst) {
    if (src.size() != dst.size())
        throw std::invalid_argument("broadcast: rank mismatch " + shape_str(src) + " vs " +
                                    shape_str(dst));
    std::vector<i64> stride(src.size());
    i64 s = 1;
    for (size_t d = src.size(); d-- > 0;) {
        if (src[d] == dst[d])
            stride[d] = s;
        else if (src[d] == 1)
            stride[d] = 0;
        else
            throw std::invalid_argument("broadcast: cannot expand " + shape_str(src) + " to " +
                                        shape_str(dst));
        s *= src[d];
    }
    return stride;
}

}  // namespace detail

// ---- elementwise ----

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    check_shape(a.value(), b.shape(), "add");
    Tensor<T> y(a.shape());
    for (i64 i = 0; i < y.numel(); ++i) y[i] = a.value()[i] + b.value()[i];
    auto an = a.node(), bn = b.node();
    return make_node<T>(std::move(y), {a, b}, [an, bn](const Tensor<T>& g) {
        if (an->requires_grad) an->accumulate(g);
        if (bn->requires_grad) bn->accumulate(g);
    });
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
    check_shape(a.value(), b.shape(), "sub");
    Tensor<T> y(a.shape());
    for (i64 i = 0; i < y.numel(); ++i) y[i] = a.value()[i] - b.value()[i];
    auto an = a.node(), bn = b.node();
    return make_node<T>(std::move(y), {a, b}, [an, bn](const Tensor<T>& g) {
        if (an->requires_grad) an->accumulate(g);
        if (bn->requires_grad) {
            Tensor<T>& dst = bn->ensure_grad();
            for (i64 i = 0; i < g.numel(); ++i) dst[i] -= g[i];
        }
    });
}

template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    check_shape(a.value(), b.shape(), "mul");
    Tensor<T> y(a.shape());
    for (i64 i = 0; i < y.numel(); ++i) y[i] = a.value()[i] * b.value()[i];
    auto an = a.node(), bn = b.node();
    return make_node<T>(std::move(y), {a, b}, [an, bn](const Tensor<T>& g) {
        if (an->requires_grad) {
            Tensor<T>& dst = an->ensure_grad();
            for (i64 i = 0; i < g.numel(); ++i) dst[i] += g[i] * bn->value[i];
        }
        if (bn->requires_grad) {
            Tensor<T>& dst = bn->ensure_grad();
            for (i64 i = 0; i < g.numel(); ++i) dst[i] += g[i] * an->value[i];
        }
    });
}

// a*x + b with scalar a, b.
template <class T>
Var<T> affine(const Var<T>& x, double a, double b) {
    Tensor<T> y(x.shape());
    const T ta = static_cast<T>(a), tb = static_cast<T>(b);
    for (i64 i = 0; i < y.numel(); ++i) y[i] = ta * x.value()[i] + tb;
    auto xn = x.node();
    return make_node<T>(std::move(y), {x}, [xn, ta](const Tensor<T>& g) {
        Tensor<T>& dst = xn->ensure_grad();
        for (i64 i = 0; i < g.numel(); ++i) dst[i] += ta * g[i];
    });
}

template <class T>
Var<T> operator+(const Var<T>& a, const Var<T>& b) { return add(a, b); }
template <class T>
Var<T> operator-(const Var<T>& a, const Var<T>& b) { return sub(a, b); }
template <class T>
Var<T> operator*(const Var<T>& a, const Var<T>& b) { return mul(a, b); }

template <class T, class FwdF, class GradF>
Var<T> unary_op(const Var<T>& x, FwdF fwd, GradF dfn) {
    Tensor<T> y(x.shape());
    for (i64 i = 0; i < y.numel(); ++i) y[i] = fwd(x.value()[i]);
    auto xn = x.node();
    Tensor<T> yv = y;  // shared storage, for grads expressed in terms of output
    return make_node<T>(std::move(y), {x}, [xn, yv, dfn](const Tensor<T>& g) {
        Tensor<T>& dst = xn->ensure_grad();
        for (i64 i = 0; i < g.numel(); ++i) dst[i] += g[i] * dfn(xn->value[i], yv[i]);
    });
}

template <class T>
Var<T> relu(const Var<T>& x) {
    return unary_op(x, [](T v) { return v > T(0) ? v : T(0); },
                    [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <class T>
Var<T> leaky_relu(const Var<T>& x, double slope = 0.2) {
    const T s = static_cast<T>(slope);
    return unary_op(x, [s](T v) { return v > T(0) ? v : s * v; },
                    [s](T v, T) { return v > T(0) ? T(1) : s; });
}

template <class T>
Var<T> tanh_op(const Var<T>& x) {
    return unary_op(x, [](T v) { return std::tanh(v); },
                    [](T, T y) { return T(1) - y * y; });
}

template <class T>
Var<T> sigmoid(const Var<T>& x) {
    return unary_op(x, [](T v) { return T(1) / (T(1) + std::exp(-v)); },
                    [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Var<T> exp_op(const Var<T>& x) {
    return unary_op(x, [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <class T>
Var<T> abs_op(const Var<T>& x) {
    return unary_op(x, [](T v) { return std::abs(v); },
                    [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

// Saturating clamp; gradient passes only inside the interval.
template <class T>
Var<T> clamp(const Var<T>& x, double lo, double hi) {
    const T l = static_cast<T>(lo), h = static_cast<T>(hi);
    return unary_op(x, [l, h](T v) { return std::min(h, std::max(l, v)); },
                    [l, h](T v, T) { return (v > l && v < h) ? T(1) : T(0); });
}

// ---- reductions ----

template <class T>
Var<T> sum_all(const Var<T>& x) {
    Tensor<T> y({1});
    T acc = T(0);
    for (i64 i = 0; i < x.numel(); ++i) acc += x.value()[i];
    y[0] = acc;
    auto xn = x.node();
    return make_node<T>(std::move(y), {x}, [xn](const Tensor<T>& g) {
        Tensor<T>& dst = xn->ensure_grad();
        for (i64 i = 0; i < dst.numel(); ++i) dst[i] += g[0];
    });
}

template <class T>
Var<T> mean_all(const Var<T>& x) {
    return affine(sum_all(x), 1.0 / static_cast<double>(x.numel()), 0.0);
}

// ---- shape ----

template <class T>
Var<T> reshape(const Var<T>& x, std::vector<i64> shape) {
    Tensor<T> y = x.value().reshaped(shape);  // shares storage
    auto xn = x.node();
    std::vector<i64> xshape = x.shape();
    return make_node<T>(std::move(y), {x}, [xn, xshape](const Tensor<T>& g) {
        xn->accumulate(g.reshaped(xshape));
    });
}

template <class T>
Var<T> broadcast_to(const Var<T>& x, std::vector<i64> shape) {
    auto sstride = detail::broadcast_strides(x.shape(), shape);
    Tensor<T> y(shape);
    const T* src = x.value().data();
    T* dst = y.data();
    detail::broadcast_walk(shape, sstride, [&](i64 i, i64 s) { dst[i] = src[s]; });
    auto xn = x.node();
    return make_node<T>(std::move(y), {x}, [xn, shape, sstride](const Tensor<T>& g) {
        Tensor<T>& dst = xn->ensure_grad();
        T* d = dst.data();
        const T* gs = g.data();
        detail::broadcast_walk(shape, sstride, [&](i64 i, i64 s) { d[s] += gs[i]; });
    });
}

template <class T>
Var<T> concat(const std::vector<Var<T>>& xs, i64 dim) {
    if (xs.empty()) throw std::invalid_argument("concat: empty input list");
    const auto& s0 = xs[0].shape();
    const int r = static_cast<int>(s0.size());
    if (dim < 0 || dim >= r) throw std::invalid_argument("concat: bad dim");
    std::vector<i64> oshape = s0;
    oshape[static_cast<size_t>(dim)] = 0;
    for (const auto& x : xs) {
        const auto& s = x.shape();
        if (static_cast<int>(s.size()) != r) throw std::invalid_argument("concat: rank mismatch");
        for (int d = 0; d < r; ++d)
            if (d != dim && s[static_cast<size_t>(d)] != s0[static_cast<size_t>(d)])
                throw std::invalid_argument("concat: shape mismatch " + shape_str(s) + " vs " +
                                            shape_str(s0));
        oshape[static_cast<size_t>(dim)] += s[static_cast<size_t>(dim)];
    }
    i64 outer = 1, inner = 1;
    for (i64 d = 0; d < dim; ++d) outer *= s0[static_cast<size_t>(d)];
    for (size_t d = static_cast<size_t>(dim) + 1; d < s0.size(); ++d) inner *= s0[d];

    Tensor<T> y(oshape);
    const i64 orow = oshape[static_cast<size_t>(dim)] * inner;
    std::vector<i64> offsets;  // start (in elements of a dim-row) of each part
    i64 off = 0;
    for (const auto& x : xs) {
        offsets.push_back(off);
        const i64 part = x.shape()[static_cast<size_t>(dim)] * inner;
        for (i64 o = 0; o < outer; ++o)
            std::copy_n(x.value().data() + o * part, part, y.data() + o * orow + off);
        off += part;
    }
    std::vector<std::shared_ptr<Node<T>>> nodes;
    for (const auto& x : xs) nodes.push_back(x.node());
    return make_node<T>(std::move(y), xs, [nodes, offsets, outer, inner, orow](const Tensor<T>& g) {
        for (size_t k = 0; k < nodes.size(); ++k) {
            if (!nodes[k]->requires_grad) continue;
            Tensor<T>& dst = nodes[k]->ensure_grad();
            const i64 part = dst.numel() / outer;
            for (i64 o = 0; o < outer; ++o) {
                const T* src = g.data() + o * orow + offsets[k];
                T* d = dst.data() + o * part;
                for (i64 i = 0; i < part; ++i) d[i] += src[i];
            }
        }
    });
}

// ---- linear algebra ----

template <class T>
Var<T> matmul(const Var<T>& a, const Var<T>& b, bool trans_a = false, bool trans_b = false) {
    if (a.shape().size() != 2 || b.shape().size() != 2)
        throw std::invalid_argument("matmul: expects rank-2 operands");
    const i64 m = trans_a ? a.shape()[1] : a.shape()[0];
    const i64 ka = trans_a ? a.shape()[0] : a.shape()[1];
    const i64 kb = trans_b ? b.shape()[1] : b.shape()[0];
    const i64 n = trans_b ? b.shape()[0] : b.shape()[1];
    if (ka != kb)
        throw std::invalid_argument("matmul: inner dims " + shape_str(a.shape()) + " vs " +
                                    shape_str(b.shape()));
    Tensor<T> y({m, n});
    gemm<T>(trans_a, trans_b, m, n, ka, T(1), a.value().data(), b.value().data(), T(0), y.data());
    auto an = a.node(), bn = b.node();
    const i64 k = ka;
    return make_node<T>(std::move(y), {a, b},
                        [an, bn, m, n, k, trans_a, trans_b](const Tensor<T>& g) {
        if (an->requires_grad) {
            Tensor<T>& da = an->ensure_grad();
            if (!trans_a)  // da[m,k] = g [m,n] x opB^T
                gemm<T>(false, !trans_b, m, k, n, T(1), g.data(), bn->value.data(), T(1), da.data());
            else  // da[k,m] = opB x g^T
                gemm<T>(trans_b, true, k, m, n, T(1), bn->value.data(), g.data(), T(1), da.data());
        }
        if (bn->requires_grad) {
            Tensor<T>& db = bn->ensure_grad();
            if (!trans_b)  // db[k,n] = opA^T x g
                gemm<T>(!trans_a, false, k, n, m, T(1), an->value.data(), g.data(), T(1), db.data());
            else  // db[n,k] = g^T x opA
                gemm<T>(true, trans_a, n, k, m, T(1), g.data(), an->value.data(), T(1), db.data());
        }
    });
}

// x [..., C, inner...] + bias [C] along dim 1.
template <class T>
Var<T> add_channel_bias(const Var<T>& x, const Var<T>& b) {
    if (x.shape().size() < 2 || b.shape().size() != 1 || b.shape()[0] != x.shape()[1])
        throw std::invalid_argument("add_channel_bias: bias " + shape_str(b.shape()) +
                                    " does not match " + shape_str(x.shape()));
    const i64 outer = x.shape()[0];
    const i64 C = x.shape()[1];
    const i64 inner = x.numel() / (outer * C);
    Tensor<T> y(x.shape());
    for (i64 o = 0; o < outer; ++o)
        for (i64 c = 0; c < C; ++c) {
            const T bv = b.value()[c];
            const T* src = x.value().data() + (o * C + c) * inner;
            T* dst = y.data() + (o * C + c) * inner;
            for (i64 i = 0; i < inner; ++i) dst[i] = src[i] + bv;
        }
    auto xn = x.node(), bn = b.node();
    return make_node<T>(std::move(y), {x, b}, [xn, bn, outer, C, inner](const Tensor<T>& g) {
        if (xn->requires_grad) xn->accumulate(g);
        if (bn->requires_grad) {
            Tensor<T>& db = bn->ensure_grad();
            for (i64 o = 0; o < outer; ++o)
                for (i64 c = 0; c < C; ++c) {
                    const T* gs = g.data() + (o * C + c) * inner;
                    T acc = T(0);
                    for (i64 i = 0; i < inner; ++i) acc += gs[i];
                    db[c] += acc;
                }
        }
    });
}

// rows of w [V, D] gathered by ids -> [N, D]
template <class T>
Var<T> embedding(const Var<T>& w, const std::vector<i64>& ids) {
    if (w.shape().size() != 2) throw std::invalid_argument("embedding: weight must be [V, D]");
    const i64 V = w.shape()[0], D = w.shape()[1];
    Tensor<T> y({static_cast<i64>(ids.size()), D});
    for (size_t r = 0; r < ids.size(); ++r) {
        if (ids[r] < 0 || ids[r] >= V) throw std::invalid_argument("embedding: id out of range");
        std::copy_n(w.value().data() + ids[r] * D, D, y.data() + static_cast<i64>(r) * D);
    }
    auto wn = w.node();
    return make_node<T>(std::move(y), {w}, [wn, ids, D](const Tensor<T>& g) {
        Tensor<T>& dw = wn->ensure_grad();
        for (size_t r = 0; r < ids.size(); ++r) {
            const T* gs = g.data() + static_cast<i64>(r) * D;
            T* d = dw.data() + ids[r] * D;
            for (i64 i = 0; i < D; ++i) d[i] += gs[i];
        }
    });
}

// ---- batch normalization (channel dim 1) ----

// Training mode: normalizes with batch statistics (biased variance) and
// reports them so the caller can maintain running estimates. gamma/beta may
// be undefined Vars for an affine-free layer.
template <class T>
Var<T> batch_norm_train(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, double eps,
                        Tensor<T>* batch_mean = nullptr, Tensor<T>* batch_var = nullptr) {
    if (x.shape().size() < 2) throw std::invalid_argument("batch_norm: rank must be >= 2");
    const i64 outer = x.shape()[0];
    const i64 C = x.shape()[1];
    const i64 inner = x.numel() / (outer * C);
    const i64 m = outer * inner;
    if (m < 2) throw std::invalid_argument("batch_norm: needs more than one sample per channel");
    const bool affine = gamma.defined();

    Tensor<T> mean({C}), var({C}), ivar({C});
    for (i64 c = 0; c < C; ++c) {
        double acc = 0.0;
        for (i64 o = 0; o < outer; ++o) {
            const T* src = x.value().data() + (o * C + c) * inner;
            for (i64 i = 0; i < inner; ++i) acc += src[i];
        }
        const double mu = acc / static_cast<double>(m);
        double v = 0.0;
        for (i64 o = 0; o < outer; ++o) {
            const T* src = x.value().data() + (o * C + c) * inner;
            for (i64 i = 0; i < inner; ++i) {
                const double d = src[i] - mu;
                v += d * d;
            }
        }
        mean[c] = static_cast<T>(mu);
        var[c] = static_cast<T>(v / static_cast<double>(m));
        ivar[c] = static_cast<T>(1.0 / std::sqrt(v / static_cast<double>(m) + eps));
    }
    if (batch_mean) *batch_mean = mean.clone();
    if (batch_var) *batch_var = var.clone();

    Tensor<T> xhat(x.shape());
    Tensor<T> y(x.shape());
    for (i64 o = 0; o < outer; ++o)
        for (i64 c = 0; c < C; ++c) {
            const T* src = x.value().data() + (o * C + c) * inner;
            T* xh = xhat.data() + (o * C + c) * inner;
            T* dst = y.data() + (o * C + c) * inner;
            const T mu = mean[c], iv = ivar[c];
            const T ga = affine ? gamma.value()[c] : T(1);
            const T be = affine ? beta.value()[c] : T(0);
            for (i64 i = 0; i < inner; ++i) {
                xh[i] = (src[i] - mu) * iv;
                dst[i] = ga * xh[i] + be;
            }
        }

    auto xn = x.node();
    auto gn = affine ? gamma.node() : nullptr;
    auto bn = affine ? beta.node() : nullptr;
    std::vector<Var<T>> parents{x};
    if (affine) {
        parents.push_back(gamma);
        parents.push_back(beta);
    }
    return make_node<T>(std::move(y), parents,
                        [xn, gn, bn, xhat, ivar, outer, C, inner, m](const Tensor<T>& g) {
        for (i64 c = 0; c < C; ++c) {
            // per-channel sums of g and g*xhat
            double sg = 0.0, sgx = 0.0;
            for (i64 o = 0; o < outer; ++o) {
                const T* gs = g.data() + (o * C + c) * inner;
                const T* xh = xhat.data() + (o * C + c) * inner;
                for (i64 i = 0; i < inner; ++i) {
                    sg += gs[i];
                    sgx += gs[i] * xh[i];
                }
            }
            if (gn && gn->requires_grad) gn->ensure_grad()[c] += static_cast<T>(sgx);
            if (bn && bn->requires_grad) bn->ensure_grad()[c] += static_cast<T>(sg);
            if (xn->requires_grad) {
                const T ga = gn ? gn->value[c] : T(1);
                const T scale = ga * ivar[c] / static_cast<T>(m);
                Tensor<T>& dx = xn->ensure_grad();
                for (i64 o = 0; o < outer; ++o) {
                    const T* gs = g.data() + (o * C + c) * inner;
                    const T* xh = xhat.data() + (o * C + c) * inner;
                    T* d = dx.data() + (o * C + c) * inner;
                    for (i64 i = 0; i < inner; ++i)
                        d[i] += scale * (static_cast<T>(m) * gs[i] - static_cast<T>(sg) -
                                         xh[i] * static_cast<T>(sgx));
                }
            }
        }
    });
}

// Inference mode: normalizes with fixed (running) statistics.
template <class T>
Var<T> batch_norm_eval(const Var<T>& x, const Tensor<T>& mean, const Tensor<T>& var,
                       const Var<T>& gamma, const Var<T>& beta, double eps) {
    if (x.shape().size() < 2) throw std::invalid_argument("batch_norm: rank must be >= 2");
    const i64 outer = x.shape()[0];
    const i64 C = x.shape()[1];
    const i64 inner = x.numel() / (outer * C);
    const bool affine = gamma.defined();
    Tensor<T> scale({C}), shift({C});
    for (i64 c = 0; c < C; ++c) {
        const T iv = static_cast<T>(1.0 / std::sqrt(static_cast<double>(var[c]) + eps));
        const T ga = affine ? gamma.value()[c] : T(1);
        scale[c] = ga * iv;
        shift[c] = (affine ? beta.value()[c] : T(0)) - ga * iv * mean[c];
    }
    Tensor<T> y(x.shape());
    for (i64 o = 0; o < outer; ++o)
        for (i64 c = 0; c < C; ++c) {
            const T* src = x.value().data() + (o * C + c) * inner;
            T* dst = y.data() + (o * C + c) * inner;
            for (i64 i = 0; i < inner; ++i) dst[i] = scale[c] * src[i] + shift[c];
        }
    auto xn = x.node();
    auto gn = affine ? gamma.node() : nullptr;
    auto bnn = affine ? beta.node() : nullptr;
    Tensor<T> xv = x.value();
    Tensor<T> mn = mean.clone(), vr = var.clone();
    std::vector<Var<T>> parents{x};
    if (affine) {
        parents.push_back(gamma);
        parents.push_back(beta);
    }
    return make_node<T>(std::move(y), parents,
                        [xn, gn, bnn, xv, mn, vr, scale, eps, outer, C, inner](const Tensor<T>& g) {
        for (i64 c = 0; c < C; ++c) {
            const T iv = static_cast<T>(1.0 / std::sqrt(static_cast<double>(vr[c]) + eps));
            double sg = 0.0, sgx = 0.0;
            for (i64 o = 0; o < outer; ++o) {
                const T* gs = g.data() + (o * C + c) * inner;
                const T* src = xv.data() + (o * C + c) * inner;
                for (i64 i = 0; i < inner; ++i) {
                    sg += gs[i];
                    sgx += gs[i] * (src[i] - mn[c]) * iv;
                }
            }
            if (gn && gn->requires_grad) gn->ensure_grad()[c] += static_cast<T>(sgx);
            if (bnn && bnn->requires_grad) bnn->ensure_grad()[c] += static_cast<T>(sg);
            if (xn->requires_grad) {
                Tensor<T>& dx = xn->ensure_grad();
                for (i64 o = 0; o < outer; ++o) {
                    const T* gs = g.data() + (o * C + c) * inner;
                    T* d = dx.data() + (o * C + c) * inner;
                    for (i64 i = 0; i < inner; ++i) d[i] += scale[c] * gs[i];
                }
            }
        }
    });
}

// ---- classification loss ----

// logits [B, C], labels in [0, C). Mean cross-entropy with stable softmax.
template <class T>
Var<T> softmax_xent(const Var<T>& logits, const std::vector<i64>& labels) {
    if (logits.shape().size() != 2) throw std::invalid_argument("softmax_xent: logits must be [B, C]");
    const i64 B = logits.shape()[0], C = logits.shape()[1];
    if (static_cast<i64>(labels.size()) != B)
        throw std::invalid_argument("softmax_xent: label count mismatch");
    Tensor<T> probs({B, C});
    double loss = 0.0;
    for (i64 b = 0; b < B; ++b) {
        if (labels[static_cast<size_t>(b)] < 0 || labels[static_cast<size_t>(b)] >= C)
            throw std::invalid_argument("softmax_xent: label out of range");
        const T* row = logits.value().data() + b * C;
        T mx = row[0];
        for (i64 c = 1; c < C; ++c) mx = std::max(mx, row[c]);
        double z = 0.0;
        for (i64 c = 0; c < C; ++c) z += std::exp(static_cast<double>(row[c] - mx));
        const double logz = std::log(z) + static_cast<double>(mx);
        for (i64 c = 0; c < C; ++c)
            probs[b * C + c] = static_cast<T>(std::exp(static_cast<double>(row[c]) - logz));
        loss += logz - static_cast<double>(row[labels[static_cast<size_t>(b)]]);
    }
    Tensor<T> y({1});
    y[0] = static_cast<T>(loss / static_cast<double>(B));
    auto ln = logits.node();
    return make_node<T>(std::move(y), {logits}, [ln, probs, labels, B, C](const Tensor<T>& g) {
        Tensor<T>& d = ln->ensure_grad();
        const T s = g[0] / static_cast<T>(B);
        for (i64 b = 0; b < B; ++b) {
            for (i64 c = 0; c < C; ++c) d[b * C + c] += s * probs[b * C + c];
            d[b * C + labels[static_cast<size_t>(b)]] -= s;
        }
    });
}

}  // namespace t2v
