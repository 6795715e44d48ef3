#pragma once

#include "t2v/core/conv_ops.hpp"
#include "t2v/core/ops.hpp"
#include "t2v/nn/module.hpp"

namespace t2v {

template <class T>
struct Linear {
    Var<T> w, b;

    Linear() = default;
    Linear(ParamStore<T>& ps, const std::string& prefix, i64 in, i64 out, bool bias = true) {
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        w = ps.param(prefix + ".w", {out, in}, init_uniform(-bound, bound));
        if (bias) b = ps.param(prefix + ".b", {out}, init_const(0.0));
    }

    Var<T> operator()(const Var<T>& x) const {
        Var<T> y = matmul(x, w, false, true);
        return b.defined() ? add_channel_bias(y, b) : y;
    }
};

template <class T>
struct Embedding {
    Var<T> w;
    i64 dim = 0;

    Embedding() = default;
    Embedding(ParamStore<T>& ps, const std::string& prefix, i64 vocab, i64 d) : dim(d) {
        w = ps.param(prefix + ".w", {vocab, d}, init_normal(0.02));
    }

    // ids flattened; returns [ids.size(), dim]
    Var<T> operator()(const std::vector<i64>& ids) const { return embedding(w, ids); }
};

template <class T>
struct Conv {
    Var<T> w, b;
    std::vector<i64> stride, pad;

    Conv() = default;
    Conv(ParamStore<T>& ps, const std::string& prefix, i64 ci, i64 co, std::vector<i64> k,
         std::vector<i64> s, std::vector<i64> p, bool bias = true)
        : stride(std::move(s)), pad(std::move(p)) {
        std::vector<i64> wshape{co, ci};
        wshape.insert(wshape.end(), k.begin(), k.end());
        w = ps.param(prefix + ".w", wshape, init_normal(0.02));
        if (bias) b = ps.param(prefix + ".b", {co}, init_const(0.0));
    }

    Var<T> operator()(const Var<T>& x) const {
        Var<T> y = conv(x, w, stride, pad);
        return b.defined() ? add_channel_bias(y, b) : y;
    }
};

template <class T>
struct ConvTranspose {
    Var<T> w, b;
    std::vector<i64> stride, pad, out_pad;

    ConvTranspose() = default;
    ConvTranspose(ParamStore<T>& ps, const std::string& prefix, i64 ci, i64 co,
                  std::vector<i64> k, std::vector<i64> s, std::vector<i64> p,
                  std::vector<i64> op = {}, bool bias = true)
        : stride(std::move(s)), pad(std::move(p)), out_pad(std::move(op)) {
        if (out_pad.empty()) out_pad.assign(k.size(), 0);
        std::vector<i64> wshape{ci, co};
        wshape.insert(wshape.end(), k.begin(), k.end());
        w = ps.param(prefix + ".w", wshape, init_normal(0.02));
        if (bias) b = ps.param(prefix + ".b", {co}, init_const(0.0));
    }

    Var<T> operator()(const Var<T>& x) const {
        Var<T> y = conv_transpose(x, w, stride, pad, out_pad);
        return b.defined() ? add_channel_bias(y, b) : y;
    }
};

// Channel-dim batch norm with running statistics (biased variance
// throughout). affine=false keeps the layer parameter-free.
template <class T>
struct BatchNorm {
    Var<T> gamma, beta;
    Tensor<T>* running_mean = nullptr;
    Tensor<T>* running_var = nullptr;
    double eps = 1e-5, momentum = 0.1;

    BatchNorm() = default;
    BatchNorm(ParamStore<T>& ps, const std::string& prefix, i64 c, bool affine = true) {
        if (affine) {
            gamma = ps.param(prefix + ".gamma", {c}, init_const(1.0));
            beta = ps.param(prefix + ".beta", {c}, init_const(0.0));
        }
        running_mean = &ps.buffer(prefix + ".running_mean", {c}, T(0));
        running_var = &ps.buffer(prefix + ".running_var", {c}, T(1));
    }

    Var<T> operator()(const Var<T>& x, bool train) const {
        if (!train) return batch_norm_eval(x, *running_mean, *running_var, gamma, beta, eps);
        Tensor<T> bm, bv;
        Var<T> y = batch_norm_train(x, gamma, beta, eps, &bm, &bv);
        for (i64 c = 0; c < bm.numel(); ++c) {
            (*running_mean)[c] = static_cast<T>((1.0 - momentum) * (*running_mean)[c] +
                                                momentum * bm[c]);
            (*running_var)[c] = static_cast<T>((1.0 - momentum) * (*running_var)[c] +
                                               momentum * bv[c]);
        }
        return y;
    }
};

template <class T>
struct GruCell {
    Linear<T> xz, hz, xr, hr, xh, hh;
    i64 hidden = 0;

    GruCell() = default;
    GruCell(ParamStore<T>& ps, const std::string& prefix, i64 in, i64 hid) : hidden(hid) {
        xz = Linear<T>(ps, prefix + ".xz", in, hid);
        hz = Linear<T>(ps, prefix + ".hz", hid, hid, false);
        xr = Linear<T>(ps, prefix + ".xr", in, hid);
        hr = Linear<T>(ps, prefix + ".hr", hid, hid, false);
        xh = Linear<T>(ps, prefix + ".xh", in, hid);
        hh = Linear<T>(ps, prefix + ".hh", hid, hid, false);
    }

    Var<T> operator()(const Var<T>& x, const Var<T>& h) const {
        Var<T> z = sigmoid(xz(x) + hz(h));
        Var<T> r = sigmoid(xr(x) + hr(h));
        Var<T> hc = tanh_op(xh(x) + hh(mul(r, h)));
        // h' = (1 - z) * h + z * hc
        return mul(affine(z, -1.0, 1.0), h) + mul(z, hc);
    }
};

}  // namespace t2v
