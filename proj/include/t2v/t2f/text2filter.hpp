#pragma once

#include "t2v/config.hpp"
#include "t2v/nn/arch.hpp"

namespace t2v {

// Text-conditioned filter bank: a single learned map from psi(t) to a kernel
// stack [F_c, C, ky, kz] that is convolved over the gist (same-padding,
// stride 1, cross-correlation); a conv pyramid then encodes the filtered
// maps into the text-gist vector g_t.
template <class T>
struct Text2Filter {
    i64 f_t = 0, f_c = 0, c = 3, ky = 3, kz = 3, d_gt = 0, blocks = 0, base = 0;
    Linear<T> filter_gen;
    std::vector<Conv<T>> enc;
    std::vector<BatchNorm<T>> enc_bn;
    Linear<T> fc;

    Text2Filter() = default;
    Text2Filter(ParamStore<T>& ps, const std::string& prefix, const RunConfig& cfg)
        : f_t(cfg.f_t), f_c(cfg.f_c), c(cfg.c), ky(cfg.ky), kz(cfg.kz), d_gt(cfg.d_gt),
          blocks(cfg.up_blocks()), base(cfg.t2f_base) {
        filter_gen = Linear<T>(ps, prefix + ".filter_gen", f_t, f_c * c * ky * kz);
        i64 ci = f_c;
        for (i64 i = 0; i < blocks; ++i) {
            const i64 co = pyramid_width(base, i);
            enc.emplace_back(ps, prefix + ".enc" + std::to_string(i), ci, co,
                             std::vector<i64>{4, 4}, std::vector<i64>{2, 2},
                             std::vector<i64>{1, 1});
            if (i > 0) enc_bn.emplace_back(ps, prefix + ".enc" + std::to_string(i) + ".bn", co);
            ci = co;
        }
        fc = Linear<T>(ps, prefix + ".fc", ci * 16, d_gt);
    }

    // psi(t) [B, F_t] -> kernels [B, F_c, C, ky, kz]
    Var<T> make_filter(const Var<T>& text_feat) const {
        if (text_feat.shape().size() != 2 || text_feat.shape()[1] != f_t)
            throw std::invalid_argument("make_filter: expected [B," + std::to_string(f_t) +
                                        "], got " + shape_str(text_feat.shape()));
        const i64 B = text_feat.shape()[0];
        return reshape(filter_gen(text_feat), {B, f_c, c, ky, kz});
    }

    // gist [B, C, H, W] filtered per sample -> [B, F_c, H, W]
    Var<T> apply_filter(const Var<T>& gist, const Var<T>& filter) const {
        if (gist.shape().size() != 4 || gist.shape()[1] != filter.shape()[2])
            throw std::invalid_argument("apply_filter: gist channels " +
                                        shape_str(gist.shape()) + " do not match filter " +
                                        shape_str(filter.shape()));
        return dynamic_conv2d(gist, filter);
    }

    // filtered maps -> g_t [B, D_gt]
    Var<T> encode_text_gist(const Var<T>& maps, bool train) const {
        Var<T> x = maps;
        for (size_t i = 0; i < enc.size(); ++i) {
            x = enc[i](x);
            if (i > 0) x = enc_bn[i - 1](x, train);
            x = leaky_relu(x, 0.2);
        }
        const i64 B = maps.shape()[0];
        return fc(reshape(x, {B, x.numel() / B}));
    }

    Var<T> operator()(const Var<T>& gist, const Var<T>& text_feat, bool train) const {
        return encode_text_gist(apply_filter(gist, make_filter(text_feat)), train);
    }
};

}  // namespace t2v
