#pragma once

#include "t2v/config.hpp"
#include "t2v/nn/arch.hpp"

namespace t2v {

// Conditional VAE producing the gist image. The frame encoder and gist
// decoder are stride-2 conv pyramids between full resolution and a 4x4 core;
// posterior heads are single affine maps over the joint hidden [eta(v); psi(t)].
template <class T>
struct GistCvae {
    i64 c = 3, h = 64, d_g = 0, d_eta = 0, f_t = 0, blocks = 0, base = 0;
    std::vector<Conv<T>> enc;
    std::vector<BatchNorm<T>> enc_bn;  // entry i aligns with enc[i+1]
    Linear<T> enc_fc, mu_head, logvar_head, dec_fc;
    std::vector<ConvTranspose<T>> dec;
    std::vector<BatchNorm<T>> dec_bn;

    GistCvae() = default;
    GistCvae(ParamStore<T>& ps, const std::string& prefix, const RunConfig& cfg)
        : c(cfg.c), h(cfg.h), d_g(cfg.d_g), d_eta(cfg.d_eta), f_t(cfg.f_t),
          blocks(cfg.up_blocks()), base(cfg.cvae_base) {
        i64 ci = c;
        for (i64 i = 0; i < blocks; ++i) {
            const i64 co = pyramid_width(base, i);
            enc.emplace_back(ps, prefix + ".enc" + std::to_string(i), ci, co,
                             std::vector<i64>{4, 4}, std::vector<i64>{2, 2},
                             std::vector<i64>{1, 1});
            if (i > 0) enc_bn.emplace_back(ps, prefix + ".enc" + std::to_string(i) + ".bn", co);
            ci = co;
        }
        enc_fc = Linear<T>(ps, prefix + ".enc_fc", ci * 16, d_eta);
        mu_head = Linear<T>(ps, prefix + ".mu", d_eta + f_t, d_g);
        logvar_head = Linear<T>(ps, prefix + ".logvar", d_eta + f_t, d_g);

        const i64 c0 = pyramid_width(base, blocks - 1);
        dec_fc = Linear<T>(ps, prefix + ".dec_fc", d_g + f_t, c0 * 16);
        i64 di = c0;
        for (i64 i = 0; i < blocks; ++i) {
            const i64 dout = i + 1 < blocks ? pyramid_width(base, blocks - 2 - i) : c;
            dec.emplace_back(ps, prefix + ".dec" + std::to_string(i), di, dout,
                             std::vector<i64>{4, 4}, std::vector<i64>{2, 2},
                             std::vector<i64>{1, 1});
            if (i + 1 < blocks)
                dec_bn.emplace_back(ps, prefix + ".dec" + std::to_string(i) + ".bn", dout);
            di = dout;
        }
    }

    // frames [B, C, H, W] in [-1, 1] -> [B, D_eta]
    Var<T> encode_frame(const Var<T>& frames, bool train) const {
        check_frame_batch(frames.value());
        Var<T> x = frames;
        for (size_t i = 0; i < enc.size(); ++i) {
            x = enc[i](x);
            if (i > 0) x = enc_bn[i - 1](x, train);
            x = leaky_relu(x, 0.2);
        }
        const i64 B = frames.shape()[0];
        return enc_fc(reshape(x, {B, x.numel() / B}));
    }

    // joint hidden [eta; psi] -> (mu, log_var), log_var clamped to [-10, 10]
    std::pair<Var<T>, Var<T>> posterior(const Var<T>& frame_feat, const Var<T>& text_feat) const {
        Var<T> joint = concat<T>({frame_feat, text_feat}, 1);
        return {mu_head(joint), clamp(logvar_head(joint), -10.0, 10.0)};
    }

    // z = mu + exp(log_var / 2) * noise
    Var<T> sample_latent(const Var<T>& mu, const Var<T>& log_var, const Tensor<T>& noise) const {
        check_shape(noise, mu.value().shape, "sample_latent noise");
        return mu + mul(exp_op(affine(log_var, 0.5, 0.0)), constant(noise));
    }

    // [z_g; psi(t)] -> gist [B, C, H, W] in [-1, 1]
    Var<T> decode(const Var<T>& z_g, const Var<T>& text_feat, bool train) const {
        Var<T> x = dec_fc(concat<T>({z_g, text_feat}, 1));
        const i64 B = x.shape()[0];
        x = reshape(x, {B, x.numel() / (B * 16), 4, 4});
        x = relu(x);
        for (size_t i = 0; i < dec.size(); ++i) {
            x = dec[i](x);
            if (i + 1 < dec.size()) x = relu(dec_bn[i](x, train));
        }
        return tanh_op(x);
    }

private:
    void check_frame_batch(const Tensor<T>& v) const {
        if (v.rank() != 4 || v.dim(1) != c || v.dim(2) != h || v.dim(3) != h)
            throw std::invalid_argument("encode_frame: expected [B," + std::to_string(c) + "," +
                                        std::to_string(h) + "," + std::to_string(h) + "], got " +
                                        shape_str(v.shape));
        if (tmin(v) < T(-1) || tmax(v) > T(1))
            throw std::invalid_argument("encode_frame: frame values outside [-1, 1]");
    }
};

}  // namespace t2v
