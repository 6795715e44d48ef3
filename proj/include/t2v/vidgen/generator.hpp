#pragma once

#include "t2v/config.hpp"
#include "t2v/nn/arch.hpp"

namespace t2v {

// Masked scene decomposition: a shared 3-D transposed-conv trunk feeds a
// sigmoid mask head and a tanh motion head; a separate 2-D pyramid renders
// the static background, broadcast through time:
//   out = alpha * motion + (1 - alpha) * static
template <class T>
struct VideoGenerator {
    i64 z_dim = 0, c = 3, t = 32, h = 64, blocks = 0, base = 0, t_seed = 0;
    Linear<T> trunk_fc, static_fc;
    std::vector<ConvTranspose<T>> trunk;
    std::vector<BatchNorm<T>> trunk_bn;
    std::vector<ConvTranspose<T>> stat;
    std::vector<BatchNorm<T>> stat_bn;
    Conv<T> alpha_head, motion_head, static_head;

    VideoGenerator() = default;
    VideoGenerator(ParamStore<T>& ps, const std::string& prefix, const RunConfig& cfg, i64 zd)
        : z_dim(zd), c(cfg.c), t(cfg.t), h(cfg.h), blocks(cfg.up_blocks()),
          base(cfg.gen_base), t_seed(cfg.time_seed()) {
        const i64 c0 = pyramid_width(base, blocks);
        trunk_fc = Linear<T>(ps, prefix + ".trunk_fc", zd, c0 * t_seed * 16);
        static_fc = Linear<T>(ps, prefix + ".static_fc", zd, c0 * 16);
        i64 ci = c0;
        for (i64 i = 0; i < blocks; ++i) {
            const i64 co = pyramid_width(base, blocks - 1 - i);
            const std::string tag = std::to_string(i);
            trunk.emplace_back(ps, prefix + ".trunk" + tag, ci, co, std::vector<i64>{4, 4, 4},
                               std::vector<i64>{2, 2, 2}, std::vector<i64>{1, 1, 1});
            trunk_bn.emplace_back(ps, prefix + ".trunk" + tag + ".bn", co);
            stat.emplace_back(ps, prefix + ".static" + tag, ci, co, std::vector<i64>{4, 4},
                              std::vector<i64>{2, 2}, std::vector<i64>{1, 1});
            stat_bn.emplace_back(ps, prefix + ".static" + tag + ".bn", co);
            ci = co;
        }
        alpha_head = Conv<T>(ps, prefix + ".alpha_head", base, 1, {3, 3, 3}, {1, 1, 1}, {1, 1, 1});
        motion_head = Conv<T>(ps, prefix + ".motion_head", base, c, {3, 3, 3}, {1, 1, 1}, {1, 1, 1});
        static_head = Conv<T>(ps, prefix + ".static_head", base, c, {3, 3}, {1, 1}, {1, 1});
    }

    Var<T> check_latent(const Var<T>& z) const {
        if (z.shape().size() != 2 || z.shape()[1] != z_dim)
            throw std::invalid_argument("generator: expected latent [B," + std::to_string(z_dim) +
                                        "], got " + shape_str(z.shape()));
        return z;
    }

    // shared 3-D trunk -> [B, base, T, H, W]
    Var<T> trunk_features(const Var<T>& z, bool train) const {
        check_latent(z);
        const i64 B = z.shape()[0];
        Var<T> x = relu(reshape(trunk_fc(z), {B, pyramid_width(base, blocks), t_seed, 4, 4}));
        for (size_t i = 0; i < trunk.size(); ++i) x = relu(trunk_bn[i](trunk[i](x), train));
        return x;
    }

    // [B, 1, T, H, W] in [0, 1]
    Var<T> mask_net(const Var<T>& z, bool train) const {
        return sigmoid(alpha_head(trunk_features(z, train)));
    }

    // [B, C, T, H, W] in [-1, 1]
    Var<T> motion_net(const Var<T>& z, bool train) const {
        return tanh_op(motion_head(trunk_features(z, train)));
    }

    // [B, C, H, W] in [-1, 1]
    Var<T> static_net(const Var<T>& z, bool train) const {
        check_latent(z);
        const i64 B = z.shape()[0];
        Var<T> x = relu(reshape(static_fc(z), {B, pyramid_width(base, blocks), 4, 4}));
        for (size_t i = 0; i < stat.size(); ++i) x = relu(stat_bn[i](stat[i](x), train));
        return tanh_op(static_head(x));
    }

    // Full composition; the trunk runs once for both heads.
    Var<T> operator()(const Var<T>& z, bool train) const {
        Var<T> feats = trunk_features(z, train);
        Var<T> alpha = sigmoid(alpha_head(feats));
        Var<T> motion = tanh_op(motion_head(feats));
        Var<T> statics = static_net(z, train);
        return compose(alpha, motion, statics);
    }

    // alpha [B,1,T,H,W], motion [B,C,T,H,W], statics [B,C,H,W]
    static Var<T> compose(const Var<T>& alpha, const Var<T>& motion, const Var<T>& statics) {
        const auto vshape = motion.shape();
        const i64 B = vshape[0], C = vshape[1], H = vshape[3], W = vshape[4];
        Var<T> a = broadcast_to(alpha, vshape);
        Var<T> s = broadcast_to(reshape(statics, {B, C, 1, H, W}), vshape);
        return mul(a, motion) + mul(affine(a, -1.0, 1.0), s);
    }
};

// z_v = [g_t; n_v]
template <class T>
Var<T> compose_latent(const Var<T>& g_t, const Var<T>& n_v) {
    if (g_t.shape()[0] != n_v.shape()[0])
        throw std::invalid_argument("compose_latent: batch mismatch");
    return concat<T>({g_t, n_v}, 1);
}

}  // namespace t2v
