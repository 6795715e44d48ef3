#pragma once

#include "t2v/config.hpp"
#include "t2v/nn/arch.hpp"

namespace t2v {

// Text-conditioned Wasserstein critic: a stack of stride-2 3-D conv +
// batch-norm layers over the video, encoded text concatenated into a hidden
// fully connected layer, linear scalar output. The nonlinearity after the
// concat is what lets the score couple video content to the caption — a
// single linear readout over [features, text] would split into independent
// video and text terms and could never penalize mismatched pairs. Batch
// norms are affine-free so weight clipping bounds every parameter without
// collapsing the score scale.
template <class T>
struct Critic {
    i64 c = 3, t = 32, h = 64, f_t = 0, base = 0;
    std::vector<Conv<T>> convs;
    std::vector<BatchNorm<T>> bns;
    Linear<T> fc_joint, fc;
    i64 flat_dim = 0, joint_dim = 0;

    Critic() = default;
    Critic(ParamStore<T>& ps, const std::string& prefix, const RunConfig& cfg)
        : c(cfg.c), t(cfg.t), h(cfg.h), f_t(cfg.f_t), base(cfg.critic_base) {
        std::array<i64, 3> dims{t, h, h};
        i64 ci = c;
        const i64 layers = cfg.critic_layers();
        for (i64 i = 0; i < layers; ++i) {
            const AxisPlan ap = plan_down_axes(dims);
            const i64 co = pyramid_width(base, i);
            convs.emplace_back(ps, prefix + ".conv" + std::to_string(i), ci, co,
                               std::vector<i64>{ap.k[0], ap.k[1], ap.k[2]},
                               std::vector<i64>{ap.s[0], ap.s[1], ap.s[2]},
                               std::vector<i64>{ap.p[0], ap.p[1], ap.p[2]});
            bns.emplace_back(ps, prefix + ".conv" + std::to_string(i) + ".bn", co, false);
            dims = ap.out;
            ci = co;
        }
        flat_dim = ci * dims[0] * dims[1] * dims[2];
        joint_dim = 8 * base;
        fc_joint = Linear<T>(ps, prefix + ".fc_joint", flat_dim + f_t, joint_dim);
        fc = Linear<T>(ps, prefix + ".fc", joint_dim, 1);
    }

    // video [B, C, T, H, W] in [-1, 1], text [B, F_t] -> scores [B, 1]
    Var<T> operator()(const Var<T>& video, const Var<T>& text_feat, bool train) const {
        const auto& vs = video.shape();
        if (vs.size() != 5 || vs[1] != c || vs[2] != t || vs[3] != h || vs[4] != h)
            throw std::invalid_argument("discriminate: expected [B," + std::to_string(c) + "," +
                                        std::to_string(t) + "," + std::to_string(h) + "," +
                                        std::to_string(h) + "], got " + shape_str(vs));
        if (text_feat.shape().size() != 2 || text_feat.shape()[1] != f_t ||
            text_feat.shape()[0] != vs[0])
            throw std::invalid_argument("discriminate: bad text features " +
                                        shape_str(text_feat.shape()));
        Var<T> x = video;
        for (size_t i = 0; i < convs.size(); ++i)
            x = leaky_relu(bns[i](convs[i](x), train), 0.2);
        const i64 B = vs[0];
        Var<T> joint = leaky_relu(fc_joint(concat<T>({reshape(x, {B, flat_dim}), text_feat}, 1)), 0.2);
        return fc(joint);
    }
};

// Mean-difference losses over score batches.
template <class T>
Var<T> critic_loss(const Var<T>& real_scores, const Var<T>& fake_scores) {
    if (real_scores.numel() == 0 || fake_scores.numel() == 0)
        throw std::invalid_argument("critic_loss: empty score batch");
    return mean_all(fake_scores) - mean_all(real_scores);
}

template <class T>
Var<T> generator_adv_loss(const Var<T>& fake_scores) {
    if (fake_scores.numel() == 0)
        throw std::invalid_argument("generator_adv_loss: empty score batch");
    return affine(mean_all(fake_scores), -1.0, 0.0);
}

// Weight clipping as the Lipschitz mechanism; clamps every parameter under
// the prefix.
template <class T>
void enforce_lipschitz(ParamStore<T>& ps, const std::string& prefix, double clip_value) {
    if (clip_value <= 0) throw std::invalid_argument("enforce_lipschitz: clip_value must be > 0");
    clip_params(ps, prefix, clip_value);
}

}  // namespace t2v
