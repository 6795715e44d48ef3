#pragma once

#include "t2v/core/ops.hpp"
#include "t2v/errors.hpp"

namespace t2v {

struct ObjectiveWeights {
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double gamma3 = 0.1;
};

// Closed-form KL(N(mu, diag e^lv) || N(0, I)), summed over latent dimensions
// and averaged over the batch.
template <class T>
Var<T> kl_divergence(const Var<T>& mu, const Var<T>& log_var) {
    if (mu.shape() != log_var.shape() || mu.shape().size() != 2)
        throw std::invalid_argument("kl_divergence: expected matching [B,D] inputs");
    const i64 B = mu.shape()[0];
    Var<T> terms = mul(mu, mu) + exp_op(log_var) + affine(log_var, -1.0, -1.0);
    return affine(sum_all(terms), 0.5 / static_cast<double>(B), 0.0);
}

// Negative log-likelihood of the target under a unit-variance Gaussian
// centered on the decoded output, summed per sample (batch-averaged):
// sum_pix [ 0.5 (x - y)^2 + 0.5 ln 2pi ].
template <class T>
Var<T> gaussian_recon(const Var<T>& decoded, const Var<T>& target) {
    if (decoded.shape() != target.shape())
        throw std::invalid_argument("gaussian_recon: shape mismatch " +
                                    shape_str(decoded.shape()) + " vs " +
                                    shape_str(target.shape()));
    const i64 B = decoded.shape()[0];
    const double per_sample = static_cast<double>(decoded.numel() / B);
    Var<T> d = decoded - target;
    const double ln_2pi = std::log(2.0 * 3.14159265358979323846);
    return affine(sum_all(mul(d, d)), 0.5 / static_cast<double>(B),
                  0.5 * ln_2pi * per_sample);
}

// Mean absolute difference between the time-repeated gist and the video.
// gist [B,C,H,W], video [B,C,T,H,W].
template <class T>
Var<T> reconstruction_loss(const Var<T>& gist, const Var<T>& video) {
    const auto& gs = gist.shape();
    const auto& vs = video.shape();
    if (gs.size() != 4 || vs.size() != 5 || gs[0] != vs[0] || gs[1] != vs[1] || gs[2] != vs[3] ||
        gs[3] != vs[4])
        throw std::invalid_argument("reconstruction_loss: gist " + shape_str(gs) +
                                    " incompatible with video " + shape_str(vs));
    Var<T> rep = broadcast_to(reshape(gist, {gs[0], gs[1], 1, gs[2], gs[3]}), vs);
    return mean_all(abs_op(rep - video));
}

inline void check_loss_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw training_diverged(std::string(what) + " is non-finite");
}

inline double total_loss(double cvae, double gan, double recons, const ObjectiveWeights& w) {
    check_loss_finite(cvae, "cvae loss");
    check_loss_finite(gan, "gan loss");
    check_loss_finite(recons, "reconstruction loss");
    return w.gamma1 * cvae + w.gamma2 * gan + w.gamma3 * recons;
}

// Graph version for the generator objective; components are [1] scalars.
template <class T>
Var<T> total_loss(const Var<T>& cvae, const Var<T>& gan, const Var<T>& recons,
                  const ObjectiveWeights& w) {
    total_loss(static_cast<double>(cvae.value()[0]), static_cast<double>(gan.value()[0]),
               static_cast<double>(recons.value()[0]), w);
    return affine(cvae, w.gamma1, 0.0) + affine(gan, w.gamma2, 0.0) +
           affine(recons, w.gamma3, 0.0);
}

}  // namespace t2v
