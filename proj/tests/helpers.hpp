#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "t2v/config.hpp"
#include "t2v/core/graph.hpp"
#include "t2v/core/ops.hpp"
#include "t2v/core/rng.hpp"
#include "t2v/core/tensor.hpp"
#include "t2v/nn/module.hpp"

namespace t2v::testing {

// Smallest geometry the config validator admits; cheap enough for gradient
// checks and short training runs.
inline RunConfig tiny_config() {
    RunConfig cfg;
    cfg.t = 8;
    cfg.h = cfg.w = 16;
    cfg.f_t = 16;
    cfg.embed_dim = 8;
    cfg.gru_hidden = 16;
    cfg.d_g = 8;
    cfg.d_eta = 16;
    cfg.cvae_base = 8;
    cfg.f_c = 8;
    cfg.d_gt = 16;
    cfg.t2f_base = 8;
    cfg.d_n = 8;
    cfg.gen_base = 8;
    cfg.critic_base = 8;
    cfg.batch_size = 4;
    return cfg;
}

template <class T = double>
Tensor<T> rand_tensor(const std::vector<i64>& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor<T> t(shape);
    fill_uniform(t, rng, lo, hi);
    return t;
}

struct FdFailure {
    std::string leaf;
    i64 index = 0;
    double analytic = 0, numeric = 0, rel = 0;
};

// Central-difference check of d(loss)/d(leaf) for every named leaf, probing
// up to `probes` entries per leaf. `forward` must rebuild the whole graph
// from the leaves' current values on every call. Stops at the first failure.
inline bool fd_check(const std::vector<std::pair<std::string, Var<double>>>& leaves,
                     const std::function<Var<double>()>& forward, double tol = 1e-3,
                     i64 probes = 6, double eps = 1e-5, FdFailure* failure = nullptr,
                     std::uint64_t probe_seed = 17) {
    Var<double> loss = forward();
    if (loss.numel() != 1) throw std::invalid_argument("fd_check: loss must be scalar");
    for (const auto& [name, leaf] : leaves) leaf.node()->grad = Tensor<double>();
    backward(loss);
    Rng pick(probe_seed);
    for (const auto& [name, leaf] : leaves) {
        const i64 n = leaf.numel();
        Tensor<double>& v = leaf.value();
        const Tensor<double>& g = leaf.grad();
        for (i64 p = 0; p < std::min(probes, n); ++p) {
            const i64 i = probes >= n ? p : static_cast<i64>(pick.next_u64() % static_cast<std::uint64_t>(n));
            const double keep = v[i];
            v[i] = keep + eps;
            const double up = forward().value()[0];
            v[i] = keep - eps;
            const double dn = forward().value()[0];
            v[i] = keep;
            const double numeric = (up - dn) / (2.0 * eps);
            const double analytic = g.defined() ? g[i] : 0.0;
            const double scale = std::max({std::fabs(numeric), std::fabs(analytic), 1e-6});
            const double rel = std::fabs(numeric - analytic) / scale;
            if (rel > tol) {
                if (failure) *failure = {name, i, analytic, numeric, rel};
                return false;
            }
        }
    }
    return true;
}

// Dot the output against a fixed random direction so every output entry
// influences the scalar loss.
inline Var<double> project(const Var<double>& out, std::uint64_t seed = 99) {
    Rng rng(seed);
    Tensor<double> dir(out.shape());
    fill_uniform(dir, rng, -1.0, 1.0);
    return sum_all(mul(out, constant(std::move(dir))));
}

}  // namespace t2v::testing
