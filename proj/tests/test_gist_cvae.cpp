#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "t2v/gist/cvae.hpp"
#include "t2v/train/losses.hpp"

using namespace t2v;
using t2v::testing::fd_check;
using t2v::testing::FdFailure;
using t2v::testing::rand_tensor;
using t2v::testing::tiny_config;

TEST_CASE("kl divergence closed form on a hand case") {
    // mu = 1, log_var = 0: per-dimension 0.5 (1 + 1 - 1 - 0) = 0.5.
    // batch 2, 8 dims, batch-averaged -> 8 * 0.5 = 4.
    Var<double> mu = constant(Tensor<double>::full({2, 8}, 1.0));
    Var<double> lv = constant(Tensor<double>::zeros({2, 8}));
    REQUIRE(kl_divergence(mu, lv).value()[0] == Catch::Approx(4.0).margin(1e-12));

    // standard normal posterior costs nothing
    Var<double> mu0 = constant(Tensor<double>::zeros({3, 5}));
    Var<double> lv0 = constant(Tensor<double>::zeros({3, 5}));
    REQUIRE(kl_divergence(mu0, lv0).value()[0] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("kl divergence matches a Monte Carlo estimate within 3 SE") {
    const i64 D = 4;
    Rng rng(123);
    Tensor<double> mu_t = rand_tensor({1, D}, rng, -1.0, 1.0);
    Tensor<double> lv_t = rand_tensor({1, D}, rng, -1.0, 1.0);
    const double closed =
        kl_divergence(constant(mu_t.clone()), constant(lv_t.clone())).value()[0];

    // z = mu + sigma eps;  log q(z) - log p(z) = -eps^2/2 - lv/2 + z^2/2
    const i64 n = 100000;
    double acc = 0.0, acc2 = 0.0;
    Rng draw(456);
    for (i64 s = 0; s < n; ++s) {
        double v = 0.0;
        for (i64 d = 0; d < D; ++d) {
            const double eps = draw.normal();
            const double sigma = std::exp(0.5 * lv_t[d]);
            const double z = mu_t[d] + sigma * eps;
            v += -0.5 * eps * eps - 0.5 * lv_t[d] + 0.5 * z * z;
        }
        acc += v;
        acc2 += v * v;
    }
    const double mean = acc / static_cast<double>(n);
    const double var = acc2 / static_cast<double>(n) - mean * mean;
    const double se = std::sqrt(var / static_cast<double>(n));
    INFO("closed " << closed << " mc " << mean << " se " << se);
    REQUIRE(std::fabs(closed - mean) <= 3.0 * se);
}

TEST_CASE("latent sampling is the exact reparameterization") {
    Rng rng(9);
    RunConfig cfg = tiny_config();
    ParamStore<double> ps(1);
    GistCvae<double> cvae(ps, "cvae", cfg);
    Tensor<double> mu = rand_tensor({3, cfg.d_g}, rng);
    Tensor<double> lv = rand_tensor({3, cfg.d_g}, rng);
    Tensor<double> eps = rand_tensor({3, cfg.d_g}, rng);
    const Var<double> z = cvae.sample_latent(constant(mu.clone()), constant(lv.clone()), eps);
    for (i64 i = 0; i < z.numel(); ++i)
        REQUIRE(z.value()[i] ==
                Catch::Approx(mu[i] + std::exp(0.5 * lv[i]) * eps[i]).margin(1e-12));
}

TEST_CASE("posterior heads shape and log-variance clamp") {
    RunConfig cfg = tiny_config();
    ParamStore<float> ps(4);
    GistCvae<float> cvae(ps, "cvae", cfg);
    Rng rng(2);
    Tensor<float> frames({2, cfg.c, cfg.h, cfg.h});
    fill_uniform(frames, rng, -1.0, 1.0);
    Tensor<float> psi_t({2, cfg.f_t});
    fill_uniform(psi_t, rng, -1.0, 1.0);

    Var<float> eta = cvae.encode_frame(constant(frames.clone()), true);
    REQUIRE(eta.shape() == std::vector<i64>{2, cfg.d_eta});
    auto [mu, lv] = cvae.posterior(eta, constant(psi_t.clone()));
    REQUIRE(mu.shape() == std::vector<i64>{2, cfg.d_g});
    REQUIRE(lv.shape() == std::vector<i64>{2, cfg.d_g});

    // force the head past the clamp: bias 50 must come out as exactly 10
    ps.at("cvae.logvar.b").value().fill(50.0f);
    auto [mu2, lv2] = cvae.posterior(eta, constant(psi_t.clone()));
    for (i64 i = 0; i < lv2.numel(); ++i) REQUIRE(lv2.value()[i] == 10.0f);
}

TEST_CASE("decoded gists live in [-1, 1] with the right shape") {
    RunConfig cfg = tiny_config();
    ParamStore<float> ps(5);
    GistCvae<float> cvae(ps, "cvae", cfg);
    Rng rng(3);
    Tensor<float> z({4, cfg.d_g}), psi_t({4, cfg.f_t});
    fill_normal(z, rng);
    fill_normal(psi_t, rng);
    const Var<float> gist = cvae.decode(constant(z.clone()), constant(psi_t.clone()), true);
    REQUIRE(gist.shape() == std::vector<i64>{4, cfg.c, cfg.h, cfg.h});
    for (i64 i = 0; i < gist.numel(); ++i) {
        REQUIRE(gist.value()[i] <= 1.0f);
        REQUIRE(gist.value()[i] >= -1.0f);
    }
}

TEST_CASE("frame encoder rejects malformed batches") {
    RunConfig cfg = tiny_config();
    ParamStore<float> ps(6);
    GistCvae<float> cvae(ps, "cvae", cfg);
    REQUIRE_THROWS_AS(cvae.encode_frame(constant(Tensor<float>::zeros({2, 3, 8, 8})), true),
                      std::invalid_argument);
    Tensor<float> bad({2, cfg.c, cfg.h, cfg.h});
    bad.fill(1.5f);
    REQUIRE_THROWS_AS(cvae.encode_frame(constant(std::move(bad)), true), std::invalid_argument);
}

TEST_CASE("gaussian reconstruction matches hand arithmetic") {
    // decoded - target: rows (0.5, -0.5, 1.0) and (0, 2, 0); per-sample sums of
    // squares: 1.5 and 4.0 -> 0.5 * (1.5 + 4.0) / 2 + 0.5 ln(2 pi) * 3
    Var<double> dec = constant(Tensor<double>::from({2, 3}, {0.5, 0.0, 1.0, 0.0, 2.0, 0.0}));
    Var<double> tgt = constant(Tensor<double>::from({2, 3}, {0.0, 0.5, 0.0, 0.0, 0.0, 0.0}));
    const double want = 0.5 * 5.5 / 2.0 + 0.5 * std::log(2.0 * M_PI) * 3.0;
    REQUIRE(gaussian_recon(dec, tgt).value()[0] == Catch::Approx(want).margin(1e-12));
}

TEST_CASE("gist reconstruction penalty matches hand arithmetic") {
    // gist [1,1,2,2] broadcast across 2 frames; |diffs| average
    Var<double> gist = constant(Tensor<double>::from({1, 1, 2, 2}, {1.0, 0.0, -1.0, 0.5}));
    Var<double> video = constant(Tensor<double>::from(
        {1, 1, 2, 2, 2}, {1.0, 0.5, -1.0, 0.5, 0.0, 0.0, -0.5, 0.5}));
    // frame 1 diffs: 0, .5, 0, 0 ; frame 2 diffs: 1, 0, .5, 0 -> mean = 2.0 / 8
    REQUIRE(reconstruction_loss(gist, video).value()[0] == Catch::Approx(0.25).margin(1e-12));
    REQUIRE_THROWS_AS(
        reconstruction_loss(gist, constant(Tensor<double>::zeros({1, 1, 2, 3, 3}))),
        std::invalid_argument);
}

TEST_CASE("cvae training objective passes finite differences end to end") {
    RunConfig cfg = tiny_config();
    cfg.t = 2;
    cfg.h = cfg.w = 8;  // one pyramid block
    cfg.d_g = 4;
    cfg.d_eta = 6;
    cfg.f_t = 5;
    ParamStore<double> ps(7);
    GistCvae<double> cvae(ps, "cvae", cfg);
    Rng rng(11);
    Tensor<double> frames({2, cfg.c, cfg.h, cfg.h});
    fill_uniform(frames, rng, -0.9, 0.9);
    Tensor<double> psi_t({2, cfg.f_t});
    fill_normal(psi_t, rng);
    Tensor<double> eps({2, cfg.d_g});
    fill_normal(eps, rng);

    auto forward = [&] {
        Var<double> eta = cvae.encode_frame(constant(frames.clone()), true);
        auto [mu, lv] = cvae.posterior(eta, constant(psi_t.clone()));
        Var<double> z = cvae.sample_latent(mu, lv, eps);
        Var<double> gist = cvae.decode(z, constant(psi_t.clone()), true);
        return add(gaussian_recon(gist, constant(frames.clone())), kl_divergence(mu, lv));
    };
    std::vector<std::pair<std::string, Var<double>>> leaves;
    for (const auto& name : ps.param_names()) leaves.emplace_back(name, ps.at(name));
    FdFailure f;
    const bool ok = fd_check(leaves, forward, 1e-3, 3, 1e-5, &f);
    INFO("leaf " << f.leaf << "[" << f.index << "] analytic " << f.analytic << " numeric "
                 << f.numeric << " rel " << f.rel);
    REQUIRE(ok);
}
