#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "t2v/vidgen/generator.hpp"

using namespace t2v;
using t2v::testing::fd_check;
using t2v::testing::FdFailure;
using t2v::testing::project;
using t2v::testing::rand_tensor;
using t2v::testing::tiny_config;

TEST_CASE("composition matches the per-element mixing formula") {
    Rng rng(31);
    const i64 B = 2, C = 3, T = 4, H = 5, W = 5;
    Tensor<float> a = rand_tensor<float>({B, 1, T, H, W}, rng, 0.0, 1.0);
    Tensor<float> m = rand_tensor<float>({B, C, T, H, W}, rng, -1.0, 1.0);
    Tensor<float> s = rand_tensor<float>({B, C, H, W}, rng, -1.0, 1.0);

    const Var<float> out = VideoGenerator<float>::compose(
        constant(a.clone()), constant(m.clone()), constant(s.clone()));
    REQUIRE(out.shape() == std::vector<i64>{B, C, T, H, W});
    for (i64 b = 0; b < B; ++b)
        for (i64 c = 0; c < C; ++c)
            for (i64 t = 0; t < T; ++t)
                for (i64 y = 0; y < H; ++y)
                    for (i64 x = 0; x < W; ++x) {
                        const float av = a[((b * T + t) * H + y) * W + x];
                        const float mv = m[(((b * C + c) * T + t) * H + y) * W + x];
                        const float sv = s[((b * C + c) * H + y) * W + x];
                        const float want = av * mv + (1.0f - av) * sv;
                        const float got = out.value()[(((b * C + c) * T + t) * H + y) * W + x];
                        REQUIRE(got == Catch::Approx(want).margin(1e-6));
                        REQUIRE(std::abs(got) <= 1.0f + 1e-6f);  // convex mix of [-1,1] values
                    }
}

TEST_CASE("mask stays in the unit interval and outputs stay in range") {
    RunConfig cfg = tiny_config();
    ParamStore<float> ps(7);
    VideoGenerator<float> gen(ps, "gen", cfg, 10);
    Rng rng(32);
    for (int rep = 0; rep < 4; ++rep) {
        Tensor<float> z = rand_tensor<float>({32, 10}, rng, -2.0, 2.0);
        const Var<float> alpha = gen.mask_net(constant(z.clone()), false);
        REQUIRE(alpha.shape() == std::vector<i64>{32, 1, cfg.t, cfg.h, cfg.h});
        float a_lo = 1e9f, a_hi = -1e9f;
        for (i64 i = 0; i < alpha.value().numel(); ++i) {
            a_lo = std::min(a_lo, alpha.value()[i]);
            a_hi = std::max(a_hi, alpha.value()[i]);
        }
        REQUIRE(a_lo >= 0.0f);
        REQUIRE(a_hi <= 1.0f);

        const Var<float> video = gen(constant(z.clone()), false);
        REQUIRE(video.shape() == std::vector<i64>{32, cfg.c, cfg.t, cfg.h, cfg.h});
        float v_amp = 0.0f;
        for (i64 i = 0; i < video.value().numel(); ++i)
            v_amp = std::max(v_amp, std::abs(video.value()[i]));
        REQUIRE(v_amp <= 1.0f);
    }
}

TEST_CASE("full pass agrees with composing the separate heads in eval mode") {
    RunConfig cfg = tiny_config();
    ParamStore<float> ps(8);
    VideoGenerator<float> gen(ps, "gen", cfg, 6);
    Rng rng(33);
    Tensor<float> z = rand_tensor<float>({3, 6}, rng, -1.0, 1.0);
    const Var<float> full = gen(constant(z.clone()), false);
    const Var<float> parts = VideoGenerator<float>::compose(
        gen.mask_net(constant(z.clone()), false), gen.motion_net(constant(z.clone()), false),
        gen.static_net(constant(z.clone()), false));
    for (i64 i = 0; i < full.value().numel(); ++i)
        REQUIRE(full.value()[i] == Catch::Approx(parts.value()[i]).margin(1e-6));
}

TEST_CASE("latent validation and composition") {
    RunConfig cfg = tiny_config();
    ParamStore<float> ps(9);
    VideoGenerator<float> gen(ps, "gen", cfg, 6);
    REQUIRE_THROWS_AS(gen(constant(Tensor<float>::zeros({2, 7})), false), std::invalid_argument);
    REQUIRE_THROWS_AS(gen.static_net(constant(Tensor<float>::zeros({6})), false),
                      std::invalid_argument);

    const Var<float> g_t = constant(Tensor<float>::from({2, 3}, {1, 2, 3, 4, 5, 6}));
    const Var<float> n_v = constant(Tensor<float>::from({2, 2}, {7, 8, 9, 10}));
    const Var<float> z = compose_latent(g_t, n_v);
    REQUIRE(z.shape() == std::vector<i64>{2, 5});
    const std::vector<float> want = {1, 2, 3, 7, 8, 4, 5, 6, 9, 10};
    for (i64 i = 0; i < 10; ++i) REQUIRE(z.value()[i] == want[static_cast<size_t>(i)]);
    REQUIRE_THROWS_AS(compose_latent(g_t, constant(Tensor<float>::zeros({3, 2}))),
                      std::invalid_argument);
}

TEST_CASE("depth and seed length follow the resolution") {
    RunConfig cfg = tiny_config();
    cfg.h = cfg.w = 64;
    cfg.t = 32;
    REQUIRE(cfg.up_blocks() == 4);
    REQUIRE(cfg.time_seed() == 2);
    cfg.h = cfg.w = 16;
    cfg.t = 8;
    REQUIRE(cfg.up_blocks() == 2);
    REQUIRE(cfg.time_seed() == 2);
}

TEST_CASE("generator passes finite differences") {
    RunConfig cfg = tiny_config();
    cfg.h = cfg.w = 8;
    cfg.t = 2;
    cfg.gen_base = 4;
    ParamStore<double> ps(10);
    VideoGenerator<double> gen(ps, "gen", cfg, 5);
    Rng rng(34);
    Tensor<double> z = rand_tensor<double>({2, 5}, rng, -1.0, 1.0);
    Var<double> z_leaf = param(z.clone());

    std::vector<std::pair<std::string, Var<double>>> leaves = {{"z", z_leaf}};
    for (const auto& name : ps.param_names()) leaves.emplace_back(name, ps.at(name));
    FdFailure f;
    const bool ok = fd_check(leaves, [&] { return project(gen(z_leaf, true)); }, 1e-3, 3, 1e-5, &f);
    INFO("leaf " << f.leaf << "[" << f.index << "] analytic " << f.analytic << " numeric "
                 << f.numeric << " rel " << f.rel);
    REQUIRE(ok);
}
