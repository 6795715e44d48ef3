#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "t2v/adv/critic.hpp"
#include "t2v/nn/adam.hpp"

using namespace t2v;
using t2v::testing::fd_check;
using t2v::testing::FdFailure;
using t2v::testing::project;
using t2v::testing::rand_tensor;
using t2v::testing::tiny_config;

TEST_CASE("critic scores one scalar per sample") {
    RunConfig cfg = tiny_config();
    ParamStore<float> ps(41);
    Critic<float> critic(ps, "critic", cfg);
    Rng rng(42);
    Tensor<float> video = rand_tensor<float>({3, cfg.c, cfg.t, cfg.h, cfg.h}, rng, -1.0, 1.0);
    Tensor<float> text = rand_tensor<float>({3, cfg.f_t}, rng, -1.0, 1.0);
    const Var<float> scores = critic(constant(video.clone()), constant(text.clone()), true);
    REQUIRE(scores.shape() == std::vector<i64>{3, 1});
    REQUIRE(all_finite(scores.value()));

    REQUIRE_THROWS_AS(critic(constant(Tensor<float>::zeros({3, cfg.c, cfg.t + 1, cfg.h, cfg.h})),
                             constant(text.clone()), true),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(critic(constant(video.clone()),
                             constant(Tensor<float>::zeros({3, cfg.f_t + 2})), true),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(critic(constant(video.clone()),
                             constant(Tensor<float>::zeros({2, cfg.f_t})), true),
                      std::invalid_argument);
}

TEST_CASE("score losses reduce to mean differences") {
    const Var<float> real = constant(Tensor<float>::from({2, 1}, {1.0f, 2.0f}));
    const Var<float> fake = constant(Tensor<float>::from({2, 1}, {4.0f, 6.0f}));
    REQUIRE(critic_loss(real, fake).value()[0] == 3.5f);
    REQUIRE(generator_adv_loss(fake).value()[0] == -5.0f);
    REQUIRE_THROWS_AS(critic_loss(constant(Tensor<float>::zeros({0, 1})), fake),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(generator_adv_loss(constant(Tensor<float>::zeros({0, 1}))),
                      std::invalid_argument);
}

TEST_CASE("critic norm layers carry no affine parameters") {
    RunConfig cfg = tiny_config();
    ParamStore<float> ps(43);
    Critic<float> critic(ps, "critic", cfg);
    (void)critic;
    bool saw_bn_buffer = false;
    for (const auto& name : ps.param_names()) {
        REQUIRE(name.find(".bn.gamma") == std::string::npos);
        REQUIRE(name.find(".bn.beta") == std::string::npos);
    }
    for (const auto& name : ps.buffer_names())
        if (name.find(".bn.running_mean") != std::string::npos) saw_bn_buffer = true;
    REQUIRE(saw_bn_buffer);
}

TEST_CASE("weight clipping clamps exactly the prefixed parameters") {
    ParamStore<float> ps(44);
    ps.param("critic.w", {4}, init_const(0.0));
    ps.param("gen.w", {4}, init_const(0.0));
    ps.at("critic.w").value() = Tensor<float>::from({4}, {-3.0f, -0.005f, 0.002f, 9.0f});
    ps.at("gen.w").value() = Tensor<float>::from({4}, {-3.0f, -0.005f, 0.002f, 9.0f});
    enforce_lipschitz(ps, "critic.", 0.01);
    const Tensor<float>& cw = ps.at("critic.w").value();
    REQUIRE(cw[0] == -0.01f);
    REQUIRE(cw[1] == -0.005f);
    REQUIRE(cw[2] == 0.002f);
    REQUIRE(cw[3] == 0.01f);
    REQUIRE(ps.at("gen.w").value()[0] == -3.0f);  // untouched
    REQUIRE(ps.at("gen.w").value()[3] == 9.0f);
    REQUIRE_THROWS_AS(enforce_lipschitz(ps, "critic.", 0.0), std::invalid_argument);
}

TEST_CASE("clip bound holds after every optimizer step") {
    RunConfig cfg = tiny_config();
    cfg.h = cfg.w = 8;
    cfg.t = 2;
    cfg.critic_base = 4;
    const double clip = cfg.clip_value;
    ParamStore<float> ps(45);
    Critic<float> critic(ps, "critic", cfg);
    enforce_lipschitz(ps, "critic.", clip);
    Adam<float> opt(1e-3, {"critic."});
    Rng rng(46);
    for (int step = 0; step < 100; ++step) {
        Tensor<float> real = rand_tensor<float>({2, cfg.c, cfg.t, cfg.h, cfg.h}, rng, -1.0, 1.0);
        Tensor<float> fake = rand_tensor<float>({2, cfg.c, cfg.t, cfg.h, cfg.h}, rng, -1.0, 1.0);
        Tensor<float> text = rand_tensor<float>({2, cfg.f_t}, rng, -1.0, 1.0);
        opt.zero_grad(ps);
        Var<float> loss = critic_loss(critic(constant(real.clone()), constant(text.clone()), true),
                                      critic(constant(fake.clone()), constant(text.clone()), true));
        backward(loss);
        opt.step(ps);
        enforce_lipschitz(ps, "critic.", clip);
        float worst = 0.0f;
        for (const auto& name : ps.param_names()) {
            if (name.rfind("critic.", 0) != 0) continue;
            const Tensor<float>& v = ps.at(name).value();
            for (i64 i = 0; i < v.numel(); ++i) worst = std::max(worst, std::abs(v[i]));
        }
        REQUIRE(worst <= static_cast<float>(clip) + 1e-7f);
    }
}

TEST_CASE("critic passes finite differences") {
    RunConfig cfg = tiny_config();
    cfg.h = cfg.w = 8;
    cfg.t = 2;
    cfg.f_t = 5;
    cfg.critic_base = 4;
    ParamStore<double> ps(47);
    Critic<double> critic(ps, "critic", cfg);
    Rng rng(48);
    Tensor<double> video = rand_tensor<double>({2, cfg.c, cfg.t, cfg.h, cfg.h}, rng, -1.0, 1.0);
    Tensor<double> text = rand_tensor<double>({2, cfg.f_t}, rng, -1.0, 1.0);
    Var<double> video_leaf = param(video.clone());
    Var<double> text_leaf = param(text.clone());

    std::vector<std::pair<std::string, Var<double>>> leaves = {{"video", video_leaf},
                                                               {"text", text_leaf}};
    for (const auto& name : ps.param_names()) leaves.emplace_back(name, ps.at(name));
    FdFailure f;
    const bool ok = fd_check(
        leaves, [&] { return project(critic(video_leaf, text_leaf, true)); }, 1e-3, 3, 1e-5, &f);
    INFO("leaf " << f.leaf << "[" << f.index << "] analytic " << f.analytic << " numeric "
                 << f.numeric << " rel " << f.rel);
    REQUIRE(ok);
}
