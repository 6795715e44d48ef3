#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "helpers.hpp"
#include "t2v/train/checkpoint.hpp"
#include "t2v/train/trainer.hpp"

using namespace t2v;
using t2v::testing::tiny_config;

namespace {

std::vector<CorpusItem> toy_items(const RunConfig& cfg) {
    ToyCorpusSpec spec;
    spec.background_colors = {"red", "green"};
    spec.motions = {"right", "left"};
    spec.clips_per_combination = 1;
    spec.noise_level = 0.0;
    spec.seed = 5;
    spec.t = cfg.t;
    spec.h = cfg.h;
    std::vector<CorpusItem> items;
    for (auto& clip : synthesize_toy_corpus(spec)) {
        CorpusItem item;
        item.video = clip.video;
        item.meta = {clip.clip_id, clip.source_id, clip.caption};
        items.push_back(std::move(item));
    }
    return items;
}

Vocabulary corpus_vocab(const std::vector<CorpusItem>& items) {
    std::vector<std::string> captions;
    for (const auto& item : items) captions.push_back(item.meta.caption);
    return Vocabulary::build(captions);
}

}  // namespace

TEST_CASE("joint objective is the weighted loss sum") {
    const ObjectiveWeights w{1.0, 1.0, 0.1};
    const double want = 1.0 * 2.0 + 1.0 * 3.0 + 0.1 * 1.0;
    REQUIRE(total_loss(2.0, 3.0, 1.0, w) == want);

    Var<double> cvae = param(Tensor<double>::from({1}, {2.0}));
    Var<double> gan = param(Tensor<double>::from({1}, {3.0}));
    Var<double> recons = param(Tensor<double>::from({1}, {1.0}));
    Var<double> total = total_loss(cvae, gan, recons, w);
    REQUIRE(total.value()[0] == want);
    backward(total);
    REQUIRE(cvae.grad()[0] == 1.0);
    REQUIRE(gan.grad()[0] == 1.0);
    REQUIRE(recons.grad()[0] == 0.1);
}

TEST_CASE("non-finite losses abort training") {
    const ObjectiveWeights w;
    REQUIRE_THROWS_AS(check_loss_finite(std::nan(""), "x"), training_diverged);
    REQUIRE_THROWS_AS(check_loss_finite(std::numeric_limits<double>::infinity(), "x"),
                      training_diverged);
    REQUIRE_NOTHROW(check_loss_finite(-3.0, "x"));
    REQUIRE_THROWS_AS(total_loss(std::nan(""), 0.0, 0.0, w), training_diverged);
    REQUIRE_THROWS_AS(
        total_loss(param(Tensor<double>::from({1}, {std::nan("")})),
                   param(Tensor<double>::from({1}, {0.0})),
                   param(Tensor<double>::from({1}, {0.0})), w),
        training_diverged);
}

TEST_CASE("variant names round trip and parse case-insensitively") {
    REQUIRE(parse_variant("T2V") == Variant::T2V);
    REQUIRE(parse_variant("gt2v") == Variant::GT2V);
    REQUIRE(parse_variant("Pt2V") == Variant::PT2V);
    REQUIRE(parse_variant("dt2v") == Variant::DT2V);
    for (Variant v : {Variant::DT2V, Variant::PT2V, Variant::GT2V, Variant::T2V})
        REQUIRE(parse_variant(variant_name(v)) == v);
    REQUIRE_THROWS_AS(parse_variant("vae"), config_error);
}

TEST_CASE("variants own exactly their modules") {
    const RunConfig cfg = tiny_config();
    REQUIRE(variant_latent_dim(cfg, Variant::T2V) == 24);
    REQUIRE(variant_latent_dim(cfg, Variant::GT2V) == 40);
    REQUIRE(variant_latent_dim(cfg, Variant::DT2V) == 24);
    REQUIRE(variant_latent_dim(cfg, Variant::PT2V) == 24);

    const auto items = toy_items(cfg);
    const Vocabulary vocab = corpus_vocab(items);
    auto has_prefix = [](const ParamStore<float>& ps, const std::string& prefix) {
        for (const auto& name : ps.param_names())
            if (name.rfind(prefix, 0) == 0) return true;
        return false;
    };

    for (Variant v : {Variant::DT2V, Variant::PT2V, Variant::GT2V, Variant::T2V}) {
        Model<float> m(cfg, v, vocab, 3);
        REQUIRE(m.cvae.has_value() == variant_has_cvae(v));
        REQUIRE(m.t2f.has_value() == variant_has_t2f(v));
        REQUIRE(has_prefix(m.ps, "enc."));
        REQUIRE(has_prefix(m.ps, "gen."));
        REQUIRE(has_prefix(m.ps, "critic."));
        REQUIRE(has_prefix(m.ps, "cvae.") == variant_has_cvae(v));
        REQUIRE(has_prefix(m.ps, "t2f.") == variant_has_t2f(v));
        REQUIRE(m.gen.z_dim == variant_latent_dim(cfg, v));
    }

    // the mismatch-pair rung differs from the direct one only in training
    Model<float> dt(cfg, Variant::DT2V, vocab, 3);
    Model<float> pt(cfg, Variant::PT2V, vocab, 3);
    REQUIRE(dt.ps.param_names() == pt.ps.param_names());
    REQUIRE(dt.ps.total_params() == pt.ps.total_params());
}

TEST_CASE("optimizers split the parameter space by prefix") {
    Adam<float> gen_opt(1e-3, {"enc.", "cvae.", "t2f.", "gen."});
    Adam<float> critic_opt(1e-3, {"critic."});
    for (const char* name : {"enc.embed.w", "cvae.mu.b", "t2f.fc.w", "gen.trunk0.w"}) {
        REQUIRE(gen_opt.owns(name));
        REQUIRE_FALSE(critic_opt.owns(name));
    }
    REQUIRE(critic_opt.owns("critic.conv0.w"));
    REQUIRE_FALSE(gen_opt.owns("critic.conv0.w"));
    Adam<float> all(1e-3, {});
    REQUIRE(all.owns("anything.at.all"));
}

TEST_CASE("batch plumbing keeps layouts straight") {
    // [T,C,H,W] -> [B,C,T,H,W]
    Tensor<float> clip0 = Tensor<float>::from({2, 2, 1, 1}, {1, 2, 3, 4});
    Tensor<float> clip1 = Tensor<float>::from({2, 2, 1, 1}, {5, 6, 7, 8});
    Tensor<float> batch = collate_videos<float>({clip0, clip1});
    REQUIRE(batch.shape == std::vector<i64>{2, 2, 2, 1, 1});
    const std::vector<float> want = {1, 3, 2, 4, 5, 7, 6, 8};
    for (i64 i = 0; i < 8; ++i) REQUIRE(batch[i] == want[static_cast<size_t>(i)]);

    Tensor<float> firsts = first_frames(batch);
    REQUIRE(firsts.shape == std::vector<i64>{2, 2, 1, 1});
    REQUIRE(firsts[0] == 1.0f);
    REQUIRE(firsts[1] == 2.0f);
    REQUIRE(firsts[2] == 5.0f);
    REQUIRE(firsts[3] == 6.0f);

    // single-sample inverse of collate
    Tensor<float> one = collate_videos<float>({clip0});
    Tensor<float> back = video_to_tchw(one);
    REQUIRE(back.shape == clip0.shape);
    for (i64 i = 0; i < 4; ++i) REQUIRE(back[i] == clip0[i]);

    Tensor<float> rot = rotate_rows(Tensor<float>::from({3, 2}, {1, 2, 3, 4, 5, 6}));
    const std::vector<float> rot_want = {3, 4, 5, 6, 1, 2};
    for (i64 i = 0; i < 6; ++i) REQUIRE(rot[i] == rot_want[static_cast<size_t>(i)]);

    REQUIRE_THROWS_AS(collate_videos<float>({}), std::invalid_argument);
    REQUIRE_THROWS_AS(first_frames(Tensor<float>::zeros({2, 3, 4, 4})), std::invalid_argument);
    REQUIRE_THROWS_AS(video_to_tchw(Tensor<float>::zeros({2, 3, 2, 4, 4})), std::invalid_argument);
}

TEST_CASE("mismatched-pair batches audit correctly") {
    RunConfig cfg = tiny_config();
    const auto items = toy_items(cfg);
    Model<float> model(cfg, Variant::PT2V, corpus_vocab(items), 21);
    Trainer<float> trainer(model, 22);
    std::vector<Tensor<float>> clips = {items[0].video, items[1].video, items[2].video};
    std::vector<std::string> captions = {items[0].meta.caption, items[1].meta.caption,
                                         items[2].meta.caption};
    trainer.train_step(collate_videos(clips), captions);

    const auto& audit = trainer.last_critic_batch();
    REQUIRE(audit.size() == 9);
    for (i64 b = 0; b < 3; ++b) {
        REQUIRE(audit[static_cast<size_t>(b)].kind == "real");
        REQUIRE(audit[static_cast<size_t>(b)].video_index == b);
        REQUIRE(audit[static_cast<size_t>(b)].caption_index == b);
        REQUIRE(audit[static_cast<size_t>(3 + b)].kind == "fake");
        REQUIRE(audit[static_cast<size_t>(3 + b)].caption_index == b);
        REQUIRE(audit[static_cast<size_t>(6 + b)].kind == "mismatch");
        REQUIRE(audit[static_cast<size_t>(6 + b)].video_index == b);
        REQUIRE(audit[static_cast<size_t>(6 + b)].caption_index == (b + 1) % 3);
    }

    // the direct rung scores only real and fake pairs
    Model<float> dmodel(cfg, Variant::DT2V, corpus_vocab(items), 21);
    Trainer<float> dtrainer(dmodel, 22);
    dtrainer.train_step(collate_videos(clips), captions);
    REQUIRE(dtrainer.last_critic_batch().size() == 6);

    REQUIRE_THROWS_AS(trainer.train_step(collate_videos<float>({items[0].video}), {"one"}),
                      std::invalid_argument);  // mismatches need B >= 2
}

TEST_CASE("training input validation") {
    RunConfig cfg = tiny_config();
    const auto items = toy_items(cfg);
    Model<float> model(cfg, Variant::DT2V, corpus_vocab(items), 31);
    Trainer<float> trainer(model, 32);
    REQUIRE_THROWS_AS(trainer.train_step(Tensor<float>::zeros({2, 3, cfg.t + 2, cfg.h, cfg.h}),
                                         {"a", "b"}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(
        trainer.train_step(collate_videos<float>({items[0].video, items[1].video}), {"a"}),
        std::invalid_argument);

    RunConfig big = cfg;
    big.batch_size = static_cast<i64>(items.size()) + 1;
    Model<float> bmodel(big, Variant::DT2V, corpus_vocab(items), 31);
    Trainer<float> btrainer(bmodel, 32);
    REQUIRE_THROWS_AS(train_on_corpus(btrainer, items, 1), std::invalid_argument);
}

TEST_CASE("identical seeds give byte-identical loss logs") {
    RunConfig cfg = tiny_config();
    cfg.batch_size = 2;
    const auto items = toy_items(cfg);
    const Vocabulary vocab = corpus_vocab(items);

    std::ostringstream log_a, log_b;
    {
        Model<float> model(cfg, Variant::T2V, vocab, 7);
        Trainer<float> trainer(model, 11);
        train_on_corpus(trainer, items, 3, &log_a);
    }
    {
        Model<float> model(cfg, Variant::T2V, vocab, 7);
        Trainer<float> trainer(model, 11);
        train_on_corpus(trainer, items, 3, &log_b);
    }
    const std::string text = log_a.str();
    REQUIRE(text == log_b.str());
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 3);

    std::ostringstream log_c;
    Model<float> model(cfg, Variant::T2V, vocab, 7);
    Trainer<float> trainer(model, 12);  // different run seed
    train_on_corpus(trainer, items, 3, &log_c);
    REQUIRE(log_a.str() != log_c.str());
}

TEST_CASE("checkpoints restore training bit for bit") {
    RunConfig cfg = tiny_config();
    cfg.batch_size = 2;
    const auto items = toy_items(cfg);
    const Vocabulary vocab = corpus_vocab(items);
    const std::string path = "ckpt_roundtrip_test.bin";

    Model<float> model(cfg, Variant::GT2V, vocab, 7);
    Trainer<float> trainer(model, 11);
    train_on_corpus(trainer, items, 2);
    save_checkpoint(path, trainer);

    auto loaded = load_checkpoint<float>(path);
    REQUIRE(loaded.trainer->step() == 2);
    REQUIRE(loaded.model->variant == Variant::GT2V);
    REQUIRE(loaded.model->vocab.size() == vocab.size());
    REQUIRE(loaded.model->ps.param_names() == model.ps.param_names());

    const Sample<float> a = generate_sample(model, items[0].meta.caption, 123);
    const Sample<float> b = generate_sample(*loaded.model, items[0].meta.caption, 123);
    REQUIRE(a.video.shape == b.video.shape);
    for (i64 i = 0; i < a.video.numel(); ++i) REQUIRE(a.video[i] == b.video[i]);
    for (i64 i = 0; i < a.gist.numel(); ++i) REQUIRE(a.gist[i] == b.gist[i]);

    // both copies continue along the same trajectory
    std::ostringstream cont_orig, cont_loaded;
    train_on_corpus(trainer, items, 2, &cont_orig);
    train_on_corpus(*loaded.trainer, items, 2, &cont_loaded);
    REQUIRE(cont_orig.str() == cont_loaded.str());
    REQUIRE(trainer.step() == 4);

    std::filesystem::remove(path);
}

TEST_CASE("every variant takes finite steps on the toy corpus") {
    RunConfig cfg = tiny_config();
    cfg.batch_size = 2;
    const auto items = toy_items(cfg);
    const Vocabulary vocab = corpus_vocab(items);
    for (Variant v : {Variant::DT2V, Variant::PT2V, Variant::GT2V, Variant::T2V}) {
        Model<float> model(cfg, v, vocab, 51);
        Trainer<float> trainer(model, 52);
        const auto records = train_on_corpus(trainer, items, 2);
        REQUIRE(records.size() == 2);
        for (const auto& r : records) {
            REQUIRE(std::isfinite(r.total));
            REQUIRE(std::isfinite(r.gan_d));
            REQUIRE(std::isfinite(r.gan_g));
            REQUIRE(std::isfinite(r.recons));
            REQUIRE(std::isfinite(r.cvae));
        }
        REQUIRE(records[1].step == 2);
        if (!variant_has_cvae(v)) REQUIRE(records[0].cvae == 0.0);
    }
}
