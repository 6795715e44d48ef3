#pragma once

#include <cstdio>
#include <ostream>

#include "t2v/data/clips.hpp"
#include "t2v/nn/adam.hpp"
#include "t2v/train/losses.hpp"
#include "t2v/train/variants.hpp"

namespace t2v {

struct LossRecord {
    i64 step = 0;
    double cvae = 0.0, gan_d = 0.0, gan_g = 0.0, recons = 0.0, total = 0.0;
};

inline void write_loss_csv_header(std::ostream& os) { os << "step,cvae,gan_d,gan_g,recons,total\n"; }

inline void write_loss_record(std::ostream& os, const LossRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%lld,%.8e,%.8e,%.8e,%.8e,%.8e\n",
                  static_cast<long long>(r.step), r.cvae, r.gan_d, r.gan_g, r.recons, r.total);
    os << buf;
}

// What the critic scored in the latest update, for batch-composition audits.
struct CriticSample {
    std::string kind;  // "real" | "fake" | "mismatch"
    i64 video_index = 0;
    i64 caption_index = 0;
};

// [T,C,H,W] clips -> one [B,C,T,H,W] batch.
template <class T>
Tensor<T> collate_videos(const std::vector<Tensor<T>>& clips) {
    if (clips.empty()) throw std::invalid_argument("collate_videos: empty batch");
    const auto& s = clips[0].shape;
    if (s.size() != 4) throw std::invalid_argument("collate_videos: clips must be [T,C,H,W]");
    const i64 B = static_cast<i64>(clips.size()), t = s[0], c = s[1], h = s[2], w = s[3];
    Tensor<T> out({B, c, t, h, w});
    for (i64 b = 0; b < B; ++b) {
        check_shape(clips[static_cast<size_t>(b)], s, "collate_videos clip");
        const T* src = clips[static_cast<size_t>(b)].data();
        T* dst = out.data() + b * c * t * h * w;
        for (i64 ti = 0; ti < t; ++ti)
            for (i64 ci = 0; ci < c; ++ci)
                std::copy_n(src + (ti * c + ci) * h * w, h * w, dst + (ci * t + ti) * h * w);
    }
    return out;
}

// [B,C,T,H,W] -> [B,C,H,W] at time 0.
template <class T>
Tensor<T> first_frames(const Tensor<T>& batch) {
    const auto& s = batch.shape;
    if (s.size() != 5) throw std::invalid_argument("first_frames: expected [B,C,T,H,W]");
    Tensor<T> out({s[0], s[1], s[3], s[4]});
    const i64 plane = s[3] * s[4];
    for (i64 b = 0; b < s[0]; ++b)
        for (i64 c = 0; c < s[1]; ++c)
            std::copy_n(batch.data() + ((b * s[1] + c) * s[2]) * plane, plane,
                        out.data() + (b * s[1] + c) * plane);
    return out;
}

// Single-sample [1,C,T,H,W] -> storable [T,C,H,W].
template <class T>
Tensor<T> video_to_tchw(const Tensor<T>& v) {
    const auto& s = v.shape;
    if (s.size() != 5 || s[0] != 1) throw std::invalid_argument("video_to_tchw: expected [1,C,T,H,W]");
    Tensor<T> out({s[2], s[1], s[3], s[4]});
    const i64 plane = s[3] * s[4];
    for (i64 c = 0; c < s[1]; ++c)
        for (i64 t = 0; t < s[2]; ++t)
            std::copy_n(v.data() + (c * s[2] + t) * plane, plane,
                        out.data() + (t * s[1] + c) * plane);
    return out;
}

// Row b takes row (b+1) mod B: pairs each video with its neighbor's caption.
template <class T>
Tensor<T> rotate_rows(const Tensor<T>& x) {
    const i64 B = x.shape[0], D = x.numel() / x.shape[0];
    Tensor<T> out(x.shape);
    for (i64 b = 0; b < B; ++b)
        std::copy_n(x.data() + ((b + 1) % B) * D, D, out.data() + b * D);
    return out;
}

// One critic update (Lipschitz-clipped) then one end-to-end generator/CVAE/
// encoder update per step, Adam on both sides.
template <class T>
class Trainer {
public:
    Trainer(Model<T>& model, std::uint64_t seed)
        : model_(model),
          weights_{model.cfg.gamma1, model.cfg.gamma2, model.cfg.gamma3},
          opt_critic_(model.cfg.lr, {"critic."}, model.cfg.adam_beta1, model.cfg.adam_beta2),
          opt_gen_(model.cfg.lr, {"enc.", "cvae.", "t2f.", "gen."}, model.cfg.adam_beta1,
                   model.cfg.adam_beta2),
          seed_(seed) {
        Rng root(seed);
        noise_rng_ = root.child("train/noise");
        shuffle_rng_ = root.child("train/shuffle");
    }

    Model<T>& model() { return model_; }
    Adam<T>& opt_critic() { return opt_critic_; }
    Adam<T>& opt_gen() { return opt_gen_; }
    Rng& noise_rng() { return noise_rng_; }
    Rng& shuffle_rng() { return shuffle_rng_; }
    std::uint64_t seed() const { return seed_; }
    i64 step() const { return step_; }
    void set_step(i64 s) { step_ = s; }
    const std::vector<CriticSample>& last_critic_batch() const { return last_critic_batch_; }

    // videos [B,C,T,H,W] in [-1,1]; captions align with the batch dimension.
    LossRecord train_step(const Tensor<T>& videos, const std::vector<std::string>& captions) {
        const RunConfig& cfg = model_.cfg;
        const auto& vs = videos.shape;
        if (vs.size() != 5 || vs[1] != cfg.c || vs[2] != cfg.t || vs[3] != cfg.h || vs[4] != cfg.h)
            throw std::invalid_argument("train_step: bad video batch shape " + shape_str(vs));
        const i64 B = vs[0];
        if (B == 0 || static_cast<i64>(captions.size()) != B)
            throw std::invalid_argument("train_step: batch/caption count mismatch");
        const auto ids = model_.encode_captions(captions);
        const Tensor<T> v1 = first_frames(videos);

        // -- critic update: generator side frozen (detached features) --
        Var<T> psi_d = model_.encoder(ids).detach();
        Var<T> fake_d = forward_video(psi_d, v1, /*train=*/true).video.detach();
        Var<T> real = constant(videos);
        Var<T> real_scores = model_.critic(real, psi_d, true);
        Var<T> fake_scores = model_.critic(fake_d, psi_d, true);
        last_critic_batch_.clear();
        for (i64 b = 0; b < B; ++b) last_critic_batch_.push_back({"real", b, b});
        for (i64 b = 0; b < B; ++b) last_critic_batch_.push_back({"fake", b, b});
        Var<T> d_loss;
        if (variant_has_mismatch_pairs(model_.variant)) {
            if (B < 2) throw std::invalid_argument("pt2v needs batch size >= 2 for mismatches");
            Var<T> psi_mis = constant(rotate_rows(psi_d.value()));
            Var<T> mis_scores = model_.critic(real, psi_mis, true);
            for (i64 b = 0; b < B; ++b)
                last_critic_batch_.push_back({"mismatch", b, (b + 1) % B});
            d_loss = affine(mean_all(fake_scores) + mean_all(mis_scores), 0.5, 0.0) -
                     mean_all(real_scores);
        } else {
            d_loss = critic_loss(real_scores, fake_scores);
        }
        const double gan_d = static_cast<double>(d_loss.value()[0]);
        check_loss_finite(gan_d, "critic loss");
        model_.ps.zero_grad();
        backward(d_loss);
        opt_critic_.step(model_.ps);
        enforce_lipschitz(model_.ps, "critic.", cfg.clip_value);

        // -- generator update: end to end through encoder, CVAE and video --
        Var<T> psi = model_.encoder(ids);
        Forward fwd = forward_video(psi, v1, /*train=*/true);
        Var<T> g_adv = generator_adv_loss(model_.critic(fwd.video, psi, true));
        Var<T> l_cvae, l_recons;
        if (fwd.gist) {
            l_cvae = gaussian_recon(*fwd.gist, constant(v1)) + kl_divergence(*fwd.mu, *fwd.log_var);
            l_recons = reconstruction_loss(*fwd.gist, fwd.video);
        } else {
            l_cvae = constant(Tensor<T>::zeros({1}));
            l_recons = reconstruction_loss(constant(v1), fwd.video);
        }
        Var<T> total = total_loss(l_cvae, g_adv, l_recons, weights_);
        model_.ps.zero_grad();
        backward(total);
        opt_gen_.step(model_.ps);

        ++step_;
        LossRecord rec;
        rec.step = step_;
        rec.cvae = static_cast<double>(l_cvae.value()[0]);
        rec.gan_d = gan_d;
        rec.gan_g = static_cast<double>(g_adv.value()[0]);
        rec.recons = static_cast<double>(l_recons.value()[0]);
        rec.total = static_cast<double>(total.value()[0]);
        return rec;
    }

private:
    struct Forward {
        Var<T> video;
        std::optional<Var<T>> gist, mu, log_var;
    };

    // Full conditional forward pass; gist variants sample the CVAE posterior
    // of the clip's first frame.
    Forward forward_video(const Var<T>& psi, const Tensor<T>& v1, bool train) {
        const RunConfig& cfg = model_.cfg;
        const i64 B = psi.shape()[0];
        Forward fwd;
        std::optional<Var<T>> gist;
        if (variant_has_cvae(model_.variant)) {
            Var<T> eta = model_.cvae->encode_frame(constant(v1), train);
            auto [mu, log_var] = model_.cvae->posterior(eta, psi);
            Var<T> z_g =
                model_.cvae->sample_latent(mu, log_var, normal_tensor<T>({B, cfg.d_g}, noise_rng_));
            gist = model_.cvae->decode(z_g, psi, train);
            fwd.mu = mu;
            fwd.log_var = log_var;
            fwd.gist = gist;
        }
        Var<T> n_v = constant(normal_tensor<T>({B, cfg.d_n}, noise_rng_));
        fwd.video = model_.gen(model_.video_latent(psi, gist, n_v, train), train);
        return fwd;
    }

    Model<T>& model_;
    ObjectiveWeights weights_;
    Adam<T> opt_critic_, opt_gen_;
    Rng noise_rng_, shuffle_rng_;
    std::uint64_t seed_ = 0;
    i64 step_ = 0;
    std::vector<CriticSample> last_critic_batch_;
};

template <class T>
struct Sample {
    Tensor<T> gist;   // [C,H,W]
    Tensor<T> video;  // [T,C,H,W]
};

// Deterministic sampling: same (caption, seed) always yields the same pair.
// Non-gist variants return a zero gist placeholder.
template <class T>
Sample<T> generate_sample(Model<T>& model, const std::string& caption, std::uint64_t seed) {
    if (model.vocab.size() < 2) throw std::invalid_argument("generate_sample: model has no vocabulary");
    const RunConfig& cfg = model.cfg;
    Var<T> psi = model.encoder(model.encode_captions({caption}));
    Rng root(seed);
    Rng gist_rng = root.child("sample/gist");
    Rng noise_rng = root.child("sample/noise");
    Sample<T> out;
    std::optional<Var<T>> gist;
    if (variant_has_cvae(model.variant)) {
        Var<T> z_g = constant(normal_tensor<T>({1, cfg.d_g}, gist_rng));
        gist = model.cvae->decode(z_g, psi, false);
        out.gist = gist->value().reshaped({cfg.c, cfg.h, cfg.h}).clone();
    } else {
        out.gist = Tensor<T>::zeros({cfg.c, cfg.h, cfg.h});
    }
    Var<T> n_v = constant(normal_tensor<T>({1, cfg.d_n}, noise_rng));
    Var<T> video = model.gen(model.video_latent(psi, gist, n_v, false), false);
    out.video = video_to_tchw(video.value());
    return out;
}

// Deterministic epoch-batched driver; emits one CSV row per step when a
// stream is given. Incomplete trailing batches are dropped.
template <class T>
std::vector<LossRecord> train_on_corpus(Trainer<T>& trainer, const std::vector<CorpusItem>& items,
                                        i64 steps, std::ostream* csv = nullptr) {
    const i64 batch = trainer.model().cfg.batch_size;
    if (static_cast<i64>(items.size()) < batch)
        throw std::invalid_argument("train_on_corpus: corpus smaller than one batch");
    std::vector<LossRecord> records;
    std::vector<i64> queue;
    i64 at = 0;
    for (i64 s = 0; s < steps; ++s) {
        if (at + batch > static_cast<i64>(queue.size())) {
            queue = random_permutation(static_cast<i64>(items.size()), trainer.shuffle_rng());
            at = 0;
        }
        std::vector<Tensor<T>> clips;
        std::vector<std::string> captions;
        for (i64 b = 0; b < batch; ++b) {
            const auto& item = items[static_cast<size_t>(queue[static_cast<size_t>(at++)])];
            clips.push_back(item.video);
            captions.push_back(item.meta.caption);
        }
        LossRecord rec = trainer.train_step(collate_videos(clips), captions);
        if (csv) write_loss_record(*csv, rec);
        records.push_back(rec);
    }
    return records;
}

}  // namespace t2v
