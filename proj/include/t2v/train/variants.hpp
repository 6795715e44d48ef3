#pragma once

#include <optional>

#include "t2v/adv/critic.hpp"
#include "t2v/errors.hpp"
#include "t2v/gist/cvae.hpp"
#include "t2v/t2f/text2filter.hpp"
#include "t2v/text/encoder.hpp"
#include "t2v/text/vocab.hpp"
#include "t2v/vidgen/generator.hpp"

namespace t2v {

// The four ablation rungs: direct text-to-video, + mismatched-pair critic,
// + gist conditioning, + text-dependent filtering (the full model).
enum class Variant { DT2V, PT2V, GT2V, T2V };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::DT2V: return "dt2v";
        case Variant::PT2V: return "pt2v";
        case Variant::GT2V: return "gt2v";
        case Variant::T2V: return "t2v";
    }
    throw std::invalid_argument("bad variant enum");
}

inline Variant parse_variant(const std::string& s) {
    std::string k = s;
    for (auto& c : k) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (k == "dt2v") return Variant::DT2V;
    if (k == "pt2v") return Variant::PT2V;
    if (k == "gt2v") return Variant::GT2V;
    if (k == "t2v") return Variant::T2V;
    throw config_error("unknown variant `" + s + "` (expected dt2v, pt2v, gt2v or t2v)");
}

inline bool variant_has_cvae(Variant v) { return v == Variant::GT2V || v == Variant::T2V; }
inline bool variant_has_t2f(Variant v) { return v == Variant::T2V; }
inline bool variant_has_mismatch_pairs(Variant v) { return v == Variant::PT2V; }

// Video-generator latent width per variant:
//   t2v        [g_t; n_v]
//   gt2v       [eta(gist); psi(t); n_v]
//   dt2v/pt2v  [psi(t); n_v]
inline i64 variant_latent_dim(const RunConfig& cfg, Variant v) {
    switch (v) {
        case Variant::T2V: return cfg.d_gt + cfg.d_n;
        case Variant::GT2V: return cfg.d_eta + cfg.f_t + cfg.d_n;
        case Variant::DT2V:
        case Variant::PT2V: return cfg.f_t + cfg.d_n;
    }
    throw std::invalid_argument("bad variant enum");
}

template <class T>
struct Model {
    RunConfig cfg;
    Variant variant = Variant::T2V;
    Vocabulary vocab;
    ParamStore<T> ps;
    TextEncoder<T> encoder;
    std::optional<GistCvae<T>> cvae;
    std::optional<Text2Filter<T>> t2f;
    VideoGenerator<T> gen;
    Critic<T> critic;

    Model(const RunConfig& config, Variant v, Vocabulary voc, std::uint64_t seed)
        : cfg(config), variant(v), vocab(std::move(voc)), ps(seed) {
        if (vocab.size() < 2) throw std::invalid_argument("model needs a built vocabulary");
        encoder = TextEncoder<T>(ps, "enc", static_cast<i64>(vocab.size()), cfg.embed_dim,
                                 cfg.gru_hidden, cfg.f_t);
        if (variant_has_cvae(variant)) cvae.emplace(ps, "cvae", cfg);
        if (variant_has_t2f(variant)) t2f.emplace(ps, "t2f", cfg);
        gen = VideoGenerator<T>(ps, "gen", cfg, variant_latent_dim(cfg, variant));
        critic = Critic<T>(ps, "critic", cfg);
    }

    std::vector<std::vector<i64>> encode_captions(const std::vector<std::string>& captions) const {
        std::vector<std::vector<i64>> ids;
        ids.reserve(captions.size());
        for (const auto& c : captions) ids.push_back(vocab.encode(c));
        return ids;
    }

    // Variant-specific video latent. `gist` is required for gist variants
    // (live posterior sample during training, prior decode at sampling time)
    // and ignored otherwise.
    Var<T> video_latent(const Var<T>& text_feat, const std::optional<Var<T>>& gist,
                        const Var<T>& noise, bool train) const {
        switch (variant) {
            case Variant::T2V: {
                if (!gist) throw std::invalid_argument("t2v latent needs a gist");
                return compose_latent((*t2f)(*gist, text_feat, train), noise);
            }
            case Variant::GT2V: {
                if (!gist) throw std::invalid_argument("gt2v latent needs a gist");
                Var<T> eta = cvae->encode_frame(*gist, train);
                return concat<T>({eta, text_feat, noise}, 1);
            }
            case Variant::DT2V:
            case Variant::PT2V: return concat<T>({text_feat, noise}, 1);
        }
        throw std::invalid_argument("bad variant enum");
    }
};

}  // namespace t2v
