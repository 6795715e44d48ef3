#pragma once

#include "t2v/nn/layers.hpp"
#include "t2v/text/vocab.hpp"

namespace t2v {

// Recurrent caption encoder: learned embeddings -> GRU -> affine projection
// of the last valid hidden state to an F_t-vector. Padded positions hold the
// hidden state fixed, so right-padding never changes the result.
template <class T>
struct TextEncoder {
    Embedding<T> embed;
    GruCell<T> gru;
    Linear<T> proj;
    i64 vocab_size = 0, f_t = 0;

    TextEncoder() = default;
    TextEncoder(ParamStore<T>& ps, const std::string& prefix, i64 vocab, i64 embed_dim,
                i64 hidden, i64 out_f_t)
        : vocab_size(vocab), f_t(out_f_t) {
        embed = Embedding<T>(ps, prefix + ".embed", vocab, embed_dim);
        gru = GruCell<T>(ps, prefix + ".gru", embed_dim, hidden);
        proj = Linear<T>(ps, prefix + ".proj", hidden, out_f_t);
    }

    // captions: batch of token-id sequences -> [B, F_t]
    Var<T> operator()(const std::vector<std::vector<i64>>& captions) const {
        const i64 B = static_cast<i64>(captions.size());
        if (B == 0) throw std::invalid_argument("encode_text: empty batch");
        i64 L = 0;
        for (const auto& c : captions) {
            if (c.empty()) throw std::invalid_argument("encode_text: empty caption");
            for (i64 id : c)
                if (id < 0 || id >= vocab_size)
                    throw std::invalid_argument("encode_text: token id out of vocabulary");
            L = std::max(L, static_cast<i64>(c.size()));
        }
        Var<T> h = constant(Tensor<T>::zeros({B, gru.hidden}));
        for (i64 t = 0; t < L; ++t) {
            std::vector<i64> ids(static_cast<size_t>(B), kPadId);
            Tensor<T> mask({B, 1});
            for (i64 b = 0; b < B; ++b) {
                const auto& c = captions[static_cast<size_t>(b)];
                const bool live = t < static_cast<i64>(c.size());
                if (live) ids[static_cast<size_t>(b)] = c[static_cast<size_t>(t)];
                mask[b] = live ? T(1) : T(0);
            }
            Var<T> hn = gru(embed(ids), h);
            // h <- h + mask * (hn - h): padded rows keep their state
            h = h + mul(broadcast_to(constant(mask), {B, gru.hidden}), hn - h);
        }
        return proj(h);
    }
};

}  // namespace t2v
