#pragma once

#include <set>

#include "t2v/config.hpp"
#include "t2v/nn/adam.hpp"
#include "t2v/nn/arch.hpp"
#include "t2v/train/trainer.hpp"

namespace t2v {

struct LabeledClip {
    Tensor<float> video;  // [T,C,H,W] in [-1,1]
    i64 label = 0;
};

// Five 3-D conv + ReLU layers (widths 32-64-128-256-256, stride-2 on every
// axis that still has extent) into a fully connected softmax head.
template <class T>
struct VideoClassifier {
    RunConfig cfg;
    i64 num_classes = 0;
    std::vector<std::string> class_names;
    ParamStore<T> ps;
    std::vector<Conv<T>> convs;
    Linear<T> fc;
    i64 flat_dim = 0;

    VideoClassifier(const RunConfig& config, std::vector<std::string> classes, std::uint64_t seed)
        : cfg(config), num_classes(static_cast<i64>(classes.size())),
          class_names(std::move(classes)), ps(seed) {
        if (num_classes < 2) throw std::invalid_argument("classifier needs >=2 classes");
        static constexpr i64 kWidths[5] = {32, 64, 128, 256, 256};
        std::array<i64, 3> dims{cfg.t, cfg.h, cfg.h};
        i64 ci = cfg.c;
        for (int i = 0; i < 5; ++i) {
            const AxisPlan ap = plan_down_axes(dims);
            convs.emplace_back(ps, "clf.conv" + std::to_string(i), ci, kWidths[i],
                               std::vector<i64>{ap.k[0], ap.k[1], ap.k[2]},
                               std::vector<i64>{ap.s[0], ap.s[1], ap.s[2]},
                               std::vector<i64>{ap.p[0], ap.p[1], ap.p[2]});
            dims = ap.out;
            ci = kWidths[i];
        }
        flat_dim = ci * dims[0] * dims[1] * dims[2];
        fc = Linear<T>(ps, "clf.fc", flat_dim, num_classes);
    }

    // videos [B,C,T,H,W] -> [B,K]
    Var<T> logits(const Var<T>& videos) const {
        const auto& vs = videos.shape();
        if (vs.size() != 5 || vs[1] != cfg.c || vs[2] != cfg.t || vs[3] != cfg.h || vs[4] != cfg.h)
            throw std::invalid_argument("classifier: bad video batch " + shape_str(vs));
        Var<T> x = videos;
        for (const auto& conv : convs) x = relu(conv(x));
        return fc(reshape(x, {vs[0], flat_dim}));
    }

    // softmax probabilities, [B,K]
    Tensor<T> probs(const Tensor<T>& videos) const {
        Tensor<T> lg = logits(constant(videos)).value();
        const i64 B = lg.shape[0], K = lg.shape[1];
        Tensor<T> p(lg.shape);
        for (i64 b = 0; b < B; ++b) {
            T mx = lg[b * K];
            for (i64 k = 1; k < K; ++k) mx = std::max(mx, lg[b * K + k]);
            double z = 0.0;
            for (i64 k = 0; k < K; ++k) z += std::exp(static_cast<double>(lg[b * K + k] - mx));
            for (i64 k = 0; k < K; ++k)
                p[b * K + k] =
                    static_cast<T>(std::exp(static_cast<double>(lg[b * K + k] - mx)) / z);
        }
        return p;
    }

    std::vector<i64> predict(const Tensor<T>& videos) const {
        Tensor<T> lg = logits(constant(videos)).value();
        const i64 B = lg.shape[0], K = lg.shape[1];
        std::vector<i64> out(static_cast<size_t>(B));
        for (i64 b = 0; b < B; ++b) {
            i64 best = 0;
            for (i64 k = 1; k < K; ++k)
                if (lg[b * K + k] > lg[b * K + best]) best = k;
            out[static_cast<size_t>(b)] = best;
        }
        return out;
    }
};

template <class T>
double classifier_accuracy(const VideoClassifier<T>& clf, const std::vector<LabeledClip>& clips,
                           i64 batch = 16) {
    if (clips.empty()) return 0.0;
    i64 hits = 0;
    for (size_t at = 0; at < clips.size(); at += static_cast<size_t>(batch)) {
        const size_t end = std::min(clips.size(), at + static_cast<size_t>(batch));
        std::vector<Tensor<float>> vids;
        for (size_t i = at; i < end; ++i) vids.push_back(clips[i].video);
        Tensor<T> collated = collate_videos(vids);
        const auto preds = clf.predict(collated);
        for (size_t i = at; i < end; ++i)
            if (preds[i - at] == clips[i].label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(clips.size());
}

// Epoch loop with best-validation selection: the returned accuracy is the
// best seen, and the classifier keeps that epoch's parameters.
template <class T>
double train_classifier(VideoClassifier<T>& clf, const std::vector<LabeledClip>& train,
                        const std::vector<LabeledClip>& val, i64 epochs, i64 batch,
                        std::uint64_t seed, double lr = 1e-3) {
    if (train.empty() || val.empty())
        throw std::invalid_argument("train_classifier: empty split");
    std::set<i64> labels;
    for (const auto& c : train) {
        if (c.label < 0 || c.label >= clf.num_classes)
            throw std::invalid_argument("train_classifier: label out of range");
        labels.insert(c.label);
    }
    if (labels.size() < 2)
        throw std::invalid_argument("train_classifier: needs at least 2 classes present");
    Adam<T> opt(lr, {"clf."});
    Rng rng = Rng(seed).child("clf/shuffle");
    double best_acc = -1.0;
    std::unordered_map<std::string, Tensor<T>> best;
    for (i64 e = 0; e < epochs; ++e) {
        const auto perm = random_permutation(static_cast<i64>(train.size()), rng);
        for (size_t at = 0; at < perm.size(); at += static_cast<size_t>(batch)) {
            const size_t end = std::min(perm.size(), at + static_cast<size_t>(batch));
            std::vector<Tensor<float>> vids;
            std::vector<i64> ys;
            for (size_t i = at; i < end; ++i) {
                vids.push_back(train[static_cast<size_t>(perm[i])].video);
                ys.push_back(train[static_cast<size_t>(perm[i])].label);
            }
            Var<T> loss = softmax_xent(clf.logits(constant(collate_videos(vids))), ys);
            check_loss_finite(static_cast<double>(loss.value()[0]), "classifier loss");
            clf.ps.zero_grad();
            backward(loss);
            opt.step(clf.ps);
        }
        const double acc = classifier_accuracy(clf, val, batch);
        if (acc > best_acc) {
            best_acc = acc;
            best.clear();
            for (const auto& name : clf.ps.param_names())
                best[name] = clf.ps.at(name).value().clone();
        }
    }
    for (const auto& name : clf.ps.param_names()) {
        const Tensor<T>& src = best.at(name);
        std::copy_n(src.data(), src.numel(), clf.ps.at(name).value().data());
    }
    return best_acc;
}

}  // namespace t2v
