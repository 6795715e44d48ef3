#pragma once

#include <map>

#include "t2v/eval/classifier.hpp"
#include "t2v/train/checkpoint.hpp"

namespace t2v {

// Mean RGB over the outer `border`-pixel frame of a [C,H,W] image — the toy
// construction keeps the background visible at the periphery.
template <class T>
std::array<double, 3> mean_border_color(const Tensor<T>& img, i64 border = 4) {
    if (img.shape.size() != 3 || img.shape[0] != 3)
        throw std::invalid_argument("mean_border_color: expected [3,H,W]");
    const i64 h = img.shape[1], w = img.shape[2];
    std::array<double, 3> sum{0.0, 0.0, 0.0};
    i64 count = 0;
    for (i64 y = 0; y < h; ++y)
        for (i64 x = 0; x < w; ++x) {
            if (y >= border && y < h - border && x >= border && x < w - border) continue;
            for (i64 c = 0; c < 3; ++c)
                sum[static_cast<size_t>(c)] += static_cast<double>(img.data()[(c * h + y) * w + x]);
            ++count;
        }
    for (auto& v : sum) v /= static_cast<double>(count);
    return sum;
}

// Nearest candidate color in RGB distance; empty candidate list means the
// whole palette.
inline std::string nearest_palette_color(const std::array<double, 3>& rgb,
                                         const std::vector<std::string>& candidates = {}) {
    double best = 1e300;
    std::string name;
    for (const auto& [n, pal] : toy_palette()) {
        if (!candidates.empty() &&
            std::find(candidates.begin(), candidates.end(), n) == candidates.end())
            continue;
        double d = 0.0;
        for (size_t c = 0; c < 3; ++c) {
            const double diff = rgb[c] - static_cast<double>(pal[c]);
            d += diff * diff;
        }
        if (d < best) {
            best = d;
            name = n;
        }
    }
    if (name.empty()) throw std::invalid_argument("nearest_palette_color: no known candidates");
    return name;
}

// Drift of the frame-difference energy centroid from the first frame pair to
// the last, (dy, dx) in pixels. Video is [T,C,H,W].
template <class T>
std::pair<double, double> motion_drift(const Tensor<T>& video) {
    if (video.shape.size() != 4 || video.shape[0] < 2)
        throw std::invalid_argument("motion_drift: expected [T>=2,C,H,W]");
    const i64 t = video.shape[0], c = video.shape[1], h = video.shape[2], w = video.shape[3];
    const i64 frame = c * h * w;
    auto centroid = [&](i64 ti) -> std::pair<double, double> {
        const T* a = video.data() + ti * frame;
        const T* b = a + frame;
        double cy = 0.0, cx = 0.0, mass = 0.0;
        for (i64 y = 0; y < h; ++y)
            for (i64 x = 0; x < w; ++x) {
                double e = 0.0;
                for (i64 ch = 0; ch < c; ++ch) {
                    const double d = static_cast<double>(b[(ch * h + y) * w + x]) -
                                     static_cast<double>(a[(ch * h + y) * w + x]);
                    e += d * d;
                }
                cy += e * static_cast<double>(y);
                cx += e * static_cast<double>(x);
                mass += e;
            }
        if (mass <= 0.0) return {static_cast<double>(h - 1) / 2.0, static_cast<double>(w - 1) / 2.0};
        return {cy / mass, cx / mass};
    };
    const auto first = centroid(0);
    const auto last = centroid(t - 2);
    return {last.first - first.first, last.second - first.second};
}

// Within +-45 degrees of the captioned direction (exclusive at exactly 0
// drift, which matches nothing).
inline bool drift_matches_direction(std::pair<double, double> drift, const std::string& motion) {
    const auto [dy, dx] = motion_direction(motion);
    const double norm = std::sqrt(drift.first * drift.first + drift.second * drift.second);
    if (norm <= 0.0) return false;
    const double cosine = (drift.first * dy + drift.second * dx) / norm;
    return cosine >= std::cos(3.14159265358979323846 / 4.0) - 1e-12;
}

// The decision is over the colors actually in play (the caption set), so
// chance level is 1/|candidates|.
template <class T>
bool gist_color_match(const Tensor<T>& gist, const std::string& caption,
                      const std::vector<std::string>& candidates = {}) {
    std::string color, motion;
    parse_toy_caption(caption, &color, &motion);
    return nearest_palette_color(mean_border_color(gist), candidates) == color;
}

template <class T>
bool video_motion_match(const Tensor<T>& video, const std::string& caption) {
    std::string color, motion;
    parse_toy_caption(caption, &color, &motion);
    return drift_matches_direction(motion_drift(video), motion);
}

struct ConsistencyRates {
    double color_match_rate = 0.0;
    double motion_match_rate = 0.0;
    i64 sample_count = 0;
};

// samples: (gist [C,H,W], video [T,C,H,W], caption) triples. Color matching
// runs over the distinct colors named by the sample captions.
template <class T>
ConsistencyRates caption_consistency_metrics(
    const std::vector<std::tuple<Tensor<T>, Tensor<T>, std::string>>& samples) {
    if (samples.empty())
        throw std::invalid_argument("caption_consistency_metrics: no samples");
    std::vector<std::string> candidates;
    for (const auto& [gist, video, caption] : samples) {
        std::string color, motion;
        parse_toy_caption(caption, &color, &motion);
        if (std::find(candidates.begin(), candidates.end(), color) == candidates.end())
            candidates.push_back(color);
    }
    std::sort(candidates.begin(), candidates.end());
    ConsistencyRates rates;
    for (const auto& [gist, video, caption] : samples) {
        if (gist_color_match(gist, caption, candidates)) rates.color_match_rate += 1.0;
        if (video_motion_match(video, caption)) rates.motion_match_rate += 1.0;
        ++rates.sample_count;
    }
    rates.color_match_rate /= static_cast<double>(rates.sample_count);
    rates.motion_match_rate /= static_cast<double>(rates.sample_count);
    return rates;
}

struct EvalReport {
    std::vector<std::string> classes;
    std::vector<std::vector<i64>> confusion;  // [true][predicted]
    i64 sample_count = 0;
    double accuracy = 0.0;
};

inline void tally(EvalReport& report, i64 true_class, i64 predicted) {
    report.confusion[static_cast<size_t>(true_class)][static_cast<size_t>(predicted)] += 1;
    ++report.sample_count;
}

inline void finish_report(EvalReport& report) {
    i64 trace = 0;
    for (size_t k = 0; k < report.confusion.size(); ++k) trace += report.confusion[k][k];
    report.accuracy =
        report.sample_count ? static_cast<double>(trace) / static_cast<double>(report.sample_count)
                            : 0.0;
}

// Accuracy of the classifier on held-out real clips.
template <class T>
EvalReport evaluate_clips(const VideoClassifier<T>& clf, const std::vector<LabeledClip>& clips) {
    EvalReport report;
    report.classes = clf.class_names;
    report.confusion.assign(static_cast<size_t>(clf.num_classes),
                            std::vector<i64>(static_cast<size_t>(clf.num_classes), 0));
    for (size_t at = 0; at < clips.size(); at += 16) {
        const size_t end = std::min(clips.size(), at + 16);
        std::vector<Tensor<float>> vids;
        for (size_t i = at; i < end; ++i) vids.push_back(clips[i].video);
        const auto preds = clf.predict(collate_videos(vids));
        for (size_t i = at; i < end; ++i) tally(report, clips[i].label, preds[i - at]);
    }
    finish_report(report);
    return report;
}

// Generates n clips per class from the model and classifies them. Class k's
// caption is class_captions[k]; class names must match the classifier's.
template <class T>
EvalReport evaluate_generated(const VideoClassifier<T>& clf, Model<T>& model,
                              const std::vector<std::string>& class_captions, i64 n_per_class,
                              std::uint64_t seed) {
    if (static_cast<i64>(class_captions.size()) != clf.num_classes)
        throw std::invalid_argument("evaluate_generated: caption classes do not match classifier");
    if (n_per_class < 1) throw std::invalid_argument("evaluate_generated: n_per_class must be >=1");
    EvalReport report;
    report.classes = clf.class_names;
    report.confusion.assign(static_cast<size_t>(clf.num_classes),
                            std::vector<i64>(static_cast<size_t>(clf.num_classes), 0));
    Rng root(seed);
    for (i64 k = 0; k < clf.num_classes; ++k) {
        for (i64 j = 0; j < n_per_class; ++j) {
            Rng draw = root.child("eval/" + std::to_string(k) + "/" + std::to_string(j));
            auto sample =
                generate_sample(model, class_captions[static_cast<size_t>(k)], draw.next_u64());
            const auto preds = clf.predict(collate_videos<T>({sample.video}));
            tally(report, k, preds[0]);
        }
    }
    finish_report(report);
    return report;
}

inline std::string confusion_csv(const EvalReport& report) {
    std::ostringstream os;
    os << "true\\pred";
    for (const auto& c : report.classes) os << "," << c;
    os << "\n";
    for (size_t k = 0; k < report.confusion.size(); ++k) {
        os << report.classes[k];
        for (i64 v : report.confusion[k]) os << "," << v;
        os << "\n";
    }
    return os.str();
}

}  // namespace t2v
