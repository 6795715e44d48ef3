#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "t2v/data/image.hpp"
#include "t2v/data/keypoints.hpp"
#include "t2v/data/tensor_io.hpp"
#include "t2v/data/toy.hpp"

namespace t2v {

struct ClipQualificationConfig {
    i64 fps = 25;
    i64 clip_length = 32;
    i64 resolution = 64;
    double min_keypoint_overlap = 0.5;
};

// Cuts a decoded frame sequence (each frame [3,H,W] in [0,1]) into training
// clips: maximal runs where every consecutive pair has keypoint-match inlier
// fraction >= the threshold, chopped into non-overlapping fixed-length clips,
// resized and mapped to [-1,1]. Returns [T,3,R,R] tensors.
inline std::vector<Tensor<float>> qualify_clips(const std::vector<Tensor<float>>& frames,
                                                const ClipQualificationConfig& config) {
    if (config.min_keypoint_overlap < 0.0 || config.min_keypoint_overlap > 1.0)
        throw std::invalid_argument("min_keypoint_overlap must be in [0,1]");
    if (config.clip_length < 1 || config.resolution < 1)
        throw std::invalid_argument("clip_length and resolution must be positive");
    const i64 n = static_cast<i64>(frames.size());
    std::vector<Tensor<float>> clips;
    if (n < config.clip_length) return clips;
    std::vector<Tensor<float>> grays;
    grays.reserve(static_cast<size_t>(n));
    for (const auto& f : frames) {
        if (f.shape.size() != 3 || f.shape[0] != 3)
            throw std::invalid_argument("qualify_clips: frames must be [3,H,W], got " +
                                        shape_str(f.shape));
        grays.push_back(to_gray(f));
    }
    std::vector<bool> smooth(static_cast<size_t>(std::max<i64>(0, n - 1)), true);
    for (i64 i = 0; i + 1 < n; ++i)
        smooth[static_cast<size_t>(i)] =
            keypoint_overlap(grays[static_cast<size_t>(i)], grays[static_cast<size_t>(i + 1)]) >=
            config.min_keypoint_overlap;
    auto emit_run = [&](i64 start, i64 stop) {  // [start, stop)
        for (i64 at = start; at + config.clip_length <= stop; at += config.clip_length) {
            Tensor<float> clip =
                Tensor<float>::zeros({config.clip_length, 3, config.resolution, config.resolution});
            const i64 fsz = 3 * config.resolution * config.resolution;
            for (i64 t = 0; t < config.clip_length; ++t) {
                const auto small = resize_bilinear(frames[static_cast<size_t>(at + t)],
                                                   config.resolution, config.resolution);
                for (i64 i = 0; i < fsz; ++i) {
                    const float v = 2.0f * small.data()[i] - 1.0f;
                    clip.data()[t * fsz + i] = std::clamp(v, -1.0f, 1.0f);
                }
            }
            clips.push_back(std::move(clip));
        }
    };
    i64 start = 0;
    for (i64 i = 0; i + 1 < n; ++i)
        if (!smooth[static_cast<size_t>(i)]) {
            emit_run(start, i + 1);
            start = i + 1;
        }
    emit_run(start, n);
    return clips;
}

struct CorpusItem {
    Tensor<float> video;  // [T,3,H,W] in [-1,1]
    IndexEntry meta;
};

// Corpus layout: <dir>/index.tsv plus <dir>/clips/<clip_id>.rawvid.
inline void save_corpus(const std::string& dir, const std::vector<ToyClip>& clips) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "clips");
    std::vector<IndexEntry> index;
    for (const auto& clip : clips) {
        write_rawvid((fs::path(dir) / "clips" / (clip.clip_id + ".rawvid")).string(), clip.video);
        index.push_back({clip.clip_id, clip.source_id, clip.caption});
    }
    write_index((fs::path(dir) / "index.tsv").string(), index);
}

inline void save_corpus(const std::string& dir, const std::vector<CorpusItem>& items) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "clips");
    std::vector<IndexEntry> index;
    for (const auto& item : items) {
        write_rawvid((fs::path(dir) / "clips" / (item.meta.clip_id + ".rawvid")).string(),
                     item.video);
        index.push_back(item.meta);
    }
    write_index((fs::path(dir) / "index.tsv").string(), index);
}

inline std::vector<CorpusItem> load_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    const auto index = read_index((fs::path(dir) / "index.tsv").string());
    std::vector<CorpusItem> items;
    items.reserve(index.size());
    for (const auto& entry : index) {
        CorpusItem item;
        item.video =
            read_rawvid((fs::path(dir) / "clips" / (entry.clip_id + ".rawvid")).string());
        item.meta = entry;
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace t2v
