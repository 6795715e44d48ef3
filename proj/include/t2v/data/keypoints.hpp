#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "t2v/core/tensor.hpp"

namespace t2v {

struct Keypoint {
    i64 y = 0;
    i64 x = 0;
    double response = 0.0;
};

namespace detail {

// Sobel gradients of a [H,W] grayscale image, edge-replicated.
template <typename T>
void sobel(const Tensor<T>& img, std::vector<double>& gx, std::vector<double>& gy) {
    const i64 h = img.shape[0], w = img.shape[1];
    gx.assign(static_cast<size_t>(h * w), 0.0);
    gy.assign(static_cast<size_t>(h * w), 0.0);
    auto at = [&](i64 y, i64 x) {
        y = std::clamp<i64>(y, 0, h - 1);
        x = std::clamp<i64>(x, 0, w - 1);
        return static_cast<double>(img.data()[y * w + x]);
    };
    for (i64 y = 0; y < h; ++y)
        for (i64 x = 0; x < w; ++x) {
            gx[static_cast<size_t>(y * w + x)] =
                (at(y - 1, x + 1) + 2 * at(y, x + 1) + at(y + 1, x + 1)) -
                (at(y - 1, x - 1) + 2 * at(y, x - 1) + at(y + 1, x - 1));
            gy[static_cast<size_t>(y * w + x)] =
                (at(y + 1, x - 1) + 2 * at(y + 1, x) + at(y + 1, x + 1)) -
                (at(y - 1, x - 1) + 2 * at(y - 1, x) + at(y - 1, x + 1));
        }
}

inline std::vector<double> box3(const std::vector<double>& src, i64 h, i64 w) {
    std::vector<double> dst(src.size(), 0.0);
    for (i64 y = 0; y < h; ++y)
        for (i64 x = 0; x < w; ++x) {
            double acc = 0.0;
            for (i64 dy = -1; dy <= 1; ++dy)
                for (i64 dx = -1; dx <= 1; ++dx) {
                    const i64 yy = std::clamp<i64>(y + dy, 0, h - 1);
                    const i64 xx = std::clamp<i64>(x + dx, 0, w - 1);
                    acc += src[static_cast<size_t>(yy * w + xx)];
                }
            dst[static_cast<size_t>(y * w + x)] = acc / 9.0;
        }
    return dst;
}

}  // namespace detail

// Harris corners on a [H,W] grayscale image: box-smoothed structure tensor,
// R = det - 0.04 tr^2, threshold at 1% of the max response, 3x3 non-maximum
// suppression, strongest `max_points` kept.
template <typename T>
std::vector<Keypoint> detect_keypoints(const Tensor<T>& img, i64 max_points = 128) {
    if (img.shape.size() != 2)
        throw std::invalid_argument("detect_keypoints: expected [H,W] image, got " +
                                    shape_str(img.shape));
    const i64 h = img.shape[0], w = img.shape[1];
    std::vector<double> gx, gy;
    detail::sobel(img, gx, gy);
    std::vector<double> xx(gx.size()), yy(gx.size()), xy(gx.size());
    for (size_t i = 0; i < gx.size(); ++i) {
        xx[i] = gx[i] * gx[i];
        yy[i] = gy[i] * gy[i];
        xy[i] = gx[i] * gy[i];
    }
    xx = detail::box3(xx, h, w);
    yy = detail::box3(yy, h, w);
    xy = detail::box3(xy, h, w);
    std::vector<double> r(gx.size());
    double rmax = 0.0;
    for (size_t i = 0; i < r.size(); ++i) {
        const double det = xx[i] * yy[i] - xy[i] * xy[i];
        const double tr = xx[i] + yy[i];
        r[i] = det - 0.04 * tr * tr;
        rmax = std::max(rmax, r[i]);
    }
    if (rmax <= 0.0) return {};
    const double thresh = 0.01 * rmax;
    std::vector<Keypoint> kps;
    for (i64 y = 0; y < h; ++y)
        for (i64 x = 0; x < w; ++x) {
            const double v = r[static_cast<size_t>(y * w + x)];
            if (v < thresh) continue;
            bool peak = true;
            for (i64 dy = -1; dy <= 1 && peak; ++dy)
                for (i64 dx = -1; dx <= 1; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    const i64 yy2 = y + dy, xx2 = x + dx;
                    if (yy2 < 0 || yy2 >= h || xx2 < 0 || xx2 >= w) continue;
                    if (r[static_cast<size_t>(yy2 * w + xx2)] > v) {
                        peak = false;
                        break;
                    }
                }
            if (peak) kps.push_back({y, x, v});
        }
    std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    if (static_cast<i64>(kps.size()) > max_points) kps.resize(static_cast<size_t>(max_points));
    return kps;
}

// 9x9 mean-subtracted, L2-normalized patches; points too close to the border
// are dropped (their keypoint list entry is dropped in lockstep).
template <typename T>
void describe_keypoints(const Tensor<T>& img, std::vector<Keypoint>& kps,
                        std::vector<std::vector<double>>& descs) {
    const i64 h = img.shape[0], w = img.shape[1];
    constexpr i64 kR = 4;
    std::vector<Keypoint> kept;
    descs.clear();
    for (const auto& kp : kps) {
        if (kp.y < kR || kp.y >= h - kR || kp.x < kR || kp.x >= w - kR) continue;
        std::vector<double> d;
        d.reserve(81);
        double mean = 0.0;
        for (i64 dy = -kR; dy <= kR; ++dy)
            for (i64 dx = -kR; dx <= kR; ++dx) {
                const double v = static_cast<double>(img.data()[(kp.y + dy) * w + kp.x + dx]);
                d.push_back(v);
                mean += v;
            }
        mean /= 81.0;
        double norm = 0.0;
        for (auto& v : d) {
            v -= mean;
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm > 1e-12)
            for (auto& v : d) v /= norm;
        kept.push_back(kp);
        descs.push_back(std::move(d));
    }
    kps = std::move(kept);
}

// Lowe-style ratio-test matching (L2, ratio 0.8); returns index pairs (a, b).
inline std::vector<std::pair<i64, i64>> match_descriptors(
    const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    std::vector<std::pair<i64, i64>> matches;
    for (size_t i = 0; i < a.size(); ++i) {
        double best = 1e300, second = 1e300;
        i64 best_j = -1;
        for (size_t j = 0; j < b.size(); ++j) {
            double d = 0.0;
            for (size_t k = 0; k < a[i].size(); ++k) {
                const double diff = a[i][k] - b[j][k];
                d += diff * diff;
            }
            if (d < best) {
                second = best;
                best = d;
                best_j = static_cast<i64>(j);
            } else if (d < second) {
                second = d;
            }
        }
        if (best_j >= 0 && best <= 0.64 * second)
            matches.emplace_back(static_cast<i64>(i), best_j);
    }
    return matches;
}

// Fraction of keypoints consistent under the best pure-translation model:
// each match proposes a translation, inliers are matches within 2px of it.
// Deterministic (all proposals tried, capped at 256). Featureless frame
// pairs — no keypoints on either side — count as fully consistent.
template <typename T>
double keypoint_overlap(const Tensor<T>& frame_a, const Tensor<T>& frame_b) {
    auto kp_a = detect_keypoints(frame_a);
    auto kp_b = detect_keypoints(frame_b);
    if (kp_a.empty() && kp_b.empty()) return 1.0;
    if (kp_a.empty() || kp_b.empty()) return 0.0;
    std::vector<std::vector<double>> da, db;
    describe_keypoints(frame_a, kp_a, da);
    describe_keypoints(frame_b, kp_b, db);
    if (kp_a.empty() && kp_b.empty()) return 1.0;
    if (kp_a.empty() || kp_b.empty()) return 0.0;
    const auto matches = match_descriptors(da, db);
    if (matches.empty()) return 0.0;
    const size_t tries = std::min<size_t>(matches.size(), 256);
    i64 best_inliers = 0;
    for (size_t t = 0; t < tries; ++t) {
        const double ty = static_cast<double>(kp_b[static_cast<size_t>(matches[t].second)].y -
                                              kp_a[static_cast<size_t>(matches[t].first)].y);
        const double tx = static_cast<double>(kp_b[static_cast<size_t>(matches[t].second)].x -
                                              kp_a[static_cast<size_t>(matches[t].first)].x);
        i64 inliers = 0;
        for (const auto& m : matches) {
            const double ry = static_cast<double>(kp_b[static_cast<size_t>(m.second)].y -
                                                  kp_a[static_cast<size_t>(m.first)].y) - ty;
            const double rx = static_cast<double>(kp_b[static_cast<size_t>(m.second)].x -
                                                  kp_a[static_cast<size_t>(m.first)].x) - tx;
            if (ry * ry + rx * rx <= 4.0) ++inliers;
        }
        best_inliers = std::max(best_inliers, inliers);
    }
    return static_cast<double>(best_inliers) /
           static_cast<double>(std::min(kp_a.size(), kp_b.size()));
}

}  // namespace t2v
