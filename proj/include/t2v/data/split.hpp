#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "t2v/core/rng.hpp"

namespace t2v {

// Partitions indices 0..n-1 into len(ratios) groups by shuffling with the
// seeded generator and apportioning sizes by largest remainder, so group
// sizes are within 1 of exact proportionality.
inline std::vector<std::vector<i64>> split_indices(i64 n, const std::vector<double>& ratios,
                                                   std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("split_indices: negative count");
    if (ratios.empty()) throw std::invalid_argument("split_indices: no ratios");
    double total = 0.0;
    for (double r : ratios) {
        if (r <= 0.0) throw std::invalid_argument("split_indices: ratios must be positive");
        total += r;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("split_indices: ratios must sum to 1");
    const size_t k = ratios.size();
    std::vector<i64> sizes(k);
    std::vector<std::pair<double, size_t>> rema(k);
    i64 assigned = 0;
    for (size_t i = 0; i < k; ++i) {
        const double exact = ratios[i] * static_cast<double>(n);
        sizes[i] = static_cast<i64>(std::floor(exact));
        assigned += sizes[i];
        rema[i] = {exact - std::floor(exact), i};
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (i64 j = 0; j < n - assigned; ++j) ++sizes[rema[static_cast<size_t>(j)].second];
    Rng rng(seed);
    const auto perm = random_permutation(n, rng);
    std::vector<std::vector<i64>> groups(k);
    i64 at = 0;
    for (size_t i = 0; i < k; ++i) {
        groups[i].assign(perm.begin() + at, perm.begin() + at + sizes[i]);
        at += sizes[i];
    }
    return groups;
}

template <typename T>
std::vector<std::vector<T>> split_dataset(const std::vector<T>& items,
                                          const std::vector<double>& ratios, std::uint64_t seed) {
    const auto groups = split_indices(static_cast<i64>(items.size()), ratios, seed);
    std::vector<std::vector<T>> out(groups.size());
    for (size_t g = 0; g < groups.size(); ++g) {
        out[g].reserve(groups[g].size());
        for (i64 idx : groups[g]) out[g].push_back(items[static_cast<size_t>(idx)]);
    }
    return out;
}

}  // namespace t2v
