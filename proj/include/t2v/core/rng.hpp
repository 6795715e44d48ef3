#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "t2v/core/tensor.hpp"

namespace t2v {

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Deterministic random source. Gaussian draws use one Box-Muller pair per
// call (no cached spare), so the state is exactly the mt19937_64 engine and
// serializes losslessly.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), eng_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Independent deterministic stream for a named subsystem.
    Rng child(std::string_view tag) const { return Rng(seed_ ^ fnv1a(tag)); }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n).
    i64 below(i64 n) { return static_cast<i64>(eng_() % static_cast<std::uint64_t>(n)); }

    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    std::string state() const {
        std::ostringstream os;
        os << eng_;
        return os.str();
    }

    void restore(std::uint64_t seed, const std::string& st) {
        seed_ = seed;
        std::istringstream is(st);
        is >> eng_;
        if (!is) throw std::invalid_argument("bad rng state string");
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

template <class T>
void fill_normal(Tensor<T>& t, Rng& rng, double mean = 0.0, double sd = 1.0) {
    for (i64 i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(mean + sd * rng.normal());
}

template <class T>
void fill_uniform(Tensor<T>& t, Rng& rng, double lo, double hi) {
    for (i64 i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(rng.uniform(lo, hi));
}

template <class T>
Tensor<T> normal_tensor(std::vector<i64> shape, Rng& rng, double mean = 0.0, double sd = 1.0) {
    Tensor<T> t(std::move(shape));
    fill_normal(t, rng, mean, sd);
    return t;
}

// Fisher-Yates permutation of 0..n-1.
inline std::vector<i64> random_permutation(i64 n, Rng& rng) {
    std::vector<i64> p(static_cast<size_t>(n));
    for (i64 i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
    for (i64 i = n - 1; i > 0; --i) std::swap(p[static_cast<size_t>(i)], p[static_cast<size_t>(rng.below(i + 1))]);
    return p;
}

}  // namespace t2v
