#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace t2v {

using i64 = std::int64_t;

inline i64 numel_of(const std::vector<i64>& shape) {
    i64 n = 1;
    for (i64 d : shape) n *= d;
    return n;
}

inline std::string shape_str(const std::vector<i64>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << "]";
    return os.str();
}

// Dense contiguous row-major tensor. Copies are shallow (shared storage);
// use clone() for a deep copy.
template <class T>
struct Tensor {
    std::vector<i64> shape;
    std::shared_ptr<std::vector<T>> store;

    Tensor() = default;
    explicit Tensor(std::vector<i64> s)
        : shape(std::move(s)), store(std::make_shared<std::vector<T>>(numel_of(shape), T(0))) {}

    static Tensor zeros(std::vector<i64> s) { return Tensor(std::move(s)); }

    static Tensor full(std::vector<i64> s, T v) {
        Tensor t(std::move(s));
        std::fill(t.store->begin(), t.store->end(), v);
        return t;
    }

    static Tensor from(std::vector<i64> s, std::vector<T> data) {
        if (numel_of(s) != static_cast<i64>(data.size()))
            throw std::invalid_argument("tensor data size does not match shape " + shape_str(s));
        Tensor t;
        t.shape = std::move(s);
        t.store = std::make_shared<std::vector<T>>(std::move(data));
        return t;
    }

    bool defined() const { return static_cast<bool>(store); }
    i64 numel() const { return defined() ? static_cast<i64>(store->size()) : 0; }
    int rank() const { return static_cast<int>(shape.size()); }
    i64 dim(int i) const { return shape.at(static_cast<size_t>(i)); }

    T* data() { return store->data(); }
    const T* data() const { return store->data(); }
    T& operator[](i64 i) { return (*store)[static_cast<size_t>(i)]; }
    const T& operator[](i64 i) const { return (*store)[static_cast<size_t>(i)]; }

    Tensor clone() const {
        Tensor t;
        t.shape = shape;
        t.store = store ? std::make_shared<std::vector<T>>(*store) : nullptr;
        return t;
    }

    // Shares storage; element count must match.
    Tensor reshaped(std::vector<i64> s) const {
        if (numel_of(s) != numel())
            throw std::invalid_argument("reshape " + shape_str(shape) + " -> " + shape_str(s));
        Tensor t;
        t.shape = std::move(s);
        t.store = store;
        return t;
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void fill(T v) { std::fill(store->begin(), store->end(), v); }
};

template <class T>
bool all_finite(const Tensor<T>& t) {
    for (i64 i = 0; i < t.numel(); ++i)
        if (!std::isfinite(t[i])) return false;
    return true;
}

template <class T>
T tmin(const Tensor<T>& t) {
    return *std::min_element(t.store->begin(), t.store->end());
}

template <class T>
T tmax(const Tensor<T>& t) {
    return *std::max_element(t.store->begin(), t.store->end());
}

template <class T>
T tsum(const Tensor<T>& t) {
    T s = 0;
    for (i64 i = 0; i < t.numel(); ++i) s += t[i];
    return s;
}

template <class T>
T max_abs(const Tensor<T>& t) {
    T m = 0;
    for (i64 i = 0; i < t.numel(); ++i) m = std::max(m, std::abs(t[i]));
    return m;
}

template <class T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff shape mismatch");
    T m = 0;
    for (i64 i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

template <class T>
void check_shape(const Tensor<T>& t, const std::vector<i64>& want, const char* what) {
    if (t.shape != want)
        throw std::invalid_argument(std::string(what) + ": expected shape " + shape_str(want) +
                                    ", got " + shape_str(t.shape));
}

}  // namespace t2v
