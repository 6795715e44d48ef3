#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "t2v/core/graph.hpp"
#include "t2v/core/rng.hpp"

namespace t2v {

struct InitSpec {
    enum class Kind { constant, normal, uniform } kind = Kind::constant;
    double a = 0.0, b = 0.0;  // constant: a; normal: mean a, sd b; uniform: [a, b)
};

inline InitSpec init_const(double v) { return {InitSpec::Kind::constant, v, 0.0}; }
inline InitSpec init_normal(double sd, double mean = 0.0) {
    return {InitSpec::Kind::normal, mean, sd};
}
inline InitSpec init_uniform(double lo, double hi) { return {InitSpec::Kind::uniform, lo, hi}; }

// Registry of named parameters and buffers for a model tree. Initialization
// is keyed by parameter name + master seed, so values do not depend on the
// order layers are constructed in.
template <class T>
class ParamStore {
public:
    explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    Var<T> param(const std::string& name, const std::vector<i64>& shape, InitSpec init) {
        auto it = params_.find(name);
        if (it != params_.end()) {
            check_shape(it->second.value(), shape, name.c_str());
            return it->second;
        }
        Tensor<T> t(shape);
        Rng rng(seed_ ^ fnv1a("init/" + name));
        switch (init.kind) {
            case InitSpec::Kind::constant: t.fill(static_cast<T>(init.a)); break;
            case InitSpec::Kind::normal: fill_normal(t, rng, init.a, init.b); break;
            case InitSpec::Kind::uniform: fill_uniform(t, rng, init.a, init.b); break;
        }
        Var<T> v = t2v::param(std::move(t));
        params_.emplace(name, v);
        order_.push_back(name);
        return v;
    }

    Tensor<T>& buffer(const std::string& name, const std::vector<i64>& shape, T fill_value) {
        auto it = buffers_.find(name);
        if (it != buffers_.end()) {
            check_shape(it->second, shape, name.c_str());
            return it->second;
        }
        Tensor<T> t(shape);
        t.fill(fill_value);
        auto [ins, ok] = buffers_.emplace(name, std::move(t));
        buffer_order_.push_back(name);
        return ins->second;
    }

    bool has_param(const std::string& name) const { return params_.count(name) != 0; }

    Var<T>& at(const std::string& name) {
        auto it = params_.find(name);
        if (it == params_.end()) throw std::invalid_argument("no parameter named " + name);
        return it->second;
    }

    Tensor<T>& buffer_at(const std::string& name) {
        auto it = buffers_.find(name);
        if (it == buffers_.end()) throw std::invalid_argument("no buffer named " + name);
        return it->second;
    }

    const std::vector<std::string>& param_names() const { return order_; }
    const std::vector<std::string>& buffer_names() const { return buffer_order_; }

    i64 total_params() const {
        i64 n = 0;
        for (const auto& name : order_) n += params_.at(name).numel();
        return n;
    }

    void zero_grad() {
        for (const auto& name : order_) params_.at(name).node()->grad = Tensor<T>();
    }

private:
    std::uint64_t seed_;
    std::vector<std::string> order_, buffer_order_;
    std::unordered_map<std::string, Var<T>> params_;
    std::unordered_map<std::string, Tensor<T>> buffers_;
};

}  // namespace t2v
