#pragma once

#include <limits>

#include "t2v/nn/module.hpp"

namespace t2v {

// Adam over the subset of a ParamStore whose names match any of the given
// prefixes (empty prefix list = all parameters). Moment tensors are keyed by
// parameter name so they survive checkpointing.
template <class T>
class Adam {
public:
    Adam() = default;
    Adam(double lr, std::vector<std::string> prefixes, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), prefixes_(std::move(prefixes)) {}

    bool owns(const std::string& name) const {
        if (prefixes_.empty()) return true;
        for (const auto& p : prefixes_)
            if (name.rfind(p, 0) == 0) return true;
        return false;
    }

    void step(ParamStore<T>& ps) {
        ++t_;
        const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
        for (const auto& name : ps.param_names()) {
            if (!owns(name)) continue;
            Var<T>& p = ps.at(name);
            if (!p.grad().defined()) continue;
            State& st = state_[name];
            if (!st.m.defined()) {
                st.m = Tensor<T>::zeros(p.value().shape);
                st.v = Tensor<T>::zeros(p.value().shape);
            }
            Tensor<T>& g = p.grad();
            for (i64 i = 0; i < g.numel(); ++i) {
                const double gi = static_cast<double>(g[i]);
                const double m = b1_ * st.m[i] + (1.0 - b1_) * gi;
                const double v = b2_ * st.v[i] + (1.0 - b2_) * gi * gi;
                st.m[i] = static_cast<T>(m);
                st.v[i] = static_cast<T>(v);
                p.value()[i] -= static_cast<T>(lr_ * (m / bc1) / (std::sqrt(v / bc2) + eps_));
            }
        }
    }

    void zero_grad(ParamStore<T>& ps) {
        for (const auto& name : ps.param_names())
            if (owns(name)) ps.at(name).node()->grad = Tensor<T>();
    }

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    i64 steps() const { return t_; }

    // checkpoint plumbing
    struct State {
        Tensor<T> m, v;
    };
    std::unordered_map<std::string, State>& state() { return state_; }
    void set_steps(i64 t) { t_ = t; }

private:
    double lr_ = 1e-3, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
    i64 t_ = 0;
    std::vector<std::string> prefixes_;
    std::unordered_map<std::string, State> state_;
};

// Clamps every entry of every parameter matching the prefix into
// [-clip, clip].
template <class T>
void clip_params(ParamStore<T>& ps, const std::string& prefix, double clip) {
    const T lo = static_cast<T>(-clip), hi = static_cast<T>(clip);
    for (const auto& name : ps.param_names()) {
        if (name.rfind(prefix, 0) != 0) continue;
        Tensor<T>& v = ps.at(name).value();
        for (i64 i = 0; i < v.numel(); ++i) v[i] = std::min(hi, std::max(lo, v[i]));
    }
}

}  // namespace t2v
