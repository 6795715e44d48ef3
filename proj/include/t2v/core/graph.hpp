#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "t2v/core/tensor.hpp"

namespace t2v {

// Reverse-mode autodiff over dense tensors. Graphs are built eagerly by the
// ops in ops.hpp and freed when the last Var referencing the root drops.
template <class T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // undefined until first accumulation
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(const Tensor<T>&)> backward_fn;  // gout -> accumulate into parents
    bool requires_grad = false;

    Tensor<T>& ensure_grad() {
        if (!grad.defined()) grad = Tensor<T>::zeros(value.shape);
        return grad;
    }

    void accumulate(const Tensor<T>& g) {
        Tensor<T>& dst = ensure_grad();
        check_shape(dst, g.shape, "grad accumulation");
        T* d = dst.data();
        const T* s = g.data();
        for (i64 i = 0; i < dst.numel(); ++i) d[i] += s[i];
    }
};

template <class T>
class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node<T>> n) : node_(std::move(n)) {}

    bool defined() const { return static_cast<bool>(node_); }
    const std::shared_ptr<Node<T>>& node() const { return node_; }
    Tensor<T>& value() const { return node_->value; }
    Tensor<T>& grad() const { return node_->grad; }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    const std::vector<i64>& shape() const { return node_->value.shape; }
    i64 numel() const { return node_->value.numel(); }

    // New leaf sharing this value's storage, cut off from the graph.
    Var detach() const {
        auto n = std::make_shared<Node<T>>();
        n->value = node_->value;
        return Var(n);
    }

private:
    std::shared_ptr<Node<T>> node_;
};

template <class T>
Var<T> constant(Tensor<T> value) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    return Var<T>(n);
}

template <class T>
Var<T> param(Tensor<T> value) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = true;
    return Var<T>(n);
}

template <class T>
Var<T> make_node(Tensor<T> value, std::vector<Var<T>> parents,
                 std::function<void(const Tensor<T>&)> backward_fn) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    for (auto& p : parents) {
        if (p.requires_grad()) n->requires_grad = true;
        n->parents.push_back(p.node());
    }
    if (n->requires_grad) n->backward_fn = std::move(backward_fn);
    return Var<T>(n);
}

// Seeds d(root)/d(root) = 1 and propagates to every reachable leaf that
// requires grad. Accumulates (does not reset) existing leaf grads.
template <class T>
void backward(const Var<T>& root) {
    Node<T>* r = root.node().get();
    if (!r->requires_grad) return;

    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, size_t>> stack;
    stack.emplace_back(r, 0);
    seen.insert(r);
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Node<T>* p = n->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    Tensor<T>& seed = r->ensure_grad();
    for (i64 i = 0; i < seed.numel(); ++i) seed[i] += T(1);

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* n = *it;
        if (n->backward_fn && n->grad.defined()) n->backward_fn(n->grad);
    }
}

}  // namespace t2v
