// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

// Reverse-mode tape. Nodes are appended in evaluation order, so the node
// list is already topologically sorted and backward is a reverse sweep.
// A tape records one forward pass; discard it (or call clear()) before the
// next one. Tapes are not thread-safe and must not be shared.

#pragma once

#include "offlang/autodiff/tensor.hpp"

#include <functional>
#include <initializer_list>
#include <vector>

namespace offlang::ad {

template <class T>
class Tape;

template <class T>
struct Var {
    Tape<T>* tape = nullptr;
    std::size_t id = 0;

    const Tensor<T>& value() const { return tape->value(*this); }
    const Tensor<T>& grad() const { return tape->grad(*this); }
    const std::vector<std::size_t>& shape() const { return value().shape; }
};

template <class T>
class Tape {
public:
    using Backward = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var<T> constant(Tensor<T> value) { return push(std::move(value), false, nullptr, {}); }

    // Leaf bound to a parameter; backward() adds its gradient into p.grad.
    // The parameter must outlive the tape and keep its value unchanged
    // while the tape is in use.
    Var<T> param(Parameter<T>& p) {
        nodes_.push_back(Node{{}, {}, p.trainable, &p, {}});
        return Var<T>{this, nodes_.size() - 1};
    }

    // Appends the result of a primitive. The backward callback reads
    // grad(self) and accumulates into the grads of its inputs.
    Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs, Backward backward) {
        bool needs = false;
        for (const auto& v : inputs) needs = needs || nodes_[v.id].requires_grad;
        return push(std::move(value), needs, nullptr, needs ? std::move(backward) : Backward{});
    }
    Var<T> record(Tensor<T> value, const std::vector<Var<T>>& inputs, Backward backward) {
        bool needs = false;
        for (const auto& v : inputs) needs = needs || nodes_[v.id].requires_grad;
        return push(std::move(value), needs, nullptr, needs ? std::move(backward) : Backward{});
    }

    const Tensor<T>& value(Var<T> v) const { return value_of(v.id); }
    const Tensor<T>& grad(Var<T> v) const { return nodes_.at(v.id).grad; }
    const Tensor<T>& value_of(std::size_t id) const {
        const auto& n = nodes_.at(id);
        return n.param ? n.param->value : n.value;
    }
    // Gradient buffer of node id during backward, or nullptr when nothing
    // upstream of the loss needs it.
    Tensor<T>* grad_if(std::size_t id) {
        auto& n = nodes_[id];
        return n.requires_grad ? &n.grad : nullptr;
    }
    bool requires_grad(Var<T> v) const { return nodes_.at(v.id).requires_grad; }
    std::size_t size() const { return nodes_.size(); }

    void clear() { nodes_.clear(); }

    // Propagates d(loss)/d(node) through the tape and adds the gradients of
    // parameter leaves into their Parameter::grad buffers. Parameters that
    // the loss does not depend on receive nothing.
    void backward(Var<T> loss) {
        const auto& lv = value_of(loss.id);
        if (lv.size() != 1) throw NonScalarLoss();
        if (!lv.all_finite()) throw NonFiniteValue("loss");
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            auto& n = nodes_[i];
            n.grad = n.requires_grad ? Tensor<T>(value_of(i).shape) : Tensor<T>{};
        }
        if (!nodes_[loss.id].requires_grad) return;
        nodes_[loss.id].grad[0] = T(1);
        for (std::size_t i = loss.id + 1; i-- > 0;) {
            auto& n = nodes_[i];
            if (n.backward) n.backward(*this, i);
        }
        for (auto& n : nodes_) {
            if (!n.param || !n.requires_grad) continue;
            auto& g = n.param->grad;
            if (g.shape != n.param->value.shape) g = Tensor<T>(n.param->value.shape);
            for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
            if (!g.all_finite()) throw NonFiniteValue("gradient of " + n.param->name);
        }
    }

private:
    struct Node {
        Tensor<T> value;
        Tensor<T> grad;
        bool requires_grad = false;
        Parameter<T>* param = nullptr;
        Backward backward;
    };

    Var<T> push(Tensor<T> value, bool needs, Parameter<T>* p, Backward backward) {
        nodes_.push_back(Node{std::move(value), {}, needs, p, std::move(backward)});
        return Var<T>{this, nodes_.size() - 1};
    }

    std::vector<Node> nodes_;
};

}  // namespace offlang::ad
