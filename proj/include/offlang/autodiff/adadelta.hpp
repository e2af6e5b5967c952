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

// Adadelta, per element:
//
//   Eg2  <- rho * Eg2  + (1 - rho) * g^2
//   dx    = -sqrt(Edx2 + eps) / sqrt(Eg2 + eps) * g
//   Edx2 <- rho * Edx2 + (1 - rho) * dx^2
//   x    <- x + lr * dx
//
// With lr = 1 this is the original unit-free rule.

#pragma once

#include "offlang/autodiff/tensor.hpp"

#include <cmath>
#include <vector>

namespace offlang::ad {

struct AdadeltaOptions {
    double rho = 0.95;
    double eps = 1e-6;
    double lr = 1.0;

    void validate() const {
        if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("adadelta rho must lie in (0, 1)");
        if (!(eps > 0.0)) throw ConfigError("adadelta eps must be positive");
        if (!(lr > 0.0)) throw ConfigError("adadelta learning rate must be positive");
    }
};

template <class T>
struct AdadeltaState {
    Tensor<T> sq_grad;
    Tensor<T> sq_update;
};

template <class T>
void adadelta_step(Tensor<T>& x, const Tensor<T>& g, AdadeltaState<T>& s, const AdadeltaOptions& opts,
                   const std::vector<std::size_t>& frozen_rows = {}) {
    if (g.shape != x.shape) throw ShapeMismatch("adadelta: gradient " + g.shape_str() + " for " + x.shape_str());
    if (s.sq_grad.shape != x.shape) s.sq_grad = Tensor<T>(x.shape);
    if (s.sq_update.shape != x.shape) s.sq_update = Tensor<T>(x.shape);
    std::vector<char> frozen;
    std::size_t row_len = 0;
    if (!frozen_rows.empty()) {
        row_len = x.rank() == 2 ? x.cols() : 1;
        frozen.assign(x.size() / row_len, 0);
        for (auto r : frozen_rows)
            if (r < frozen.size()) frozen[r] = 1;
    }
    const T rho = static_cast<T>(opts.rho), eps = static_cast<T>(opts.eps), lr = static_cast<T>(opts.lr);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!frozen.empty() && frozen[i / row_len]) continue;
        const T gi = g[i];
        s.sq_grad[i] = rho * s.sq_grad[i] + (T(1) - rho) * gi * gi;
        const T dx = -std::sqrt(s.sq_update[i] + eps) / std::sqrt(s.sq_grad[i] + eps) * gi;
        s.sq_update[i] = rho * s.sq_update[i] + (T(1) - rho) * dx * dx;
        x[i] += lr * dx;
    }
}

template <class T>
class Adadelta {
public:
    explicit Adadelta(AdadeltaOptions opts = {}) : opts_(opts) { opts_.validate(); }

    // Applies one update to every trainable parameter using its grad.
    void step(const std::vector<Parameter<T>*>& params) {
        if (state_.size() < params.size()) state_.resize(params.size());
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto& p = *params[k];
            if (!p.trainable) continue;
            if (p.grad.shape != p.value.shape) p.zero_grad();
            adadelta_step(p.value, p.grad, state_[k], opts_, p.frozen_rows);
            if (!p.value.all_finite()) throw NonFiniteValue("parameter " + p.name + " after update");
        }
    }

    const AdadeltaOptions& options() const { return opts_; }
    const std::vector<AdadeltaState<T>>& state() const { return state_; }

private:
    AdadeltaOptions opts_;
    std::vector<AdadeltaState<T>> state_;
};

}  // namespace offlang::ad
