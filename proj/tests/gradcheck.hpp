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

// Central finite-difference oracle for tape gradients.
//
// Error per entry is |analytic - numeric| / max(|analytic|, |numeric|, floor).
// The floor keeps entries whose true derivative is close to zero from being
// judged on pure round-off; below it the check is effectively absolute.

#pragma once

#include "offlang/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace offlang::testing {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kRelFloor = 1e-3;

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst;  // "<param>[index] analytic=.. numeric=.."
    std::size_t checked = 0;
};

using LossBuilder = std::function<ad::Var<double>(ad::Tape<double>&)>;

inline double loss_value(const LossBuilder& build) {
    ad::Tape<double> tape;
    return build(tape).value()[0];
}

// Compares tape gradients with central differences for every entry of every
// parameter. `max_entries` caps the number of entries per parameter that are
// perturbed (chosen with a fixed stride) to bound runtime on larger nets.
inline GradCheckResult grad_check(const std::vector<ad::Parameter<double>*>& params, const LossBuilder& build,
                                  std::size_t max_entries = 0, double h = kFdStep, double floor = kRelFloor) {
    for (auto* p : params) p->zero_grad();
    {
        ad::Tape<double> tape;
        tape.backward(build(tape));
    }
    GradCheckResult r;
    for (auto* p : params) {
        const auto analytic = p->grad;
        const std::size_t n = p->value.size();
        const std::size_t stride = (max_entries == 0 || n <= max_entries) ? 1 : (n + max_entries - 1) / max_entries;
        for (std::size_t i = 0; i < n; i += stride) {
            const double orig = p->value[i];
            p->value[i] = orig + h;
            const double up = loss_value(build);
            p->value[i] = orig - h;
            const double down = loss_value(build);
            p->value[i] = orig;
            const double numeric = (up - down) / (2 * h);
            const double a = analytic[i];
            const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
            ++r.checked;
            if (err > r.max_rel_error || std::isnan(err)) {
                r.max_rel_error = std::isnan(err) ? INFINITY : err;
                r.worst = p->name + "[" + std::to_string(i) + "] analytic=" + std::to_string(a) +
                          " numeric=" + std::to_string(numeric);
            }
        }
    }
    return r;
}

inline ad::Parameter<double> random_param(const std::string& name, std::vector<std::size_t> shape,
                                          std::mt19937_64& rng, double scale = 1.0) {
    ad::Tensor<double> t(std::move(shape));
    std::normal_distribution<double> g(0.0, scale);
    for (auto& v : t.data) v = g(rng);
    return ad::Parameter<double>(name, std::move(t));
}

// Random projection weights so that sum(R * out) exercises every output.
inline ad::Tensor<double> random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
    ad::Tensor<double> t(std::move(shape));
    std::normal_distribution<double> g;
    for (auto& v : t.data) v = g(rng);
    return t;
}

inline ad::Var<double> project(ad::Var<double> out, const ad::Tensor<double>& R) {
    return ad::sum(ad::mul(out, out.tape->constant(R)));
}

}  // namespace offlang::testing
