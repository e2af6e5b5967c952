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

#pragma once

#include "offlang/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace offlang::ad {

// Dense row-major array. Scalars have shape {1}.
template <class T>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s, T fill = T(0))
        : shape(std::move(s)), data(element_count(shape), fill) {}
    Tensor(std::vector<std::size_t> s, std::vector<T> values) : shape(std::move(s)), data(std::move(values)) {
        if (data.size() != element_count(shape)) {
            throw ShapeMismatch("tensor of shape " + shape_string(shape) + " given " +
                                std::to_string(data.size()) + " values");
        }
    }

    static Tensor scalar(T v) { return Tensor({1}, std::vector<T>{v}); }
    static Tensor vector(std::vector<T> v) {
        const auto n = v.size();
        return Tensor({n}, std::move(v));
    }

    static std::size_t element_count(const std::vector<std::size_t>& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
    }
    static std::string shape_string(const std::vector<std::size_t>& s) {
        std::string out = "{";
        for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
        return out + "}";
    }

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const { return shape.at(0); }
    std::size_t cols() const { return shape.at(1); }
    std::string shape_str() const { return shape_string(shape); }

    T& operator[](std::size_t i) { return data[i]; }
    const T& operator[](std::size_t i) const { return data[i]; }
    T& operator()(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }
    bool all_finite() const {
        return std::all_of(data.begin(), data.end(), [](T v) { return std::isfinite(v); });
    }
    bool operator==(const Tensor&) const = default;
};

// A trainable leaf. Rows listed in frozen_rows are never updated by the
// optimizer (used for padding and unknown-word embedding rows).
template <class T>
struct Parameter {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    bool trainable = true;
    std::vector<std::size_t> frozen_rows;

    Parameter() = default;
    Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)), grad(value.shape) {}

    void zero_grad() {
        if (grad.shape != value.shape) grad = Tensor<T>(value.shape);
        grad.fill(T(0));
    }
};

}  // namespace offlang::ad
