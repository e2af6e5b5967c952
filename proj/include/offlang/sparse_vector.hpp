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

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace offlang {

// Indices strictly increasing, values positive.
struct SparseVector {
    std::vector<std::uint32_t> indices;
    std::vector<double> values;
    std::size_t dim = 0;

    std::size_t nnz() const noexcept { return indices.size(); }
    bool empty() const noexcept { return indices.empty(); }

    double norm() const {
        double s = 0.0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }

    double dot(std::span<const double> dense) const {
        double s = 0.0;
        for (std::size_t k = 0; k < indices.size(); ++k) s += values[k] * dense[indices[k]];
        return s;
    }

    SparseVector scaled(double factor) const {
        SparseVector out = *this;
        for (auto& v : out.values) v *= factor;
        return out;
    }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

}  // namespace offlang
