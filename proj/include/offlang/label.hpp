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

#include <optional>
#include <string_view>

namespace offlang {

// Class index order is fixed: NOT = 0, OFF = 1. The neural head and the
// confusion matrix both rely on it.
enum class Label : int { NOT = 0, OFF = 1 };

inline constexpr int num_classes = 2;

constexpr int class_index(Label l) noexcept { return static_cast<int>(l); }
constexpr Label label_from_index(int i) noexcept { return i == 1 ? Label::OFF : Label::NOT; }
constexpr Label other(Label l) noexcept { return l == Label::OFF ? Label::NOT : Label::OFF; }

// +1 for OFF, -1 for NOT; the sign convention of every linear score.
constexpr double sign_of(Label l) noexcept { return l == Label::OFF ? 1.0 : -1.0; }

constexpr std::string_view to_string(Label l) noexcept {
    return l == Label::OFF ? "OFF" : "NOT";
}

inline std::optional<Label> parse_label(std::string_view s) noexcept {
    if (s == "OFF") return Label::OFF;
    if (s == "NOT") return Label::NOT;
    return std::nullopt;
}

}  // namespace offlang
