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
#include "offlang/label.hpp"

#include <array>
#include <cstdint>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>

namespace offlang {

// counts[predicted][actual], indexed by class_index (NOT = 0, OFF = 1).
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, 2>, 2> counts{};

    std::uint64_t& at(Label predicted, Label actual) {
        return counts[class_index(predicted)][class_index(actual)];
    }
    std::uint64_t at(Label predicted, Label actual) const {
        return counts[class_index(predicted)][class_index(actual)];
    }
    std::uint64_t total() const noexcept {
        return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
    }
    std::uint64_t predicted_total(Label l) const { return at(l, Label::NOT) + at(l, Label::OFF); }
    std::uint64_t actual_total(Label l) const { return at(Label::NOT, l) + at(Label::OFF, l); }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    ConfusionMatrix matrix;
    std::array<ClassScores, 2> per_class{};  // indexed by class_index
    double macro_f1 = 0.0;
    double accuracy = 0.0;

    const ClassScores& of(Label l) const { return per_class[class_index(l)]; }
};

inline ConfusionMatrix confusion(std::span<const Label> predicted, std::span<const Label> gold) {
    if (predicted.size() != gold.size()) throw LengthMismatch(predicted.size(), gold.size());
    if (predicted.empty()) throw DataError("confusion matrix needs at least one document");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < predicted.size(); ++i) ++m.at(predicted[i], gold[i]);
    return m;
}

// Precision = diag / predicted total, recall = diag / actual total; a zero
// denominator gives 0, and F1 is 0 whenever precision + recall is 0.
inline ClassScores class_scores(const ConfusionMatrix& m, Label l) {
    ClassScores s;
    const auto tp = static_cast<double>(m.at(l, l));
    const auto pred = static_cast<double>(m.predicted_total(l));
    const auto act = static_cast<double>(m.actual_total(l));
    s.precision = pred > 0 ? tp / pred : 0.0;
    s.recall = act > 0 ? tp / act : 0.0;
    s.f1 = (s.precision + s.recall) > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

inline double macro_f1(const ConfusionMatrix& m) {
    return 0.5 * (class_scores(m, Label::NOT).f1 + class_scores(m, Label::OFF).f1);
}

inline EvalReport evaluate(const ConfusionMatrix& m) {
    EvalReport r;
    r.matrix = m;
    r.per_class[0] = class_scores(m, Label::NOT);
    r.per_class[1] = class_scores(m, Label::OFF);
    r.macro_f1 = 0.5 * (r.per_class[0].f1 + r.per_class[1].f1);
    const auto total = m.total();
    r.accuracy = total > 0 ? static_cast<double>(m.counts[0][0] + m.counts[1][1]) / static_cast<double>(total) : 0.0;
    return r;
}

inline EvalReport evaluate(std::span<const Label> predicted, std::span<const Label> gold) {
    return evaluate(confusion(predicted, gold));
}

inline std::string format_text(const EvalReport& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    const auto& m = r.matrix;
    os << "                 Actual NOT   Actual OFF\n";
    os << "Predicted NOT  " << std::setw(11) << m.at(Label::NOT, Label::NOT) << "  " << std::setw(11)
       << m.at(Label::NOT, Label::OFF) << '\n';
    os << "Predicted OFF  " << std::setw(11) << m.at(Label::OFF, Label::NOT) << "  " << std::setw(11)
       << m.at(Label::OFF, Label::OFF) << '\n';
    os << '\n';
    for (Label l : {Label::NOT, Label::OFF}) {
        const auto& s = r.of(l);
        os << to_string(l) << "  precision=" << s.precision << "  recall=" << s.recall << "  f1=" << s.f1 << '\n';
    }
    os << "accuracy=" << r.accuracy << '\n';
    os << "macro_f1=" << r.macro_f1 << '\n';
    return os.str();
}

// Long format: one metric per row.
inline std::string format_csv(const EvalReport& r) {
    std::ostringstream os;
    os << std::setprecision(17);
    const auto& m = r.matrix;
    os << "metric,class,value\n";
    os << "count_pred_NOT_actual_NOT,,"<< m.at(Label::NOT, Label::NOT) << '\n';
    os << "count_pred_NOT_actual_OFF,," << m.at(Label::NOT, Label::OFF) << '\n';
    os << "count_pred_OFF_actual_NOT,," << m.at(Label::OFF, Label::NOT) << '\n';
    os << "count_pred_OFF_actual_OFF,," << m.at(Label::OFF, Label::OFF) << '\n';
    for (Label l : {Label::NOT, Label::OFF}) {
        const auto& s = r.of(l);
        os << "precision," << to_string(l) << ',' << s.precision << '\n';
        os << "recall," << to_string(l) << ',' << s.recall << '\n';
        os << "f1," << to_string(l) << ',' << s.f1 << '\n';
    }
    os << "accuracy,," << r.accuracy << '\n';
    os << "macro_f1,," << r.macro_f1 << '\n';
    return os.str();
}

}  // namespace offlang
