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

#include "offlang/eval.hpp"
#include "offlang/linear_model.hpp"
#include "offlang/tfidf.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace offlang {

struct AblationPoint {
    std::size_t dim = 0;
    double macro_f1 = 0.0;
};

struct AblationReport {
    std::vector<AblationPoint> points;  // in schedule order
    std::size_t best_dim = 0;
    double best_macro_f1 = 0.0;
};

struct LabeledTexts {
    std::vector<std::string> texts;
    std::vector<Label> labels;
};

using LinearTrainer =
    std::function<LinearModel(std::span<const SparseVector>, std::span<const Label>)>;

inline LinearTrainer svm_trainer(TrainConfig cfg = {}) {
    return [cfg](std::span<const SparseVector> X, std::span<const Label> y) {
        return train_svm(X, y, cfg).model;
    };
}

inline double evaluate_linear(const TfidfVectorizer& vec, const LinearModel& model, const LabeledTexts& data) {
    std::vector<Label> pred;
    pred.reserve(data.texts.size());
    for (const auto& t : data.texts) pred.push_back(model.predict(vec.transform(t)).label);
    return macro_f1(confusion(pred, data.labels));
}

// Trains one model per feature dimension in `schedule` (strictly decreasing)
// and picks the dimension with the best validation macro-F1, preferring the
// larger dimension on ties.
inline AblationReport ablation_sweep(const TfidfVectorizer& vec, const LinearTrainer& trainer,
                                     const LabeledTexts& train, const LabeledTexts& eval_set,
                                     std::span<const std::size_t> schedule) {
    if (schedule.empty()) throw InvalidTarget("empty schedule");
    for (std::size_t i = 1; i < schedule.size(); ++i) {
        if (schedule[i] >= schedule[i - 1]) throw InvalidTarget("schedule must be strictly decreasing");
    }
    AblationReport report;
    bool have_best = false;
    for (std::size_t dim : schedule) {
        const auto reduced = vec.reduce_features(dim);
        const auto X = reduced.transform_all(train.texts);
        auto model = trainer(X, train.labels);
        const double f1 = evaluate_linear(reduced, model, eval_set);
        report.points.push_back({dim, f1});
        // Dims arrive in decreasing order, so strict > keeps the larger one on ties.
        if (!have_best || f1 > report.best_macro_f1) {
            report.best_dim = dim;
            report.best_macro_f1 = f1;
            have_best = true;
        }
    }
    return report;
}

inline std::string format_ablation_csv(const AblationReport& r) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "feature_dim,val_macro_f1\n";
    for (const auto& p : r.points) os << p.dim << ',' << p.macro_f1 << '\n';
    return os.str();
}

}  // namespace offlang
