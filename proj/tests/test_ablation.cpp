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

#include "offlang/ablation.hpp"
#include "offlang/synthetic.hpp"

#include <gtest/gtest.h>

using namespace offlang;

namespace {

LabeledTexts to_labeled(const std::vector<Document>& docs) {
    LabeledTexts out;
    for (const auto& d : docs) {
        out.texts.push_back(d.text);
        out.labels.push_back(*d.label);
    }
    return out;
}

// Trainer that ignores its input and returns a constant model, so every
// dimension scores the same.
LinearTrainer constant_trainer() {
    return [](std::span<const SparseVector> X, std::span<const Label>) {
        LinearModel m;
        m.weights.assign(X.front().dim, 0.0);
        m.bias = -1.0;
        return m;
    };
}

}  // namespace

TEST(AblationSweep, SingletonScheduleReturnsIt) {
    PlantedCorpusOptions opts;
    opts.n_docs = 200;
    const auto split = make_planted_split(opts);
    const auto train = to_labeled(split.train);
    const auto val = to_labeled(split.validation);
    const auto vec = TfidfVectorizer::fit(train.texts, {NgramSpec::words(1, 1)});
    const std::vector<std::size_t> schedule{vec.dimension() / 2};
    const auto r = ablation_sweep(vec, svm_trainer(), train, val, schedule);
    EXPECT_EQ(r.best_dim, schedule[0]);
    ASSERT_EQ(r.points.size(), 1u);
}

TEST(AblationSweep, TiesPickLargestDimension) {
    PlantedCorpusOptions opts;
    opts.n_docs = 100;
    const auto split = make_planted_split(opts);
    const auto train = to_labeled(split.train);
    const auto val = to_labeled(split.validation);
    const auto vec = TfidfVectorizer::fit(train.texts, {NgramSpec::words(1, 1)});
    const std::vector<std::size_t> schedule{vec.dimension(), 20, 5, 0};
    const auto r = ablation_sweep(vec, constant_trainer(), train, val, schedule);
    for (const auto& p : r.points) EXPECT_EQ(p.macro_f1, r.points.front().macro_f1);
    EXPECT_EQ(r.best_dim, vec.dimension());
}

TEST(AblationSweep, BestDimensionKeepsTheMarker) {
    // The marker word is the only class signal; a dimension that drops it
    // cannot separate the classes.
    PlantedCorpusOptions opts;
    opts.n_docs = 600;
    opts.seed = 21;
    const auto split = make_planted_split(opts);
    const auto train = to_labeled(split.train);
    const auto val = to_labeled(split.validation);
    const auto vec = TfidfVectorizer::fit(train.texts, {NgramSpec::words(1, 1)});
    const auto marker_col = *vec.column_of(0, opts.marker);

    // Build a schedule that straddles the marker's rank.
    std::vector<std::size_t> schedule{vec.dimension()};
    for (std::size_t d = vec.dimension() / 2; d >= 1; d /= 2) schedule.push_back(d);
    schedule.push_back(0);
    const auto r = ablation_sweep(vec, svm_trainer(), train, val, schedule);

    const auto best = vec.reduce_features(r.best_dim);
    EXPECT_TRUE(best.columns()[marker_col].active);
    EXPECT_GE(r.best_macro_f1, 0.95);
    // The empty feature set predicts a single class.
    EXPECT_LT(r.points.back().macro_f1, 0.5);
}

TEST(AblationSweep, RejectsBadSchedules) {
    const auto vec = TfidfVectorizer::fit({"a b", "c"}, {NgramSpec::words(1, 1)});
    LabeledTexts data{{"a b", "c"}, {Label::OFF, Label::NOT}};
    const std::vector<std::size_t> up{1, 2};
    EXPECT_THROW(ablation_sweep(vec, svm_trainer(), data, data, up), InvalidTarget);
    const std::vector<std::size_t> too_big{10};
    EXPECT_THROW(ablation_sweep(vec, svm_trainer(), data, data, too_big), InvalidTarget);
    EXPECT_THROW(ablation_sweep(vec, svm_trainer(), data, data, {}), InvalidTarget);
}

TEST(AblationSweep, CsvFormat) {
    AblationReport r;
    r.points = {{10, 0.5}, {5, 0.75}};
    EXPECT_EQ(format_ablation_csv(r), "feature_dim,val_macro_f1\n10,0.5\n5,0.75\n");
}
