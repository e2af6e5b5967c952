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

#include "offlang/tfidf.hpp"
#include "test_support.hpp"
#include "tfidf_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace offlang;
using offlang::testing::TempDir;

namespace {

// (block, ngram) -> value, read back from a transform through the vocabulary.
std::map<std::pair<std::size_t, std::string>, double> named(const TfidfVectorizer& v, const SparseVector& x) {
    std::map<std::pair<std::size_t, std::string>, double> out;
    for (std::size_t k = 0; k < x.nnz(); ++k) {
        const auto& c = v.active_column(x.indices[k]);
        out[{c.block, c.ngram}] = x.values[k];
    }
    return out;
}

std::set<std::size_t> active_set(const TfidfVectorizer& v) {
    std::set<std::size_t> s;
    for (std::size_t i = 0; i < v.num_columns(); ++i) {
        if (v.columns()[i].active) s.insert(i);
    }
    return s;
}

}  // namespace

TEST(TfidfFit, IdenticalDocsGiveUnitIdf) {
    const auto v = TfidfVectorizer::fit({"ab", "ab"}, {NgramSpec::chars(1, 1)});
    ASSERT_EQ(v.dimension(), 2u);
    EXPECT_EQ(v.columns()[*v.column_of(0, "a")].df, 2u);
    EXPECT_DOUBLE_EQ(v.columns()[*v.column_of(0, "a")].idf, 1.0);
    EXPECT_DOUBLE_EQ(v.columns()[*v.column_of(0, "b")].idf, 1.0);
}

TEST(TfidfFit, SmoothedIdfHandValue) {
    const auto v = TfidfVectorizer::fit({"a", "b"}, {NgramSpec::chars(1, 1)});
    // ln(3/2) + 1
    EXPECT_NEAR(v.columns()[*v.column_of(0, "a")].idf, 1.4054651081081644, 1e-15);
}

TEST(TfidfFit, NoSpecsMeansZeroDimension) {
    const auto v = TfidfVectorizer::fit({"abc", "d"}, {});
    EXPECT_EQ(v.dimension(), 0u);
    EXPECT_TRUE(v.transform("abc").empty());
}

TEST(TfidfFit, EmptyCorpusAndBadSpec) {
    EXPECT_THROW(TfidfVectorizer::fit({}, default_ngram_specs()), EmptyCorpus);
    EXPECT_THROW(TfidfVectorizer::fit({"a"}, {NgramSpec::chars(3, 2)}), ConfigError);
    EXPECT_THROW(TfidfVectorizer::fit({"a"}, {NgramSpec::words(0, 2)}), ConfigError);
}

TEST(TfidfTransform, OutOfVocabIsZero) {
    const auto v = TfidfVectorizer::fit({"ab"}, {NgramSpec::chars(1, 2)});
    EXPECT_TRUE(v.transform("xyz").empty());
    EXPECT_EQ(v.transform("xyz").dim, v.dimension());
}

TEST(TfidfTransform, SingleNgramDocIsUnitEntry) {
    const auto v = TfidfVectorizer::fit({"a", "b", "ab"}, {NgramSpec::chars(1, 1)});
    const auto x = v.transform("aaa");
    ASSERT_EQ(x.nnz(), 1u);
    EXPECT_DOUBLE_EQ(x.values[0], 1.0);
}

TEST(TfidfTransform, BlocksAreDisjoint) {
    const auto v = TfidfVectorizer::fit({"a b", "b a"}, {NgramSpec::words(1, 2), NgramSpec::chars(1, 2)});
    // "a" is both a word and a character n-gram; each owns its own column.
    ASSERT_TRUE(v.column_of(0, "a") && v.column_of(1, "a"));
    EXPECT_NE(*v.column_of(0, "a"), *v.column_of(1, "a"));
    std::size_t last_block = 0;
    for (const auto& c : v.columns()) {
        EXPECT_GE(c.block, last_block);
        last_block = c.block;
    }
}

TEST(TfidfTransform, DuplicatedTextGivesIdenticalVectors) {
    const auto v = TfidfVectorizer::fit({"ab ba", "ab", "b"}, default_ngram_specs());
    EXPECT_EQ(v.transform("ab ba"), v.transform("ab ba"));
}

TEST(TfidfTransform, NormIsZeroOrOne) {
    std::mt19937_64 rng(2);
    const std::vector<std::string> alphabet{"a", "b", "ج", " ", "د"};
    auto rand_text = [&] {
        std::string s;
        for (auto n = rng() % 12; n > 0; --n) s += alphabet[rng() % alphabet.size()];
        return s;
    };
    std::vector<std::string> corpus;
    for (int i = 0; i < 30; ++i) corpus.push_back(rand_text());
    const auto v = TfidfVectorizer::fit(corpus, default_ngram_specs());
    for (int i = 0; i < 500; ++i) {
        const auto x = v.transform(rand_text());
        const double n = x.norm();
        EXPECT_TRUE(std::abs(n) <= 1e-9 || std::abs(n - 1.0) <= 1e-9) << n;
        for (std::size_t k = 1; k < x.nnz(); ++k) EXPECT_LT(x.indices[k - 1], x.indices[k]);
        for (double val : x.values) EXPECT_GT(val, 0.0);
    }
}

TEST(TfidfOracle, ThreeDocCorpusMatchesBruteForce) {
    const std::vector<std::string> corpus{"ab ba", "abc", "b a b"};
    const std::vector<NgramSpec> specs{NgramSpec::words(1, 2), NgramSpec::chars(1, 3)};
    const auto v = TfidfVectorizer::fit(corpus, specs);
    const testing_oracle::BruteTfidf oracle(corpus, specs);
    for (const auto& doc : corpus) EXPECT_EQ(named(v, v.transform(doc)), oracle.transform(doc));
}

TEST(TfidfOracle, ExhaustiveTinyCorpora) {
    // Every corpus of one or two documents over strings of length <= 2 from {a, b, space}.
    std::vector<std::string> strings{""};
    for (const char* c : {"a", "b", " "}) {
        strings.push_back(c);
        for (const char* d : {"a", "b", " "}) strings.push_back(std::string(c) + d);
    }
    const std::vector<std::vector<NgramSpec>> spec_sets{
        {NgramSpec::chars(1, 3)}, {NgramSpec::words(1, 2)}, {NgramSpec::words(1, 2), NgramSpec::chars(1, 3)}};
    for (const auto& specs : spec_sets) {
        for (const auto& s1 : strings) {
            for (const auto& s2 : strings) {
                for (int n_docs = 1; n_docs <= 2; ++n_docs) {
                    std::vector<std::string> corpus{s1};
                    if (n_docs == 2) corpus.push_back(s2);
                    const auto v = TfidfVectorizer::fit(corpus, specs);
                    const testing_oracle::BruteTfidf oracle(corpus, specs);
                    for (const auto& q : strings) ASSERT_EQ(named(v, v.transform(q)), oracle.transform(q));
                }
            }
        }
    }
}

TEST(TfidfOracle, RandomSmallCorpora) {
    std::mt19937_64 rng(17);
    const std::vector<std::string> alphabet{"a", "b", " ", "ب", "ت"};
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<std::string> corpus;
        for (auto n = 1 + rng() % 5; n > 0; --n) {
            std::string s;
            for (auto k = rng() % 9; k > 0; --k) s += alphabet[rng() % alphabet.size()];
            corpus.push_back(s);
        }
        const int cmin = 1 + static_cast<int>(rng() % 3);
        const int cmax = cmin + static_cast<int>(rng() % (4 - cmin));
        const int wmin = 1 + static_cast<int>(rng() % 2);
        const int wmax = wmin + static_cast<int>(rng() % (3 - wmin));
        const std::vector<NgramSpec> specs{NgramSpec::words(wmin, wmax), NgramSpec::chars(cmin, cmax)};
        const auto v = TfidfVectorizer::fit(corpus, specs);
        const testing_oracle::BruteTfidf oracle(corpus, specs);
        for (const auto& doc : corpus) ASSERT_EQ(named(v, v.transform(doc)), oracle.transform(doc));
    }
}

TEST(ReduceFeatures, IdentityAndZero) {
    const auto v = TfidfVectorizer::fit({"ab", "bc", "cd"}, {NgramSpec::chars(1, 2)});
    const auto same = v.reduce_features(v.dimension());
    EXPECT_EQ(same.to_bytes(), v.to_bytes());
    const auto none = v.reduce_features(0);
    EXPECT_EQ(none.dimension(), 0u);
    EXPECT_TRUE(none.transform("ab").empty());
    EXPECT_THROW(v.reduce_features(v.dimension() + 1), InvalidTarget);
}

TEST(ReduceFeatures, KeepsOracleTopThreeOfFive) {
    // Five word features with distinct corpus-level max scores.
    const std::vector<std::string> corpus{"w1", "w1 w2", "w2 w3 w4 w5", "w1 w3", "w5 w5 w4"};
    const auto v = TfidfVectorizer::fit(corpus, {NgramSpec::words(1, 1)});
    ASSERT_EQ(v.dimension(), 5u);
    const auto reduced = v.reduce_features(3);

    const testing_oracle::BruteTfidf oracle(corpus, {NgramSpec::words(1, 1)});
    const auto expected = oracle.top_by_max_score(3);
    std::set<std::string> kept;
    for (std::size_t i = 0; i < reduced.dimension(); ++i) kept.insert(reduced.active_column(i).ngram);
    EXPECT_EQ(kept, expected);
}

TEST(ReduceFeatures, NestedAcrossTargets) {
    std::mt19937_64 rng(4);
    std::vector<std::string> corpus;
    const std::vector<std::string> words{"ا", "ب", "ت", "ث", "ج", "ح"};
    for (int i = 0; i < 20; ++i) {
        std::string s;
        for (auto k = 1 + rng() % 5; k > 0; --k) s += words[rng() % words.size()] + " ";
        corpus.push_back(s);
    }
    const auto v = TfidfVectorizer::fit(corpus, default_ngram_specs());
    for (int t = 0; t < 50; ++t) {
        std::size_t k1 = rng() % (v.dimension() + 1);
        std::size_t k2 = rng() % (v.dimension() + 1);
        if (k1 > k2) std::swap(k1, k2);
        const auto a = active_set(v.reduce_features(k1));
        const auto b = active_set(v.reduce_features(k2));
        EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
        // Reducing in two steps equals reducing once.
        EXPECT_EQ(active_set(v.reduce_features(k2).reduce_features(k1)), a);
    }
}

TEST(ReduceFeatures, ThresholdAndSumRule) {
    const std::vector<std::string> corpus{"a", "a b", "c"};
    auto v = TfidfVectorizer::fit(corpus, {NgramSpec::chars(1, 1)}, {Weighting::tfidf, ScoreRule::sum});
    const auto& a = v.columns()[*v.column_of(0, "a")];
    EXPECT_GT(a.score_sum, a.score_max);
    const auto r = v.reduce_by_threshold(a.score_sum);
    EXPECT_TRUE(r.feature_of(0, "a").has_value());
    EXPECT_FALSE(r.feature_of(0, " ").has_value());
}

TEST(TfidfPersistence, ReloadIsBitExact) {
    const std::vector<std::string> corpus{"ab ba", "جميل جدا", "b"};
    const auto v = TfidfVectorizer::fit(corpus, default_ngram_specs()).reduce_features(20);
    TempDir dir("vec");
    v.save(dir.file("v.bin"));
    const auto loaded = TfidfVectorizer::load(dir.file("v.bin"));
    EXPECT_EQ(loaded.to_bytes(), v.to_bytes());
    EXPECT_EQ(loaded.fingerprint(), v.fingerprint());
    for (const auto& doc : corpus) EXPECT_EQ(loaded.transform(doc), v.transform(doc));
}

TEST(TfidfPersistence, RejectsCorruptFiles) {
    TempDir dir("vecbad");
    offlang::testing::write_file(dir.file("bad.bin"), "NOPE");
    EXPECT_THROW(TfidfVectorizer::load(dir.file("bad.bin")), DataError);
    const auto bytes = TfidfVectorizer::fit({"ab"}, {NgramSpec::chars(1, 1)}).to_bytes();
    offlang::testing::write_file(dir.file("trunc.bin"), bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW(TfidfVectorizer::load(dir.file("trunc.bin")), DataError);
}

TEST(CountWeighting, RawCountsUnnormalized) {
    const auto v = TfidfVectorizer::fit({"x y x"}, {NgramSpec::words(1, 1)}, {Weighting::counts, ScoreRule::sum});
    const auto x = v.transform("x y x x");
    ASSERT_EQ(x.nnz(), 2u);
    EXPECT_EQ(x.values[*v.feature_of(0, "x")], 3.0);
    EXPECT_EQ(x.values[*v.feature_of(0, "y")], 1.0);
}
