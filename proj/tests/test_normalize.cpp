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

#include "offlang/corpus.hpp"
#include "offlang/normalize.hpp"
#include "normalize_fixtures.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

using namespace offlang;
using offlang::testing::source_path;
using offlang::testing::load_normalize_cases;
using offlang::testing::random_text;

namespace {

NormalizeConfig random_config(std::mt19937_64& rng) {
    NormalizeConfig cfg = NormalizeConfig::defaults();
    cfg.remove_urls = rng() & 1;
    cfg.remove_mentions = rng() & 1;
    cfg.remove_emails = rng() & 1;
    cfg.remove_dates = rng() & 1;
    cfg.remove_numbers = rng() & 1;
    cfg.remove_punctuation = rng() & 1;
    cfg.remove_latin = rng() & 1;
    cfg.remove_emoji = rng() & 1;
    cfg.set_collapse_repeats(rng() & 1);
    if (rng() & 1) cfg.set_stopwords({});
    if (rng() & 1) cfg.set_unify_map({});
    return cfg;
}

}  // namespace

TEST(Normalize, FixtureFileByteExact) {
    const auto cases = load_normalize_cases();
    ASSERT_GE(cases.size(), 30u);
    const auto cfg = NormalizeConfig::defaults();
    for (const auto& c : cases) {
        EXPECT_EQ(normalize(std::string_view(c.input), cfg), c.expected) << "case " << c.name;
    }
}

TEST(Normalize, SpecExamples) {
    const auto cfg = NormalizeConfig::defaults();
    EXPECT_EQ(normalize(std::string_view("شاهد http://t.co/x @user"), cfg), "شاهد");
    EXPECT_EQ(normalize(std::string_view("ههههههه"), cfg), "ه");
    EXPECT_EQ(normalize(std::string_view(""), cfg), "");
}

TEST(Normalize, IdempotentOnFuzzedStringsDefaultConfig) {
    std::mt19937_64 rng(7);
    const auto cfg = NormalizeConfig::defaults();
    for (int i = 0; i < 10000; ++i) {
        const auto s = random_text(rng, 24);
        const auto once = normalize(std::string_view(s), cfg);
        ASSERT_EQ(normalize(std::string_view(once), cfg), once) << "input: " << s;
    }
}

TEST(Normalize, IdempotentUnderRandomConfigs) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 3000; ++i) {
        const auto cfg = random_config(rng);
        const auto s = random_text(rng, 24);
        const auto once = normalize(std::string_view(s), cfg);
        ASSERT_EQ(normalize(std::string_view(once), cfg), once) << "input: " << s;
    }
}

TEST(Normalize, NoAdjacentRepeatsWhenCollapsing) {
    std::mt19937_64 rng(3);
    auto cfg = NormalizeConfig::defaults();
    cfg.remove_latin = false;
    cfg.remove_punctuation = false;
    for (int i = 0; i < 2000; ++i) {
        const auto out = utf8::decode(normalize(std::string_view(random_text(rng, 30)), cfg));
        for (std::size_t k = 1; k < out.size(); ++k) {
            if (out[k] == U' ') continue;
            ASSERT_NE(out[k], out[k - 1]);
        }
    }
}

TEST(Normalize, AllRulesDisabledIsWhitespaceNormalization) {
    std::mt19937_64 rng(5);
    const auto cfg = NormalizeConfig::disabled();
    for (int i = 0; i < 2000; ++i) {
        const auto s = random_text(rng, 30);
        EXPECT_EQ(normalize(std::string_view(s), cfg), collapse_whitespace(std::string_view(s)));
    }
}

TEST(Normalize, OutputHasNoEnabledMatches) {
    const auto cfg = NormalizeConfig::defaults();
    std::mt19937_64 rng(13);
    for (int i = 0; i < 2000; ++i) {
        const auto out = utf8::decode(normalize(std::string_view(random_text(rng, 30)), cfg));
        for (char32_t c : out) {
            ASSERT_FALSE(chars::is_digit(c));
            ASSERT_FALSE(chars::is_latin(c));
            ASSERT_FALSE(chars::is_punct(c));
            ASSERT_FALSE(chars::is_emoji(c));
            ASSERT_FALSE(cfg.unify_map().contains(c));
        }
        ASSERT_TRUE(out.empty() || (out.front() != U' ' && out.back() != U' '));
    }
}

TEST(Normalize, SingleRuleToggles) {
    auto cfg = NormalizeConfig::disabled();
    cfg.remove_numbers = true;
    EXPECT_EQ(normalize(std::string_view("abc 123 x"), cfg), "abc x");
    cfg = NormalizeConfig::disabled();
    cfg.remove_dates = true;
    EXPECT_EQ(normalize(std::string_view("on 1/2/2020 and 12345"), cfg), "on and 12345");
    cfg = NormalizeConfig::disabled();
    cfg.remove_emails = true;
    EXPECT_EQ(normalize(std::string_view("mail a.b@c.org now @x"), cfg), "mail now @x");
    cfg = NormalizeConfig::disabled();
    cfg.remove_mentions = true;
    EXPECT_EQ(normalize(std::string_view("hi @x_1 there @"), cfg), "hi there @");
    cfg = NormalizeConfig::disabled();
    cfg.collapse_repeats = true;
    EXPECT_EQ(normalize(std::string_view("aaa  bbb"), cfg), "a b");
}

TEST(UnifyCharacters, Examples) {
    const auto map = default_unify_map();
    EXPECT_EQ(unify_characters(std::string_view("أمل"), map), "امل");
    EXPECT_EQ(unify_characters(std::string_view("على"), map), "علي");
    EXPECT_EQ(unify_characters(std::string_view("سلام"), map), "سلام");
}

TEST(UnifyCharacters, PreservesLengthAndTouchesOnlyDomain) {
    const auto map = default_unify_map();
    const std::u32string s = U"إأآٱىة abc ه";
    const auto out = unify_characters(s, map);
    ASSERT_EQ(out.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (map.contains(s[i])) EXPECT_EQ(out[i], map.at(s[i]));
        else EXPECT_EQ(out[i], s[i]);
    }
    EXPECT_EQ(out.substr(5, 1), U"ة");  // teh marbuta is not mapped
}

TEST(UnifyMap, ComposesChains) {
    NormalizeConfig cfg = NormalizeConfig::disabled();
    cfg.set_unify_map({{U'a', U'b'}, {U'b', U'c'}});
    EXPECT_EQ(cfg.unify_map().at(U'a'), U'c');
    EXPECT_THROW(cfg.set_unify_map({{U'a', U'b'}, {U'b', U'a'}}), ConfigError);
}

TEST(UnifyMap, LoadsBundledTableAndRejectsConflicts) {
    EXPECT_EQ(load_unify_map(source_path("data/unify_map.tsv")), default_unify_map());
    offlang::testing::TempDir dir("unify");
    offlang::testing::write_file(dir.file("bad.tsv"), "أ\tا\nأ\tب\n");
    EXPECT_THROW(load_unify_map(dir.file("bad.tsv")), MalformedRow);
    offlang::testing::write_file(dir.file("bad2.tsv"), "أا\tا\n");
    EXPECT_THROW(load_unify_map(dir.file("bad2.tsv")), MalformedRow);
    EXPECT_THROW(load_unify_map(dir.file("missing.tsv")), IoError);
}

TEST(Stopwords, BundledFileMatchesCompiledDefault) {
    const auto words = load_stopwords(source_path("data/arabic_stopwords.txt"));
    ASSERT_EQ(words.size(), default_arabic_stopwords.size());
    for (std::size_t i = 0; i < words.size(); ++i) EXPECT_EQ(words[i], default_arabic_stopwords[i]);
}

TEST(Stopwords, EntriesAreFixedPoints) {
    const auto cfg = NormalizeConfig::defaults();
    for (const auto& w : cfg.stopwords()) {
        EXPECT_EQ(cfg.canonical_token(w), w);
    }
    // A stop word alone normalizes to nothing, whatever its raw spelling.
    EXPECT_EQ(normalize(std::string_view("إلى"), cfg), "");
}

TEST(MergeLhsabLabel, MapsDocumentedLabels) {
    EXPECT_EQ(merge_lhsab_label("Hate"), Label::OFF);
    EXPECT_EQ(merge_lhsab_label("Abusive"), Label::OFF);
    EXPECT_EQ(merge_lhsab_label("Normal"), Label::NOT);
    EXPECT_EQ(merge_lhsab_label("hate"), Label::OFF);
    EXPECT_EQ(merge_lhsab_label(" NORMAL "), Label::NOT);
}

TEST(MergeLhsabLabel, RejectsEverythingElse) {
    for (const char* raw : {"", "OFF", "NOT", "Offensive", "Hates", "normal1"}) {
        EXPECT_THROW(merge_lhsab_label(raw), UnknownLabel) << raw;
    }
}

TEST(Utf8, InvalidBytesBecomeReplacementChars) {
    const std::string bad = "a\xC3(b\xFF";
    const auto cps = utf8::decode(bad);
    EXPECT_EQ(cps, (std::u32string{U'a', 0xFFFD, U'(', U'b', 0xFFFD}));
    const std::u32string round = U"سلام 😂 é";
    EXPECT_EQ(utf8::decode(utf8::encode(round)), round);
}
