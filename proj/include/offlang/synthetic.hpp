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

// Planted-token corpora: OFF documents contain a marker word somewhere and
// NOT documents never do, so a perfect classifier exists by construction.
// Filler words are drawn so that normalization leaves the text unchanged.

#pragma once

#include "offlang/corpus.hpp"
#include "offlang/normalize.hpp"

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace offlang {

struct PlantedCorpusOptions {
    std::size_t n_docs = 2000;
    double p_off = 0.3;
    std::size_t min_words = 4;
    std::size_t max_words = 10;
    std::size_t vocab_size = 300;
    std::string marker = "غبي";
    double train_fraction = 0.8;
    double validation_fraction = 0.1;
    std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<std::string> filler_vocabulary(const PlantedCorpusOptions& opts, std::mt19937_64& rng) {
    static const std::u32string letters = U"ابتثجحخدذرزسشصضطظعغفقكلمنهوي";
    const auto cfg = NormalizeConfig::defaults();
    std::set<std::string> seen;
    std::vector<std::string> vocab;
    while (vocab.size() < opts.vocab_size) {
        std::u32string w;
        const auto len = 2 + rng() % 5;
        while (w.size() < len) {
            const char32_t c = letters[rng() % letters.size()];
            if (w.empty() || w.back() != c) w.push_back(c);
        }
        auto s = utf8::encode(w);
        if (s == opts.marker || cfg.stopwords().contains(w) || !seen.insert(s).second) continue;
        vocab.push_back(std::move(s));
    }
    return vocab;
}

}  // namespace detail

inline std::vector<Document> make_planted_documents(const PlantedCorpusOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    const auto vocab = detail::filler_vocabulary(opts, rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Document> docs;
    docs.reserve(opts.n_docs);
    for (std::size_t i = 0; i < opts.n_docs; ++i) {
        const bool off = unit(rng) < opts.p_off;
        const auto n = opts.min_words + rng() % (opts.max_words - opts.min_words + 1);
        std::vector<std::string> words;
        for (std::size_t k = 0; k < n; ++k) words.push_back(vocab[rng() % vocab.size()]);
        if (off) words[rng() % n] = opts.marker;
        std::string text;
        for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
        docs.push_back({"syn" + std::to_string(i), std::move(text), off ? Label::OFF : Label::NOT});
    }
    return docs;
}

inline CorpusSplit make_planted_split(const PlantedCorpusOptions& opts) {
    auto docs = make_planted_documents(opts);
    const auto n_train = static_cast<std::size_t>(opts.train_fraction * static_cast<double>(docs.size()));
    const auto n_val = static_cast<std::size_t>(opts.validation_fraction * static_cast<double>(docs.size()));
    CorpusSplit s;
    s.train.assign(docs.begin(), docs.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.validation.assign(docs.begin() + static_cast<std::ptrdiff_t>(n_train),
                        docs.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(docs.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), docs.end());
    return s;
}

}  // namespace offlang
