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

#include "offlang/chba/config.hpp"
#include "offlang/chba/embeddings.hpp"

#include <string>
#include <vector>

namespace offlang::chba {

// One message as network input. words[t] is a word-vocabulary id and
// chars[t] holds exactly max_chars_per_word character ids (padded with 0).
// Positions at the end whose word and characters are all padding are
// ignored by the network.
struct EncodedText {
    std::vector<std::size_t> words;
    std::vector<std::vector<std::size_t>> chars;

    std::size_t length() const { return words.size(); }

    // Number of leading positions that are not trailing padding.
    std::size_t effective_length() const {
        std::size_t n = words.size();
        while (n > 0 && words[n - 1] == Vocabulary::pad &&
               std::all_of(chars[n - 1].begin(), chars[n - 1].end(), [](std::size_t c) { return c == 0; })) {
            --n;
        }
        return n;
    }

    bool operator==(const EncodedText&) const = default;
};

class TextEncoder {
public:
    TextEncoder() = default;
    TextEncoder(Vocabulary words, Vocabulary chars, std::size_t max_words, std::size_t max_chars)
        : words_(std::move(words)), chars_(std::move(chars)), max_words_(max_words), max_chars_(max_chars) {}

    // Splits on spaces, keeps the first max_words tokens and the first
    // max_chars code points of each token.
    EncodedText encode(const std::string& text) const {
        EncodedText e;
        for (const auto& w : tokenize(text)) {
            if (e.words.size() == max_words_) break;
            e.words.push_back(words_.id(w));
            std::vector<std::size_t> cs(max_chars_, Vocabulary::pad);
            const auto cps = utf8::decode(w);
            for (std::size_t k = 0; k < cps.size() && k < max_chars_; ++k) {
                cs[k] = chars_.id(utf8::encode(std::u32string(1, cps[k])));
            }
            e.chars.push_back(std::move(cs));
        }
        return e;
    }

    std::vector<EncodedText> encode_all(const std::vector<std::string>& texts) const {
        std::vector<EncodedText> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(encode(t));
        return out;
    }

    // Appends n all-padding positions.
    EncodedText pad(EncodedText e, std::size_t n) const {
        for (std::size_t k = 0; k < n; ++k) {
            e.words.push_back(Vocabulary::pad);
            e.chars.emplace_back(max_chars_, Vocabulary::pad);
        }
        return e;
    }

    const Vocabulary& words() const { return words_; }
    const Vocabulary& chars() const { return chars_; }
    std::size_t max_words() const { return max_words_; }
    std::size_t max_chars() const { return max_chars_; }

private:
    Vocabulary words_;
    Vocabulary chars_;
    std::size_t max_words_ = 50;
    std::size_t max_chars_ = 10;
};

}  // namespace offlang::chba
