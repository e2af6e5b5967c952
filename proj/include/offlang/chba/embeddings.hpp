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

// Token vocabularies and word-embedding tables.
//
// Every vocabulary reserves row 0 for padding and row 1 for unknown tokens.
// Embedding text files follow the usual word-vector layout: an optional
// "count dim" header line, then one "word v1 ... vdim" line per word.

#pragma once

#include "offlang/autodiff/tensor.hpp"
#include "offlang/corpus.hpp"
#include "offlang/utf8.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace offlang::chba {

class Vocabulary {
public:
    static constexpr std::size_t pad = 0;
    static constexpr std::size_t unk = 1;

    Vocabulary() : tokens_{"<pad>", "<unk>"} {}

    // Returns the id of token, adding it if new.
    std::size_t add(const std::string& token) {
        auto [it, inserted] = index_.try_emplace(token, tokens_.size());
        if (inserted) tokens_.push_back(token);
        return it->second;
    }
    std::size_t id(const std::string& token) const {
        auto it = index_.find(token);
        return it == index_.end() ? unk : it->second;
    }
    bool contains(const std::string& token) const { return index_.count(token) > 0; }
    std::size_t size() const { return tokens_.size(); }
    // Tokens in id order, starting with the two reserved entries.
    const std::vector<std::string>& tokens() const { return tokens_; }

    static Vocabulary from_tokens(const std::vector<std::string>& tokens_with_reserved) {
        Vocabulary v;
        for (std::size_t i = 2; i < tokens_with_reserved.size(); ++i) v.add(tokens_with_reserved[i]);
        return v;
    }

    bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
};

enum class UnkPolicy { zero, random };

struct EmbeddingTable {
    Vocabulary vocab;
    ad::Tensor<float> matrix;  // {vocab.size(), dim}
    bool trainable = true;
    bool pretrained = false;
    UnkPolicy unk_policy = UnkPolicy::zero;

    std::size_t dim() const { return matrix.rank() == 2 ? matrix.cols() : 0; }
    std::size_t num_words() const { return vocab.size() - 2; }

    // Rows the optimizer must leave alone.
    std::vector<std::size_t> frozen_rows() const {
        if (unk_policy == UnkPolicy::zero) return {Vocabulary::pad, Vocabulary::unk};
        return {Vocabulary::pad};
    }

    // Randomly initialized table for the given vocabulary, used when no
    // pretrained vectors are supplied.
    static EmbeddingTable random(Vocabulary vocab, std::size_t dim, std::uint64_t seed,
                                 UnkPolicy unk = UnkPolicy::zero) {
        EmbeddingTable t;
        t.matrix = ad::Tensor<float>({vocab.size(), dim});
        t.vocab = std::move(vocab);
        t.unk_policy = unk;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<float> u(-0.05f, 0.05f);
        for (std::size_t r = 0; r < t.matrix.rows(); ++r) {
            const bool zero_row = r == Vocabulary::pad || (r == Vocabulary::unk && unk == UnkPolicy::zero);
            for (std::size_t c = 0; c < dim; ++c) t.matrix(r, c) = zero_row ? 0.0f : u(rng);
        }
        return t;
    }
};

namespace detail {

inline bool parse_size(const std::string& s, std::size_t& out) {
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
}

inline bool parse_float(const std::string& s, float& out) {
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end && std::isfinite(out);
}

}  // namespace detail

// Reads a word-vector text file. Later duplicates of a word are ignored.
inline EmbeddingTable load_embeddings(const std::string& path, std::size_t dim) {
    if (dim == 0) throw ConfigError("embedding dimension must be positive");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path);
    EmbeddingTable t;
    t.pretrained = true;
    std::vector<float> values(2 * dim, 0.0f);  // pad and unk rows
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        for (std::size_t start = 0; start <= line.size();) {
            auto end = line.find_first_of(" \t", start);
            if (end == std::string::npos) end = line.size();
            if (end > start) fields.push_back(line.substr(start, end - start));
            start = end + 1;
        }
        if (fields.empty()) continue;
        if (line_no == 1 && fields.size() == 2) {
            std::size_t count = 0, header_dim = 0;
            if (detail::parse_size(fields[0], count) && detail::parse_size(fields[1], header_dim)) {
                if (header_dim != dim) {
                    throw DimMismatch(line_no, "header declares " + std::to_string(header_dim) + ", expected " +
                                                   std::to_string(dim));
                }
                continue;
            }
        }
        if (fields.size() - 1 != dim) {
            throw DimMismatch(line_no, std::to_string(fields.size() - 1) + " values, expected " + std::to_string(dim));
        }
        std::vector<float> row(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            if (!detail::parse_float(fields[k + 1], row[k])) {
                throw MalformedRow(line_no, "bad number '" + fields[k + 1] + "'");
            }
        }
        if (t.vocab.contains(fields[0])) continue;
        t.vocab.add(fields[0]);
        values.insert(values.end(), row.begin(), row.end());
    }
    t.matrix = ad::Tensor<float>({t.vocab.size(), dim}, std::move(values));
    return t;
}

// Builds a vocabulary from whitespace tokens in first-appearance order.
inline Vocabulary build_word_vocabulary(const std::vector<std::string>& texts) {
    Vocabulary v;
    for (const auto& t : texts)
        for (const auto& w : tokenize(t)) v.add(w);
    return v;
}

inline Vocabulary build_char_vocabulary(const std::vector<std::string>& texts) {
    Vocabulary v;
    for (const auto& t : texts) {
        for (char32_t c : utf8::decode(t)) {
            if (c != U' ') v.add(utf8::encode(std::u32string(1, c)));
        }
    }
    return v;
}

}  // namespace offlang::chba
