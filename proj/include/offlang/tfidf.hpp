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

// Combined word / character n-gram TF-IDF.
//
//   tf(t, d)  = raw count of n-gram t in d
//   idf(t)    = ln((1 + N) / (1 + df(t))) + 1
//   x(t, d)   = tf * idf, then L2-normalized over the active columns
//
// Character n-grams run over code points of the normalized text, spaces
// included. Word n-grams join tokens with a single space. Each spec owns a
// contiguous column block; inside a block, columns follow the byte order
// of the n-gram strings. transform() emits only active columns, renumbered
// 0..dimension()-1 in column order.

#pragma once

#include "offlang/binary_io.hpp"
#include "offlang/corpus.hpp"
#include "offlang/error.hpp"
#include "offlang/sparse_vector.hpp"
#include "offlang/utf8.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace offlang {

enum class NgramUnit : std::uint8_t { word = 0, character = 1 };

struct NgramSpec {
    NgramUnit unit = NgramUnit::word;
    int min_n = 1;
    int max_n = 1;

    static NgramSpec words(int lo, int hi) { return {NgramUnit::word, lo, hi}; }
    static NgramSpec chars(int lo, int hi) { return {NgramUnit::character, lo, hi}; }

    void validate() const {
        if (min_n < 1 || max_n < min_n) {
            throw ConfigError("invalid n-gram range " + std::to_string(min_n) + ".." + std::to_string(max_n));
        }
    }

    friend bool operator==(const NgramSpec&, const NgramSpec&) = default;
};

// Word 1..5 plus char 1..6.
inline std::vector<NgramSpec> default_ngram_specs() {
    return {NgramSpec::words(1, 5), NgramSpec::chars(1, 6)};
}

enum class Weighting : std::uint8_t {
    tfidf = 0,   // tf * idf, L2-normalized
    counts = 1,  // raw counts, unnormalized (bag of words)
};

// Corpus-level feature score used by reduce_features.
enum class ScoreRule : std::uint8_t { max = 0, sum = 1 };

inline std::vector<std::string> extract_ngrams(std::string_view text, const NgramSpec& spec) {
    std::vector<std::string> out;
    if (spec.unit == NgramUnit::word) {
        const auto tokens = tokenize(text);
        for (int n = spec.min_n; n <= spec.max_n; ++n) {
            const auto un = static_cast<std::size_t>(n);
            for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
                std::string g = tokens[i];
                for (std::size_t k = 1; k < un; ++k) {
                    g.push_back(' ');
                    g += tokens[i + k];
                }
                out.push_back(std::move(g));
            }
        }
    } else {
        const auto cps = utf8::decode(text);
        for (int n = spec.min_n; n <= spec.max_n; ++n) {
            const auto un = static_cast<std::size_t>(n);
            for (std::size_t i = 0; i + un <= cps.size(); ++i) {
                out.push_back(utf8::encode(std::u32string_view(cps).substr(i, un)));
            }
        }
    }
    return out;
}

struct VectorizerOptions {
    Weighting weighting = Weighting::tfidf;
    ScoreRule score_rule = ScoreRule::max;
};

class TfidfVectorizer {
public:
    struct Column {
        std::string ngram;
        std::uint32_t block = 0;
        std::uint64_t df = 0;
        double idf = 1.0;
        double score_max = 0.0;
        double score_sum = 0.0;
        bool active = true;
    };

    using Options = VectorizerOptions;

    TfidfVectorizer() = default;

    static TfidfVectorizer fit(const std::vector<std::string>& corpus, std::vector<NgramSpec> specs,
                               Options opts = {}) {
        if (corpus.empty()) throw EmptyCorpus();
        for (const auto& s : specs) s.validate();

        TfidfVectorizer v;
        v.specs_ = std::move(specs);
        v.opts_ = opts;
        v.n_docs_ = corpus.size();

        std::vector<std::map<std::string, std::uint64_t>> df(v.specs_.size());
        for (const auto& text : corpus) {
            for (std::size_t b = 0; b < v.specs_.size(); ++b) {
                auto grams = extract_ngrams(text, v.specs_[b]);
                std::sort(grams.begin(), grams.end());
                grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
                for (auto& g : grams) ++df[b][g];
            }
        }
        const double n = static_cast<double>(v.n_docs_);
        for (std::size_t b = 0; b < df.size(); ++b) {
            for (auto& [gram, count] : df[b]) {
                Column c;
                c.ngram = gram;
                c.block = static_cast<std::uint32_t>(b);
                c.df = count;
                c.idf = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
                v.columns_.push_back(std::move(c));
            }
        }
        v.rebuild_index();

        for (const auto& text : corpus) {
            const auto x = v.transform(text);
            for (std::size_t k = 0; k < x.nnz(); ++k) {
                auto& c = v.columns_[v.active_columns_[x.indices[k]]];
                c.score_max = std::max(c.score_max, x.values[k]);
                c.score_sum += x.values[k];
            }
        }
        return v;
    }

    SparseVector transform(std::string_view text) const {
        std::map<std::uint32_t, double> tf;  // compact index -> count
        for (std::size_t b = 0; b < specs_.size(); ++b) {
            for (const auto& g : extract_ngrams(text, specs_[b])) {
                auto it = lookup_[b].find(g);
                if (it == lookup_[b].end()) continue;
                const auto compact = compact_of_[it->second];
                if (compact < 0) continue;
                tf[static_cast<std::uint32_t>(compact)] += 1.0;
            }
        }
        SparseVector x;
        x.dim = active_columns_.size();
        x.indices.reserve(tf.size());
        x.values.reserve(tf.size());
        for (const auto& [idx, count] : tf) {
            x.indices.push_back(idx);
            x.values.push_back(opts_.weighting == Weighting::tfidf ? count * columns_[active_columns_[idx]].idf
                                                                   : count);
        }
        if (opts_.weighting == Weighting::tfidf) {
            double sq = 0.0;
            for (double v : x.values) sq += v * v;
            if (sq > 0.0) {
                const double norm = std::sqrt(sq);
                for (auto& v : x.values) v /= norm;
            }
        }
        return x;
    }

    std::vector<SparseVector> transform_all(const std::vector<std::string>& texts) const {
        std::vector<SparseVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(transform(t));
        return out;
    }

    // Keeps the `target_dim` highest-scoring active columns; ties go to the
    // lower column index. Scores were fixed at fit time, so the kept sets
    // are nested across targets.
    TfidfVectorizer reduce_features(std::size_t target_dim) const {
        if (target_dim > dimension()) {
            throw InvalidTarget("target " + std::to_string(target_dim) + " exceeds current dimension " +
                                std::to_string(dimension()));
        }
        auto ranked = ranked_active_columns();
        TfidfVectorizer out = *this;
        for (auto& c : out.columns_) c.active = false;
        for (std::size_t k = 0; k < target_dim; ++k) out.columns_[ranked[k]].active = true;
        out.rebuild_index();
        return out;
    }

    // Keeps active columns whose score is >= threshold.
    TfidfVectorizer reduce_by_threshold(double threshold) const {
        if (!std::isfinite(threshold)) throw InvalidTarget("threshold must be finite");
        TfidfVectorizer out = *this;
        for (auto& c : out.columns_) {
            if (c.active && score_of(c) < threshold) c.active = false;
        }
        out.rebuild_index();
        return out;
    }

    std::size_t dimension() const noexcept { return active_columns_.size(); }
    std::size_t num_columns() const noexcept { return columns_.size(); }
    std::size_t n_docs() const noexcept { return n_docs_; }
    const std::vector<NgramSpec>& specs() const noexcept { return specs_; }
    const Options& options() const noexcept { return opts_; }
    const std::vector<Column>& columns() const noexcept { return columns_; }
    const Column& active_column(std::size_t compact) const { return columns_[active_columns_.at(compact)]; }

    std::optional<std::size_t> column_of(std::size_t block, const std::string& ngram) const {
        if (block >= lookup_.size()) return std::nullopt;
        auto it = lookup_[block].find(ngram);
        if (it == lookup_[block].end()) return std::nullopt;
        return it->second;
    }

    // Compact (output) index of an n-gram, if its column is active.
    std::optional<std::size_t> feature_of(std::size_t block, const std::string& ngram) const {
        auto col = column_of(block, ngram);
        if (!col || compact_of_[*col] < 0) return std::nullopt;
        return static_cast<std::size_t>(compact_of_[*col]);
    }

    double score_of(const Column& c) const noexcept {
        return opts_.score_rule == ScoreRule::max ? c.score_max : c.score_sum;
    }

    static constexpr std::uint32_t format_version = 1;

    std::string to_bytes() const {
        bin::Writer w;
        w.put_bytes("OLTV");
        w.put(format_version);
        w.put(static_cast<std::uint8_t>(opts_.weighting));
        w.put(static_cast<std::uint8_t>(opts_.score_rule));
        w.put(static_cast<std::uint32_t>(specs_.size()));
        for (const auto& s : specs_) {
            w.put(static_cast<std::uint8_t>(s.unit));
            w.put(static_cast<std::uint32_t>(s.min_n));
            w.put(static_cast<std::uint32_t>(s.max_n));
        }
        w.put(static_cast<std::uint64_t>(n_docs_));
        w.put(static_cast<std::uint64_t>(columns_.size()));
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            const auto& c = columns_[i];
            w.put_str(c.ngram);
            w.put(c.block);
            w.put(c.df);
            w.put(static_cast<std::uint64_t>(i));
            w.put_f64(c.idf);
            w.put_f64(c.score_max);
            w.put_f64(c.score_sum);
            w.put(static_cast<std::uint8_t>(c.active ? 1 : 0));
        }
        return w.bytes();
    }

    static TfidfVectorizer from_bytes(bin::Reader& r) {
        r.expect_magic("OLTV");
        if (r.get<std::uint32_t>() != format_version) r.fail("unsupported vectorizer version");
        TfidfVectorizer v;
        v.opts_.weighting = static_cast<Weighting>(r.get<std::uint8_t>());
        v.opts_.score_rule = static_cast<ScoreRule>(r.get<std::uint8_t>());
        const auto n_specs = r.get<std::uint32_t>();
        for (std::uint32_t i = 0; i < n_specs; ++i) {
            NgramSpec s;
            s.unit = static_cast<NgramUnit>(r.get<std::uint8_t>());
            s.min_n = static_cast<int>(r.get<std::uint32_t>());
            s.max_n = static_cast<int>(r.get<std::uint32_t>());
            v.specs_.push_back(s);
        }
        v.n_docs_ = r.get<std::uint64_t>();
        const auto n_cols = r.get<std::uint64_t>();
        v.columns_.reserve(n_cols);
        for (std::uint64_t i = 0; i < n_cols; ++i) {
            Column c;
            c.ngram = r.get_str();
            c.block = r.get<std::uint32_t>();
            c.df = r.get<std::uint64_t>();
            if (r.get<std::uint64_t>() != i) r.fail("column table out of order");
            if (c.block >= n_specs) r.fail("column block out of range");
            c.idf = r.get_f64();
            c.score_max = r.get_f64();
            c.score_sum = r.get_f64();
            c.active = r.get<std::uint8_t>() != 0;
            v.columns_.push_back(std::move(c));
        }
        v.rebuild_index();
        return v;
    }

    void save(const std::string& path) const {
        bin::Writer w;
        w.put_bytes(to_bytes());
        w.save(path);
    }

    static TfidfVectorizer load(const std::string& path) {
        auto r = bin::Reader::from_file(path);
        auto v = from_bytes(r);
        if (!r.at_end()) r.fail("trailing bytes");
        return v;
    }

    std::uint64_t fingerprint() const { return bin::fnv1a(to_bytes()); }

private:
    std::vector<std::size_t> ranked_active_columns() const {
        std::vector<std::size_t> ranked(active_columns_.begin(), active_columns_.end());
        std::stable_sort(ranked.begin(), ranked.end(), [this](std::size_t a, std::size_t b) {
            const double sa = score_of(columns_[a]);
            const double sb = score_of(columns_[b]);
            if (sa != sb) return sa > sb;
            return a < b;
        });
        return ranked;
    }

    void rebuild_index() {
        lookup_.assign(specs_.size(), {});
        compact_of_.assign(columns_.size(), -1);
        active_columns_.clear();
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            lookup_[columns_[i].block].emplace(columns_[i].ngram, static_cast<std::uint32_t>(i));
            if (columns_[i].active) {
                compact_of_[i] = static_cast<std::int64_t>(active_columns_.size());
                active_columns_.push_back(i);
            }
        }
    }

    std::vector<NgramSpec> specs_;
    Options opts_;
    std::size_t n_docs_ = 0;
    std::vector<Column> columns_;
    std::vector<std::unordered_map<std::string, std::uint32_t>> lookup_;
    std::vector<std::int64_t> compact_of_;
    std::vector<std::size_t> active_columns_;
};

}  // namespace offlang
