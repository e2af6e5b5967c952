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

// Experiment configuration: an INI-style file of `key = value` lines grouped
// in `[section]` blocks. A key `k` inside `[s]` is addressed as `s.k`.
// Lines starting with '#' or ';' are comments. Every key must appear in the
// schema below and every value must parse as the key's kind; relative paths
// resolve against the directory of the file they came from.

#pragma once

#include "offlang/chba/config.hpp"
#include "offlang/chba/embeddings.hpp"
#include "offlang/error.hpp"
#include "offlang/linear_model.hpp"
#include "offlang/normalize.hpp"
#include "offlang/tfidf.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace offlang::cli {

enum class ValueKind { boolean, integer, real, text, path, choice, size_list, ngram_list };

struct KeySpec {
    std::string key;
    ValueKind kind;
    std::string default_value;
    std::vector<std::string> choices;  // for ValueKind::choice
    std::string help;
};

inline const std::vector<KeySpec>& config_schema() {
    using K = ValueKind;
    static const std::vector<KeySpec> schema = {
        {"run.seed", K::integer, "1", {}, "seed for every random choice in the run"},
        {"run.output_dir", K::path, "", {}, "model directory written by train"},

        {"data.train", K::path, "", {}, "task training split (id, text, OFF/NOT)"},
        {"data.validation", K::path, "", {}, "task validation split"},
        {"data.test", K::path, "", {}, "task test split"},
        {"data.lhsab", K::path, "", {}, "optional extra source labeled Hate/Abusive/Normal"},
        {"data.widebot", K::path, "", {}, "optional extra source; only OFF rows are used"},
        {"data.train_fraction", K::real, "1", {}, "share of the task train split kept"},

        {"normalize.remove_urls", K::boolean, "true", {}, ""},
        {"normalize.remove_mentions", K::boolean, "true", {}, ""},
        {"normalize.remove_emails", K::boolean, "true", {}, ""},
        {"normalize.remove_dates", K::boolean, "true", {}, ""},
        {"normalize.remove_numbers", K::boolean, "true", {}, ""},
        {"normalize.remove_punctuation", K::boolean, "true", {}, ""},
        {"normalize.remove_latin", K::boolean, "true", {}, ""},
        {"normalize.remove_emoji", K::boolean, "true", {}, ""},
        {"normalize.collapse_repeats", K::boolean, "true", {}, ""},
        {"normalize.unify", K::boolean, "true", {}, "apply the character unification table"},
        {"normalize.unify_map", K::path, "", {}, "unification table; empty means the built-in one"},
        {"normalize.remove_stopwords", K::boolean, "true", {}, ""},
        {"normalize.stopwords", K::path, "", {}, "stop-word list; empty means the built-in one"},

        {"features.ngrams", K::ngram_list, "word:1-5,char:1-6", {}, "n-gram blocks, unit:min-max"},
        {"features.weighting", K::choice, "tfidf", {"tfidf", "counts"}, ""},
        {"features.score_rule", K::choice, "max", {"max", "sum"}, "ranking used to reduce features"},
        {"features.dim", K::integer, "0", {}, "keep the top-k features; 0 keeps all"},

        {"model.kind", K::choice, "svm", {"svm", "logreg", "chba"}, ""},

        {"svm.C", K::real, "1", {}, ""},
        {"svm.epochs", K::integer, "20", {}, ""},
        {"svm.eta0", K::real, "0.5", {}, ""},
        {"svm.balance_classes", K::boolean, "false", {}, ""},

        {"logreg.C", K::real, "1", {}, ""},
        {"logreg.iterations", K::integer, "300", {}, ""},
        {"logreg.eta0", K::real, "0.5", {}, ""},

        {"chba.max_words", K::integer, "50", {}, ""},
        {"chba.max_chars_per_word", K::integer, "10", {}, ""},
        {"chba.word_dim", K::integer, "300", {}, ""},
        {"chba.char_dim", K::integer, "20", {}, ""},
        {"chba.cnn_filter_widths", K::size_list, "2,3,4", {}, ""},
        {"chba.cnn_filters_per_width", K::integer, "32", {}, ""},
        {"chba.highway_layers", K::integer, "1", {}, ""},
        {"chba.lstm_hidden", K::integer, "100", {}, ""},
        {"chba.attention_dim", K::integer, "100", {}, ""},
        {"chba.dense_sizes", K::size_list, "64", {}, ""},
        {"chba.dropout_embed", K::real, "0.5", {}, ""},
        {"chba.dropout_other", K::real, "0.33", {}, ""},
        {"chba.flood_level", K::real, "0.05", {}, ""},
        {"chba.epochs", K::integer, "30", {}, ""},
        {"chba.batch_size", K::integer, "32", {}, ""},
        {"chba.adadelta_rho", K::real, "0.95", {}, ""},
        {"chba.adadelta_eps", K::real, "1e-06", {}, ""},
        {"chba.adadelta_lr", K::real, "1", {}, ""},
        {"chba.embeddings", K::path, "", {}, "word-vector text file; empty means random init"},
        {"chba.trainable_embeddings", K::boolean, "true", {}, ""},
        {"chba.unk_policy", K::choice, "zero", {"zero", "random"}, ""},

        {"ablate.schedule", K::size_list, "", {}, "strictly decreasing feature dims"},
    };
    return schema;
}

inline const KeySpec* find_key(std::string_view key) {
    for (const auto& k : config_schema()) {
        if (k.key == key) return &k;
    }
    return nullptr;
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        if (comma == std::string_view::npos) comma = s.size();
        auto item = trim(s.substr(start, comma - start));
        if (!item.empty()) out.push_back(std::move(item));
        start = comma + 1;
    }
    return out;
}

inline bool parse_u64(std::string_view s, std::uint64_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && ec == std::errc() && p == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_bool(std::string_view s, bool& out) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return out = true, true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return out = false, true;
    return false;
}

inline std::vector<NgramSpec> parse_ngrams(std::string_view s) {
    std::vector<NgramSpec> out;
    for (const auto& item : split_list(s)) {
        const auto colon = item.find(':');
        const auto dash = item.find('-', colon == std::string::npos ? 0 : colon);
        if (colon == std::string::npos || dash == std::string::npos) {
            throw ConfigError("n-gram block '" + item + "' is not unit:min-max");
        }
        const auto unit = item.substr(0, colon);
        std::uint64_t lo = 0, hi = 0;
        if (!parse_u64(item.substr(colon + 1, dash - colon - 1), lo) || !parse_u64(item.substr(dash + 1), hi)) {
            throw ConfigError("n-gram block '" + item + "' has a bad range");
        }
        NgramSpec spec;
        if (unit == "word") {
            spec.unit = NgramUnit::word;
        } else if (unit == "char") {
            spec.unit = NgramUnit::character;
        } else {
            throw ConfigError("n-gram unit must be word or char, got '" + unit + "'");
        }
        spec.min_n = static_cast<int>(lo);
        spec.max_n = static_cast<int>(hi);
        spec.validate();
        out.push_back(spec);
    }
    if (out.empty()) throw ConfigError("features.ngrams must name at least one block");
    return out;
}

inline void check_value(const KeySpec& spec, const std::string& value) {
    auto bad = [&](const std::string& what) {
        throw ConfigError(spec.key + ": expected " + what + ", got '" + value + "'");
    };
    switch (spec.kind) {
        case ValueKind::boolean: {
            bool b;
            if (!parse_bool(value, b)) bad("true or false");
            break;
        }
        case ValueKind::integer: {
            std::uint64_t v;
            if (!parse_u64(value, v)) bad("a non-negative integer");
            break;
        }
        case ValueKind::real: {
            double v;
            if (!parse_double(value, v)) bad("a finite number");
            break;
        }
        case ValueKind::choice: {
            bool ok = false;
            for (const auto& c : spec.choices) ok = ok || c == value;
            if (!ok) {
                std::string all;
                for (const auto& c : spec.choices) all += (all.empty() ? "" : "|") + c;
                bad(all);
            }
            break;
        }
        case ValueKind::size_list: {
            for (const auto& item : split_list(value)) {
                std::uint64_t v;
                if (!parse_u64(item, v)) bad("a comma-separated list of integers");
            }
            break;
        }
        case ValueKind::ngram_list:
            parse_ngrams(value);
            break;
        case ValueKind::text:
        case ValueKind::path:
            break;
    }
}

}  // namespace detail

class RunConfig {
public:
    // Parses config text. `base_dir` anchors relative paths.
    static RunConfig parse(std::string_view text, const std::filesystem::path& base_dir = {},
                           const std::string& origin = "config") {
        RunConfig cfg;
        std::string section;
        std::size_t line_no = 0;
        std::istringstream in{std::string(text)};
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            const auto line = detail::trim(raw);
            if (line.empty() || line[0] == '#' || line[0] == ';') continue;
            const auto where = origin + ":" + std::to_string(line_no) + ": ";
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError(where + "unterminated section header");
                section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
            auto key = detail::trim(std::string_view(line).substr(0, eq));
            if (!section.empty()) key = section + "." + key;
            try {
                cfg.set(key, detail::trim(std::string_view(line).substr(eq + 1)), base_dir);
            } catch (const ConfigError& e) {
                throw ConfigError(where + e.what());
            }
        }
        return cfg;
    }

    static RunConfig load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), std::filesystem::path(path).parent_path(), path);
    }

    // Sets one key; `key=value` overrides from the command line go through here.
    void set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir = {}) {
        const auto* spec = find_key(key);
        if (!spec) throw ConfigError("unknown key '" + key + "'");
        detail::check_value(*spec, value);
        if (spec->kind == ValueKind::path && !value.empty()) {
            std::filesystem::path p(value);
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            values_[key] = p.lexically_normal().string();
        } else {
            values_[key] = value;
        }
    }

    void set_assignment(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
        set(detail::trim(std::string_view(assignment).substr(0, eq)),
            detail::trim(std::string_view(assignment).substr(eq + 1)));
    }

    bool is_set(const std::string& key) const { return values_.contains(key); }

    std::string get(const std::string& key) const {
        const auto* spec = find_key(key);
        if (!spec) throw ConfigError("unknown key '" + key + "'");
        auto it = values_.find(key);
        return it != values_.end() ? it->second : spec->default_value;
    }

    bool get_bool(const std::string& key) const {
        bool b = false;
        detail::parse_bool(get(key), b);
        return b;
    }

    std::uint64_t get_u64(const std::string& key) const {
        std::uint64_t v = 0;
        detail::parse_u64(get(key), v);
        return v;
    }

    std::size_t get_size(const std::string& key) const { return static_cast<std::size_t>(get_u64(key)); }

    double get_double(const std::string& key) const {
        double v = 0.0;
        detail::parse_double(get(key), v);
        return v;
    }

    std::vector<std::size_t> get_sizes(const std::string& key) const {
        std::vector<std::size_t> out;
        for (const auto& item : detail::split_list(get(key))) {
            std::uint64_t v = 0;
            detail::parse_u64(item, v);
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    }

    // Explicitly set keys, in key order.
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    // Serializes the given keys (their effective values) grouped by section.
    std::string to_text(const std::vector<std::string>& keys) const {
        std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
        for (const auto& key : keys) {
            const auto dot = key.find('.');
            sections[key.substr(0, dot)].emplace_back(key.substr(dot + 1), get(key));
        }
        std::string out;
        for (const auto& [name, entries] : sections) {
            if (!out.empty()) out += '\n';
            out += "[" + name + "]\n";
            for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
        }
        return out;
    }

    // Every schema key whose name starts with one of the prefixes.
    static std::vector<std::string> keys_with_prefix(const std::vector<std::string>& prefixes) {
        std::vector<std::string> out;
        for (const auto& k : config_schema()) {
            for (const auto& p : prefixes) {
                if (k.key.starts_with(p)) {
                    out.push_back(k.key);
                    break;
                }
            }
        }
        return out;
    }

    // ------------------------------------------------------ typed views

    NormalizeConfig normalize_config() const {
        NormalizeConfig n = NormalizeConfig::disabled();
        n.remove_urls = get_bool("normalize.remove_urls");
        n.remove_mentions = get_bool("normalize.remove_mentions");
        n.remove_emails = get_bool("normalize.remove_emails");
        n.remove_dates = get_bool("normalize.remove_dates");
        n.remove_numbers = get_bool("normalize.remove_numbers");
        n.remove_punctuation = get_bool("normalize.remove_punctuation");
        n.remove_latin = get_bool("normalize.remove_latin");
        n.remove_emoji = get_bool("normalize.remove_emoji");
        n.set_collapse_repeats(get_bool("normalize.collapse_repeats"));
        n.set_unify_map(unify_map());
        n.set_stopwords(stopwords());
        return n;
    }

    UnifyMap unify_map() const {
        if (!get_bool("normalize.unify")) return {};
        const auto path = get("normalize.unify_map");
        return path.empty() ? default_unify_map() : load_unify_map(path);
    }

    std::vector<std::string> stopwords() const {
        if (!get_bool("normalize.remove_stopwords")) return {};
        const auto path = get("normalize.stopwords");
        if (path.empty()) return {default_arabic_stopwords.begin(), default_arabic_stopwords.end()};
        return load_stopwords(path);
    }

    std::vector<NgramSpec> ngram_specs() const { return detail::parse_ngrams(get("features.ngrams")); }

    VectorizerOptions vectorizer_options() const {
        VectorizerOptions o;
        o.weighting = get("features.weighting") == "counts" ? Weighting::counts : Weighting::tfidf;
        o.score_rule = get("features.score_rule") == "sum" ? ScoreRule::sum : ScoreRule::max;
        return o;
    }

    TrainConfig svm_config() const {
        TrainConfig c;
        c.C = get_double("svm.C");
        c.epochs = static_cast<int>(get_u64("svm.epochs"));
        c.eta0 = get_double("svm.eta0");
        c.balance_classes = get_bool("svm.balance_classes");
        c.seed = get_u64("run.seed");
        c.validate();
        return c;
    }

    TrainConfig logreg_config() const {
        TrainConfig c = TrainConfig::logistic_defaults();
        c.C = get_double("logreg.C");
        c.epochs = static_cast<int>(get_u64("logreg.iterations"));
        c.eta0 = get_double("logreg.eta0");
        c.seed = get_u64("run.seed");
        c.validate();
        return c;
    }

    chba::ChbaConfig chba_config() const {
        chba::ChbaConfig c;
        c.max_words = get_size("chba.max_words");
        c.max_chars_per_word = get_size("chba.max_chars_per_word");
        c.word_dim = get_size("chba.word_dim");
        c.char_dim = get_size("chba.char_dim");
        c.cnn_filter_widths = get_sizes("chba.cnn_filter_widths");
        c.cnn_filters_per_width = get_size("chba.cnn_filters_per_width");
        c.highway_layers = get_size("chba.highway_layers");
        c.lstm_hidden = get_size("chba.lstm_hidden");
        c.attention_dim = get_size("chba.attention_dim");
        c.dense_sizes = get_sizes("chba.dense_sizes");
        c.dropout_embed = get_double("chba.dropout_embed");
        c.dropout_other = get_double("chba.dropout_other");
        c.flood_level = get_double("chba.flood_level");
        c.epochs = get_size("chba.epochs");
        c.batch_size = get_size("chba.batch_size");
        c.adadelta.rho = get_double("chba.adadelta_rho");
        c.adadelta.eps = get_double("chba.adadelta_eps");
        c.adadelta.lr = get_double("chba.adadelta_lr");
        c.seed = get_u64("run.seed");
        c.validate();
        return c;
    }

    chba::UnkPolicy unk_policy() const {
        return get("chba.unk_policy") == "random" ? chba::UnkPolicy::random : chba::UnkPolicy::zero;
    }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace offlang::cli
