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

// Dataset files are UTF-8 TSV with columns id, text and an optional label.
// Inside a field, backslash, tab, CR and LF are escaped as \\, \t, \r, \n so
// any Document list survives save_tsv -> load_tsv unchanged.

#pragma once

#include "offlang/error.hpp"
#include "offlang/label.hpp"
#include "offlang/normalize.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace offlang {

struct Document {
    std::string id;
    std::string text;
    std::optional<Label> label;

    friend bool operator==(const Document&, const Document&) = default;
};

struct CorpusSplit {
    std::vector<Document> train;
    std::vector<Document> validation;
    std::vector<Document> test;
};

// How the third TSV column is read.
enum class LabelScheme {
    task,    // OFF / NOT
    lhsab,   // Hate / Abusive / Normal, merged to OFF / NOT
};

namespace detail {

inline std::string escape_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline std::string unescape_field(std::string_view s, std::size_t line_no) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\') {
            out.push_back(s[i]);
            continue;
        }
        if (i + 1 == s.size()) throw MalformedRow(line_no, "dangling escape");
        switch (s[++i]) {
            case '\\': out.push_back('\\'); break;
            case 't': out.push_back('\t'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            default: throw MalformedRow(line_no, "unknown escape sequence");
        }
    }
    return out;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

}  // namespace detail

inline std::vector<Document> parse_tsv(std::istream& in, LabelScheme scheme = LabelScheme::task) {
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_tabs(line);
        if (fields.size() < 2) throw MalformedRow(line_no, "expected id<TAB>text[<TAB>label]");
        if (fields.size() > 3) throw MalformedRow(line_no, "too many fields");
        Document doc;
        doc.id = detail::unescape_field(fields[0], line_no);
        doc.text = detail::unescape_field(fields[1], line_no);
        if (fields.size() == 3 && !fields[2].empty()) {
            const std::string raw(fields[2]);
            if (scheme == LabelScheme::lhsab) {
                try {
                    doc.label = merge_lhsab_label(raw);
                } catch (const UnknownLabel&) {
                    throw UnknownLabel(line_no, raw);
                }
            } else {
                doc.label = parse_label(raw);
                if (!doc.label) throw UnknownLabel(line_no, raw);
            }
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

inline std::vector<Document> load_tsv(const std::string& path, LabelScheme scheme = LabelScheme::task) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path);
    return parse_tsv(in, scheme);
}

inline void write_tsv(std::ostream& out, const std::vector<Document>& docs) {
    for (const auto& d : docs) {
        out << detail::escape_field(d.id) << '\t' << detail::escape_field(d.text);
        if (d.label) out << '\t' << to_string(*d.label);
        out << '\n';
    }
}

inline void save_tsv(const std::string& path, const std::vector<Document>& docs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path);
    write_tsv(out, docs);
    if (!out) throw IoError(path);
}

// Splits normalized text on single spaces. Empty tokens are dropped, so
// un-normalized input with repeated spaces is also handled.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(' ', start);
        if (end == std::string_view::npos) end = text.size();
        if (end > start) tokens.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    return tokens;
}

struct LabelCounts {
    std::size_t off = 0;
    std::size_t not_off = 0;
    std::size_t unlabeled = 0;

    std::size_t total() const noexcept { return off + not_off + unlabeled; }
    friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

inline LabelCounts count_labels(const std::vector<Document>& docs) {
    LabelCounts c;
    for (const auto& d : docs) {
        if (!d.label) ++c.unlabeled;
        else if (*d.label == Label::OFF) ++c.off;
        else ++c.not_off;
    }
    return c;
}

// An external training source. `off_only` drops everything not labeled OFF
// at load time, whatever the file contains.
struct ExternalSource {
    std::string name;
    std::vector<Document> docs;
    bool off_only = false;
};

struct AssembleOptions {
    // Fraction of the task's standard train kept (seeded sample, order preserved).
    double train_fraction = 1.0;
    std::uint64_t seed = 0;
};

struct SourceCount {
    std::string name;
    LabelCounts counts;
};

struct AssemblyReport {
    std::vector<SourceCount> sources;  // task first, then externals in order
    LabelCounts train;
    LabelCounts validation;
    LabelCounts test;
};

struct AssembledCorpus {
    CorpusSplit split;
    AssemblyReport report;
};

inline std::vector<Document> filter_off_only(std::vector<Document> docs) {
    std::erase_if(docs, [](const Document& d) { return d.label != Label::OFF; });
    return docs;
}

// Keeps round(fraction * n) documents chosen by a seeded shuffle, in original order.
inline std::vector<Document> sample_fraction(const std::vector<Document>& docs, double fraction,
                                             std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0) throw ConfigError("train_fraction must be in [0, 1]");
    if (fraction == 1.0) return docs;
    const auto keep = static_cast<std::size_t>(fraction * static_cast<double>(docs.size()) + 0.5);
    std::vector<std::size_t> order(docs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng() % i]);
    }
    order.resize(keep);
    std::sort(order.begin(), order.end());
    std::vector<Document> out;
    out.reserve(keep);
    for (auto i : order) out.push_back(docs[i]);
    return out;
}

// Train = (sampled) task train followed by each external source. External ids
// get a "<source>:" prefix; any id still colliding gets a "#<k>" suffix.
// Validation and test always come from the task split unchanged.
inline AssembledCorpus assemble_extended_train(const CorpusSplit& task,
                                               const std::vector<ExternalSource>& externals,
                                               const AssembleOptions& opts = {}) {
    AssembledCorpus result;
    auto& split = result.split;
    split.validation = task.validation;
    split.test = task.test;
    split.train = sample_fraction(task.train, opts.train_fraction, opts.seed);
    result.report.sources.push_back({"task", count_labels(split.train)});

    std::set<std::string> used;
    for (const auto* part : {&split.train, &split.validation, &split.test}) {
        for (const auto& d : *part) used.insert(d.id);
    }

    for (const auto& src : externals) {
        auto docs = src.off_only ? filter_off_only(src.docs) : src.docs;
        if (docs.empty()) throw EmptySource(src.name);
        for (auto& d : docs) {
            std::string id = src.name + ":" + d.id;
            if (used.contains(id)) {
                for (std::size_t k = 2;; ++k) {
                    auto candidate = id + "#" + std::to_string(k);
                    if (!used.contains(candidate)) {
                        id = std::move(candidate);
                        break;
                    }
                }
            }
            used.insert(id);
            d.id = std::move(id);
        }
        result.report.sources.push_back({src.name, count_labels(docs)});
        split.train.insert(split.train.end(), std::make_move_iterator(docs.begin()),
                           std::make_move_iterator(docs.end()));
    }
    result.report.train = count_labels(split.train);
    result.report.validation = count_labels(split.validation);
    result.report.test = count_labels(split.test);
    return result;
}

inline std::string format_report(const AssemblyReport& r) {
    std::ostringstream os;
    auto line = [&os](const std::string& name, const LabelCounts& c) {
        os << name << "\ttotal=" << c.total() << "\tOFF=" << c.off << "\tNOT=" << c.not_off
           << "\tunlabeled=" << c.unlabeled << '\n';
    };
    for (const auto& s : r.sources) line("source:" + s.name, s.counts);
    line("train", r.train);
    line("validation", r.validation);
    line("test", r.test);
    return os.str();
}

// Groups of document ids sharing identical text, for duplicate reporting.
inline std::vector<std::vector<std::string>> find_duplicate_texts(const std::vector<Document>& docs) {
    std::map<std::string, std::vector<std::string>> by_text;
    for (const auto& d : docs) by_text[d.text].push_back(d.id);
    std::vector<std::vector<std::string>> groups;
    for (auto& [text, ids] : by_text) {
        if (ids.size() > 1) groups.push_back(std::move(ids));
    }
    return groups;
}

inline bool splits_disjoint(const CorpusSplit& s) {
    std::set<std::string> seen;
    for (const auto* part : {&s.train, &s.validation, &s.test}) {
        for (const auto& d : *part) {
            if (!seen.insert(d.id).second) return false;
        }
    }
    return true;
}

inline std::vector<Document> normalize_documents(std::vector<Document> docs, const NormalizeConfig& cfg) {
    for (auto& d : docs) d.text = normalize(std::string_view(d.text), cfg);
    return docs;
}

}  // namespace offlang
