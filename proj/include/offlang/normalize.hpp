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

// Message preprocessing.
//
// normalize() runs, in order:
//   1. removal rules, each replacing what it matches by a space:
//      urls, emails, mentions, dates, numbers, emoji, punctuation, latin
//   2. whitespace collapse (runs of Unicode spaces -> one ' ', trimmed)
//   3. character unification through the unify map
//   4. repeat collapse (runs of one character -> that character)
//   5. stop-word removal (whole tokens)
// and repeats the pass until the text stops changing, which makes the
// function idempotent for every configuration.
//
// Recognizer grammars (c = code point):
//   digit    := [0-9] | U+0660..U+0669 | U+06F0..U+06F9
//   url      := ("http://" | "https://" | "www.") [^space]*      (ASCII case-insensitive)
//   email    := [A-Za-z0-9._%+-]+ "@" label ("." label)* "." [A-Za-z]{2,}
//               label := [A-Za-z0-9-]+
//   mention  := "@" wordchar+      wordchar := letter | digit | "_"
//   date     := digit{1,4} sep digit{1,2} sep digit{1,4},  sep in {"/", "-", "."}, same sep twice
//   number   := digit+ ([.,U+066B,U+066C] digit+)*
//   emoji    := U+1F000..U+1FAFF | U+2600..U+27BF | U+2300..U+23FF | U+2B00..U+2BFF
//               | U+FE00..U+FE0F | U+200D | U+20E3 | U+E0020..U+E007F
//               | U+3030 | U+303D | U+3297 | U+3299
//   latin    := [A-Za-z] | U+00C0..U+024F except U+00D7, U+00F7
//   punct    := ASCII punctuation | U+00A1..U+00BF | U+00D7 | U+00F7
//               | Arabic punctuation (U+060C U+060D U+061B U+061E U+061F U+066A U+066D U+06D4
//                 U+FD3E U+FD3F) | U+2010..U+2027 | U+2030..U+205E | U+20A0..U+20CF
//               | U+2100..U+214F | U+2190..U+22FF | U+3000..U+303F (minus emoji above)
//               | U+FE30..U+FE4F | U+FF01..U+FF0F | U+FF1A..U+FF20
//               | format marks U+200B..U+200C U+200E..U+200F U+202A..U+202E U+2060..U+2069 U+FEFF

#pragma once

#include "offlang/default_stopwords.hpp"
#include "offlang/error.hpp"
#include "offlang/label.hpp"
#include "offlang/utf8.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace offlang {

namespace chars {

inline bool is_space(char32_t c) {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
           c == 0x205F || c == 0x3000;
}

inline bool is_digit(char32_t c) {
    return (c >= U'0' && c <= U'9') || (c >= 0x0660 && c <= 0x0669) || (c >= 0x06F0 && c <= 0x06F9);
}

inline bool is_ascii_alpha(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'); }

inline bool is_latin(char32_t c) {
    return is_ascii_alpha(c) || (c >= 0x00C0 && c <= 0x024F && c != 0x00D7 && c != 0x00F7);
}

inline bool is_arabic_punct(char32_t c) {
    switch (c) {
        case 0x060C: case 0x060D: case 0x061B: case 0x061E: case 0x061F:
        case 0x066A: case 0x066D: case 0x06D4: case 0xFD3E: case 0xFD3F:
            return true;
        default:
            return false;
    }
}

inline bool is_arabic_letter(char32_t c) {
    if (is_arabic_punct(c) || is_digit(c)) return false;
    if (c == 0x066B || c == 0x066C) return false;
    return (c >= 0x0600 && c <= 0x06FF) || (c >= 0x0750 && c <= 0x077F) ||
           (c >= 0x08A0 && c <= 0x08FF) || (c >= 0xFB50 && c <= 0xFDFF && c != 0xFD3E && c != 0xFD3F) ||
           (c >= 0xFE70 && c <= 0xFEFC);
}

inline bool is_word_char(char32_t c) {
    return is_latin(c) || is_digit(c) || c == U'_' || is_arabic_letter(c);
}

inline bool is_emoji(char32_t c) {
    return (c >= 0x1F000 && c <= 0x1FAFF) || (c >= 0x2600 && c <= 0x27BF) ||
           (c >= 0x2300 && c <= 0x23FF) || (c >= 0x2B00 && c <= 0x2BFF) ||
           (c >= 0xFE00 && c <= 0xFE0F) || c == 0x200D || c == 0x20E3 ||
           (c >= 0xE0020 && c <= 0xE007F) || c == 0x3030 || c == 0x303D || c == 0x3297 ||
           c == 0x3299;
}

inline bool is_punct(char32_t c) {
    if (c < 0x80) return c > 0x20 && c < 0x7F && std::ispunct(static_cast<int>(c));
    if (is_emoji(c)) return false;
    return (c >= 0x00A1 && c <= 0x00BF) || c == 0x00D7 || c == 0x00F7 || is_arabic_punct(c) ||
           (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
           (c >= 0x20A0 && c <= 0x20CF) || (c >= 0x2100 && c <= 0x214F) ||
           (c >= 0x2190 && c <= 0x22FF) || (c >= 0x3000 && c <= 0x303F && c != 0x3000) ||
           (c >= 0xFE30 && c <= 0xFE4F) || (c >= 0xFF01 && c <= 0xFF0F) ||
           (c >= 0xFF1A && c <= 0xFF20) || c == 0x200B || c == 0x200C || c == 0x200E ||
           c == 0x200F || (c >= 0x202A && c <= 0x202E) || (c >= 0x2060 && c <= 0x2069) ||
           c == 0xFEFF;
}

}  // namespace chars

using UnifyMap = std::map<char32_t, char32_t>;

inline UnifyMap default_unify_map() {
    return {{U'أ', U'ا'}, {U'إ', U'ا'}, {U'آ', U'ا'},
            {U'ٱ', U'ا'}, {U'ى', U'ي'}};
}

inline std::u32string unify_characters(std::u32string text, const UnifyMap& map) {
    for (auto& c : text) {
        if (auto it = map.find(c); it != map.end()) c = it->second;
    }
    return text;
}

inline std::string unify_characters(std::string_view text, const UnifyMap& map) {
    return utf8::encode(unify_characters(utf8::decode(text), map));
}

inline std::u32string collapse_repeats(std::u32string_view text) {
    std::u32string out;
    out.reserve(text.size());
    for (char32_t c : text) {
        if (out.empty() || out.back() != c) out.push_back(c);
    }
    return out;
}

inline std::u32string collapse_whitespace(std::u32string_view text) {
    std::u32string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char32_t c : text) {
        if (chars::is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(U' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

inline std::string collapse_whitespace(std::string_view text) {
    return utf8::encode(collapse_whitespace(utf8::decode(text)));
}

class NormalizeConfig {
public:
    bool remove_urls = true;
    bool remove_mentions = true;
    bool remove_emails = true;
    bool remove_dates = true;
    bool remove_numbers = true;
    bool remove_punctuation = true;
    bool remove_latin = true;
    bool remove_emoji = true;
    bool collapse_repeats = true;

    // Every rule on, the bundled unify table and stop-word list.
    static NormalizeConfig defaults() {
        NormalizeConfig cfg;
        cfg.set_unify_map(default_unify_map());
        std::vector<std::string> words(default_arabic_stopwords.begin(), default_arabic_stopwords.end());
        cfg.set_stopwords(words);
        return cfg;
    }

    // No rule, no unification, no stop words: only whitespace collapse remains.
    static NormalizeConfig disabled() {
        NormalizeConfig cfg;
        cfg.remove_urls = cfg.remove_mentions = cfg.remove_emails = cfg.remove_dates = false;
        cfg.remove_numbers = cfg.remove_punctuation = cfg.remove_latin = cfg.remove_emoji = false;
        cfg.collapse_repeats = false;
        return cfg;
    }

    const UnifyMap& unify_map() const noexcept { return unify_; }
    const std::set<std::u32string>& stopwords() const noexcept { return stopwords_; }

    // The map is closed under composition so that a single lookup reaches
    // the final target (a->b, b->c stores a->c). Cycles are rejected.
    void set_unify_map(const UnifyMap& map) {
        UnifyMap closed;
        for (const auto& [src, dst] : map) {
            char32_t target = dst;
            for (std::size_t hops = 0;; ++hops) {
                auto it = map.find(target);
                if (it == map.end() || it->second == target) break;
                if (hops > map.size()) throw ConfigError("unify map contains a cycle");
                target = it->second;
            }
            if (target != src) closed.emplace(src, target);
        }
        unify_ = std::move(closed);
        canonicalize_stopwords();
    }

    // Entries are stored in canonical form (whitespace-collapsed, unified and,
    // if enabled, repeat-collapsed) so that they are fixed points of the
    // token pipeline. Multi-token entries are dropped.
    void set_stopwords(const std::vector<std::string>& words) {
        raw_stopwords_.clear();
        for (const auto& w : words) raw_stopwords_.push_back(utf8::decode(w));
        canonicalize_stopwords();
    }

    void set_collapse_repeats(bool on) {
        collapse_repeats = on;
        canonicalize_stopwords();
    }

    std::u32string canonical_token(std::u32string token) const {
        token = unify_characters(std::move(token), unify_);
        if (collapse_repeats) token = offlang::collapse_repeats(token);
        return token;
    }

private:
    void canonicalize_stopwords() {
        stopwords_.clear();
        for (const auto& w : raw_stopwords_) {
            auto t = collapse_whitespace(w);
            if (t.empty() || t.find(U' ') != std::u32string::npos) continue;
            stopwords_.insert(canonical_token(std::move(t)));
        }
    }

    UnifyMap unify_;
    std::vector<std::u32string> raw_stopwords_;
    std::set<std::u32string> stopwords_;
};

namespace detail {

using Mask = std::vector<bool>;

inline char32_t ascii_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

inline bool starts_with_ci(std::u32string_view s, std::size_t at, std::u32string_view prefix) {
    if (at + prefix.size() > s.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
        if (ascii_lower(s[at + k]) != prefix[k]) return false;
    }
    return true;
}

inline void mark_urls(std::u32string_view s, Mask& m) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (m[i]) continue;
        if (starts_with_ci(s, i, U"http://") || starts_with_ci(s, i, U"https://") ||
            starts_with_ci(s, i, U"www.")) {
            std::size_t j = i;
            while (j < s.size() && !chars::is_space(s[j])) m[j++] = true;
            i = j;
        }
    }
}

inline bool is_email_local(char32_t c) {
    return chars::is_ascii_alpha(c) || (c >= U'0' && c <= U'9') || c == U'.' || c == U'_' ||
           c == U'%' || c == U'+' || c == U'-';
}

inline bool is_domain_char(char32_t c) {
    return chars::is_ascii_alpha(c) || (c >= U'0' && c <= U'9') || c == U'-' || c == U'.';
}

// Returns the end of a valid domain starting at `from`, or `from` if none.
inline std::size_t match_domain(std::u32string_view s, std::size_t from) {
    std::size_t end = from;
    while (end < s.size() && is_domain_char(s[end])) ++end;
    while (end > from && s[end - 1] == U'.') --end;
    // Walk labels; the last one must be >= 2 ASCII letters and there must be at least two.
    std::size_t labels = 0;
    std::size_t last_start = from;
    for (std::size_t k = from; k <= end; ++k) {
        if (k == end || s[k] == U'.') {
            if (k == last_start) return from;  // empty label
            ++labels;
            if (k < end) last_start = k + 1;
        }
    }
    if (labels < 2 || end - last_start < 2) return from;
    for (std::size_t k = last_start; k < end; ++k) {
        if (!chars::is_ascii_alpha(s[k])) return from;
    }
    return end;
}

inline void mark_emails(std::u32string_view s, Mask& m) {
    for (std::size_t at = 0; at < s.size(); ++at) {
        if (s[at] != U'@' || m[at]) continue;
        std::size_t left = at;
        while (left > 0 && !m[left - 1] && is_email_local(s[left - 1])) --left;
        if (left == at) continue;
        std::size_t right = match_domain(s, at + 1);
        if (right == at + 1) continue;
        for (std::size_t k = left; k < right; ++k) m[k] = true;
        at = right - 1;
    }
}

inline void mark_mentions(std::u32string_view s, Mask& m) {
    for (std::size_t at = 0; at < s.size(); ++at) {
        if (s[at] != U'@' || m[at]) continue;
        std::size_t j = at + 1;
        while (j < s.size() && !m[j] && chars::is_word_char(s[j])) ++j;
        if (j == at + 1) continue;
        for (std::size_t k = at; k < j; ++k) m[k] = true;
        at = j - 1;
    }
}

inline std::size_t digit_run(std::u32string_view s, std::size_t from) {
    std::size_t j = from;
    while (j < s.size() && chars::is_digit(s[j])) ++j;
    return j - from;
}

inline void mark_dates(std::u32string_view s, Mask& m) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (m[i] || !chars::is_digit(s[i]) || (i > 0 && chars::is_digit(s[i - 1]))) continue;
        const std::size_t a = digit_run(s, i);
        if (a > 4) continue;
        std::size_t p = i + a;
        if (p >= s.size()) continue;
        const char32_t sep = s[p];
        if (sep != U'/' && sep != U'-' && sep != U'.') continue;
        const std::size_t b = digit_run(s, p + 1);
        if (b < 1 || b > 2) continue;
        p += 1 + b;
        if (p >= s.size() || s[p] != sep) continue;
        const std::size_t c = digit_run(s, p + 1);
        if (c < 1 || c > 4) continue;
        const std::size_t end = p + 1 + c;
        for (std::size_t k = i; k < end; ++k) m[k] = true;
        i = end - 1;
    }
}

inline bool is_number_sep(char32_t c) { return c == U'.' || c == U',' || c == 0x066B || c == 0x066C; }

inline void mark_numbers(std::u32string_view s, Mask& m) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (m[i] || !chars::is_digit(s[i])) continue;
        std::size_t j = i;
        while (true) {
            j += digit_run(s, j);
            if (j + 1 < s.size() && is_number_sep(s[j]) && chars::is_digit(s[j + 1])) {
                ++j;
                continue;
            }
            break;
        }
        for (std::size_t k = i; k < j; ++k) m[k] = true;
        i = j - 1;
    }
}

template <class Pred>
void mark_chars(std::u32string_view s, Mask& m, Pred pred) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (pred(s[i])) m[i] = true;
    }
}

inline std::u32string apply_mask(std::u32string_view s, const Mask& m) {
    std::u32string out(s);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (m[i]) out[i] = U' ';
    }
    return out;
}

template <class Marker>
void run_rule(bool enabled, std::u32string& s, Marker marker) {
    if (!enabled) return;
    Mask m(s.size(), false);
    marker(std::u32string_view(s), m);
    s = apply_mask(s, m);
}

inline std::u32string normalize_pass(std::u32string s, const NormalizeConfig& cfg) {
    run_rule(cfg.remove_urls, s, mark_urls);
    run_rule(cfg.remove_emails, s, mark_emails);
    run_rule(cfg.remove_mentions, s, mark_mentions);
    run_rule(cfg.remove_dates, s, mark_dates);
    run_rule(cfg.remove_numbers, s, mark_numbers);
    run_rule(cfg.remove_emoji, s, [](std::u32string_view v, Mask& m) { mark_chars(v, m, chars::is_emoji); });
    run_rule(cfg.remove_punctuation, s, [](std::u32string_view v, Mask& m) { mark_chars(v, m, chars::is_punct); });
    run_rule(cfg.remove_latin, s, [](std::u32string_view v, Mask& m) { mark_chars(v, m, chars::is_latin); });

    s = collapse_whitespace(s);
    std::u32string out;
    out.reserve(s.size());
    std::size_t start = 0;
    while (start < s.size()) {
        std::size_t end = s.find(U' ', start);
        if (end == std::u32string::npos) end = s.size();
        auto token = cfg.canonical_token(s.substr(start, end - start));
        if (!cfg.stopwords().contains(token)) {
            if (!out.empty()) out.push_back(U' ');
            out += token;
        }
        start = end + 1;
    }
    return out;
}

}  // namespace detail

inline std::u32string normalize(std::u32string text, const NormalizeConfig& cfg) {
    // Each changing pass strictly lowers (non-space count, length), so this terminates.
    auto current = detail::normalize_pass(std::move(text), cfg);
    while (true) {
        auto next = detail::normalize_pass(current, cfg);
        if (next == current) return current;
        current = std::move(next);
    }
}

inline std::string normalize(std::string_view text, const NormalizeConfig& cfg) {
    return utf8::encode(normalize(utf8::decode(text), cfg));
}

// L-HSAB carries Hate / Abusive / Normal; the first two become OFF.
inline Label merge_lhsab_label(std::string_view raw) {
    auto b = raw.find_first_not_of(" \t\r\n");
    auto e = raw.find_last_not_of(" \t\r\n");
    std::string key;
    if (b != std::string_view::npos) {
        for (char c : raw.substr(b, e - b + 1)) {
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (key == "hate" || key == "abusive") return Label::OFF;
    if (key == "normal") return Label::NOT;
    throw UnknownLabel(std::string(raw));
}

// One surface form per line; blank lines are skipped.
inline std::vector<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto w = collapse_whitespace(line);
        if (!w.empty()) out.push_back(std::move(w));
    }
    return out;
}

// Two-column TSV of single code points: source<TAB>target.
inline UnifyMap load_unify_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path);
    UnifyMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw MalformedRow(line_no, "expected two tab-separated columns");
        }
        auto src = utf8::decode(std::string_view(line).substr(0, tab));
        auto dst = utf8::decode(std::string_view(line).substr(tab + 1));
        if (src.size() != 1 || dst.size() != 1) {
            throw MalformedRow(line_no, "each column must hold exactly one character");
        }
        auto [it, inserted] = map.emplace(src[0], dst[0]);
        if (!inserted && it->second != dst[0]) {
            throw MalformedRow(line_no, "character mapped to two different targets");
        }
    }
    return map;
}

}  // namespace offlang
