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

// A trained network together with the vocabularies that encode its input.
//
// Checkpoint layout (little-endian), version 1:
//   "OLCH" u32 version
//   config: u64 max_words, max_chars_per_word, word_dim, char_dim,
//           u32 n + u64[n] cnn_filter_widths, u64 cnn_filters_per_width,
//           highway_layers, lstm_hidden, attention_dim,
//           u32 n + u64[n] dense_sizes, f64 dropout_embed, dropout_other,
//           flood_level, u64 epochs, batch_size, f64 rho, eps, lr, u64 seed
//   vocab:  u32 n + str[n] word tokens, u32 n + str[n] char tokens
//   params: u32 count, then per parameter: str name, u32 rank, u64[rank]
//           shape, u8 trainable, u32 n + u64[n] frozen rows,
//           f32[size] values (raw IEEE bits)

#pragma once

#include "offlang/binary_io.hpp"
#include "offlang/chba/trainer.hpp"
#include "offlang/corpus.hpp"

#include <optional>
#include <string>
#include <vector>

namespace offlang::chba {

struct ChbaModel {
    TextEncoder encoder;
    Network<float> net;

    const ChbaConfig& config() const { return net.config(); }

    Label predict(const std::string& text) const { return net.predict(encoder.encode(text)); }
    double prob_off(const std::string& text) const { return net.prob_off(encoder.encode(text)); }
    std::array<float, 2> logits(const std::string& text) const { return net.logits(encoder.encode(text)); }

    std::string to_bytes() const {
        bin::Writer w;
        w.put_bytes("OLCH");
        w.put<std::uint32_t>(1);
        const auto& c = config();
        auto put_list = [&](const std::vector<std::size_t>& v) {
            w.put(static_cast<std::uint32_t>(v.size()));
            for (auto x : v) w.put(static_cast<std::uint64_t>(x));
        };
        for (auto v : {c.max_words, c.max_chars_per_word, c.word_dim, c.char_dim}) w.put(static_cast<std::uint64_t>(v));
        put_list(c.cnn_filter_widths);
        for (auto v : {c.cnn_filters_per_width, c.highway_layers, c.lstm_hidden, c.attention_dim}) {
            w.put(static_cast<std::uint64_t>(v));
        }
        put_list(c.dense_sizes);
        for (double v : {c.dropout_embed, c.dropout_other, c.flood_level}) w.put_f64(v);
        w.put(static_cast<std::uint64_t>(c.epochs));
        w.put(static_cast<std::uint64_t>(c.batch_size));
        for (double v : {c.adadelta.rho, c.adadelta.eps, c.adadelta.lr}) w.put_f64(v);
        w.put(static_cast<std::uint64_t>(c.seed));
        for (const auto* vocab : {&encoder.words(), &encoder.chars()}) {
            w.put(static_cast<std::uint32_t>(vocab->size()));
            for (const auto& tok : vocab->tokens()) w.put_str(tok);
        }
        const auto& ps = net.params();
        w.put(static_cast<std::uint32_t>(ps.size()));
        for (const auto& p : ps) {
            w.put_str(p.name);
            w.put(static_cast<std::uint32_t>(p.value.rank()));
            for (auto d : p.value.shape) w.put(static_cast<std::uint64_t>(d));
            w.put(static_cast<std::uint8_t>(p.trainable ? 1 : 0));
            put_list(p.frozen_rows);
            for (float v : p.value.data) w.put_f32(v);
        }
        return w.bytes();
    }

    static ChbaModel from_bytes(bin::Reader& r) {
        r.expect_magic("OLCH");
        const auto version = r.get<std::uint32_t>();
        if (version != 1) r.fail("unsupported checkpoint version " + std::to_string(version));
        auto get_size = [&] { return static_cast<std::size_t>(r.get<std::uint64_t>()); };
        auto get_list = [&] {
            std::vector<std::size_t> v(r.get<std::uint32_t>());
            for (auto& x : v) x = get_size();
            return v;
        };
        ChbaConfig c;
        c.max_words = get_size();
        c.max_chars_per_word = get_size();
        c.word_dim = get_size();
        c.char_dim = get_size();
        c.cnn_filter_widths = get_list();
        c.cnn_filters_per_width = get_size();
        c.highway_layers = get_size();
        c.lstm_hidden = get_size();
        c.attention_dim = get_size();
        c.dense_sizes = get_list();
        c.dropout_embed = r.get_f64();
        c.dropout_other = r.get_f64();
        c.flood_level = r.get_f64();
        c.epochs = get_size();
        c.batch_size = get_size();
        c.adadelta.rho = r.get_f64();
        c.adadelta.eps = r.get_f64();
        c.adadelta.lr = r.get_f64();
        c.seed = r.get<std::uint64_t>();
        std::vector<std::string> vocabs[2];
        for (auto& tokens : vocabs) {
            tokens.resize(r.get<std::uint32_t>());
            for (auto& t : tokens) t = r.get_str();
            if (tokens.size() < 2) r.fail("vocabulary without reserved entries");
        }
        ChbaModel m;
        m.encoder = TextEncoder(Vocabulary::from_tokens(vocabs[0]), Vocabulary::from_tokens(vocabs[1]), c.max_words,
                                c.max_chars_per_word);
        if (m.encoder.words().size() != vocabs[0].size() || m.encoder.chars().size() != vocabs[1].size()) {
            r.fail("vocabulary contains duplicate tokens");
        }
        try {
            m.net = Network<float>(c, vocabs[1].size(), vocabs[0].size());
        } catch (const ConfigError& e) {
            r.fail(std::string("invalid stored configuration: ") + e.what());
        }
        auto params = m.net.parameters();
        if (r.get<std::uint32_t>() != params.size()) r.fail("parameter count does not match configuration");
        for (auto* p : params) {
            if (r.get_str() != p->name) r.fail("unexpected parameter, wanted " + p->name);
            std::vector<std::size_t> shape(r.get<std::uint32_t>());
            for (auto& d : shape) d = get_size();
            if (shape != p->value.shape) r.fail("shape mismatch for " + p->name);
            p->trainable = r.get<std::uint8_t>() != 0;
            p->frozen_rows = get_list();
            for (auto& v : p->value.data) v = r.get_f32();
        }
        if (!r.at_end()) r.fail("trailing bytes");
        return m;
    }

    void save(const std::string& path) const {
        bin::Writer w;
        w.put_bytes(to_bytes());
        w.save(path);
    }

    static ChbaModel load(const std::string& path) {
        auto r = bin::Reader::from_file(path);
        return from_bytes(r);
    }
};

struct ChbaFitResult {
    ChbaModel model;
    std::vector<EpochLog> log;
    std::size_t best_epoch = 0;
    double best_val_macro_f1 = 0.0;
};

inline std::vector<std::string> texts_of(const std::vector<Document>& docs) {
    std::vector<std::string> out;
    for (const auto& d : docs) out.push_back(d.text);
    return out;
}

inline std::vector<Label> labels_of(const std::vector<Document>& docs) {
    std::vector<Label> out;
    for (const auto& d : docs) {
        if (!d.label) throw DataError("document '" + d.id + "' has no label");
        out.push_back(*d.label);
    }
    return out;
}

// Builds vocabularies from the training texts (or the embedding file),
// initializes the output bias from the training OFF rate and trains.
inline ChbaFitResult fit_chba(const std::vector<Document>& train_docs, const std::vector<Document>& val_docs,
                              const ChbaConfig& cfg, std::optional<EmbeddingTable> embeddings = std::nullopt,
                              const EpochCallback& on_epoch = {}) {
    cfg.validate();
    if (train_docs.empty() || val_docs.empty()) throw EmptyCorpus();
    const auto train_texts = texts_of(train_docs);
    const auto train_y = labels_of(train_docs);
    const auto val_y = labels_of(val_docs);
    const auto counts = count_labels(train_docs);
    if (counts.off == 0 || counts.not_off == 0) throw SingleClassCorpus();
    const double p_off = static_cast<double>(counts.off) / static_cast<double>(counts.off + counts.not_off);

    EmbeddingTable table = embeddings ? std::move(*embeddings)
                                      : EmbeddingTable::random(build_word_vocabulary(train_texts), cfg.word_dim,
                                                               cfg.seed + 1);
    const auto chars = build_char_vocabulary(train_texts);
    ChbaModel model;
    model.encoder = TextEncoder(table.vocab, chars, cfg.max_words, cfg.max_chars_per_word);
    auto net = Network<float>::build(cfg, chars.size(), table, p_off);
    auto outcome = train(std::move(net), model.encoder.encode_all(train_texts), train_y,
                         model.encoder.encode_all(texts_of(val_docs)), val_y, on_epoch);
    model.net = std::move(outcome.best);
    return {std::move(model), std::move(outcome.log), outcome.best_epoch, outcome.best_val_macro_f1};
}

}  // namespace offlang::chba
