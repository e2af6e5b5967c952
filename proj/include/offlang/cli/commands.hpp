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

// The five pipeline commands. Each one throws offlang::Error subclasses on
// failure; run_cli (cli/app.hpp) turns those into exit codes.
//
// A model directory written by `train` holds:
//   run.cfg         normalization, feature and model settings used
//   stopwords.txt   copy of the stop-word list (when stop words are removed)
//   unify_map.tsv   copy of the unification table (when unification is on)
//   vectorizer.bin  + linear.bin   for model.kind = svm or logreg
//   chba.ckpt                      for model.kind = chba
//   train_log.csv   per-epoch training log
//   splits.txt      per-source and per-split label counts
//   val_report.txt, val_report.csv

#pragma once

#include "offlang/ablation.hpp"
#include "offlang/chba.hpp"
#include "offlang/cli/run_config.hpp"
#include "offlang/corpus.hpp"
#include "offlang/eval.hpp"
#include "offlang/linear_model.hpp"
#include "offlang/normalize.hpp"
#include "offlang/tfidf.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace offlang::cli {

namespace fs = std::filesystem;

namespace detail {

inline std::string shortest(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string());
    out << content;
    if (!out) throw IoError(path.string());
}

inline std::vector<Document> normalized(std::vector<Document> docs, const NormalizeConfig& cfg) {
    for (auto& d : docs) d.text = normalize(d.text, cfg);
    return docs;
}

inline std::vector<std::string> texts(const std::vector<Document>& docs) {
    std::vector<std::string> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(d.text);
    return out;
}

inline std::vector<Label> gold_labels(const std::vector<Document>& docs) {
    std::vector<Label> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        if (!d.label) throw DataError("gold document '" + d.id + "' has no label");
        out.push_back(*d.label);
    }
    return out;
}

inline std::string required_input(const RunConfig& cfg, const std::string& key) {
    const auto path = cfg.get(key);
    if (path.empty()) throw ConfigError(key + " is not set");
    if (!fs::is_regular_file(path)) throw ConfigError(key + " points to a missing file: " + path);
    return path;
}

inline std::string optional_input(const RunConfig& cfg, const std::string& key) {
    const auto path = cfg.get(key);
    if (!path.empty() && !fs::is_regular_file(path)) {
        throw ConfigError(key + " points to a missing file: " + path);
    }
    return path;
}

inline std::string format_unify_map(const UnifyMap& map) {
    std::string out;
    for (const auto& [src, dst] : map) {
        out += utf8::encode(std::u32string(1, src)) + "\t" + utf8::encode(std::u32string(1, dst)) + "\n";
    }
    return out;
}

}  // namespace detail

// ------------------------------------------------------------- preprocess

// Normalizes the text column of a TSV file; ids and labels pass through.
inline std::size_t cmd_preprocess(const std::string& in_tsv, const std::string& out_tsv, const RunConfig& cfg,
                                  LabelScheme scheme = LabelScheme::task) {
    const auto docs = detail::normalized(load_tsv(in_tsv, scheme), cfg.normalize_config());
    save_tsv(out_tsv, docs);
    return docs.size();
}

// ------------------------------------------------------------------ data

// Loads the configured sources and assembles the training split.
inline AssembledCorpus load_corpus(const RunConfig& cfg, bool need_validation = true) {
    CorpusSplit task;
    task.train = load_tsv(detail::required_input(cfg, "data.train"));
    if (need_validation) task.validation = load_tsv(detail::required_input(cfg, "data.validation"));
    if (const auto test = detail::optional_input(cfg, "data.test"); !test.empty()) task.test = load_tsv(test);

    std::vector<ExternalSource> externals;
    if (const auto p = detail::optional_input(cfg, "data.lhsab"); !p.empty()) {
        externals.push_back({"lhsab", load_tsv(p, LabelScheme::lhsab), false});
    }
    if (const auto p = detail::optional_input(cfg, "data.widebot"); !p.empty()) {
        externals.push_back({"widebot", load_tsv(p), true});
    }
    AssembleOptions opts;
    opts.train_fraction = cfg.get_double("data.train_fraction");
    opts.seed = cfg.get_u64("run.seed");
    auto corpus = assemble_extended_train(task, externals, opts);
    if (corpus.split.train.empty()) throw EmptyCorpus();
    if (need_validation && corpus.split.validation.empty()) throw EmptyCorpus();
    return corpus;
}

// ----------------------------------------------------------------- models

// A model directory loaded back into memory.
struct LoadedModel {
    std::string kind;
    NormalizeConfig normalize;
    TfidfVectorizer vectorizer;
    LinearModel linear;
    std::optional<chba::ChbaModel> chba;

    // Label for an already normalized text.
    Label predict_normalized(const std::string& text) const {
        if (chba) return chba->predict(text);
        return linear.predict(vectorizer.transform(text)).label;
    }

    Label predict(const std::string& raw_text) const { return predict_normalized(offlang::normalize(raw_text, normalize)); }

    std::vector<Label> predict_all(const std::vector<Document>& docs) const {
        std::vector<Label> out;
        out.reserve(docs.size());
        for (const auto& d : docs) out.push_back(predict(d.text));
        return out;
    }
};

inline LoadedModel load_model(const std::string& dir) {
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw ConfigError("model directory not found: " + dir);
    const auto cfg = RunConfig::load((root / "run.cfg").string());
    LoadedModel m;
    m.kind = cfg.get("model.kind");
    m.normalize = cfg.normalize_config();
    if (m.kind == "chba") {
        m.chba = chba::ChbaModel::load((root / "chba.ckpt").string());
    } else {
        m.vectorizer = TfidfVectorizer::load((root / "vectorizer.bin").string());
        m.linear = LinearModel::load((root / "linear.bin").string());
        if (m.linear.vectorizer_fingerprint != m.vectorizer.fingerprint()) {
            throw DataError("linear.bin was not trained with vectorizer.bin in " + dir);
        }
    }
    return m;
}

// ------------------------------------------------------------------ train

struct TrainSummary {
    double val_macro_f1 = 0.0;
    EvalReport val_report;
    AssemblyReport corpus;
    std::size_t best_epoch = 0;  // CHBA only
};

namespace detail {

inline chba::EmbeddingTable chba_embeddings(const RunConfig& cfg, const chba::ChbaConfig& c,
                                            const std::vector<std::string>& train_texts) {
    const auto unk = cfg.unk_policy();
    chba::EmbeddingTable table;
    if (const auto path = optional_input(cfg, "chba.embeddings"); !path.empty()) {
        table = chba::load_embeddings(path, c.word_dim);
        table.unk_policy = unk;
        if (unk == chba::UnkPolicy::random) {
            std::mt19937_64 rng(c.seed + 1);
            std::uniform_real_distribution<float> u(-0.05f, 0.05f);
            for (std::size_t k = 0; k < c.word_dim; ++k) table.matrix(chba::Vocabulary::unk, k) = u(rng);
        }
    } else {
        table = chba::EmbeddingTable::random(chba::build_word_vocabulary(train_texts), c.word_dim, c.seed + 1, unk);
    }
    table.trainable = cfg.get_bool("chba.trainable_embeddings");
    return table;
}

inline std::string format_linear_log(const std::vector<EpochStats>& history) {
    std::string out = "epoch,objective,averaged_objective\n";
    for (const auto& h : history) {
        out += std::to_string(h.epoch) + "," + shortest(h.objective) + "," + shortest(h.averaged_objective) + "\n";
    }
    return out;
}

// The settings a model directory needs to apply the model again.
inline std::string model_settings(const RunConfig& cfg) {
    RunConfig stored = cfg;
    stored.set("normalize.stopwords", cfg.get_bool("normalize.remove_stopwords") ? "stopwords.txt" : "");
    stored.set("normalize.unify_map", cfg.get_bool("normalize.unify") ? "unify_map.tsv" : "");
    stored.set("chba.embeddings", "");
    return stored.to_text(RunConfig::keys_with_prefix({"run.seed", "normalize.", "features.", "model.", "svm.",
                                                       "logreg.", "chba."}));
}

}  // namespace detail

// Trains the configured model on the assembled corpus, writes the model
// directory and reports validation macro-F1. `log` receives progress lines.
inline TrainSummary cmd_train(const RunConfig& cfg, std::ostream& log) {
    const auto out_dir = cfg.get("run.output_dir");
    if (out_dir.empty()) throw ConfigError("run.output_dir is not set");
    const auto kind = cfg.get("model.kind");
    const auto ncfg = cfg.normalize_config();
    // Typed views validate before any data is read.
    std::optional<chba::ChbaConfig> chba_cfg;
    if (kind == "chba") chba_cfg = cfg.chba_config();
    const auto svm_cfg = kind == "svm" ? cfg.svm_config() : TrainConfig{};
    const auto logreg_cfg = kind == "logreg" ? cfg.logreg_config() : TrainConfig{};
    const auto specs = cfg.ngram_specs();

    auto corpus = load_corpus(cfg);
    const auto train_docs = detail::normalized(std::move(corpus.split.train), ncfg);
    const auto val_docs = detail::normalized(std::move(corpus.split.validation), ncfg);
    const auto train_texts = detail::texts(train_docs);
    const auto train_y = detail::gold_labels(train_docs);
    const auto val_y = detail::gold_labels(val_docs);

    const fs::path root(out_dir);
    fs::create_directories(root);
    detail::write_text(root / "splits.txt", format_report(corpus.report));
    detail::write_text(root / "run.cfg", detail::model_settings(cfg));
    if (cfg.get_bool("normalize.remove_stopwords")) {
        std::string words;
        for (const auto& w : cfg.stopwords()) words += w + "\n";
        detail::write_text(root / "stopwords.txt", words);
    }
    if (cfg.get_bool("normalize.unify")) detail::write_text(root / "unify_map.tsv", detail::format_unify_map(cfg.unify_map()));

    TrainSummary summary;
    summary.corpus = corpus.report;
    std::vector<Label> val_pred;
    if (kind == "chba") {
        auto table = detail::chba_embeddings(cfg, *chba_cfg, train_texts);
        auto fit = chba::fit_chba(train_docs, val_docs, *chba_cfg, std::move(table), [&](const chba::EpochLog& e) {
            log << "epoch " << e.epoch << " train_J=" << detail::shortest(e.train_J)
                << " train_J_flooded=" << detail::shortest(e.train_J_flooded)
                << " val_macro_f1=" << detail::shortest(e.val_macro_f1) << '\n';
        });
        fit.model.save((root / "chba.ckpt").string());
        detail::write_text(root / "train_log.csv", chba::format_log_csv(fit.log));
        summary.best_epoch = fit.best_epoch;
        for (const auto& d : val_docs) val_pred.push_back(fit.model.predict(d.text));
    } else {
        TfidfVectorizer vec;
        TrainResult result;
        if (kind == "logreg") {
            vec = TfidfVectorizer::fit(train_texts, {NgramSpec::words(1, 1)}, {Weighting::counts, ScoreRule::sum});
            result = train_logistic(vec.transform_all(train_texts), train_y, logreg_cfg);
        } else {
            vec = TfidfVectorizer::fit(train_texts, specs, cfg.vectorizer_options());
            if (const auto dim = cfg.get_size("features.dim"); dim > 0) vec = vec.reduce_features(dim);
            result = train_svm(vec.transform_all(train_texts), train_y, svm_cfg);
        }
        result.model.vectorizer_fingerprint = vec.fingerprint();
        vec.save((root / "vectorizer.bin").string());
        result.model.save((root / "linear.bin").string());
        detail::write_text(root / "train_log.csv", detail::format_linear_log(result.history));
        log << kind << ": " << vec.dimension() << " features, " << train_docs.size() << " training documents\n";
        for (const auto& d : val_docs) val_pred.push_back(result.model.predict(vec.transform(d.text)).label);
    }
    summary.val_report = evaluate(val_pred, val_y);
    summary.val_macro_f1 = summary.val_report.macro_f1;
    detail::write_text(root / "val_report.txt", format_text(summary.val_report));
    detail::write_text(root / "val_report.csv", format_csv(summary.val_report));
    log << "validation macro_f1=" << detail::shortest(summary.val_macro_f1) << '\n';
    return summary;
}

// --------------------------------------------------------------- evaluate

// Scores a saved model on a labeled TSV file.
inline EvalReport cmd_evaluate(const std::string& model_dir, const std::string& gold_tsv) {
    const auto model = load_model(model_dir);
    const auto gold = load_tsv(gold_tsv);
    const auto y = detail::gold_labels(gold);
    if (gold.empty()) throw EmptyCorpus();
    return evaluate(model.predict_all(gold), y);
}

// Scores an existing predictions file (id, text, label) against gold labels,
// matching rows by id.
inline EvalReport cmd_evaluate_predictions(const std::string& predictions_tsv, const std::string& gold_tsv) {
    const auto gold = load_tsv(gold_tsv);
    const auto y = detail::gold_labels(gold);
    if (gold.empty()) throw EmptyCorpus();
    std::map<std::string, Label> by_id;
    for (const auto& d : load_tsv(predictions_tsv)) {
        if (!d.label) throw DataError("prediction for '" + d.id + "' has no label");
        if (!by_id.emplace(d.id, *d.label).second) throw DataError("duplicate prediction for '" + d.id + "'");
    }
    std::vector<Label> pred;
    pred.reserve(gold.size());
    for (const auto& d : gold) {
        auto it = by_id.find(d.id);
        if (it == by_id.end()) throw DataError("no prediction for '" + d.id + "'");
        pred.push_back(it->second);
    }
    return evaluate(pred, y);
}

inline void write_report(const EvalReport& r, const std::string& out_dir) {
    fs::create_directories(out_dir);
    detail::write_text(fs::path(out_dir) / "report.txt", format_text(r));
    detail::write_text(fs::path(out_dir) / "report.csv", format_csv(r));
}

// ---------------------------------------------------------------- predict

// Writes id, original text and predicted label for every input row.
inline std::vector<Label> cmd_predict(const std::string& model_dir, const std::string& in_tsv,
                                      const std::string& out_tsv) {
    const auto model = load_model(model_dir);
    auto docs = load_tsv(in_tsv);
    std::vector<Label> labels;
    labels.reserve(docs.size());
    for (auto& d : docs) {
        d.label = model.predict(d.text);
        labels.push_back(*d.label);
    }
    save_tsv(out_tsv, docs);
    return labels;
}

// ----------------------------------------------------------------- ablate

// Sweeps SVM feature dimensions over `ablate.schedule` on the validation split.
inline AblationReport cmd_ablate(const RunConfig& cfg) {
    const auto schedule = cfg.get_sizes("ablate.schedule");
    if (schedule.empty()) throw ConfigError("ablate.schedule is empty");
    const auto ncfg = cfg.normalize_config();
    const auto svm_cfg = cfg.svm_config();
    const auto specs = cfg.ngram_specs();
    auto corpus = load_corpus(cfg);
    const auto train_docs = detail::normalized(std::move(corpus.split.train), ncfg);
    const auto val_docs = detail::normalized(std::move(corpus.split.validation), ncfg);
    const LabeledTexts train{detail::texts(train_docs), detail::gold_labels(train_docs)};
    const LabeledTexts val{detail::texts(val_docs), detail::gold_labels(val_docs)};
    const auto vec = TfidfVectorizer::fit(train.texts, specs, cfg.vectorizer_options());
    return ablation_sweep(vec, svm_trainer(svm_cfg), train, val, schedule);
}

}  // namespace offlang::cli
