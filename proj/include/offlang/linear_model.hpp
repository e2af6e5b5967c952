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

// Linear classifiers over sparse features.
//
// Both models minimize the primal objective
//
//   F(w, b) = lambda/2 * |w|^2 + 1/n * sum_i c_i * loss(y_i * (w.x_i + b)),
//   lambda  = 1 / (C * n),   y_i in {-1 (NOT), +1 (OFF)}
//
// with hinge loss max(0, 1 - m) for the SVM and log(1 + exp(-m)) for
// logistic regression; the bias is not regularized. c_i is 1 unless class
// balancing is on, in which case c_i = n / (2 * n_{y_i}).
//
// SVM: seeded stochastic subgradient descent, one shuffled pass per epoch,
// step eta_t = eta0 / (1 + eta0 * lambda * t). The returned weights are the
// mean of the end-of-epoch iterates over the last ceil(epochs / 2) epochs.
//
// Logistic: full-batch gradient descent with step 1 / L, where
// L = lambda + max_c / 4 * max_i(|x_i|^2 + 1) bounds the Hessian, so the
// objective never increases.

#pragma once

#include "offlang/binary_io.hpp"
#include "offlang/error.hpp"
#include "offlang/label.hpp"
#include "offlang/sparse_vector.hpp"
#include "offlang/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace offlang {

enum class ModelKind : std::uint8_t { svm_hinge = 0, logistic = 1 };

inline std::string_view to_string(ModelKind k) noexcept {
    return k == ModelKind::svm_hinge ? "svm_hinge" : "logistic";
}

struct TrainConfig {
    double C = 1.0;
    int epochs = 20;
    double eta0 = 0.5;
    std::uint64_t seed = 0;
    bool balance_classes = false;

    // Full-batch iterations are cheap, so the logistic default runs longer.
    static TrainConfig logistic_defaults() {
        TrainConfig c;
        c.epochs = 300;
        return c;
    }

    void validate() const {
        if (!(C > 0.0)) throw ConfigError("C must be positive");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (!(eta0 > 0.0)) throw ConfigError("eta0 must be positive");
    }
};

struct Prediction {
    Label label;
    double score;
};

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    ModelKind kind = ModelKind::svm_hinge;
    std::uint64_t vectorizer_fingerprint = 0;

    std::size_t dimension() const noexcept { return weights.size(); }

    double score(const SparseVector& x) const {
        if (x.dim != weights.size()) throw DimensionMismatch(weights.size(), x.dim);
        return x.dot(weights) + bias;
    }

    Prediction predict(const SparseVector& x) const {
        const double s = score(x);
        return {s > 0.0 ? Label::OFF : Label::NOT, s};
    }

    // P(OFF | x); only meaningful for logistic models.
    double probability(const SparseVector& x) const { return 1.0 / (1.0 + std::exp(-score(x))); }

    static constexpr std::uint32_t format_version = 1;

    std::string to_bytes() const {
        bin::Writer w;
        w.put_bytes("OLLM");
        w.put(format_version);
        w.put(static_cast<std::uint8_t>(kind));
        w.put(vectorizer_fingerprint);
        w.put_f64(bias);
        w.put(static_cast<std::uint64_t>(weights.size()));
        for (double v : weights) w.put_f64(v);
        return w.bytes();
    }

    static LinearModel from_bytes(bin::Reader& r) {
        r.expect_magic("OLLM");
        if (r.get<std::uint32_t>() != format_version) r.fail("unsupported model version");
        LinearModel m;
        const auto k = r.get<std::uint8_t>();
        if (k > 1) r.fail("unknown model kind");
        m.kind = static_cast<ModelKind>(k);
        m.vectorizer_fingerprint = r.get<std::uint64_t>();
        m.bias = r.get_f64();
        m.weights.resize(r.get<std::uint64_t>());
        for (auto& v : m.weights) v = r.get_f64();
        return m;
    }

    void save(const std::string& path) const {
        bin::Writer w;
        w.put_bytes(to_bytes());
        w.save(path);
    }

    static LinearModel load(const std::string& path) {
        auto r = bin::Reader::from_file(path);
        auto m = from_bytes(r);
        if (!r.at_end()) r.fail("trailing bytes");
        return m;
    }

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

struct EpochStats {
    int epoch = 0;
    double objective = 0.0;           // at the end-of-epoch iterate
    double averaged_objective = 0.0;  // at the running suffix average (== objective before averaging starts)
};

struct TrainResult {
    LinearModel model;
    std::vector<EpochStats> history;
};

namespace detail {

inline void check_training_set(std::span<const SparseVector> X, std::span<const Label> y) {
    if (X.size() != y.size()) throw LengthMismatch(X.size(), y.size());
    if (X.size() < 2) throw SingleClassCorpus();
    const std::size_t dim = X.front().dim;
    bool has_off = false;
    bool has_not = false;
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].dim != dim) throw DimensionMismatch(dim, X[i].dim);
        (y[i] == Label::OFF ? has_off : has_not) = true;
    }
    if (!has_off || !has_not) throw SingleClassCorpus();
}

inline std::vector<double> example_weights(std::span<const Label> y, bool balance) {
    std::vector<double> c(y.size(), 1.0);
    if (!balance) return c;
    const auto n_off = static_cast<double>(std::count(y.begin(), y.end(), Label::OFF));
    const auto n = static_cast<double>(y.size());
    const double w_off = n / (2.0 * n_off);
    const double w_not = n / (2.0 * (n - n_off));
    for (std::size_t i = 0; i < y.size(); ++i) c[i] = y[i] == Label::OFF ? w_off : w_not;
    return c;
}

inline double hinge(double m) { return m < 1.0 ? 1.0 - m : 0.0; }

// log(1 + exp(-m)) without overflow.
inline double logistic_loss(double m) {
    return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

}  // namespace detail

inline double regularization_lambda(const TrainConfig& cfg, std::size_t n) {
    return 1.0 / (cfg.C * static_cast<double>(n));
}

inline double linear_objective(ModelKind kind, std::span<const double> w, double b,
                               std::span<const SparseVector> X, std::span<const Label> y,
                               const TrainConfig& cfg) {
    const double lambda = regularization_lambda(cfg, X.size());
    const auto c = detail::example_weights(y, cfg.balance_classes);
    double reg = 0.0;
    for (double v : w) reg += v * v;
    double data = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double m = sign_of(y[i]) * (X[i].dot(w) + b);
        data += c[i] * (kind == ModelKind::svm_hinge ? detail::hinge(m) : detail::logistic_loss(m));
    }
    return 0.5 * lambda * reg + data / static_cast<double>(X.size());
}

// (Sub)gradient of linear_objective; the last entry is d/db. At a hinge kink
// (margin exactly 1) the zero subgradient is taken.
inline std::vector<double> linear_gradient(ModelKind kind, std::span<const double> w, double b,
                                           std::span<const SparseVector> X, std::span<const Label> y,
                                           const TrainConfig& cfg) {
    const double lambda = regularization_lambda(cfg, X.size());
    const auto c = detail::example_weights(y, cfg.balance_classes);
    const double inv_n = 1.0 / static_cast<double>(X.size());
    std::vector<double> g(w.size() + 1, 0.0);
    for (std::size_t j = 0; j < w.size(); ++j) g[j] = lambda * w[j];
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double yi = sign_of(y[i]);
        const double m = yi * (X[i].dot(w) + b);
        double dm = 0.0;  // d loss / d margin
        if (kind == ModelKind::svm_hinge) {
            dm = m < 1.0 ? -1.0 : 0.0;
        } else {
            dm = -1.0 / (1.0 + std::exp(m));
        }
        const double coef = c[i] * dm * yi * inv_n;
        if (coef == 0.0) continue;
        for (std::size_t k = 0; k < X[i].nnz(); ++k) g[X[i].indices[k]] += coef * X[i].values[k];
        g.back() += coef;
    }
    return g;
}

inline TrainResult train_svm(std::span<const SparseVector> X, std::span<const Label> y,
                             const TrainConfig& cfg = {}) {
    cfg.validate();
    detail::check_training_set(X, y);
    const std::size_t n = X.size();
    const std::size_t dim = X.front().dim;
    const double lambda = regularization_lambda(cfg, n);
    const auto c = detail::example_weights(y, cfg.balance_classes);

    // w = scale * v keeps the shrink step O(1).
    std::vector<double> v(dim, 0.0);
    double scale = 1.0;
    double b = 0.0;

    const int avg_epochs = (cfg.epochs + 1) / 2;
    const int avg_start = cfg.epochs - avg_epochs + 1;
    std::vector<double> w_avg(dim, 0.0);
    double b_avg = 0.0;
    int averaged = 0;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(cfg.seed);
    std::uint64_t t = 0;

    TrainResult result;
    result.model.kind = ModelKind::svm_hinge;
    std::vector<double> w(dim);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
        for (std::size_t idx : order) {
            // Capped so the shrink factor stays in (0, 1] for tiny C.
            const double eta = std::min(cfg.eta0 / (1.0 + cfg.eta0 * lambda * static_cast<double>(t)),
                                        0.5 / lambda);
            ++t;
            const auto& x = X[idx];
            const double yi = sign_of(y[idx]);
            const double margin = yi * (scale * x.dot(v) + b);
            scale *= (1.0 - eta * lambda);
            if (margin < 1.0) {
                const double step = eta * c[idx] * yi;
                for (std::size_t k = 0; k < x.nnz(); ++k) v[x.indices[k]] += step * x.values[k] / scale;
                b += step;
            }
            if (scale < 1e-9) {
                for (auto& e : v) e *= scale;
                scale = 1.0;
            }
        }
        for (std::size_t j = 0; j < dim; ++j) w[j] = scale * v[j];
        EpochStats stats;
        stats.epoch = epoch;
        stats.objective = linear_objective(ModelKind::svm_hinge, w, b, X, y, cfg);
        if (epoch >= avg_start) {
            ++averaged;
            const double mix = 1.0 / averaged;
            for (std::size_t j = 0; j < dim; ++j) w_avg[j] += (w[j] - w_avg[j]) * mix;
            b_avg += (b - b_avg) * mix;
            stats.averaged_objective = linear_objective(ModelKind::svm_hinge, w_avg, b_avg, X, y, cfg);
        } else {
            stats.averaged_objective = stats.objective;
        }
        result.history.push_back(stats);
    }
    result.model.weights = std::move(w_avg);
    result.model.bias = b_avg;
    return result;
}

inline TrainResult train_logistic(std::span<const SparseVector> X, std::span<const Label> y,
                                  const TrainConfig& cfg = TrainConfig::logistic_defaults()) {
    cfg.validate();
    detail::check_training_set(X, y);
    const std::size_t dim = X.front().dim;
    const double lambda = regularization_lambda(cfg, X.size());
    const auto c = detail::example_weights(y, cfg.balance_classes);

    double max_sq = 0.0;
    for (const auto& x : X) max_sq = std::max(max_sq, x.norm() * x.norm() + 1.0);
    const double max_c = *std::max_element(c.begin(), c.end());
    const double step = 1.0 / (lambda + 0.25 * max_c * max_sq);

    std::vector<double> w(dim, 0.0);
    double b = 0.0;
    TrainResult result;
    result.model.kind = ModelKind::logistic;
    for (int it = 1; it <= cfg.epochs; ++it) {
        const auto g = linear_gradient(ModelKind::logistic, w, b, X, y, cfg);
        for (std::size_t j = 0; j < dim; ++j) w[j] -= step * g[j];
        b -= step * g.back();
        EpochStats stats;
        stats.epoch = it;
        stats.objective = linear_objective(ModelKind::logistic, w, b, X, y, cfg);
        stats.averaged_objective = stats.objective;
        result.history.push_back(stats);
    }
    result.model.weights = std::move(w);
    result.model.bias = b;
    return result;
}

struct BowModel {
    TfidfVectorizer vectorizer;
    LinearModel model;
};

// Baseline: logistic regression on raw word-unigram counts.
inline BowModel train_logreg_bow(const std::vector<std::string>& texts, std::span<const Label> y,
                                 const TrainConfig& cfg = TrainConfig::logistic_defaults()) {
    if (texts.size() != y.size()) throw LengthMismatch(texts.size(), y.size());
    BowModel out;
    out.vectorizer = TfidfVectorizer::fit(texts, {NgramSpec::words(1, 1)},
                                          {Weighting::counts, ScoreRule::sum});
    const auto X = out.vectorizer.transform_all(texts);
    out.model = train_logistic(X, y, cfg).model;
    out.model.vectorizer_fingerprint = out.vectorizer.fingerprint();
    return out;
}

}  // namespace offlang
