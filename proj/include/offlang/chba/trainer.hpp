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

// Mini-batch training: per batch, J is the mean cross-entropy of the batch,
// the optimizer follows the gradient of the flooded loss |J - b| + b, and
// the network with the best validation macro-F1 (earliest on ties) is kept.

#pragma once

#include "offlang/chba/network.hpp"
#include "offlang/eval.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace offlang::chba {

struct EpochLog {
    std::size_t epoch = 0;
    double train_J = 0.0;          // mean batch cross-entropy
    double train_J_flooded = 0.0;  // mean batch flooded loss
    double val_macro_f1 = 0.0;
};

template <class T>
struct TrainOutcome {
    Network<T> best;
    std::size_t best_epoch = 0;
    double best_val_macro_f1 = -1.0;
    std::vector<EpochLog> log;
};

template <class T>
std::vector<Label> predict_all(const Network<T>& net, const std::vector<EncodedText>& xs) {
    std::vector<Label> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(net.predict(x));
    return out;
}

// Mean eval-mode cross-entropy over a labelled set.
template <class T>
double mean_loss(const Network<T>& net, const std::vector<EncodedText>& xs, const std::vector<Label>& ys) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto z = net.logits(xs[i]);
        const double z0 = z[0], z1 = z[1];
        const double m = std::max(z0, z1);
        const double lse = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
        s += lse - (ys[i] == Label::OFF ? z1 : z0);
    }
    return s / static_cast<double>(xs.size());
}

using EpochCallback = std::function<void(const EpochLog&)>;

template <class T>
TrainOutcome<T> train(Network<T> net, const std::vector<EncodedText>& train_x, const std::vector<Label>& train_y,
                      const std::vector<EncodedText>& val_x, const std::vector<Label>& val_y,
                      const EpochCallback& on_epoch = {}) {
    if (train_x.size() != train_y.size()) throw LengthMismatch(train_x.size(), train_y.size());
    if (val_x.size() != val_y.size()) throw LengthMismatch(val_x.size(), val_y.size());
    if (train_x.empty() || val_x.empty()) throw EmptyCorpus();
    const auto& cfg = net.config();
    const T b = static_cast<T>(cfg.flood_level);
    ad::Adadelta<T> opt(cfg.adadelta);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(train_x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainOutcome<T> outcome;
    const auto params = net.parameters();
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double sum_J = 0.0, sum_flooded = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            net.zero_grad();
            ad::Tape<T> tape;
            const auto bound = net.bind(tape);
            std::vector<ad::Var<T>> losses;
            for (std::size_t i = start; i < end; ++i) {
                const auto& x = train_x[order[i]];
                const auto out = net.forward(bound, x, true, rng);
                losses.push_back(ad::softmax_xent_sparse(out.logits, static_cast<std::size_t>(class_index(train_y[order[i]]))));
            }
            const auto J = ad::scale(ad::add_n(losses), T(1) / static_cast<T>(losses.size()));
            const auto flooded = ad::flood(J, b);
            tape.backward(flooded);
            opt.step(params);
            sum_J += static_cast<double>(J.value()[0]);
            sum_flooded += static_cast<double>(flooded.value()[0]);
            ++batches;
        }
        EpochLog row;
        row.epoch = epoch;
        row.train_J = sum_J / static_cast<double>(batches);
        row.train_J_flooded = sum_flooded / static_cast<double>(batches);
        row.val_macro_f1 = macro_f1(confusion(predict_all(net, val_x), val_y));
        outcome.log.push_back(row);
        if (row.val_macro_f1 > outcome.best_val_macro_f1) {
            outcome.best_val_macro_f1 = row.val_macro_f1;
            outcome.best_epoch = epoch;
            outcome.best = net;
        }
        if (on_epoch) on_epoch(row);
    }
    return outcome;
}

namespace detail {

inline std::string shortest(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace detail

inline std::string format_log_csv(const std::vector<EpochLog>& log) {
    std::string out = "epoch,train_J,train_J_flooded,val_macro_f1\n";
    for (const auto& r : log) {
        out += std::to_string(r.epoch) + "," + detail::shortest(r.train_J) + "," + detail::shortest(r.train_J_flooded) +
               "," + detail::shortest(r.val_macro_f1) + "\n";
    }
    return out;
}

}  // namespace offlang::chba
