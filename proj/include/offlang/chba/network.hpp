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

// CNN + highway + Bi-LSTM + attention classifier.
//
// For a message of L words (trailing padding positions dropped):
//
//   char branch, per word t:
//     E_t   = dropout_embed(CharEmb[chars_t])                {C, char_dim}
//     p_t^k = max_over_time(tanh(conv1d(E_t, Wc_k, bc_k)))    {F} per filter width k
//     z_t   = concat_k p_t^k, then for each highway layer
//             z <- z + sigmoid(Wg z + bg) * (tanh(Wh z + bh) - z)
//   word branch:
//     W     = dropout_embed(WordEmb[words])                   {L, word_dim}
//   x_t = concat(z_t, W_t)
//   h_t = concat(LSTM_fwd(x_1..x_t), LSTM_bwd(x_t..x_L))      {2H}
//   Hm  = dropout_other(stack_t h_t)                          {L, 2H}
//   a   = softmax(tanh(Hm Wa + ba) v)                         {L}
//   ctx = Hm^T a                                              {2H}; zero vector when L = 0
//   d   = dropout_other(relu(Wd ctx + bd)) per dense layer
//   logits = Wo d + bo                                        {2}: index 0 = NOT, 1 = OFF
//
// Initialization: Glorot-uniform weights, zero biases, LSTM forget-gate bias
// 1, highway gate bias -2, output weights N(0, 0.01^2) and output bias
// (0, ln(p/(1-p))) so the untrained network predicts the class prior p.

#pragma once

#include "offlang/autodiff.hpp"
#include "offlang/chba/config.hpp"
#include "offlang/chba/embeddings.hpp"
#include "offlang/chba/encoder.hpp"
#include "offlang/label.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace offlang::chba {

inline double prior_logit(double p_off) {
    if (!(p_off > 0.0 && p_off < 1.0)) throw InvalidPrior(p_off);
    return std::log(p_off / (1.0 - p_off));
}

template <class T>
class Network {
public:
    using Var = ad::Var<T>;
    using Param = ad::Parameter<T>;
    using Tensor = ad::Tensor<T>;

    // Parameters bound as leaves on one tape.
    struct Bound {
        ad::Tape<T>* tape = nullptr;
        std::vector<Var> vars;  // same order as parameters()
    };

    struct Output {
        Var logits;
        std::vector<T> attention;  // one weight per non-padding word
    };

    Network() = default;

    // Allocates every parameter with its final shape, all zero.
    Network(const ChbaConfig& cfg, std::size_t char_vocab_size, std::size_t word_vocab_size) : cfg_(cfg) {
        cfg_.validate();
        const std::size_t H = cfg.lstm_hidden, Dc = cfg.char_feature_dim(), Dx = Dc + cfg.word_dim;
        add("char_embedding", {char_vocab_size, cfg.char_dim});
        add("word_embedding", {word_vocab_size, cfg.word_dim});
        for (auto w : cfg.cnn_filter_widths) {
            add("conv" + std::to_string(w) + ".weight", {cfg.cnn_filters_per_width, w * cfg.char_dim});
            add("conv" + std::to_string(w) + ".bias", {cfg.cnn_filters_per_width});
        }
        for (std::size_t l = 0; l < cfg.highway_layers; ++l) {
            const auto p = "highway" + std::to_string(l);
            add(p + ".transform.weight", {Dc, Dc});
            add(p + ".transform.bias", {Dc});
            add(p + ".gate.weight", {Dc, Dc});
            add(p + ".gate.bias", {Dc});
        }
        add("lstm_fwd.weight", {4 * H, Dx + H});
        add("lstm_fwd.bias", {4 * H});
        add("lstm_bwd.weight", {4 * H, Dx + H});
        add("lstm_bwd.bias", {4 * H});
        add("attention.weight", {2 * H, cfg.attention_dim});
        add("attention.bias", {cfg.attention_dim});
        add("attention.context", {cfg.attention_dim});
        std::size_t in = 2 * H;
        for (std::size_t l = 0; l < cfg.dense_sizes.size(); ++l) {
            add("dense" + std::to_string(l) + ".weight", {cfg.dense_sizes[l], in});
            add("dense" + std::to_string(l) + ".bias", {cfg.dense_sizes[l]});
            in = cfg.dense_sizes[l];
        }
        add("output.weight", {2, in});
        add("output.bias", {2});
        params_[0].frozen_rows = {Vocabulary::pad};
    }

    // Randomly initialized network whose word embedding rows come from
    // `words` and whose untrained output matches the OFF prior p_off.
    static Network build(const ChbaConfig& cfg, std::size_t char_vocab_size, const EmbeddingTable& words,
                         double p_off) {
        const double bias = prior_logit(p_off);
        if (words.dim() != cfg.word_dim) {
            throw ConfigError("embedding table has dimension " + std::to_string(words.dim()) + " but word_dim is " +
                              std::to_string(cfg.word_dim));
        }
        Network net(cfg, char_vocab_size, words.vocab.size());
        std::mt19937_64 rng(cfg.seed);
        for (auto& p : net.params_) {
            const auto& n = p.name;
            if (n == "char_embedding") {
                std::uniform_real_distribution<double> u(-0.05, 0.05);
                for (std::size_t r = 1; r < p.value.rows(); ++r)
                    for (std::size_t c = 0; c < p.value.cols(); ++c) p.value(r, c) = static_cast<T>(u(rng));
            } else if (n == "word_embedding") {
                for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = static_cast<T>(words.matrix[i]);
                p.trainable = words.trainable;
                p.frozen_rows = words.frozen_rows();
            } else if (n == "output.weight") {
                std::normal_distribution<double> g(0.0, 0.01);
                for (auto& v : p.value.data) v = static_cast<T>(g(rng));
            } else if (n == "output.bias") {
                p.value[static_cast<std::size_t>(class_index(Label::OFF))] = static_cast<T>(bias);
            } else if (ends_with(n, ".weight") || n == "attention.context") {
                glorot(p, rng);
            } else if (ends_with(n, "gate.bias")) {
                p.value.fill(T(-2));
            } else if (n.rfind("lstm_", 0) == 0 && ends_with(n, ".bias")) {
                const std::size_t H = cfg.lstm_hidden;
                for (std::size_t j = H; j < 2 * H; ++j) p.value[j] = T(1);
            }
        }
        return net;
    }

    const ChbaConfig& config() const { return cfg_; }

    std::vector<Param*> parameters() {
        std::vector<Param*> out;
        for (auto& p : params_) out.push_back(&p);
        return out;
    }
    const std::vector<Param>& params() const { return params_; }
    Param& param(const std::string& name) {
        for (auto& p : params_)
            if (p.name == name) return p;
        throw ConfigError("no parameter named " + name);
    }
    const Param& param(const std::string& name) const { return const_cast<Network*>(this)->param(name); }

    void zero_grad() {
        for (auto& p : params_) p.zero_grad();
    }

    Bound bind(ad::Tape<T>& tape) {
        Bound b{&tape, {}};
        for (auto& p : params_) b.vars.push_back(tape.param(p));
        return b;
    }

    Output forward(const Bound& b, const EncodedText& x, bool train, std::mt19937_64& rng) const {
        if (x.chars.size() != x.words.size()) {
            throw ShapeMismatch("encoded text has " + std::to_string(x.words.size()) + " words but " +
                                    std::to_string(x.chars.size()) + " character rows");
        }
        auto& t = *b.tape;
        const std::size_t H = cfg_.lstm_hidden;
        const std::size_t L = x.effective_length();
        std::size_t k = 0;
        const Var char_emb = b.vars[k++];
        const Var word_emb = b.vars[k++];
        const std::size_t conv_at = k;
        k += 2 * cfg_.cnn_filter_widths.size();
        const std::size_t highway_at = k;
        k += 4 * cfg_.highway_layers;
        const Var fw_w = b.vars[k++], fw_b = b.vars[k++], bw_w = b.vars[k++], bw_b = b.vars[k++];
        const Var att_w = b.vars[k++], att_b = b.vars[k++], att_v = b.vars[k++];
        const std::size_t dense_at = k;
        k += 2 * cfg_.dense_sizes.size();
        const Var out_w = b.vars[k++], out_b = b.vars[k++];

        Output out;
        Var context;
        if (L == 0) {
            context = t.constant(Tensor({2 * H}));
        } else {
            std::vector<std::size_t> word_ids(x.words.begin(), x.words.begin() + static_cast<std::ptrdiff_t>(L));
            const Var words = ad::dropout(ad::embed_lookup(word_emb, word_ids), cfg_.dropout_embed, train, rng);
            std::vector<Var> inputs;
            for (std::size_t s = 0; s < L; ++s) {
                if (x.chars[s].size() != cfg_.max_chars_per_word) {
                    throw ShapeMismatch("word " + std::to_string(s) + " has " +
                                            std::to_string(x.chars[s].size()) + " character ids, expected " +
                                            std::to_string(cfg_.max_chars_per_word));
                }
                const Var chars = ad::dropout(ad::embed_lookup(char_emb, x.chars[s]), cfg_.dropout_embed, train, rng);
                std::vector<Var> pooled;
                for (std::size_t w = 0; w < cfg_.cnn_filter_widths.size(); ++w) {
                    const Var conv = ad::conv1d(chars, b.vars[conv_at + 2 * w], b.vars[conv_at + 2 * w + 1]);
                    pooled.push_back(ad::max_over_time(ad::tanh(conv)));
                }
                Var z = ad::concat(pooled);
                for (std::size_t l = 0; l < cfg_.highway_layers; ++l) {
                    const auto* hv = &b.vars[highway_at + 4 * l];
                    const Var h = ad::tanh(ad::add(ad::matmul(hv[0], z), hv[1]));
                    const Var g = ad::sigmoid(ad::add(ad::matmul(hv[2], z), hv[3]));
                    z = ad::add(z, ad::mul(g, ad::sub(h, z)));
                }
                inputs.push_back(ad::concat<T>({z, ad::row(words, s)}));
            }
            const auto fwd = run_lstm(t, inputs, fw_w, fw_b, false);
            const auto bwd = run_lstm(t, inputs, bw_w, bw_b, true);
            std::vector<Var> states;
            for (std::size_t s = 0; s < L; ++s) states.push_back(ad::concat<T>({fwd[s], bwd[s]}));
            const Var Hm = ad::dropout(ad::stack_rows(states), cfg_.dropout_other, train, rng);
            const Var scores = ad::matmul(ad::tanh(ad::add(ad::matmul(Hm, att_w), att_b)), att_v);
            const Var alpha = ad::softmax(scores);
            out.attention = alpha.value().data;
            context = ad::matmul(ad::transpose(Hm), alpha);
        }
        Var d = context;
        for (std::size_t l = 0; l < cfg_.dense_sizes.size(); ++l) {
            d = ad::relu(ad::add(ad::matmul(b.vars[dense_at + 2 * l], d), b.vars[dense_at + 2 * l + 1]));
            d = ad::dropout(d, cfg_.dropout_other, train, rng);
        }
        out.logits = ad::add(ad::matmul(out_w, d), out_b);
        if (!out.logits.value().all_finite()) throw NonFiniteValue("logits");
        return out;
    }

    // Eval-mode logits {NOT, OFF}.
    std::array<T, 2> logits(const EncodedText& x) const {
        ad::Tape<T> tape;
        auto& self = const_cast<Network&>(*this);  // binding only reads values in eval mode
        std::mt19937_64 unused(0);
        const auto out = forward(self.bind(tape), x, false, unused);
        return {out.logits.value()[0], out.logits.value()[1]};
    }

    std::vector<T> attention(const EncodedText& x) const {
        ad::Tape<T> tape;
        auto& self = const_cast<Network&>(*this);
        std::mt19937_64 unused(0);
        return forward(self.bind(tape), x, false, unused).attention;
    }

    // Softmax probability of OFF in eval mode.
    double prob_off(const EncodedText& x) const {
        const auto z = logits(x);
        const double d = static_cast<double>(z[0]) - static_cast<double>(z[1]);
        return 1.0 / (1.0 + std::exp(d));
    }

    Label predict(const EncodedText& x) const {
        const auto z = logits(x);
        return z[1] > z[0] ? Label::OFF : Label::NOT;
    }

    // Same network in another scalar type.
    template <class U>
    Network<U> cast() const {
        Network<U> out(cfg_, params_[0].value.rows(), params_[1].value.rows());
        auto dst = out.parameters();
        for (std::size_t i = 0; i < params_.size(); ++i) {
            for (std::size_t j = 0; j < params_[i].value.size(); ++j) {
                dst[i]->value[j] = static_cast<U>(params_[i].value[j]);
            }
            dst[i]->trainable = params_[i].trainable;
            dst[i]->frozen_rows = params_[i].frozen_rows;
        }
        return out;
    }

private:
    static bool ends_with(const std::string& s, const std::string& suffix) {
        return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
    }

    static void glorot(Param& p, std::mt19937_64& rng) {
        const auto& s = p.value.shape;
        const double fan_out = static_cast<double>(s[0]);
        const double fan_in = s.size() > 1 ? static_cast<double>(s[1]) : 1.0;
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (auto& v : p.value.data) v = static_cast<T>(u(rng));
    }

    void add(std::string name, std::vector<std::size_t> shape) {
        params_.emplace_back(std::move(name), Tensor(std::move(shape)));
    }

    std::vector<Var> run_lstm(ad::Tape<T>& t, const std::vector<Var>& inputs, Var w, Var bias, bool reverse) const {
        const std::size_t H = cfg_.lstm_hidden, L = inputs.size();
        Var h = t.constant(Tensor({H}));
        Var c = t.constant(Tensor({H}));
        std::vector<Var> hs(L);
        for (std::size_t i = 0; i < L; ++i) {
            const std::size_t s = reverse ? L - 1 - i : i;
            const Var hc = ad::lstm_step(inputs[s], h, c, w, bias);
            h = ad::row(hc, 0);
            c = ad::row(hc, 1);
            hs[s] = h;
        }
        return hs;
    }

    ChbaConfig cfg_;
    std::vector<Param> params_;
};

}  // namespace offlang::chba
