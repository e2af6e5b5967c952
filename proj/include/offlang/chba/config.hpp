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

#pragma once

#include "offlang/autodiff/adadelta.hpp"
#include "offlang/error.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace offlang::chba {

struct ChbaConfig {
    // Input limits.
    std::size_t max_words = 50;
    std::size_t max_chars_per_word = 10;

    // Layer sizes.
    std::size_t word_dim = 300;
    std::size_t char_dim = 20;
    std::vector<std::size_t> cnn_filter_widths{2, 3, 4};
    std::size_t cnn_filters_per_width = 32;
    std::size_t highway_layers = 1;
    std::size_t lstm_hidden = 100;  // per direction
    std::size_t attention_dim = 100;
    std::vector<std::size_t> dense_sizes{64};

    double dropout_embed = 0.5;
    double dropout_other = 0.33;

    // Training.
    double flood_level = 0.05;
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    ad::AdadeltaOptions adadelta{};
    std::uint64_t seed = 1;

    std::size_t char_feature_dim() const { return cnn_filter_widths.size() * cnn_filters_per_width; }

    void validate() const {
        auto positive = [](std::size_t v, const char* name) {
            if (v == 0) throw ConfigError(std::string(name) + " must be positive");
        };
        positive(max_words, "max_words");
        positive(max_chars_per_word, "max_chars_per_word");
        positive(word_dim, "word_dim");
        positive(char_dim, "char_dim");
        positive(cnn_filters_per_width, "cnn_filters_per_width");
        positive(lstm_hidden, "lstm_hidden");
        positive(attention_dim, "attention_dim");
        positive(epochs, "epochs");
        positive(batch_size, "batch_size");
        if (cnn_filter_widths.empty()) throw ConfigError("cnn_filter_widths must not be empty");
        for (auto w : cnn_filter_widths) {
            positive(w, "cnn filter width");
            if (w > max_chars_per_word) {
                throw ConfigError("cnn filter width " + std::to_string(w) + " exceeds max_chars_per_word");
            }
        }
        for (auto d : dense_sizes) positive(d, "dense layer size");
        for (double r : {dropout_embed, dropout_other}) {
            if (!(r >= 0.0 && r < 1.0)) throw ConfigError("dropout rates must lie in [0, 1)");
        }
        if (!(flood_level >= 0.0)) throw NegativeFloodLevel(flood_level);
        adadelta.validate();
    }

    bool operator==(const ChbaConfig& o) const {
        return max_words == o.max_words && max_chars_per_word == o.max_chars_per_word && word_dim == o.word_dim &&
               char_dim == o.char_dim && cnn_filter_widths == o.cnn_filter_widths &&
               cnn_filters_per_width == o.cnn_filters_per_width && highway_layers == o.highway_layers &&
               lstm_hidden == o.lstm_hidden && attention_dim == o.attention_dim && dense_sizes == o.dense_sizes &&
               dropout_embed == o.dropout_embed && dropout_other == o.dropout_other &&
               flood_level == o.flood_level && epochs == o.epochs && batch_size == o.batch_size &&
               adadelta.rho == o.adadelta.rho && adadelta.eps == o.adadelta.eps && adadelta.lr == o.adadelta.lr &&
               seed == o.seed;
    }
};

}  // namespace offlang::chba
