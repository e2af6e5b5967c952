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

#include "offlang/cli/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

namespace offlang::cli {

inline constexpr const char* config_env_var = "OFFLANG_CONFIG";

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_data = 2, exit_numeric = 3 };

// Library errors carry their class; anything else (filesystem failures,
// allocation) is reported as a data error.
inline int exit_code_for(const std::exception& e) {
    if (const auto* lib = dynamic_cast<const Error*>(&e)) return static_cast<int>(lib->error_class());
    return exit_data;
}

// The config file named by --config, else by $OFFLANG_CONFIG, else
// defaults; then every --set override in order.
inline RunConfig resolve_config(const std::string& config_path, const std::vector<std::string>& overrides) {
    std::string path = config_path;
    if (path.empty()) {
        if (const char* env = std::getenv(config_env_var)) path = env;
    }
    RunConfig cfg = path.empty() ? RunConfig{} : RunConfig::load(path);
    for (const auto& o : overrides) cfg.set_assignment(o);
    return cfg;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Offensive-language classification for Arabic tweets"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> overrides;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, std::string("config file (default: $") + config_env_var + ")");
        sub->add_option("-s,--set", overrides, "override a config key, key=value")->allow_extra_args(false);
    };

    std::string in_path, out_path, model_dir, predictions, out_dir, scheme = "task", schedule;
    bool report_duplicates = false;

    auto* pre = app.add_subcommand("preprocess", "normalize the text column of a TSV file");
    add_config(pre);
    pre->add_option("input", in_path, "input TSV")->required();
    pre->add_option("output", out_path, "output TSV")->required();
    pre->add_option("--scheme", scheme, "label column scheme")->check(CLI::IsMember({"task", "lhsab"}));

    auto* train = app.add_subcommand("train", "train the configured model and write a model directory");
    add_config(train);
    train->add_option("-o,--output", out_dir, "model directory (overrides run.output_dir)");
    train->add_flag("--report-duplicates", report_duplicates, "list training texts that occur more than once");

    auto* eval = app.add_subcommand("evaluate", "score a model or a predictions file against gold labels");
    eval->add_option("gold", in_path, "gold TSV with labels")->required();
    auto* model_opt = eval->add_option("-m,--model", model_dir, "model directory");
    auto* pred_opt = eval->add_option("-p,--predictions", predictions, "predictions TSV (id, text, label)");
    model_opt->excludes(pred_opt);
    eval->add_option("-o,--output", out_dir, "directory for report.txt and report.csv");

    auto* predict = app.add_subcommand("predict", "label every row of a TSV file");
    predict->add_option("-m,--model", model_dir, "model directory")->required();
    predict->add_option("input", in_path, "input TSV")->required();
    predict->add_option("output", out_path, "output TSV")->required();

    auto* ablate = app.add_subcommand("ablate", "sweep SVM feature dimensions on the validation split");
    add_config(ablate);
    ablate->add_option("--schedule", schedule, "strictly decreasing dims, e.g. 5000,1000,500");
    ablate->add_option("-o,--output", out_path, "CSV output (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (pre->parsed()) {
            const auto cfg = resolve_config(config_path, overrides);
            const auto n = cmd_preprocess(in_path, out_path, cfg, scheme == "lhsab" ? LabelScheme::lhsab : LabelScheme::task);
            out << "wrote " << n << " rows to " << out_path << '\n';
        } else if (train->parsed()) {
            auto cfg = resolve_config(config_path, overrides);
            if (!out_dir.empty()) cfg.set("run.output_dir", out_dir);
            if (report_duplicates) {
                const auto corpus = load_corpus(cfg);
                const auto groups = find_duplicate_texts(corpus.split.train);
                out << groups.size() << " duplicated training texts\n";
                for (const auto& g : groups) {
                    for (std::size_t i = 0; i < g.size(); ++i) out << (i ? "\t" : "") << g[i];
                    out << '\n';
                }
            }
            cmd_train(cfg, out);
        } else if (eval->parsed()) {
            if (model_dir.empty() == predictions.empty()) {
                throw ConfigError("evaluate needs exactly one of --model or --predictions");
            }
            const auto report = model_dir.empty() ? cmd_evaluate_predictions(predictions, in_path)
                                                  : cmd_evaluate(model_dir, in_path);
            if (!out_dir.empty()) write_report(report, out_dir);
            out << format_text(report);
        } else if (predict->parsed()) {
            const auto labels = cmd_predict(model_dir, in_path, out_path);
            out << "wrote " << labels.size() << " predictions to " << out_path << '\n';
        } else if (ablate->parsed()) {
            auto cfg = resolve_config(config_path, overrides);
            if (!schedule.empty()) cfg.set("ablate.schedule", schedule);
            const auto csv = format_ablation_csv(cmd_ablate(cfg));
            if (out_path.empty()) {
                out << csv;
            } else {
                detail::write_text(out_path, csv);
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return exit_ok;
}

// Convenience overload for in-process callers; args exclude the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"offlang"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace offlang::cli
