// Copyright 2026 The sgdst Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: train, predict, evaluate, dump-examples, oracle-check
// and make-toy-corpus.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sgdst/pipeline.h"
#include "sgdst/toy_corpus.h"

namespace {

using namespace sgdst;

struct CommonFlags {
  std::string config;
  std::string data_root;
  std::vector<std::string> sets;
  std::vector<std::string> ablations;
  std::vector<std::string> disabled;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags* f) {
  cmd->add_option("--config", f->config, "Run configuration file");
  cmd->add_option("--data-root", f->data_root,
                  std::string("Corpus root (default: data.root or $") +
                      kDataRootEnv + ")");
  cmd->add_option("--set", f->sets, "Override a config key: key=value");
  cmd->add_option("--ablation", f->ablations, "Input or model ablation")
      ->check(CLI::IsMember(ablation_names()));
  cmd->add_option("--disable-carryover", f->disabled,
                  "Treat a carryover class as none when decoding")
      ->check(CLI::IsMember(
          {"in_sys_uttr", "in_service_hist", "in_cross_service_hist"}));
  cmd->add_option("--seed", f->seed, "Master seed");
}

RunConfig resolve(const CommonFlags& f, RunConfig config) {
  for (const std::string& s : f.sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("--set expects key=value, got '" + s + "'");
    }
    set_config_value(&config, s.substr(0, eq), s.substr(eq + 1));
  }
  for (const std::string& a : f.ablations) apply_ablation(&config, a);
  for (const std::string& c : f.disabled) {
    config.decode.disabled_carryover.insert(parse_carryover_name(c));
  }
  if (f.seed) config.seed = *f.seed;
  if (!f.data_root.empty()) config.data_root = f.data_root;
  config.validate();
  return config;
}

RunConfig resolve(const CommonFlags& f) {
  return resolve(f, f.config.empty() ? RunConfig{} : load_config(f.config));
}

std::set<std::string> train_services(const RunConfig& config) {
  auto path = config.resolved_data_root() / config.train_split / "schema.json";
  std::set<std::string> out;
  if (!std::filesystem::exists(path)) return out;
  Schema schema = load_schema(path);
  for (const Service& s : schema.services()) out.insert(s.name());
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schema-guided dialogue state tracking"};
  app.require_subcommand(1);

  // train
  CommonFlags train_flags;
  std::string resume;
  bool force = false;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  add_common(train_cmd, &train_flags);
  train_cmd->add_option("--resume", resume, "Continue from a checkpoint");
  train_cmd->add_flag("--force", force, "Resume despite a config mismatch");

  // predict
  CommonFlags predict_flags;
  std::string checkpoint;
  std::string split = "test";
  std::string predictions_out = "-";
  bool oracle = false;
  int max_dialogues = 0;
  auto* predict_cmd = app.add_subcommand("predict", "Write a predictions dump");
  add_common(predict_cmd, &predict_flags);
  predict_cmd->add_option("--checkpoint", checkpoint, "Model checkpoint");
  predict_cmd->add_option("--split", split, "Split to predict");
  predict_cmd->add_option("--out", predictions_out, "JSON-lines output");
  predict_cmd->add_flag("--oracle", oracle,
                        "Decode gold head labels instead of running a model");
  predict_cmd->add_option("--max-dialogues", max_dialogues, "Limit (0 = all)");

  // evaluate
  CommonFlags eval_flags;
  std::string predictions_in;
  std::string eval_split = "test";
  std::string report_json = "-";
  std::string report_csv;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a predictions dump");
  add_common(eval_cmd, &eval_flags);
  eval_cmd->add_option("--predictions", predictions_in, "Predictions dump")
      ->required();
  eval_cmd->add_option("--split", eval_split, "Gold split");
  eval_cmd->add_option("--json", report_json, "Metrics report (JSON)");
  eval_cmd->add_option("--csv", report_csv, "Metrics report (CSV)");

  // dump-examples
  CommonFlags dump_flags;
  std::string dump_split = "train";
  std::string dump_out = "-";
  int dump_limit = 20;
  auto* dump_cmd =
      app.add_subcommand("dump-examples", "Render encoded inputs and labels");
  add_common(dump_cmd, &dump_flags);
  dump_cmd->add_option("--split", dump_split, "Split to render");
  dump_cmd->add_option("--out", dump_out, "Output file");
  dump_cmd->add_option("--limit", dump_limit, "Examples to render (0 = all)");

  // oracle-check
  CommonFlags oracle_flags;
  std::string oracle_split = "train";
  std::string oracle_json = "-";
  double min_jga = 0.99;
  double max_unresolvable = 0.02;
  auto* oracle_cmd = app.add_subcommand(
      "oracle-check", "Decode gold labels and compare with gold states");
  add_common(oracle_cmd, &oracle_flags);
  oracle_cmd->add_option("--split", oracle_split, "Split to check");
  oracle_cmd->add_option("--json", oracle_json, "Report output");
  oracle_cmd->add_option("--min-jga", min_jga, "Required gold-context JGA");
  oracle_cmd->add_option("--max-unresolvable", max_unresolvable,
                         "Allowed unresolvable fraction of changed slots");

  // make-toy-corpus
  ToyCorpusOptions toy;
  std::string toy_out;
  auto* toy_cmd = app.add_subcommand(
      "make-toy-corpus", "Write a synthetic corpus in the SGD format");
  toy_cmd->add_option("--out", toy_out, "Output root")->required();
  toy_cmd->add_option("--train", toy.train_dialogues, "Train dialogues");
  toy_cmd->add_option("--dev", toy.dev_dialogues, "Dev dialogues");
  toy_cmd->add_option("--test", toy.test_dialogues, "Test dialogues");
  toy_cmd->add_option("--seed", toy.seed, "Generator seed");
  toy_cmd->add_option("--unresolvable-p", toy.unresolvable_p,
                      "Per-dialogue probability of an unsourced value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      RunConfig config = resolve(train_flags);
      TrainOptions options;
      options.resume = resume;
      options.force = force;
      TrainResult r = train(config, options);
      std::printf("trained to step %d; best dev JGA %.4f at step %d\n%s\n",
                  r.final_step, r.best_dev_jga, r.best_step,
                  r.best_checkpoint.string().c_str());
    } else if (*predict_cmd) {
      PredictOptions options;
      options.max_dialogues = max_dialogues;
      PredictResult result;
      if (oracle) {
        RunConfig config = resolve(predict_flags);
        Dataset train_data = load_split(config.resolved_data_root(),
                                        config.train_split);
        Dataset data = load_split(config.resolved_data_root(), split);
        WordPieceTokenizer tokenizer = make_tokenizer(config, train_data);
        options.decode = config.decode;
        result = predict_oracle(tokenizer, config.encoder, data, options);
      } else {
        if (checkpoint.empty()) {
          throw ValidationError("predict needs --checkpoint (or --oracle)");
        }
        LoadedModel loaded = load_model(checkpoint);
        // Data location and decoding come from the command line; the model,
        // input and vocabulary settings from the checkpoint.
        RunConfig flags_config = resolve(predict_flags);
        RunConfig config = loaded.config;
        config.data_root = flags_config.resolved_data_root();
        config.decode = flags_config.decode;
        Dataset data = load_split(config.data_root, split);
        check_schema_compatible(loaded.schema_fingerprint, data.schema);
        options.decode = config.decode;
        result = predict_dataset(loaded.model.get(), *loaded.tokenizer,
                                 config.encoder, data, options);
      }
      std::ostringstream out;
      write_predictions(result.frames, out);
      write_text(predictions_out, out.str());
      std::fprintf(stderr,
                   "%zu frames, %ld examples, %ld invalid carryovers, %ld "
                   "empty spans\n",
                   result.frames.size(), result.examples,
                   result.diagnostics.invalid_carryover,
                   result.diagnostics.empty_span);
    } else if (*eval_cmd) {
      RunConfig config = resolve(eval_flags);
      Dataset gold = load_split(config.resolved_data_root(), eval_split);
      std::ifstream in(predictions_in);
      if (!in) throw std::runtime_error("cannot read " + predictions_in);
      MetricsReport report = evaluate_predictions(read_predictions(in), gold,
                                                  train_services(config));
      write_text(report_json, report.to_json().dump(2) + "\n");
      if (!report_csv.empty()) {
        std::ostringstream csv;
        report.write_csv(csv);
        write_text(report_csv, csv.str());
      }
    } else if (*dump_cmd) {
      RunConfig config = resolve(dump_flags);
      Dataset train_data =
          load_split(config.resolved_data_root(), config.train_split);
      Dataset data = load_split(config.resolved_data_root(), dump_split);
      WordPieceTokenizer tokenizer = make_tokenizer(config, train_data);
      std::ostringstream out;
      dump_examples(data, tokenizer, config.encoder, out, dump_limit);
      write_text(dump_out, out.str());
    } else if (*oracle_cmd) {
      RunConfig config = resolve(oracle_flags);
      Dataset data = load_split(config.resolved_data_root(), oracle_split);
      WordPieceTokenizer tokenizer = make_tokenizer(config, data);
      OracleReport report = oracle_check(data, tokenizer);
      write_text(oracle_json, report.to_json().dump(2) + "\n");
      double jga = report.gold_context.overall.jga();
      double rate = report.labels.unresolvable_rate();
      bool ok = jga >= min_jga && rate < max_unresolvable;
      std::fprintf(stderr,
                   "oracle JGA %.4f (predicted context %.4f), unresolvable "
                   "%.4f of %ld changed slots: %s\n",
                   jga, report.predicted_context.overall.jga(), rate,
                   report.labels.changed_slots, ok ? "PASS" : "FAIL");
      return ok ? 0 : 1;
    } else if (*toy_cmd) {
      write_toy_corpus(toy_out, toy);
      std::fprintf(stderr, "wrote toy corpus to %s\n", toy_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
