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

// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// non-zero when any check fails. Every threshold is a constant below.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <set>
#include <string>

#include "metric_fixtures.h"
#include "oracles.h"
#include "test_util.h"

using namespace sgdst;

namespace {

// 1. Oracle consistency.
constexpr double kOracleMinJga = 0.99;
constexpr double kMaxUnresolvableRate = 0.02;
constexpr int kOracleToyDialogues = 120;
// 2. Loss oracle.
constexpr int kLossTrials = 50;
constexpr double kLossMaxRelError = 1e-6;
// 3. Gradient check.
constexpr int kGradSamplesPerHead = 20;
constexpr int kGradEncoderSamples = 5;
constexpr double kGradMaxRelError = 1e-4;
constexpr double kGradStep = 1e-5;
// Below this, central differences sit at the float64 rounding floor.
constexpr double kGradMinMagnitude = 1e-6;
// 4. Overfit smoke test.
constexpr int kOverfitExamples = 32;
constexpr int kOverfitMaxSteps = 2000;
constexpr double kOverfitMaxLoss = 0.05;
constexpr double kOverfitJga = 1.0;
constexpr double kOverfitMaxMinutes = 10.0;
// 5. Metric fixtures.
constexpr double kMetricTolerance = 1e-12;
constexpr int kRandomFixtures = 1000;
// 7. Reduced-scale sanity proxy: TINY defaults on the full SGD corpus must
// strictly beat the SGD baseline's test JGA.
constexpr double kProxyMinJga = 0.254;
constexpr int kProxySteps = 55000;
// 8. Determinism.
constexpr int kDeterminismStep = 100;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;
int asserted_failures = 0;

// Criteria with `asserted` false still print PASS or FAIL but do not set the
// exit status.
void report(int id, const std::string& name, const Outcome& o, bool asserted = true) {
  std::printf("%s %d %s: %s%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), asserted ? "" : " [not asserted in CI]");
  std::fflush(stdout);
  failures += !o.pass;
  asserted_failures += asserted && !o.pass;
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Criterion 1 on one split.
Outcome oracle_on(const std::string& label, const Dataset& data) {
  WordPieceTokenizer tok = make_tokenizer(RunConfig{}, data);
  OracleReport r = oracle_check(data, tok);
  double jga = r.gold_context.overall.jga();
  double rate = r.labels.unresolvable_rate();
  Outcome o;
  o.pass = jga >= kOracleMinJga && rate < kMaxUnresolvableRate;
  o.detail = fmt("%s: JGA %.4f (>= %.2f) over %ld frames, unresolvable %.4f "
                 "(< %.2f) of %ld changed slots; history from own decodes JGA %.4f",
                 label.c_str(), jga, kOracleMinJga, r.gold_context.overall.frames,
                 rate, kMaxUnresolvableRate, r.labels.changed_slots,
                 r.predicted_context.overall.jga());
  return o;
}

Outcome criterion_oracle() {
  Outcome o = oracle_on("toy train", testing::toy_dataset("train", kOracleToyDialogues));
  if (const char* sgd = std::getenv("SGDST_SGD_ROOT")) {
    Outcome s = oracle_on("SGD train", load_split(sgd, "train"));
    o.pass = o.pass && s.pass;
    o.detail += "; " + s.detail;
  } else {
    o.detail += "; SGD split not checked (set SGDST_SGD_ROOT)";
  }
  return o;
}

ModelConfig tiny(int layers, int hidden) {
  ModelConfig c;
  c.encoder.layers = layers;
  c.encoder.hidden = hidden;
  c.encoder.heads = 2;
  return c;
}

Outcome criterion_loss() {
  Dataset data = testing::toy_dataset("train", 20);
  WordPieceTokenizer tok = make_tokenizer(RunConfig{}, data);
  std::vector<TurnExample> examples = gold_examples(data, tok);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < kLossTrials; ++trial) {
    Model model = Model::init(tiny(2, 32), tok.vocabulary().size(), 1000 + trial);
    RunConfig config;
    for (double& w : config.loss.w) w = weight(rng);
    config.loss.lambda1 = weight(rng);
    config.loss.lambda2 = weight(rng);
    config.loss.lambda3 = weight(rng);
    Thesaurus thes = Thesaurus::builtin();
    std::vector<PreparedExample> batch;
    std::vector<HeadOutputs> outputs;
    std::vector<HeadTargets> targets;
    for (int k = 0; k < 4; ++k) {
      const TurnExample& ex = examples[rng() % examples.size()];
      batch.push_back(prepare_example(ex, tok, config, thes, trial, k));
      outputs.push_back(model.predict(batch.back().encoded, batch.back().layout,
                                      ex.input.features));
      targets.push_back(batch.back().targets);
    }
    testing::ReferenceLoss want = testing::reference_loss(outputs, targets, config.loss);
    LossBreakdown direct = compute_loss(outputs, targets, config.loss);
    model.params().zero_grad();
    LossBreakdown taped =
        accumulate_batch_gradients(&model, batch, config, trial, /*train_mode=*/false);
    worst = std::max({worst, testing::relative_error(direct.total, want.total),
                      testing::relative_error(taped.total, want.total)});
    for (int h = 0; h < kNumHeads; ++h) {
      worst = std::max(worst, testing::relative_error(direct.components[h], want.mean[h]));
    }
  }
  return {worst < kLossMaxRelError,
          fmt("%d random batches, worst relative error %.3e (< %.0e)", kLossTrials,
              worst, kLossMaxRelError)};
}

Outcome criterion_gradients() {
  Dataset data = testing::toy_dataset("train", 12);
  WordPieceTokenizer tok = make_tokenizer(RunConfig{}, data);
  std::vector<TurnExample> examples = gold_examples(data, tok);
  EncoderOptions options;
  std::vector<PreparedExample> batch;
  for (const TurnExample* ex : testing::covering_examples(examples, tok, options)) {
    batch.push_back(prepare_eval_example(*ex, tok, options));
  }
  Model model = Model::init(tiny(1, 16), tok.vocabulary().size(), 3);
  Outcome o;
  double worst = 0.0;
  int fewest = 1 << 30;
  long total = 0;
  testing::GradientSample worst_sample;
  for (int h = 0; h < kNumHeads; ++h) {
    std::vector<testing::GradientSample> samples = testing::gradient_check(
        model, batch, h, kGradSamplesPerHead, kGradEncoderSamples, 100 + h, kGradStep,
        kGradMinMagnitude);
    std::string prefix = std::string("heads.") + head_name(h) + ".";
    int own = 0;
    for (const auto& s : samples) {
      own += s.parameter.rfind(prefix, 0) == 0;
      if (s.rel_error >= worst) {
        worst = s.rel_error;
        worst_sample = s;
      }
    }
    fewest = std::min(fewest, own);
    total += static_cast<long>(samples.size());
  }
  o.pass = fewest >= kGradSamplesPerHead && worst < kGradMaxRelError;
  o.detail = fmt("%ld samples, at least %d per head (>= %d), worst relative "
                 "error %.3e (< %.0e) at %s[%ld] (analytic %.6e, numeric %.6e), "
                 "entries with |grad| >= %.0e",
                 total, fewest, kGradSamplesPerHead, worst, kGradMaxRelError,
                 worst_sample.parameter.c_str(), worst_sample.index,
                 worst_sample.analytic, worst_sample.numeric, kGradMinMagnitude);
  return o;
}

RunConfig overfit_config(const std::filesystem::path& root,
                         const std::filesystem::path& out) {
  RunConfig c;
  c.data_root = root;
  c.output_dir = out;
  c.max_train_examples = kOverfitExamples;
  c.batch_size = 8;
  c.total_steps = kOverfitMaxSteps;
  c.eval_every = kOverfitMaxSteps;
  c.dev_dialogues = 1;
  c.early_stop_loss = 0.002;
  c.optimizer.learning_rate = 2e-3;
  c.optimizer.warmup_fraction = 0.05;
  c.optimizer.weight_decay = 0.0;
  c.encoder.word_dropout_p = 0.0;
  c.encoder.schema_augment_p = 0.0;
  c.encoder.shuffle_schema = false;
  c.model.encoder.hidden_dropout = 0.0;
  c.model.encoder.attention_dropout = 0.0;
  c.model.head_dropout = 0.0;
  c.log_every = 100000;
  c.validate();
  return c;
}

struct OverfitRun {
  Outcome outcome;
  std::unique_ptr<LoadedModel> model;
};

OverfitRun criterion_overfit(const std::filesystem::path& root,
                             const std::filesystem::path& out) {
  auto t0 = std::chrono::steady_clock::now();
  RunConfig config = overfit_config(root, out);
  TrainOptions quiet;
  quiet.verbose = false;
  TrainResult r = train(config, quiet);
  double minutes = seconds_since(t0) / 60.0;

  OverfitRun run;
  run.model = std::make_unique<LoadedModel>(load_model(r.last_checkpoint));
  LoadedModel& m = *run.model;
  Dataset train_data = load_split(root, config.train_split);
  std::vector<TurnExample> examples =
      gold_examples(train_data, *m.tokenizer, kOverfitExamples);
  double jga = turn_level_jga(m.model.get(), examples, *m.tokenizer, m.config.encoder);
  std::vector<PreparedExample> all;
  for (const TurnExample& ex : examples) {
    all.push_back(prepare_eval_example(ex, *m.tokenizer, m.config.encoder));
  }
  m.model->params().zero_grad();
  double loss = accumulate_batch_gradients(m.model.get(), all, m.config, 0, false).total;

  run.outcome.pass = static_cast<int>(examples.size()) == kOverfitExamples &&
                     r.final_step <= kOverfitMaxSteps && jga >= kOverfitJga &&
                     loss < kOverfitMaxLoss && minutes < kOverfitMaxMinutes;
  run.outcome.detail =
      fmt("%zu examples, stopped at step %d (<= %d), training-set JGA %.4f "
          "(= %.1f), full-set loss %.4f (< %.2f), %.1f min (< %.0f)",
          examples.size(), r.final_step, kOverfitMaxSteps, jga, kOverfitJga, loss,
          kOverfitMaxLoss, minutes, kOverfitMaxMinutes);
  return run;
}

Outcome criterion_metrics() {
  Outcome o;
  int fixtures = 0;
  for (const testing::MetricFixture& f : testing::hand_fixtures()) {
    ++fixtures;
    bool small = f.gold.size() <= 5;
    bool ok = small &&
              std::abs(joint_goal_accuracy(f.predicted, f.gold) - f.jga) < kMetricTolerance &&
              std::abs(average_goal_accuracy(f.predicted, f.gold) - f.avg_ga) < kMetricTolerance &&
              std::abs(intent_accuracy(f.predicted, f.gold) - f.intent) < kMetricTolerance &&
              std::abs(requested_slot_f1(f.predicted, f.gold) - f.req_f1) < kMetricTolerance;
    if (!ok) {
      o.pass = false;
      o.detail += "fixture '" + f.name + "' differs; ";
    }
  }
  std::mt19937_64 rng(20261016);
  int violations = 0;
  int mismatches = 0;
  for (int trial = 0; trial < kRandomFixtures; ++trial) {
    testing::MetricFixture f = testing::random_fixture(rng, 1 + trial % 5, true);
    double jga = joint_goal_accuracy(f.predicted, f.gold);
    double ga = average_goal_accuracy(f.predicted, f.gold);
    testing::ReferenceMetrics ref = testing::reference_metrics(f.predicted, f.gold);
    violations += jga > ga + kMetricTolerance;
    mismatches += std::abs(jga - ref.jga) >= kMetricTolerance ||
                  std::abs(ga - ref.avg_ga) >= kMetricTolerance ||
                  std::abs(intent_accuracy(f.predicted, f.gold) - ref.intent) >= kMetricTolerance ||
                  std::abs(requested_slot_f1(f.predicted, f.gold) - ref.req_f1) >= kMetricTolerance;
  }
  o.pass = o.pass && violations == 0 && mismatches == 0;
  o.detail += fmt("%d hand fixtures match (tolerance %.0e); %d random fixtures: "
                  "%d JGA > Avg GA, %d disagree with brute force",
                  fixtures, kMetricTolerance, kRandomFixtures, violations, mismatches);
  return o;
}

Outcome criterion_ablation(LoadedModel& m, const std::vector<Dataset>& splits) {
  std::vector<TurnExample> examples;
  for (const Dataset& d : splits) {
    std::vector<TurnExample> more = gold_examples(d, *m.tokenizer);
    examples.insert(examples.end(), more.begin(), more.end());
  }
  Outcome o;
  long violations = 0;
  std::string counts;
  for (int c : {kCarryInSysUttr, kCarryInServiceHist, kCarryInCrossServiceHist}) {
    DecodeOptions ablated;
    ablated.disabled_carryover = {c};
    long changed = 0;
    long argmax_c = 0;
    for (const TurnExample& ex : examples) {
      TurnDecode a = decode_with_model(m.model.get(), ex, *m.tokenizer,
                                       m.config.encoder, {}, nullptr);
      TurnDecode b = decode_with_model(m.model.get(), ex, *m.tokenizer,
                                       m.config.encoder, ablated, nullptr);
      for (size_t i = 0; i < a.updates.size(); ++i) {
        const SlotUpdate& x = a.updates[i];
        const SlotUpdate& y = b.updates[i];
        bool eligible = x.carryover_argmax == c && x.user_argmax == kUserNone;
        argmax_c += eligible;
        if (x == y) continue;
        ++changed;
        violations += !(eligible && y.kind == SlotUpdate::Kind::kKeep);
      }
      // Every difference in the state must come from a changed slot update.
      for (const auto& [slot, value] : b.state.slot_values) {
        auto it = a.state.slot_values.find(slot);
        int pos = ex.service->informable_position(ex.service->slot_index(slot));
        if ((it == a.state.slot_values.end() || it->second != value) &&
            a.updates[pos] == b.updates[pos]) {
          ++violations;
        }
      }
      violations += a.state.active_intent != b.state.active_intent ||
                    a.state.requested_slots != b.state.requested_slots;
    }
    counts += fmt("%s %ld changed of %ld with that argmax; ", carryover_name(c),
                  changed, argmax_c);
  }
  o.pass = violations == 0;
  o.detail = counts + fmt("%zu train and dev examples, %ld out-of-class differences", examples.size(),
                          violations);
  return o;
}

// Test-split JGA of a TINY model trained with RunConfig defaults on `root`.
double proxy_jga(const std::filesystem::path& root, const std::filesystem::path& out) {
  RunConfig c;
  c.data_root = root;
  c.output_dir = out;
  c.total_steps = kProxySteps;
  c.validate();
  TrainResult r = train(c, TrainOptions{});
  LoadedModel m = load_model(r.best_checkpoint);
  Dataset test = load_split(root, "test");
  std::set<std::string> seen;
  Dataset train_split = load_split(root, "train");
  for (const Service& s : train_split.schema.services()) seen.insert(s.name());
  PredictResult pred =
      predict_dataset(m.model.get(), *m.tokenizer, m.config.encoder, test, {});
  return evaluate_predictions(pred.frames, test, seen).overall.jga();
}

// The full-scale run is documented only. The shipped config is checked here
// and the sanity proxy runs when SGDST_SGD_ROOT and SGDST_PROXY_OUT are set.
Outcome criterion_full_scale() {
  std::filesystem::path path =
      std::filesystem::path(SGDST_SOURCE_DIR) / "configs" / "full_scale_bert_base.conf";
  Outcome o;
  try {
    RunConfig c = load_config(path);
    const EncoderSpec& e = c.model.encoder;
    o.pass = e.kind == EncoderSpec::Kind::kPretrained && e.layers == 12 &&
             e.hidden == 768 && c.total_steps == 55000;
    o.detail = fmt("shipped config %s (pretrained %d x %d, %d steps); full-scale "
                   "targets JGA 82.5 +- 1.0, intent accuracy 94.7 +- 0.5, requested "
                   "slot F1 99.4 +- 0.1 are not run here",
                   o.pass ? "matches" : "DOES NOT match", e.layers, e.hidden,
                   c.total_steps);
  } catch (const std::exception& ex) {
    o.pass = false;
    o.detail = std::string("cannot load ") + path.string() + ": " + ex.what();
    return o;
  }
  const char* sgd = std::getenv("SGDST_SGD_ROOT");
  const char* out = std::getenv("SGDST_PROXY_OUT");
  if (sgd == nullptr || out == nullptr) {
    o.pass = false;
    o.detail += fmt("; sanity proxy (TINY, %d steps, test JGA > %.3f) not run: "
                    "set SGDST_SGD_ROOT and SGDST_PROXY_OUT",
                    kProxySteps, kProxyMinJga);
    return o;
  }
  double jga = proxy_jga(sgd, out);
  o.pass = o.pass && jga > kProxyMinJga;
  o.detail += fmt("; sanity proxy test JGA %.4f (> %.3f)", jga, kProxyMinJga);
  return o;
}

Outcome criterion_determinism(const std::filesystem::path& root,
                              const std::filesystem::path& out) {
  Dataset data = load_split(root, "train");
  RunConfig config;  // augmentation, shuffling and word dropout all on
  WordPieceTokenizer tok = make_tokenizer(config, data);
  std::vector<TurnExample> examples = gold_examples(data, tok);
  Thesaurus thes = Thesaurus::builtin();
  long differing = 0;
  for (size_t n = 0; n < examples.size(); ++n) {
    PreparedExample a = prepare_example(examples[n], tok, config, thes, 7, static_cast<int>(n));
    PreparedExample b = prepare_example(examples[n], tok, config, thes, 7, static_cast<int>(n));
    bool same = a.encoded == b.encoded;
    for (int h = 0; h < kNumHeads; ++h) same = same && a.targets[h] == b.targets[h];
    differing += !same;
  }

  double loss[2];
  for (int run = 0; run < 2; ++run) {
    RunConfig c;
    c.data_root = root;
    c.output_dir = out / ("run" + std::to_string(run));
    c.batch_size = 4;
    c.total_steps = kDeterminismStep;
    c.eval_every = kDeterminismStep;
    c.dev_dialogues = 1;
    TrainOptions quiet;
    quiet.verbose = false;
    TrainResult r = train(c, quiet);
    loss[run] = r.losses.at(kDeterminismStep - 1).loss.total;
  }
  bool same = std::memcmp(&loss[0], &loss[1], sizeof(double)) == 0;
  return {differing == 0 && same,
          fmt("%zu encodings, %ld differ; step-%d loss %.17g vs %.17g (%s)",
              examples.size(), differing, kDeterminismStep, loss[0], loss[1],
              same ? "bit-identical" : "different")};
}

}  // namespace

int main() {
  testing::TempDir dir("acceptance");
  ToyCorpusOptions toy;
  toy.train_dialogues = 30;
  toy.dev_dialogues = 10;
  toy.test_dialogues = 10;
  write_toy_corpus(dir.path() / "corpus", toy);

  report(1, "oracle consistency", criterion_oracle());
  report(2, "loss oracle", criterion_loss());
  report(3, "gradient check", criterion_gradients());
  OverfitRun overfit = criterion_overfit(dir.path() / "corpus", dir.path() / "overfit");
  report(4, "overfit smoke test", overfit.outcome);
  report(5, "metric fixtures", criterion_metrics());
  std::vector<Dataset> splits = {load_split(dir.path() / "corpus", "train"),
                                 load_split(dir.path() / "corpus", "dev")};
  report(6, "ablation locality", criterion_ablation(*overfit.model, splits));
  report(7, "full-scale reproduction", criterion_full_scale(), /*asserted=*/false);
  report(8, "determinism", criterion_determinism(dir.path() / "corpus", dir.path() / "det"));
  std::printf("%d of 8 criteria failed, %d of them asserted\n", failures,
              asserted_failures);
  return asserted_failures == 0 ? 0 : 1;
}
