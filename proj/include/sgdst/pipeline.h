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

// Training, prediction, evaluation and the oracle consistency check.

#ifndef SGDST_PIPELINE_H_
#define SGDST_PIPELINE_H_

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgdst/checkpoint.h"
#include "sgdst/config.h"
#include "sgdst/decoding.h"
#include "sgdst/evaluation.h"
#include "sgdst/labeling.h"
#include "sgdst/model.h"
#include "sgdst/tokenizer.h"

namespace sgdst {

struct Dataset {
  Schema schema;
  std::vector<Dialogue> dialogues;
};

// <root>/<split>/schema.json plus every dialogue file in that directory.
Dataset load_split(const std::filesystem::path& root, const std::string& split);

// Pretrained encoders use <pretrained_dir>/vocab.txt; otherwise data.vocab
// when set, else a vocabulary built from the training utterances, system
// actions and schema text. Marker tokens are always present.
WordPieceTokenizer make_tokenizer(const RunConfig& config, const Dataset& train);

// Gold-context labelled examples. `limit` > 0 keeps the first `limit`.
// Examples point into `data.schema`, which must outlive them.
std::vector<TurnExample> gold_examples(const Dataset& data,
                                       const WordPieceTokenizer& tokenizer,
                                       int limit = 0);

// Linear warmup over the first warmup_steps(), then linear decay to zero at
// total_steps. `step` is zero-based.
double learning_rate_at(const RunConfig& config, int step);

// Decoupled weight decay (AdamW). Biases and LayerNorm parameters are not
// decayed.
class AdamW {
 public:
  AdamW(const OptimizerConfig& config, const ParameterStore& params);
  // `t` is the one-based update count used for bias correction.
  void update(ParameterStore* params, double lr, int t);
  NamedTensors& first_moments() { return m_; }
  NamedTensors& second_moments() { return v_; }
  const NamedTensors& first_moments() const { return m_; }
  const NamedTensors& second_moments() const { return v_; }

 private:
  OptimizerConfig config_;
  NamedTensors m_;
  NamedTensors v_;
  std::vector<bool> decay_;
};

// Global L2 norm of all gradients; rescales them to `max_norm` when larger.
// Returns the norm before clipping.
double clip_gradients(ParameterStore* params, double max_norm);

struct PreparedExample {
  const TurnExample* example = nullptr;
  EncodedInput encoded;
  HeadLayout layout;
  HeadTargets targets;
};

// Training-time encoding (augmentation, shuffling, word dropout) seeded by
// (augment seed, step, position in batch).
PreparedExample prepare_example(const TurnExample& example,
                                const WordPieceTokenizer& tokenizer,
                                const RunConfig& config,
                                const Thesaurus& thesaurus, int step,
                                int position);

// Deterministic encoding used for evaluation and oracle checks.
PreparedExample prepare_eval_example(const TurnExample& example,
                                     const WordPieceTokenizer& tokenizer,
                                     const EncoderOptions& options);

// Accumulates gradients of the batch loss into the model parameters (which
// should be zeroed first) and returns the loss breakdown. Dropout masks are
// seeded by (dropout seed, step, position); `train_mode` false disables
// dropout.
LossBreakdown accumulate_batch_gradients(Model* model,
                                         const std::vector<PreparedExample>& batch,
                                         const RunConfig& config, int step,
                                         bool train_mode = true);

struct LossRecord {
  int step = 0;  // zero-based step index
  double learning_rate = 0.0;
  double grad_norm = 0.0;
  LossBreakdown loss;
};

struct TrainOptions {
  std::filesystem::path resume;  // checkpoint to continue from
  bool force = false;            // resume despite a config hash mismatch
  int stop_after = 0;            // > 0: stop after this many steps this run
  bool verbose = true;
};

struct TrainResult {
  int final_step = 0;  // steps completed overall
  double best_dev_jga = -1.0;
  int best_step = -1;
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  std::filesystem::path loss_log;
  std::vector<LossRecord> losses;  // this run only
};

// Trains on gold-context labels and selects the checkpoint with the best dev
// JGA under predicted-context decoding. Writes best.ckpt, last.ckpt and
// loss_log.tsv to the output directory.
TrainResult train(const RunConfig& config, const TrainOptions& options);

// A model with its tokenizer and the configuration it was trained with.
struct LoadedModel {
  RunConfig config;
  std::unique_ptr<WordPieceTokenizer> tokenizer;
  std::unique_ptr<Model> model;
  nlohmann::json schema_fingerprint;
};

LoadedModel load_model(const std::filesystem::path& checkpoint);

// Model-driven state for one example, using the deterministic encoding.
TurnDecode decode_with_model(Model* model, const TurnExample& example,
                             const WordPieceTokenizer& tokenizer,
                             const EncoderOptions& options,
                             const DecodeOptions& decode,
                             DecodeDiagnostics* diagnostics);

struct PredictOptions {
  DecodeOptions decode;
  int max_dialogues = 0;  // 0 = all
};

struct PredictResult {
  std::vector<FrameRecord> frames;
  DecodeDiagnostics diagnostics;
  long examples = 0;
  // Per-slot decisions, keyed "dialogue/turn/service/slot", for the carryover
  // ablation diff.
  std::map<std::string, SlotUpdate> slot_updates;
};

// Predicts one dialogue from user text and system turns alone. `unlabeled`
// must carry no user annotations; `involvement` is the only gold-derived input.
PredictResult predict_unlabeled_dialogue(
    Model* model, const WordPieceTokenizer& tokenizer,
    const EncoderOptions& options, const Schema& schema,
    const Dialogue& unlabeled,
    const std::vector<std::vector<std::string>>& involvement,
    const DecodeOptions& decode);

// Turn-by-turn prediction with the context advanced by the model's own
// states. Gold states are read only to decide which services are involved.
PredictResult predict_dataset(Model* model, const WordPieceTokenizer& tokenizer,
                              const EncoderOptions& options, const Dataset& data,
                              const PredictOptions& predict);

// Same traversal with one-hot gold head labels in place of the model.
PredictResult predict_oracle(const WordPieceTokenizer& tokenizer,
                             const EncoderOptions& options, const Dataset& data,
                             const PredictOptions& predict);

// Services of the training split count as seen.
MetricsReport evaluate_predictions(const std::vector<FrameRecord>& predicted,
                                   const Dataset& gold,
                                   const std::set<std::string>& train_services);

// Fraction of examples whose model-decoded state equals the gold state, each
// decoded from its gold previous state.
double turn_level_jga(Model* model, const std::vector<TurnExample>& examples,
                      const WordPieceTokenizer& tokenizer,
                      const EncoderOptions& options);

struct OracleReport {
  LabelStats labels;
  MetricsReport gold_context;       // every turn decoded from gold history
  MetricsReport predicted_context;  // errors propagate through the dialogue
  DecodeDiagnostics diagnostics;

  nlohmann::json to_json() const;
};

OracleReport oracle_check(const Dataset& data,
                          const WordPieceTokenizer& tokenizer);

// Labels and rendered input of each example, one block per example.
void dump_examples(const Dataset& data, const WordPieceTokenizer& tokenizer,
                   const EncoderOptions& options, std::ostream& out,
                   int limit = 0);

}  // namespace sgdst

#endif  // SGDST_PIPELINE_H_
