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

// BERT-style encoder with nine two-layer classification heads and the
// weighted multi-task loss.
//
// Parameter names follow the Hugging Face BertModel layout so pretrained
// weights can be imported directly (see tools/export_bert.py).

#ifndef SGDST_MODEL_H_
#define SGDST_MODEL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sgdst/autograd.h"
#include "sgdst/dialogue_context.h"
#include "sgdst/encoding.h"
#include "sgdst/labeling.h"
#include "sgdst/tokenizer.h"

namespace sgdst {

struct EncoderSpec {
  enum class Kind { kTiny, kPretrained };
  Kind kind = Kind::kTiny;
  std::filesystem::path pretrained_dir;  // kPretrained only

  int layers = 2;
  int hidden = 64;
  int heads = 2;
  int intermediate = 0;  // 0 means 4 * hidden
  int max_position = 512;
  int type_vocab = 2;
  double layer_norm_eps = 1e-12;
  double hidden_dropout = 0.1;
  double attention_dropout = 0.1;
  double initializer_range = 0.02;

  int intermediate_size() const {
    return intermediate > 0 ? intermediate : 4 * hidden;
  }
  void validate() const;
};

struct ModelConfig {
  EncoderSpec encoder;
  int head_hidden = 0;  // 0 means the encoder hidden size
  double head_dropout = 0.3;
  bool use_binary_features = true;
  static constexpr int kBinaryFeatureDim = 6;

  int head_hidden_size() const {
    return head_hidden > 0 ? head_hidden : encoder.hidden;
  }
  void validate() const;
};

enum Head {
  kHeadIntentStatus = 0,
  kHeadIntentValue,
  kHeadRequested,
  kHeadUserStatus,
  kHeadCarryover,
  kHeadCategorical,
  kHeadStart,
  kHeadEnd,
  kHeadCross,
};
inline constexpr int kNumHeads = 9;

const char* head_name(int head);
// Softmax heads classify rows; the others are independent sigmoids.
bool is_softmax_head(int head);

// Logit shapes per example (n_inf informable slots, U kept user tokens,
// P kept S_prev entries):
//   intent_status 1x2, intent_value Ix1, requested Sx1, user_status n_infx3,
//   carryover n_infx4, categorical (sum of value counts)x1,
//   start/end n_noncat x U, cross n_inf x P.
struct HeadOutputs {
  std::array<Matrix, kNumHeads> logits;
  Matrix& operator[](int head) { return logits[head]; }
  const Matrix& operator[](int head) const { return logits[head]; }
};

// Maps head rows/columns back to schema and canonical indices.
struct HeadLayout {
  int num_intents = 0;
  int num_slots = 0;
  int num_informable = 0;
  std::vector<int> informable_slots;  // slot index per informable position
  // Informable positions of categorical slots and the first categorical row
  // of each.
  std::vector<int> categorical_slots;
  std::vector<int> value_offsets;
  std::vector<int> value_counts;
  std::vector<int> noncategorical_slots;  // informable positions
  int user_skipped = 0;
  int num_user_tokens = 0;             // kept tokens
  std::vector<int> cross_entries;      // S_prev index of each cross column
  int num_prev_slots = 0;              // before truncation
};

HeadLayout make_layout(const Service& service, const EncodedInput& encoded);

// Flattened class targets per head; -1 marks a masked target. Softmax heads
// have one entry per row; sigmoid heads one per logit in column-major order.
struct HeadTargets {
  std::array<std::vector<int>, kNumHeads> targets;
  std::vector<int>& operator[](int head) { return targets[head]; }
  const std::vector<int>& operator[](int head) const { return targets[head]; }
  int count(int head) const;
};

HeadTargets align_targets(const TurnLabels& labels, const Service& service,
                          const HeadLayout& layout);

struct LossWeights {
  std::array<double, 8> w{1, 1, 1, 1, 1, 1, 1, 1};
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = 1.0;

  // Effective multiplier of each head's mean loss in the total.
  double head_weight(int head) const;
  void validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  std::array<double, kNumHeads> components{};  // mean per head, unweighted
  std::array<int, kNumHeads> counts{};
};

// Value-only loss over a batch: per-head mean over unmasked targets, then the
// weighted composition. Heads without unmasked targets contribute 0.
LossBreakdown compute_loss(const std::vector<HeadOutputs>& outputs,
                           const std::vector<HeadTargets>& targets,
                           const LossWeights& weights);

// Per-head coefficient weight / count over the batch, used to build each
// example's share of the batch loss on its own tape.
std::array<double, kNumHeads> loss_coefficients(
    const std::vector<HeadTargets>& batch, const LossWeights& weights);

using HeadVars = std::array<Var, kNumHeads>;

// Sum over heads of coef[h] * (sum of that head's cross-entropies).
Var example_loss(Tape& tape, const HeadVars& logits, const HeadTargets& targets,
                 const std::array<double, kNumHeads>& coefficients);

class Model {
 public:
  // TINY: random init from `seed`. PRETRAINED: loads the encoder from
  // config.pretrained_dir, appending rows for vocabulary entries beyond the
  // pretrained size. Heads are always random.
  static Model init(const ModelConfig& config, int vocab_size,
                    std::uint64_t seed);
  // Empty model with all parameters registered and zero-valued; used before
  // loading a checkpoint.
  static Model shell(const ModelConfig& config, int vocab_size);

  const ModelConfig& config() const { return config_; }
  int vocab_size() const { return vocab_size_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  // Contextual token states, one row per input position. `rng` enables
  // dropout when non-null.
  Var encode(Tape& tape, const EncodedInput& encoded, Rng* rng);

  HeadVars forward(Tape& tape, const EncodedInput& encoded,
                   const HeadLayout& layout,
                   const std::vector<BinaryFeatures>& features, Rng* rng);

  // Eval-mode forward returning plain logits.
  HeadOutputs predict(const EncodedInput& encoded, const HeadLayout& layout,
                      const std::vector<BinaryFeatures>& features);

 private:
  Model(ModelConfig config, int vocab_size);
  void register_parameters();
  Var head(Tape& tape, const std::string& name, Var input,
           const Matrix* features, Rng* rng);

  ModelConfig config_;
  int vocab_size_ = 0;
  ParameterStore params_;
};

// Encoder parameter count for a BERT configuration, optionally including the
// pooler (which this model does not use).
long encoder_parameter_count(const EncoderSpec& spec, int vocab_size,
                             bool with_pooler);

// Reads a Hugging Face style config.json into `spec` (architecture fields).
EncoderSpec read_pretrained_config(const std::filesystem::path& dir);

// Weights file written by tools/export_bert.py: magic, JSON header with
// tensor names and shapes, then little-endian float32 data.
ParameterStore read_weights_file(const std::filesystem::path& path);

}  // namespace sgdst

#endif  // SGDST_MODEL_H_
