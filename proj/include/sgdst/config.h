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

// Run configuration as a flat "key = value" file.
//
//   # comment
//   data.root = /data/sgd
//   model.encoder = tiny
//   train.total_steps = 2000
//
// Unknown keys and malformed values are rejected with the line number.

#ifndef SGDST_CONFIG_H_
#define SGDST_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "sgdst/decoding.h"
#include "sgdst/encoding.h"
#include "sgdst/model.h"

namespace sgdst {

inline constexpr const char* kDataRootEnv = "SGDST_DATA_ROOT";

struct OptimizerConfig {
  double learning_rate = 2e-5;
  double warmup_fraction = 0.10;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-6;
  double max_grad_norm = 1.0;  // 0 disables clipping
};

struct RunConfig {
  // Data. An empty root falls back to $SGDST_DATA_ROOT.
  std::filesystem::path data_root;
  std::string train_split = "train";
  std::string dev_split = "dev";
  std::string test_split = "test";
  std::filesystem::path output_dir = "runs/default";
  std::filesystem::path vocab_path;      // empty: built from train text
  std::filesystem::path thesaurus_path;  // empty: built-in table
  int vocab_min_count = 1;
  int max_train_examples = 0;  // 0 keeps all

  EncoderOptions encoder;
  ModelConfig model;
  LossWeights loss;
  OptimizerConfig optimizer;
  DecodeOptions decode;

  int batch_size = 16;
  int total_steps = 55000;
  int eval_every = 4000;
  int dev_dialogues = 0;  // fixed dev subsample for periodic eval; 0 = all
  int log_every = 100;
  double early_stop_loss = 0.0;  // stop once the batch loss falls below; 0 = off

  // Seeds. Zero-valued component seeds derive from `seed`.
  std::uint64_t seed = 42;
  std::uint64_t data_seed = 0;
  std::uint64_t augment_seed = 0;
  std::uint64_t init_seed = 0;

  std::uint64_t effective_data_seed() const;
  std::uint64_t effective_augment_seed() const;
  std::uint64_t effective_init_seed() const;
  // Dropout masks; derived from the init seed so model randomness is one
  // ablatable source.
  std::uint64_t dropout_seed() const;

  std::filesystem::path resolved_data_root() const;
  int warmup_steps() const;

  // Throws ValidationError naming the offending key.
  void validate() const;
};

RunConfig parse_config(std::istream& in, const std::string& origin);
RunConfig load_config(const std::filesystem::path& path);

// Applies one "key = value" assignment, as from the command line.
void set_config_value(RunConfig* config, const std::string& key,
                      const std::string& value);

// Every key in a fixed order with its current value.
std::string config_to_text(const RunConfig& config);

// Hash over the keys that change the training trajectory; output paths,
// logging and evaluation cadence are excluded so a resumed run may change
// them.
std::string config_hash(const RunConfig& config);

std::vector<std::string> config_keys();

// Named switches for the input and model ablations:
// no_system_actions, slot_descriptions, no_previous_state,
// no_schema_augmentation, no_word_dropout, no_binary_features.
void apply_ablation(RunConfig* config, const std::string& name);
std::vector<std::string> ablation_names();

}  // namespace sgdst

#endif  // SGDST_CONFIG_H_
