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

// Binary checkpoints: the magic "SGDSTCK1", a little-endian uint64 header
// length, a JSON header, then float64 tensor data in header order. Writes go
// to a temporary file that is renamed into place.

#ifndef SGDST_CHECKPOINT_H_
#define SGDST_CHECKPOINT_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sgdst/autograd.h"
#include "sgdst/corpus.h"

namespace sgdst {

using NamedTensors = std::vector<std::pair<std::string, Matrix>>;

struct Checkpoint {
  int step = 0;  // optimizer steps completed
  std::string config_text;
  std::string config_hash;
  double best_metric = -1.0;
  int best_step = -1;
  std::vector<std::string> vocabulary;
  // Intents and slots of each training service; prediction refuses data whose
  // schema disagrees for a service of the same name.
  nlohmann::json schema_fingerprint = nlohmann::json::object();
  NamedTensors params;
  // AdamW moments; empty in inference-only checkpoints.
  NamedTensors adam_m;
  NamedTensors adam_v;
};

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

NamedTensors export_values(const ParameterStore& store);
// Names and shapes must match exactly.
void import_values(const NamedTensors& tensors, ParameterStore* store);

nlohmann::json schema_fingerprint(const Schema& schema);
// Throws ValidationError naming the first service that differs.
void check_schema_compatible(const nlohmann::json& fingerprint,
                             const Schema& schema);

}  // namespace sgdst

#endif  // SGDST_CHECKPOINT_H_
