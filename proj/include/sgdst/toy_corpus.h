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

// Synthetic corpus in the SGD on-disk format, for tests and desk-scale runs.
//
// Dialogues chain one to three services and exercise every slot source the
// trackers model: user informs with character spans, dontcare, values
// accepted from the last system turn, values offered earlier in the same
// service, and values carried over from a previous service. A small fraction
// of slots is deliberately left without any source.

#ifndef SGDST_TOY_CORPUS_H_
#define SGDST_TOY_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sgdst/corpus.h"

namespace sgdst {

struct ToyCorpusOptions {
  int train_dialogues = 120;
  int dev_dialogues = 30;
  int test_dialogues = 30;
  std::uint64_t seed = 13;
  // Per-dialogue probability of one slot value with no observable source.
  double unresolvable_p = 0.04;
};

struct ToySplit {
  Schema schema;
  std::vector<Dialogue> dialogues;
};

// Every service the generator knows.
std::vector<Service> toy_services();

// `split` is "train", "dev" or "test"; dev and test include services absent
// from train.
ToySplit generate_toy_split(const std::string& split, int num_dialogues,
                            std::uint64_t seed, double unresolvable_p = 0.04);

// Writes <root>/<split>/{schema.json, dialogues_001.json} for all splits.
void write_toy_corpus(const std::filesystem::path& root,
                      const ToyCorpusOptions& options);

}  // namespace sgdst

#endif  // SGDST_TOY_CORPUS_H_
