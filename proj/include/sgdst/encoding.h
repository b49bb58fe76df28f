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

// Five-part input serialization:
//
//   [CLS] system actions [SEP] user utterance [SEP]
//   service prev-intent [INTENT] intent ... [SEP]
//   [SLOT] slot prev-value [VALUE] value ... [SEP]
//   service [SLOT] (system) slot value ... [SEP]
//
// Parts 1-2 are segment 0 and the schema parts are segment 1. The fifth part
// (with its separator) is omitted when there is no history from other
// services.

#ifndef SGDST_ENCODING_H_
#define SGDST_ENCODING_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sgdst/corpus.h"
#include "sgdst/labeling.h"
#include "sgdst/tokenizer.h"

namespace sgdst {

using Rng = std::mt19937_64;

struct EncoderOptions {
  int max_len = 512;
  bool use_system_actions = true;
  bool use_slot_descriptions = false;
  bool include_previous_state = true;
  double word_dropout_p = 0.1;
  double schema_augment_p = 0.1;
  bool shuffle_schema = true;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct IndexMap {
  int cls = 0;
  std::vector<int> intents;  // by intent index
  std::vector<int> slots;    // by slot index
  // By slot index then value index; empty unless informable categorical.
  std::vector<std::vector<int>> values;
  std::vector<int> prev_slots;  // by S_prev index, -1 once truncated away
  int user_begin = 0;           // kept user tokens occupy [begin, end)
  int user_end = 0;
  int user_skipped = 0;  // leading user tokens removed by truncation

  // Sequence position of canonical user token `i`, or -1 when truncated.
  int user_position(int i) const {
    int p = user_begin + i - user_skipped;
    return (i < user_skipped || p >= user_end) ? -1 : p;
  }
  int num_user_tokens() const { return user_end - user_begin; }
};

struct EncodedInput {
  std::vector<int> token_ids;
  std::vector<int> segment_ids;
  std::vector<int> attention_mask;
  IndexMap index_map;
  bool overflow = false;

  int size() const { return static_cast<int>(token_ids.size()); }
  bool operator==(const EncodedInput& other) const;
};

// Surface strings of the schema elements in parts 3-4.
struct SchemaTexts {
  std::string service;
  std::vector<std::string> intents;
  std::vector<std::string> slots;
  std::vector<std::string> slot_descriptions;
  std::vector<std::vector<std::string>> values;  // informable categorical only
};

struct PartElement {
  int index = 0;
  std::vector<int> tokens;
  int marker_offset = 0;  // position of the marker token inside `tokens`
};

struct SlotElement {
  int index = 0;
  std::vector<int> tokens;  // [SLOT] first
  std::vector<PartElement> values;
};

struct InputParts {
  std::vector<int> part1;
  std::vector<int> part2;
  int part2_skipped = 0;
  std::vector<int> part3_header;
  std::vector<PartElement> intents;
  std::vector<SlotElement> slots;
  std::vector<PartElement> prev_slots;
  int num_prev_slots = 0;  // before truncation

  int length() const;
  int mandatory_length() const;
};

class Thesaurus {
 public:
  Thesaurus() = default;
  // A small built-in synonym table for common schema words.
  static Thesaurus builtin();
  // One entry per line: word<TAB>synonym,synonym,...
  static Thesaurus load(const std::filesystem::path& path);

  const std::vector<std::string>* synonyms(const std::string& word) const;
  void add(const std::string& word, std::vector<std::string> synonyms);
  bool empty() const { return table_.empty(); }

 private:
  std::map<std::string, std::vector<std::string>> table_;
};

// "act slot value ... ; act slot value ..." with normalized act/slot names.
std::string serialize_system_actions(const std::vector<Action>& actions);

SchemaTexts schema_texts(const Service& service);

// One of synonym replacement or random word swap.
std::string augment_text(const std::string& text, Rng& rng,
                         const Thesaurus& thesaurus);
SchemaTexts apply_schema_augmentation(SchemaTexts texts, double p, Rng& rng,
                                      const Thesaurus& thesaurus);

InputParts build_parts(const TurnInput& input, const Service& service,
                       const SchemaTexts& texts,
                       const WordPieceTokenizer& tokenizer,
                       const EncoderOptions& options);

// Permutes intents, slots, values within each slot and part-5 entries.
void shuffle_schema_elements(InputParts* parts, Rng& rng);

// Trims part-5 tail entries, then part 1, then leading user tokens. Returns
// true when parts 3-4 alone do not fit.
bool truncate(InputParts* parts, int max_len);

EncodedInput assemble(const InputParts& parts, const Service& service,
                      const SpecialIds& special);

// Deterministic encoding: no augmentation.
EncodedInput build_input(const TurnInput& input, const Service& service,
                         const WordPieceTokenizer& tokenizer,
                         const EncoderOptions& options);

// Training encoding: schema augmentation, shuffling, truncation and word
// dropout, in that order.
EncodedInput build_training_input(const TurnInput& input,
                                  const Service& service,
                                  const WordPieceTokenizer& tokenizer,
                                  const EncoderOptions& options,
                                  const Thesaurus& thesaurus, Rng& rng);

void apply_word_dropout(EncodedInput* encoded, double p, Rng& rng, int unk_id);

// Human-readable rendering of the five parts.
std::string render_encoded(const EncodedInput& encoded,
                           const WordPieceTokenizer& tokenizer);

}  // namespace sgdst

#endif  // SGDST_ENCODING_H_
