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

// Turn examples and gold-label acquisition for the nine heads.
//
// A slot whose gold value changed in a turn is attributed to exactly one
// source, searched in the same order the decoder applies them: a user INFORM
// in the utterance, dontcare, the preceding system utterance, earlier system
// turns of the same service, and finally another service's history. Slots with
// no source are marked unresolvable and carry no loss.

#ifndef SGDST_LABELING_H_
#define SGDST_LABELING_H_

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sgdst/corpus.h"
#include "sgdst/dialogue_context.h"
#include "sgdst/tokenizer.h"

namespace sgdst {

enum IntentStatus { kIntentNone = 0, kIntentActive = 1 };
enum UserStatus { kUserNone = 0, kUserActive = 1, kUserDontCare = 2 };
enum CarryoverStatus {
  kCarryNone = 0,
  kCarryInSysUttr = 1,
  kCarryInServiceHist = 2,
  kCarryInCrossServiceHist = 3,
};
inline constexpr int kNumUserStatus = 3;
inline constexpr int kNumCarryoverStatus = 4;

const char* carryover_name(int status);
// Accepts "in_sys_uttr", "in_service_hist", "in_cross_service_hist".
int parse_carryover_name(std::string_view name);

struct TokenSpan {
  int start = 0;  // user-token indices, inclusive
  int end = 0;
  bool operator==(const TokenSpan&) const = default;
};

// Everything the model and decoder may observe for one (turn, service).
struct TurnInput {
  std::vector<Action> system_actions;  // turn t-1, active service only
  std::string system_utterance;
  std::string user_utterance;
  std::vector<Token> user_tokens;
  std::string prev_intent{kNoneIntent};
  std::map<std::string, std::string> prev_usr_values;
  std::map<std::string, std::string> sys_uttr_values;
  std::map<std::string, std::string> prev_sys_values;
  std::vector<PrevSlotEntry> s_prev;
  std::vector<BinaryFeatures> features;  // one per slot of the service
};

// Per-informable-slot vectors are indexed by position in Service::informable().
struct TurnLabels {
  int intent_status = kIntentNone;
  int intent_value = -1;  // intent index, meaningful when ACTIVE
  std::vector<int> requested;  // over all slots

  std::vector<int> user_status;
  std::vector<int> categorical_value;  // value index or -1
  std::vector<std::optional<TokenSpan>> span;
  std::vector<int> carryover_status;
  std::vector<int> cross_service_source;  // S_prev index or -1
  std::vector<bool> changed;
  std::vector<bool> unresolvable;
};

struct TurnExample {
  std::string id;
  std::string dialogue_id;
  int turn_index = 0;
  const Service* service = nullptr;
  TurnInput input;
  DialogueState prev_state;
  std::optional<DialogueState> gold_state;
  std::optional<TurnLabels> labels;
};

struct IntentLabels {
  int status = kIntentNone;
  int value = -1;
};

IntentLabels derive_intent_labels(const DialogueContext& ctx,
                                  const Service& service,
                                  const DialogueState& gold);

std::vector<int> derive_requested_labels(const Service& service,
                                         const DialogueState& gold);

// Fills the slot-filling fields of `labels` (user status, categorical value,
// span, carryover status, cross-service source).
void derive_slot_labels(const Service& service, const TurnInput& input,
                        const Frame& user_frame, TurnLabels* labels);

// Character range [begin, end) snapped outward to covering user tokens.
std::optional<TokenSpan> char_span_to_tokens(const std::vector<Token>& tokens,
                                             int begin, int end);

// Lowercase, whitespace-collapsed form used for label source matching.
std::string match_key(std::string_view value);

// Snapshot of the observable inputs for `service` at a user turn.
TurnInput make_turn_input(const DialogueContext& ctx, const Service& service,
                          const Turn& user_turn,
                          const WordPieceTokenizer& tokenizer);

enum class ContextMode { kGoldContext, kPredictedContext };

using StatePredictor = std::function<DialogueState(const TurnExample&)>;

struct FrameRecord {
  std::string dialogue_id;
  int turn_index = 0;
  std::string service;
  bool involved = false;
  DialogueState state;
};

struct BuildOptions {
  ContextMode mode = ContextMode::kGoldContext;
  bool with_labels = true;
  // Involved services per turn index; derived from gold states when absent.
  std::optional<std::vector<std::vector<std::string>>> involvement;
  // Required in predicted-context mode.
  StatePredictor predictor;
};

struct DialogueExamples {
  std::vector<TurnExample> examples;
  // Every user frame with the state the context advanced with.
  std::vector<FrameRecord> frames;
};

std::vector<std::vector<std::string>> compute_involvement(
    const Dialogue& dialogue);

DialogueExamples build_dialogue_examples(const Dialogue& dialogue,
                                         const Schema& schema,
                                         const WordPieceTokenizer& tokenizer,
                                         const BuildOptions& options);

// Gold-context examples with labels.
std::vector<TurnExample> build_turn_examples(
    const Dialogue& dialogue, const Schema& schema,
    const WordPieceTokenizer& tokenizer,
    ContextMode mode = ContextMode::kGoldContext,
    const StatePredictor& predictor = {});

struct LabelStats {
  long changed_slots = 0;
  long unresolvable_slots = 0;
  long examples = 0;
  double unresolvable_rate() const {
    return changed_slots == 0
               ? 0.0
               : static_cast<double>(unresolvable_slots) / changed_slots;
  }
};

LabelStats label_stats(const std::vector<TurnExample>& examples);

nlohmann::json labels_to_json(const TurnExample& example);
void write_label_dump(const std::vector<TurnExample>& examples,
                      std::ostream& out);

}  // namespace sgdst

#endif  // SGDST_LABELING_H_
