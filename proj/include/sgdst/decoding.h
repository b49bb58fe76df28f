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

// Turns head probabilities into a dialogue state update.
//
// Per informable slot the precedence is: user ACTIVE (categorical value or
// span), user DONTCARE, carryover (system utterance, service history, other
// service), otherwise keep the previous value. Every argmax breaks ties toward
// the lowest index.

#ifndef SGDST_DECODING_H_
#define SGDST_DECODING_H_

#include <array>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "sgdst/labeling.h"
#include "sgdst/model.h"

namespace sgdst {

struct DecodeOptions {
  double binary_threshold = 0.5;  // requested slots, strict >
  // Carryover classes (kCarryInSysUttr..kCarryInCrossServiceHist) treated as
  // none after the argmax.
  std::set<int> disabled_carryover;

  void validate() const;
};

struct DecodeDiagnostics {
  long slots = 0;
  long invalid_carryover = 0;  // predicted source had no value
  long empty_span = 0;         // user ACTIVE but no user token available
  std::array<long, kNumCarryoverStatus> carryover_argmax{};

  void merge(const DecodeDiagnostics& other);
};

// Probabilities in canonical index space. Entries of -1 mark candidates the
// model could not score (truncated away).
struct HeadScores {
  std::array<double, 2> intent_status{1.0, 0.0};
  std::vector<double> intent_value;  // per intent
  std::vector<double> requested;     // per slot
  // Per informable position:
  std::vector<std::array<double, kNumUserStatus>> user_status;
  std::vector<std::array<double, kNumCarryoverStatus>> carryover;
  std::vector<std::vector<double>> categorical;  // per value, categorical only
  std::vector<std::vector<double>> start;        // per user token
  std::vector<std::vector<double>> end;
  std::vector<std::vector<double>> cross;  // per S_prev entry
};

HeadScores scores_from_outputs(const HeadOutputs& outputs,
                               const HeadLayout& layout,
                               const TurnExample& example);

// One-hot scores from gold labels. Unresolvable slots get user and carryover
// status none.
HeadScores oracle_scores(const TurnLabels& labels, const TurnExample& example);

struct SlotUpdate {
  enum class Kind { kKeep, kSet, kDontCare };
  Kind kind = Kind::kKeep;
  std::string value;
  int user_argmax = kUserNone;
  int carryover_argmax = kCarryNone;  // before disabling

  bool operator==(const SlotUpdate&) const = default;
};

std::string decode_intent(const HeadScores& scores, const Service& service,
                          const std::string& prev_intent);

std::set<std::string> decode_requested(const HeadScores& scores,
                                       const Service& service,
                                       const DecodeOptions& options);

// Index of the largest entry, ties to the lowest index; -1 when no entry is
// >= 0.
int argmax(const std::vector<double>& probs);

SlotUpdate decode_slot_update(const HeadScores& scores, int informable_pos,
                              const TurnExample& example,
                              const DecodeOptions& options,
                              DecodeDiagnostics* diagnostics);

DialogueState update_state(const DialogueState& prev_state,
                           const std::string& intent,
                           const std::set<std::string>& requested,
                           const Service& service,
                           const std::vector<SlotUpdate>& updates);

struct TurnDecode {
  DialogueState state;
  std::vector<SlotUpdate> updates;  // per informable position
};

TurnDecode decode_turn(const HeadScores& scores, const TurnExample& example,
                       const DecodeOptions& options,
                       DecodeDiagnostics* diagnostics);

// JSON lines, one record per (dialogue_id, turn_index, service).
void write_predictions(const std::vector<FrameRecord>& frames,
                       std::ostream& out);
std::vector<FrameRecord> read_predictions(std::istream& in);

}  // namespace sgdst

#endif  // SGDST_DECODING_H_
