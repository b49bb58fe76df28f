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

// Dialogue state tracking metrics: joint goal accuracy, average goal accuracy,
// intent accuracy and requested slot F1, following the conventions of the
// public SGD evaluation script.

#ifndef SGDST_EVALUATION_H_
#define SGDST_EVALUATION_H_

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgdst/corpus.h"
#include "sgdst/labeling.h"

namespace sgdst {

inline constexpr double kFuzzyMatchThreshold = 0.95;

// Token-sort similarity: lowercase, non-alphanumerics to spaces, tokens
// sorted, then 2 * LCS / (len_a + len_b) over characters. Two empty strings
// score 1.
double fuzzy_match(std::string_view predicted, std::string_view gold);

// Categorical values and dontcare compare exactly; free-form values match
// when the fuzzy score against any gold form reaches the threshold.
bool value_matches(std::string_view predicted, const std::vector<std::string>& gold_forms,
                   bool categorical);

struct TurnScore {
  bool joint_correct = true;
  bool intent_correct = false;
  int assigned_slots = 0;  // slots with a gold value
  int correct_assigned = 0;
  std::map<std::string, bool> slot_correct;  // union of gold and predicted
  int requested_tp = 0;
  int requested_fp = 0;
  int requested_fn = 0;
  double requested_f1 = 1.0;
};

// `service` may be null, in which case every value is compared fuzzily.
TurnScore score_frame(const DialogueState& predicted, const DialogueState& gold,
                      const Service* service);

struct FramePair {
  const FrameRecord* predicted = nullptr;
  const FrameRecord* gold = nullptr;
};

// Pairs frames by (dialogue_id, turn_index, service). Throws ValidationError
// listing the missing or unexpected frames.
std::vector<FramePair> align_frames(const std::vector<FrameRecord>& predicted,
                                    const std::vector<FrameRecord>& gold);

// Every user frame with a gold state.
std::vector<FrameRecord> gold_frames(const std::vector<Dialogue>& dialogues);

double joint_goal_accuracy(const std::vector<FrameRecord>& predicted,
                           const std::vector<FrameRecord>& gold,
                           const Schema* schema = nullptr);
// NaN (with a warning on stderr) when no gold slot is assigned anywhere.
double average_goal_accuracy(const std::vector<FrameRecord>& predicted,
                             const std::vector<FrameRecord>& gold,
                             const Schema* schema = nullptr);
double intent_accuracy(const std::vector<FrameRecord>& predicted,
                       const std::vector<FrameRecord>& gold);
double requested_slot_f1(const std::vector<FrameRecord>& predicted,
                         const std::vector<FrameRecord>& gold);

struct Metrics {
  long frames = 0;
  long joint_correct = 0;
  long assigned_slots = 0;
  long correct_assigned = 0;
  long intent_correct = 0;
  double requested_f1_sum = 0.0;
  // Frames with at least one gold value and the sum of their slot accuracies.
  long goal_frames = 0;
  double goal_accuracy_sum = 0.0;

  void add(const TurnScore& score);
  double jga() const;
  // Mean over goal frames of the per-frame slot accuracy; NaN without any.
  double avg_ga() const;
  double intent_acc() const;
  double requested_f1() const;
  nlohmann::json to_json() const;
};

struct MetricsReport {
  Metrics overall;
  Metrics seen;
  Metrics unseen;
  std::map<std::string, Metrics> per_service;

  nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
};

// `train_services` decides the seen/unseen split.
MetricsReport evaluate_frames(const std::vector<FrameRecord>& predicted,
                              const std::vector<FrameRecord>& gold,
                              const Schema& schema,
                              const std::set<std::string>& train_services);

}  // namespace sgdst

#endif  // SGDST_EVALUATION_H_
