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

// Running per-dialogue bookkeeping: previous intents, the last user and system
// values per slot, and the per-slot binary features.

#ifndef SGDST_DIALOGUE_CONTEXT_H_
#define SGDST_DIALOGUE_CONTEXT_H_

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sgdst/corpus.h"

namespace sgdst {

struct ServiceHistory {
  std::string prev_intent{kNoneIntent};
  std::map<std::string, std::string> prev_usr_slot_value;
  // Last single-valued system mention strictly before the latest system turn.
  std::map<std::string, std::string> prev_sys_slot_value;
  bool seen_before = false;
  bool in_previous_state = false;
};

enum class ValueSource { kUserHistory, kSystemHistory };

struct PrevSlotEntry {
  std::string service;
  std::string slot;
  std::string value;
  ValueSource source = ValueSource::kUserHistory;

  bool operator==(const PrevSlotEntry&) const = default;
};

// service_new, service_switched, value_in_sys_uttr, value_in_prev_sys_uttrs,
// required_in_some_intent, optional_in_all_intents.
using BinaryFeatures = std::array<int, 6>;
inline constexpr int kNumBinaryFeatures = 6;

class DialogueContext {
 public:
  explicit DialogueContext(std::string dialogue_id, const Schema* schema);

  const std::string& dialogue_id() const { return dialogue_id_; }
  const Schema* schema() const { return schema_; }
  int turn_index() const { return turn_index_; }

  // Folds the previous system mentions into history, then records this
  // turn's single-valued mentions and actions.
  void observe_system_turn(const Turn& system_turn);

  // Advances with the (gold or predicted) states of the turn's services.
  // Services absent from `states` keep their history.
  void observe_user_turn(const std::map<std::string, DialogueState>& states);

  std::string prev_intent(const std::string& service) const;
  std::optional<std::string> prev_usr_slot_value(
      const std::string& service, const std::string& slot) const;
  std::optional<std::string> prev_sys_slot_value(
      const std::string& service, const std::string& slot) const;
  std::optional<std::string> sys_uttr_slot_value(
      const std::string& service, const std::string& slot) const;

  const ServiceHistory* history(const std::string& service) const;
  const std::map<std::pair<std::string, std::string>, std::string>&
  sys_uttr_slot_values() const {
    return sys_uttr_slot_value_;
  }

  // Actions of the latest system turn for `service` (empty if none).
  const std::vector<Action>& last_system_actions(
      const std::string& service) const;
  const std::string& last_system_utterance() const {
    return last_system_utterance_;
  }

  // Services in first-appearance order.
  const std::vector<std::string>& service_order() const {
    return service_order_;
  }

 private:
  void note_service(const std::string& service);

  std::string dialogue_id_;
  const Schema* schema_;
  int turn_index_ = 0;
  std::map<std::string, ServiceHistory> services_;
  std::vector<std::string> service_order_;
  std::map<std::pair<std::string, std::string>, std::string>
      sys_uttr_slot_value_;
  std::map<std::string, std::vector<Action>> last_system_actions_;
  std::string last_system_utterance_;
};

DialogueContext init_context(std::string dialogue_id, const Schema& schema);

// Slots of services other than `active_service` holding a previous value;
// the user value wins over the system value for the same slot.
std::vector<PrevSlotEntry> compute_s_prev(const DialogueContext& ctx,
                                          const std::string& active_service);

BinaryFeatures binary_features(const DialogueContext& ctx,
                               const Service& service, const Slot& slot);

// Services of a user turn whose gold state differs from their previous gold
// state, in frame order.
std::vector<std::string> involved_services(
    const std::vector<Frame>& turn_frames,
    const std::map<std::string, DialogueState>& previous_states);

}  // namespace sgdst

#endif  // SGDST_DIALOGUE_CONTEXT_H_
