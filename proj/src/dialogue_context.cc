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

#include "sgdst/dialogue_context.h"

#include <algorithm>

namespace sgdst {

DialogueContext::DialogueContext(std::string dialogue_id, const Schema* schema)
    : dialogue_id_(std::move(dialogue_id)), schema_(schema) {}

DialogueContext init_context(std::string dialogue_id, const Schema& schema) {
  return DialogueContext(std::move(dialogue_id), &schema);
}

void DialogueContext::note_service(const std::string& service) {
  if (services_.emplace(service, ServiceHistory{}).second) {
    service_order_.push_back(service);
  }
}

void DialogueContext::observe_system_turn(const Turn& system_turn) {
  for (const auto& [key, value] : sys_uttr_slot_value_) {
    note_service(key.first);
    services_[key.first].prev_sys_slot_value[key.second] = value;
  }
  sys_uttr_slot_value_.clear();
  last_system_actions_.clear();
  last_system_utterance_ = system_turn.utterance;

  for (const Frame& frame : system_turn.frames) {
    const Service* service =
        schema_ != nullptr ? schema_->find(frame.service) : nullptr;
    if (service == nullptr) {
      throw ValidationError("unknown service '" + frame.service + "'");
    }
    note_service(frame.service);
    last_system_actions_[frame.service] = frame.actions;
    for (const Action& action : frame.actions) {
      if (action.values.size() != 1) continue;
      if (service->find_slot(action.slot) == nullptr) continue;
      sys_uttr_slot_value_[{frame.service, action.slot}] = action.values[0];
    }
  }
}

void DialogueContext::observe_user_turn(
    const std::map<std::string, DialogueState>& states) {
  for (const auto& [service, state] : states) {
    if (schema_ == nullptr || !schema_->contains(service)) {
      throw ValidationError("unknown service '" + service + "'");
    }
  }
  for (auto& [service, history] : services_) {
    history.in_previous_state = states.count(service) > 0;
  }
  for (const auto& [service, state] : states) {
    note_service(service);
    ServiceHistory& history = services_[service];
    history.prev_intent = state.active_intent;
    history.prev_usr_slot_value = state.slot_values;
    history.seen_before = true;
    history.in_previous_state = true;
  }
  ++turn_index_;
}

const ServiceHistory* DialogueContext::history(
    const std::string& service) const {
  auto it = services_.find(service);
  return it == services_.end() ? nullptr : &it->second;
}

std::string DialogueContext::prev_intent(const std::string& service) const {
  const ServiceHistory* h = history(service);
  return h == nullptr ? std::string(kNoneIntent) : h->prev_intent;
}

namespace {

std::optional<std::string> lookup(const std::map<std::string, std::string>& m,
                                  const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

}  // namespace

std::optional<std::string> DialogueContext::prev_usr_slot_value(
    const std::string& service, const std::string& slot) const {
  const ServiceHistory* h = history(service);
  return h == nullptr ? std::nullopt : lookup(h->prev_usr_slot_value, slot);
}

std::optional<std::string> DialogueContext::prev_sys_slot_value(
    const std::string& service, const std::string& slot) const {
  const ServiceHistory* h = history(service);
  return h == nullptr ? std::nullopt : lookup(h->prev_sys_slot_value, slot);
}

std::optional<std::string> DialogueContext::sys_uttr_slot_value(
    const std::string& service, const std::string& slot) const {
  auto it = sys_uttr_slot_value_.find({service, slot});
  if (it == sys_uttr_slot_value_.end()) return std::nullopt;
  return it->second;
}

const std::vector<Action>& DialogueContext::last_system_actions(
    const std::string& service) const {
  static const std::vector<Action> kEmpty;
  auto it = last_system_actions_.find(service);
  return it == last_system_actions_.end() ? kEmpty : it->second;
}

std::vector<PrevSlotEntry> compute_s_prev(const DialogueContext& ctx,
                                          const std::string& active_service) {
  std::vector<PrevSlotEntry> entries;
  for (const std::string& service_name : ctx.service_order()) {
    if (service_name == active_service) continue;
    const ServiceHistory* h = ctx.history(service_name);
    const Service* service = ctx.schema()->find(service_name);
    if (h == nullptr || service == nullptr) continue;
    for (const Slot& slot : service->slots()) {
      auto usr = h->prev_usr_slot_value.find(slot.name);
      if (usr != h->prev_usr_slot_value.end() && !usr->second.empty()) {
        entries.push_back({service_name, slot.name, usr->second,
                           ValueSource::kUserHistory});
        continue;
      }
      auto sys = h->prev_sys_slot_value.find(slot.name);
      if (sys != h->prev_sys_slot_value.end() && !sys->second.empty()) {
        entries.push_back({service_name, slot.name, sys->second,
                           ValueSource::kSystemHistory});
      }
    }
  }
  return entries;
}

BinaryFeatures binary_features(const DialogueContext& ctx,
                               const Service& service, const Slot& slot) {
  const ServiceHistory* h = ctx.history(service.name());
  BinaryFeatures features{};
  features[0] = (h == nullptr || !h->seen_before) ? 1 : 0;
  features[1] = (h == nullptr || !h->in_previous_state) ? 1 : 0;
  features[2] = ctx.sys_uttr_slot_value(service.name(), slot.name) ? 1 : 0;
  features[3] = ctx.prev_sys_slot_value(service.name(), slot.name) ? 1 : 0;

  bool required_somewhere = false;
  bool optional_everywhere = service.intents().size() > 1;
  for (size_t i = 1; i < service.intents().size(); ++i) {
    const Intent& intent = service.intents()[i];
    required_somewhere = required_somewhere || intent.is_required(slot.name);
    optional_everywhere = optional_everywhere && intent.is_optional(slot.name);
  }
  features[4] = required_somewhere ? 1 : 0;
  features[5] = optional_everywhere ? 1 : 0;
  return features;
}

std::vector<std::string> involved_services(
    const std::vector<Frame>& turn_frames,
    const std::map<std::string, DialogueState>& previous_states) {
  static const DialogueState kEmpty;
  std::vector<std::string> involved;
  for (const Frame& frame : turn_frames) {
    if (!frame.state) continue;
    auto it = previous_states.find(frame.service);
    const DialogueState& previous =
        it == previous_states.end() ? kEmpty : it->second;
    if (!(*frame.state == previous)) involved.push_back(frame.service);
  }
  return involved;
}

}  // namespace sgdst
