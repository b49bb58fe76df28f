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

// Schema-guided dialogue (SGD) corpus types and JSON ingestion.

#ifndef SGDST_CORPUS_H_
#define SGDST_CORPUS_H_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sgdst {

inline constexpr std::string_view kNoneIntent = "NONE";
inline constexpr std::string_view kDontCare = "dontcare";

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Slot {
  std::string name;
  std::string description;
  bool is_categorical = false;
  std::vector<std::string> possible_values;

  bool operator==(const Slot&) const = default;
};

struct Intent {
  std::string name;
  std::string description;
  bool is_transactional = false;
  std::vector<std::string> required_slots;
  std::vector<std::string> optional_slots;

  bool is_required(std::string_view slot) const;
  bool is_optional(std::string_view slot) const;
  bool operator==(const Intent&) const = default;
};

// A service ontology. The NONE intent always occupies index 0 of intents().
// Informable slots are derived once at construction from the intents.
class Service {
 public:
  // Validates and builds a service; `intents` must not contain NONE.
  static Service create(std::string name, std::string description,
                        std::vector<Intent> intents, std::vector<Slot> slots);

  const std::string& name() const { return name_; }
  const std::string& description() const { return description_; }
  const std::vector<Intent>& intents() const { return intents_; }
  const std::vector<Slot>& slots() const { return slots_; }

  // Positions into slots() of S_inf(n), in schema order.
  const std::vector<int>& informable() const { return informable_; }
  // -1 when the slot is not informable.
  int informable_position(int slot_index) const {
    return informable_pos_[slot_index];
  }

  int slot_index(std::string_view slot) const;      // -1 if absent
  int intent_index(std::string_view intent) const;  // -1 if absent
  const Slot* find_slot(std::string_view slot) const;
  bool is_informable(std::string_view slot) const;

  bool operator==(const Service& other) const {
    return name_ == other.name_ && description_ == other.description_ &&
           intents_ == other.intents_ && slots_ == other.slots_;
  }

 private:
  std::string name_;
  std::string description_;
  std::vector<Intent> intents_;
  std::vector<Slot> slots_;
  std::vector<int> informable_;
  std::vector<int> informable_pos_;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Service> services);

  const std::vector<Service>& services() const { return services_; }
  const Service* find(std::string_view name) const;
  const Service& at(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  bool operator==(const Schema& other) const {
    return services_ == other.services_;
  }

 private:
  std::vector<Service> services_;
  std::map<std::string, int, std::less<>> index_;
};

enum class Speaker { kUser, kSystem };

struct Action {
  std::string act;
  std::string slot;
  std::vector<std::string> values;
  std::vector<std::string> canonical_values;

  bool operator==(const Action&) const = default;
};

struct SlotSpan {
  std::string slot;
  int start = 0;
  int exclusive_end = 0;

  bool operator==(const SlotSpan&) const = default;
};

struct DialogueState {
  std::string active_intent{kNoneIntent};
  std::set<std::string> requested_slots;
  // Primary value per slot.
  std::map<std::string, std::string> slot_values;
  // Further acceptable surface forms listed by the annotation; never part of
  // state equality.
  std::map<std::string, std::vector<std::string>> alternatives;

  bool operator==(const DialogueState& other) const {
    return active_intent == other.active_intent &&
           requested_slots == other.requested_slots &&
           slot_values == other.slot_values;
  }
};

struct Frame {
  std::string service;
  std::vector<Action> actions;
  std::optional<DialogueState> state;
  std::vector<SlotSpan> slot_spans;

  bool operator==(const Frame& other) const {
    return service == other.service && actions == other.actions &&
           state == other.state && slot_spans == other.slot_spans;
  }
};

struct Turn {
  Speaker speaker = Speaker::kUser;
  std::string utterance;
  std::vector<Frame> frames;

  const Frame* find_frame(std::string_view service) const;
  bool operator==(const Turn&) const = default;
};

struct Dialogue {
  std::string dialogue_id;
  std::vector<std::string> services;
  std::vector<Turn> turns;

  bool operator==(const Dialogue&) const = default;
};

// Underscores become spaces, CamelCase boundaries are split, the result is
// lowercased with single spaces. Idempotent.
std::string normalize_name(std::string_view raw);

// S_inf(n): slots required or optional in at least one intent, schema order.
std::vector<std::string> informable_slots(const Service& service);

Schema load_schema(const std::filesystem::path& path);
Schema parse_schema(const nlohmann::json& json, std::string_view origin);

// Reads every *.json file except schema.json, lexicographically by name.
std::vector<Dialogue> load_dialogues(const std::filesystem::path& directory,
                                     const Schema& schema);
std::vector<Dialogue> parse_dialogues(const nlohmann::json& json,
                                      const Schema& schema,
                                      std::string_view origin);
void validate_dialogue(const Dialogue& dialogue, const Schema& schema);

nlohmann::json to_json(const Schema& schema);
nlohmann::json to_json(const Dialogue& dialogue);
nlohmann::json to_json(const DialogueState& state);
DialogueState state_from_json(const nlohmann::json& json);

void write_schema(const Schema& schema, const std::filesystem::path& path);
void write_dialogues(const std::vector<Dialogue>& dialogues,
                     const std::filesystem::path& path);

// A user-turn copy of the dialogue with gold annotations removed from user
// frames (state, actions, spans). System frames are kept intact.
Dialogue strip_user_annotations(const Dialogue& dialogue);

}  // namespace sgdst

#endif  // SGDST_CORPUS_H_
