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

#include "sgdst/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace sgdst {
namespace {

using nlohmann::json;

bool contains(const std::vector<std::string>& list, std::string_view item) {
  return std::find(list.begin(), list.end(), item) != list.end();
}

// Action slots that refer to dialogue-level entities rather than schema slots.
bool is_meta_slot(std::string_view slot) {
  return slot.empty() || slot == "intent" || slot == "count";
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": offset " + std::to_string(e.byte) +
                     ": " + e.what());
  }
}

template <typename T>
T field(const json& object, const char* key, std::string_view origin) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw ParseError(std::string(origin) + ": missing field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string(origin) + ": field '" + key + "': " +
                     e.what());
  }
}

std::vector<std::string> slot_name_list(const json& value) {
  std::vector<std::string> names;
  if (value.is_object()) {
    // SGD stores optional slots as {slot: default_value}.
    for (const auto& [key, _] : value.items()) names.push_back(key);
  } else if (value.is_array()) {
    for (const auto& item : value) names.push_back(item.get<std::string>());
  }
  return names;
}

}  // namespace

bool Intent::is_required(std::string_view slot) const {
  return contains(required_slots, slot);
}

bool Intent::is_optional(std::string_view slot) const {
  return contains(optional_slots, slot);
}

Service Service::create(std::string name, std::string description,
                        std::vector<Intent> intents, std::vector<Slot> slots) {
  Service service;
  service.name_ = std::move(name);
  service.description_ = std::move(description);

  std::set<std::string> slot_names;
  for (const Slot& slot : slots) {
    if (!slot_names.insert(slot.name).second) {
      throw ValidationError("service " + service.name_ +
                            ": duplicate slot '" + slot.name + "'");
    }
    if (slot.is_categorical != !slot.possible_values.empty()) {
      throw ValidationError("service " + service.name_ + ": slot '" +
                            slot.name +
                            "' must be categorical iff it lists values");
    }
  }

  Intent none;
  none.name = std::string(kNoneIntent);
  service.intents_.push_back(std::move(none));
  for (Intent& intent : intents) {
    if (intent.name == kNoneIntent) {
      throw ValidationError("service " + service.name_ +
                            ": intent name NONE is reserved");
    }
    if (service.intent_index(intent.name) >= 0) {
      throw ValidationError("service " + service.name_ +
                            ": duplicate intent '" + intent.name + "'");
    }
    for (const auto* list : {&intent.required_slots, &intent.optional_slots}) {
      for (const std::string& slot : *list) {
        if (!slot_names.count(slot)) {
          throw ValidationError("service " + service.name_ + ": intent " +
                                intent.name + " references unknown slot '" +
                                slot + "'");
        }
      }
    }
    for (const std::string& slot : intent.required_slots) {
      if (intent.is_optional(slot)) {
        throw ValidationError("service " + service.name_ + ": intent " +
                              intent.name + " lists slot '" + slot +
                              "' as both required and optional");
      }
    }
    service.intents_.push_back(std::move(intent));
  }

  service.slots_ = std::move(slots);
  service.informable_pos_.assign(service.slots_.size(), -1);
  for (int i = 0; i < static_cast<int>(service.slots_.size()); ++i) {
    const std::string& slot = service.slots_[i].name;
    bool informable = std::any_of(
        service.intents_.begin(), service.intents_.end(),
        [&](const Intent& it) {
          return it.is_required(slot) || it.is_optional(slot);
        });
    if (informable) {
      service.informable_pos_[i] = static_cast<int>(service.informable_.size());
      service.informable_.push_back(i);
    }
  }
  return service;
}

int Service::slot_index(std::string_view slot) const {
  for (size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].name == slot) return static_cast<int>(i);
  }
  return -1;
}

int Service::intent_index(std::string_view intent) const {
  for (size_t i = 0; i < intents_.size(); ++i) {
    if (intents_[i].name == intent) return static_cast<int>(i);
  }
  return -1;
}

const Slot* Service::find_slot(std::string_view slot) const {
  int index = slot_index(slot);
  return index < 0 ? nullptr : &slots_[index];
}

bool Service::is_informable(std::string_view slot) const {
  int index = slot_index(slot);
  return index >= 0 && informable_pos_[index] >= 0;
}

Schema::Schema(std::vector<Service> services) : services_(std::move(services)) {
  for (size_t i = 0; i < services_.size(); ++i) {
    if (!index_.emplace(services_[i].name(), static_cast<int>(i)).second) {
      throw ValidationError("duplicate service '" + services_[i].name() + "'");
    }
  }
}

const Service* Schema::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &services_[it->second];
}

const Service& Schema::at(std::string_view name) const {
  const Service* service = find(name);
  if (service == nullptr) {
    throw ValidationError("unknown service '" + std::string(name) + "'");
  }
  return *service;
}

const Frame* Turn::find_frame(std::string_view service) const {
  for (const Frame& frame : frames) {
    if (frame.service == service) return &frame;
  }
  return nullptr;
}

std::string normalize_name(std::string_view raw) {
  std::string spaced;
  spaced.reserve(raw.size() * 2);
  for (size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c == '_' || std::isspace(static_cast<unsigned char>(c))) {
      spaced.push_back(' ');
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(c)) && i > 0) {
      char prev = raw[i - 1];
      bool after_lower = std::islower(static_cast<unsigned char>(prev)) ||
                         std::isdigit(static_cast<unsigned char>(prev));
      // "HTTPServer" splits before the last capital of an acronym.
      bool acronym_end = std::isupper(static_cast<unsigned char>(prev)) &&
                         i + 1 < raw.size() &&
                         std::islower(static_cast<unsigned char>(raw[i + 1]));
      if (after_lower || acronym_end) spaced.push_back(' ');
    }
    spaced.push_back(
        static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  std::string out;
  out.reserve(spaced.size());
  for (char c : spaced) {
    if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
    out.push_back(c);
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> informable_slots(const Service& service) {
  std::vector<std::string> names;
  for (int index : service.informable()) {
    names.push_back(service.slots()[index].name);
  }
  return names;
}

Schema parse_schema(const json& root, std::string_view origin) {
  if (!root.is_array()) {
    throw ParseError(std::string(origin) + ": schema must be a JSON array");
  }
  std::vector<Service> services;
  for (const json& entry : root) {
    auto name = field<std::string>(entry, "service_name", origin);
    std::string where = std::string(origin) + ": service " + name;
    std::vector<Slot> slots;
    for (const json& s : entry.value("slots", json::array())) {
      Slot slot;
      slot.name = field<std::string>(s, "name", where);
      slot.description = s.value("description", "");
      slot.is_categorical = s.value("is_categorical", false);
      slot.possible_values =
          s.value("possible_values", std::vector<std::string>{});
      if (!slot.is_categorical) slot.possible_values.clear();
      slots.push_back(std::move(slot));
    }
    std::vector<Intent> intents;
    for (const json& i : entry.value("intents", json::array())) {
      Intent intent;
      intent.name = field<std::string>(i, "name", where);
      intent.description = i.value("description", "");
      intent.is_transactional = i.value("is_transactional", false);
      if (i.contains("required_slots")) {
        intent.required_slots = slot_name_list(i["required_slots"]);
      }
      if (i.contains("optional_slots")) {
        intent.optional_slots = slot_name_list(i["optional_slots"]);
      }
      intents.push_back(std::move(intent));
    }
    services.push_back(Service::create(name, entry.value("description", ""),
                                       std::move(intents), std::move(slots)));
  }
  return Schema(std::move(services));
}

Schema load_schema(const std::filesystem::path& path) {
  return parse_schema(read_json_file(path), path.string());
}

namespace {

DialogueState parse_state(const json& j) {
  DialogueState state;
  state.active_intent = j.value("active_intent", std::string(kNoneIntent));
  for (const json& slot : j.value("requested_slots", json::array())) {
    state.requested_slots.insert(slot.get<std::string>());
  }
  if (j.contains("slot_values")) {
    for (const auto& [slot, values] : j["slot_values"].items()) {
      std::vector<std::string> list;
      if (values.is_array()) {
        list = values.get<std::vector<std::string>>();
      } else {
        list.push_back(values.get<std::string>());
      }
      if (list.empty()) continue;
      state.slot_values[slot] = list.front();
      if (list.size() > 1) {
        state.alternatives[slot].assign(list.begin() + 1, list.end());
      }
    }
  }
  return state;
}

Frame parse_frame(const json& j, Speaker speaker, std::string_view where) {
  Frame frame;
  frame.service = field<std::string>(j, "service", where);
  for (const json& a : j.value("actions", json::array())) {
    Action action;
    action.act = field<std::string>(a, "act", where);
    action.slot = a.value("slot", "");
    action.values = a.value("values", std::vector<std::string>{});
    action.canonical_values =
        a.value("canonical_values", std::vector<std::string>{});
    frame.actions.push_back(std::move(action));
  }
  for (const json& s : j.value("slots", json::array())) {
    SlotSpan span;
    span.slot = field<std::string>(s, "slot", where);
    span.start = field<int>(s, "start", where);
    span.exclusive_end = field<int>(s, "exclusive_end", where);
    frame.slot_spans.push_back(std::move(span));
  }
  if (speaker == Speaker::kUser && j.contains("state")) {
    frame.state = parse_state(j["state"]);
  }
  return frame;
}

}  // namespace

DialogueState state_from_json(const json& j) { return parse_state(j); }

std::vector<Dialogue> parse_dialogues(const json& root, const Schema& schema,
                                      std::string_view origin) {
  if (!root.is_array()) {
    throw ParseError(std::string(origin) +
                     ": dialogue file must be a JSON array");
  }
  std::vector<Dialogue> dialogues;
  for (const json& entry : root) {
    Dialogue dialogue;
    dialogue.dialogue_id = field<std::string>(entry, "dialogue_id", origin);
    std::string where = std::string(origin) + ": " + dialogue.dialogue_id;
    dialogue.services = entry.value("services", std::vector<std::string>{});
    for (const json& t : entry.value("turns", json::array())) {
      Turn turn;
      auto speaker = field<std::string>(t, "speaker", where);
      if (speaker == "USER") {
        turn.speaker = Speaker::kUser;
      } else if (speaker == "SYSTEM") {
        turn.speaker = Speaker::kSystem;
      } else {
        throw ParseError(where + ": unknown speaker '" + speaker + "'");
      }
      turn.utterance = t.value("utterance", "");
      for (const json& f : t.value("frames", json::array())) {
        turn.frames.push_back(parse_frame(f, turn.speaker, where));
      }
      dialogue.turns.push_back(std::move(turn));
    }
    validate_dialogue(dialogue, schema);
    dialogues.push_back(std::move(dialogue));
  }
  return dialogues;
}

void validate_dialogue(const Dialogue& dialogue, const Schema& schema) {
  const std::string& id = dialogue.dialogue_id;
  auto fail = [&](const std::string& message) {
    throw ValidationError("dialogue " + id + ": " + message);
  };
  for (const std::string& name : dialogue.services) {
    if (!schema.contains(name)) fail("unknown service '" + name + "'");
  }
  for (size_t t = 0; t < dialogue.turns.size(); ++t) {
    const Turn& turn = dialogue.turns[t];
    std::string where = "turn " + std::to_string(t) + ": ";
    if (t > 0 && turn.speaker == dialogue.turns[t - 1].speaker) {
      fail(where + "speakers must alternate");
    }
    for (const Frame& frame : turn.frames) {
      const Service* service = schema.find(frame.service);
      if (service == nullptr) {
        fail(where + "unknown service '" + frame.service + "'");
      }
      if (!contains(dialogue.services, frame.service)) {
        fail(where + "frame service '" + frame.service +
             "' not listed in dialogue services");
      }
      for (const Action& action : frame.actions) {
        if (action.slot == "intent") {
          for (const std::string& v : action.values) {
            if (service->intent_index(v) < 0) {
              fail(where + "unknown intent '" + v + "'");
            }
          }
        } else if (!is_meta_slot(action.slot) &&
                   service->find_slot(action.slot) == nullptr) {
          fail(where + "unknown slot '" + action.slot + "' in service " +
               frame.service);
        }
      }
      for (const SlotSpan& span : frame.slot_spans) {
        if (service->find_slot(span.slot) == nullptr) {
          fail(where + "unknown slot '" + span.slot + "' in span");
        }
        if (span.start < 0 || span.start > span.exclusive_end ||
            span.exclusive_end > static_cast<int>(turn.utterance.size())) {
          fail(where + "span for '" + span.slot + "' outside utterance");
        }
      }
      if (turn.speaker == Speaker::kUser && !frame.state) {
        fail(where + "user frame without state");
      }
      if (!frame.state) continue;
      const DialogueState& state = *frame.state;
      if (service->intent_index(state.active_intent) < 0) {
        fail(where + "unknown intent '" + state.active_intent + "'");
      }
      for (const std::string& slot : state.requested_slots) {
        if (service->find_slot(slot) == nullptr) {
          fail(where + "unknown requested slot '" + slot + "'");
        }
      }
      for (const auto& [slot, value] : state.slot_values) {
        const Slot* s = service->find_slot(slot);
        if (s == nullptr) fail(where + "unknown slot '" + slot + "'");
        if (!service->is_informable(slot)) {
          fail(where + "slot '" + slot + "' is not informable");
        }
        if (s->is_categorical && value != kDontCare &&
            !contains(s->possible_values, value)) {
          fail(where + "value '" + value + "' not allowed for slot '" + slot +
               "'");
        }
      }
    }
  }
}

std::vector<Dialogue> load_dialogues(const std::filesystem::path& directory,
                                     const Schema& schema) {
  if (!std::filesystem::is_directory(directory)) {
    throw ParseError("not a directory: " + directory.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    const auto& path = entry.path();
    if (entry.is_regular_file() && path.extension() == ".json" &&
        path.filename() != "schema.json") {
      files.push_back(path);
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Dialogue> dialogues;
  for (const auto& path : files) {
    auto batch = parse_dialogues(read_json_file(path), schema, path.string());
    for (Dialogue& d : batch) dialogues.push_back(std::move(d));
  }
  return dialogues;
}

json to_json(const Schema& schema) {
  json root = json::array();
  for (const Service& service : schema.services()) {
    json entry;
    entry["service_name"] = service.name();
    entry["description"] = service.description();
    entry["slots"] = json::array();
    for (const Slot& slot : service.slots()) {
      entry["slots"].push_back({{"name", slot.name},
                                {"description", slot.description},
                                {"is_categorical", slot.is_categorical},
                                {"possible_values", slot.possible_values}});
    }
    entry["intents"] = json::array();
    for (size_t i = 1; i < service.intents().size(); ++i) {
      const Intent& intent = service.intents()[i];
      json optional = json::object();
      for (const std::string& slot : intent.optional_slots) {
        optional[slot] = std::string(kDontCare);
      }
      entry["intents"].push_back(
          {{"name", intent.name},
           {"description", intent.description},
           {"is_transactional", intent.is_transactional},
           {"required_slots", intent.required_slots},
           {"optional_slots", optional}});
    }
    root.push_back(std::move(entry));
  }
  return root;
}

json to_json(const DialogueState& state) {
  json slot_values = json::object();
  for (const auto& [slot, value] : state.slot_values) {
    std::vector<std::string> list{value};
    auto alt = state.alternatives.find(slot);
    if (alt != state.alternatives.end()) {
      list.insert(list.end(), alt->second.begin(), alt->second.end());
    }
    slot_values[slot] = list;
  }
  return {{"active_intent", state.active_intent},
          {"requested_slots", std::vector<std::string>(
                                  state.requested_slots.begin(),
                                  state.requested_slots.end())},
          {"slot_values", slot_values}};
}

json to_json(const Dialogue& dialogue) {
  json turns = json::array();
  for (const Turn& turn : dialogue.turns) {
    json frames = json::array();
    for (const Frame& frame : turn.frames) {
      json f;
      f["service"] = frame.service;
      f["actions"] = json::array();
      for (const Action& a : frame.actions) {
        f["actions"].push_back({{"act", a.act},
                                {"slot", a.slot},
                                {"values", a.values},
                                {"canonical_values", a.canonical_values}});
      }
      f["slots"] = json::array();
      for (const SlotSpan& s : frame.slot_spans) {
        f["slots"].push_back({{"slot", s.slot},
                              {"start", s.start},
                              {"exclusive_end", s.exclusive_end}});
      }
      if (frame.state) f["state"] = to_json(*frame.state);
      frames.push_back(std::move(f));
    }
    turns.push_back(
        {{"speaker", turn.speaker == Speaker::kUser ? "USER" : "SYSTEM"},
         {"utterance", turn.utterance},
         {"frames", frames}});
  }
  return {{"dialogue_id", dialogue.dialogue_id},
          {"services", dialogue.services},
          {"turns", turns}};
}

void write_schema(const Schema& schema, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(schema).dump(2) << '\n';
}

void write_dialogues(const std::vector<Dialogue>& dialogues,
                     const std::filesystem::path& path) {
  json root = json::array();
  for (const Dialogue& d : dialogues) root.push_back(to_json(d));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << root.dump(2) << '\n';
}

Dialogue strip_user_annotations(const Dialogue& dialogue) {
  Dialogue stripped = dialogue;
  for (Turn& turn : stripped.turns) {
    if (turn.speaker != Speaker::kUser) continue;
    for (Frame& frame : turn.frames) {
      frame.actions.clear();
      frame.slot_spans.clear();
      frame.state.reset();
    }
  }
  return stripped;
}

}  // namespace sgdst
