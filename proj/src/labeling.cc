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

#include "sgdst/labeling.h"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace sgdst {
namespace {

using nlohmann::json;

// All acceptable surface forms of a gold value.
std::vector<std::string> value_forms(const DialogueState& state,
                                     const std::string& slot) {
  std::vector<std::string> forms{state.slot_values.at(slot)};
  auto it = state.alternatives.find(slot);
  if (it != state.alternatives.end()) {
    forms.insert(forms.end(), it->second.begin(), it->second.end());
  }
  return forms;
}

bool matches_any(const std::vector<std::string>& keys, std::string_view value) {
  std::string key = match_key(value);
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Case-insensitive whole-word search of `needle` in `text`.
std::optional<std::pair<int, int>> find_in_text(std::string_view text,
                                                std::string_view needle) {
  if (needle.empty() || needle.size() > text.size()) return std::nullopt;
  std::string lower_text(text), lower_needle(needle);
  for (char& c : lower_text) c = static_cast<char>(std::tolower(c));
  for (char& c : lower_needle) c = static_cast<char>(std::tolower(c));
  size_t pos = lower_text.find(lower_needle);
  while (pos != std::string::npos) {
    size_t end = pos + lower_needle.size();
    bool left_ok = pos == 0 || !is_word_char(lower_text[pos - 1]) ||
                   !is_word_char(lower_needle.front());
    bool right_ok = end == lower_text.size() || !is_word_char(lower_text[end]) ||
                    !is_word_char(lower_needle.back());
    if (left_ok && right_ok) {
      return std::make_pair(static_cast<int>(pos), static_cast<int>(end));
    }
    pos = lower_text.find(lower_needle, pos + 1);
  }
  return std::nullopt;
}

std::optional<TokenSpan> locate_span(const std::string& slot,
                                     const std::vector<std::string>& keys,
                                     const std::vector<std::string>& forms,
                                     const Frame& frame,
                                     const TurnInput& input) {
  const std::string& text = input.user_utterance;
  for (const SlotSpan& s : frame.slot_spans) {
    if (s.slot != slot) continue;
    std::string surface = text.substr(s.start, s.exclusive_end - s.start);
    if (!matches_any(keys, surface)) continue;
    if (auto span = char_span_to_tokens(input.user_tokens, s.start,
                                        s.exclusive_end)) {
      return span;
    }
  }
  for (const std::string& form : forms) {
    if (auto found = find_in_text(text, form)) {
      if (auto span = char_span_to_tokens(input.user_tokens, found->first,
                                          found->second)) {
        return span;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

const char* carryover_name(int status) {
  switch (status) {
    case kCarryNone: return "none";
    case kCarryInSysUttr: return "in_sys_uttr";
    case kCarryInServiceHist: return "in_service_hist";
    case kCarryInCrossServiceHist: return "in_cross_service_hist";
  }
  return "invalid";
}

int parse_carryover_name(std::string_view name) {
  for (int c = kCarryInSysUttr; c <= kCarryInCrossServiceHist; ++c) {
    if (name == carryover_name(c)) return c;
  }
  throw std::invalid_argument("unknown carryover class '" + std::string(name) +
                              "'");
}

std::string match_key(std::string_view value) {
  std::string out;
  for (char c : value) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::optional<TokenSpan> char_span_to_tokens(const std::vector<Token>& tokens,
                                             int begin, int end) {
  int first = -1, last = -1;
  for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
    if (tokens[i].end > begin && tokens[i].begin < end) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) return std::nullopt;
  return TokenSpan{first, last};
}

IntentLabels derive_intent_labels(const DialogueContext& ctx,
                                  const Service& service,
                                  const DialogueState& gold) {
  IntentLabels labels;
  int index = service.intent_index(gold.active_intent);
  if (index < 0) {
    throw ValidationError("intent '" + gold.active_intent +
                          "' not in service " + service.name());
  }
  if (gold.active_intent != ctx.prev_intent(service.name())) {
    labels.status = kIntentActive;
    labels.value = index;
  }
  return labels;
}

std::vector<int> derive_requested_labels(const Service& service,
                                         const DialogueState& gold) {
  std::vector<int> requested(service.slots().size(), 0);
  for (size_t i = 0; i < service.slots().size(); ++i) {
    requested[i] = gold.requested_slots.count(service.slots()[i].name) ? 1 : 0;
  }
  return requested;
}

void derive_slot_labels(const Service& service, const TurnInput& input,
                        const Frame& user_frame, TurnLabels* labels) {
  const DialogueState& gold = user_frame.state.value();
  size_t n = service.informable().size();
  labels->user_status.assign(n, kUserNone);
  labels->categorical_value.assign(n, -1);
  labels->span.assign(n, std::nullopt);
  labels->carryover_status.assign(n, kCarryNone);
  labels->cross_service_source.assign(n, -1);
  labels->changed.assign(n, false);
  labels->unresolvable.assign(n, false);

  for (size_t k = 0; k < n; ++k) {
    const Slot& slot = service.slots()[service.informable()[k]];
    auto gold_it = gold.slot_values.find(slot.name);
    if (gold_it == gold.slot_values.end()) continue;
    const std::string& value = gold_it->second;
    auto prev_it = input.prev_usr_values.find(slot.name);
    if (prev_it != input.prev_usr_values.end() && prev_it->second == value) {
      continue;
    }
    labels->changed[k] = true;

    if (slot.is_categorical && value != kDontCare &&
        std::find(slot.possible_values.begin(), slot.possible_values.end(),
                  value) == slot.possible_values.end()) {
      throw ValidationError("value '" + value + "' not allowed for slot '" +
                            slot.name + "'");
    }
    if (value == kDontCare) {
      labels->user_status[k] = kUserDontCare;
      continue;
    }

    std::vector<std::string> forms = value_forms(gold, slot.name);
    std::vector<std::string> keys;
    for (const std::string& f : forms) keys.push_back(match_key(f));

    bool informed = std::any_of(
        user_frame.actions.begin(), user_frame.actions.end(),
        [&](const Action& a) {
          return a.act == "INFORM" && a.slot == slot.name &&
                 std::any_of(a.values.begin(), a.values.end(),
                             [&](const std::string& v) {
                               return matches_any(keys, v);
                             });
        });
    if (informed) {
      if (slot.is_categorical) {
        auto pos = std::find(slot.possible_values.begin(),
                             slot.possible_values.end(), value);
        labels->user_status[k] = kUserActive;
        labels->categorical_value[k] =
            static_cast<int>(pos - slot.possible_values.begin());
        continue;
      }
      if (auto span = locate_span(slot.name, keys, forms, user_frame, input)) {
        labels->user_status[k] = kUserActive;
        labels->span[k] = span;
        continue;
      }
    }

    auto lookup = [&](const std::map<std::string, std::string>& m) {
      auto it = m.find(slot.name);
      return it != m.end() && matches_any(keys, it->second);
    };
    if (lookup(input.sys_uttr_values)) {
      labels->carryover_status[k] = kCarryInSysUttr;
      continue;
    }
    if (lookup(input.prev_sys_values)) {
      labels->carryover_status[k] = kCarryInServiceHist;
      continue;
    }
    bool crossed = false;
    for (size_t e = 0; e < input.s_prev.size(); ++e) {
      if (matches_any(keys, input.s_prev[e].value)) {
        labels->carryover_status[k] = kCarryInCrossServiceHist;
        labels->cross_service_source[k] = static_cast<int>(e);
        crossed = true;
        break;
      }
    }
    if (!crossed) labels->unresolvable[k] = true;
  }
}

TurnInput make_turn_input(const DialogueContext& ctx, const Service& service,
                          const Turn& user_turn,
                          const WordPieceTokenizer& tokenizer) {
  TurnInput input;
  input.system_actions = ctx.last_system_actions(service.name());
  input.system_utterance = ctx.last_system_utterance();
  input.user_utterance = user_turn.utterance;
  input.user_tokens = tokenizer.tokenize(user_turn.utterance);
  input.prev_intent = ctx.prev_intent(service.name());
  if (const ServiceHistory* h = ctx.history(service.name())) {
    input.prev_usr_values = h->prev_usr_slot_value;
    input.prev_sys_values = h->prev_sys_slot_value;
  }
  for (const auto& [key, value] : ctx.sys_uttr_slot_values()) {
    if (key.first == service.name()) input.sys_uttr_values[key.second] = value;
  }
  input.s_prev = compute_s_prev(ctx, service.name());
  for (const Slot& slot : service.slots()) {
    input.features.push_back(binary_features(ctx, service, slot));
  }
  return input;
}

std::vector<std::vector<std::string>> compute_involvement(
    const Dialogue& dialogue) {
  std::vector<std::vector<std::string>> involvement(dialogue.turns.size());
  std::map<std::string, DialogueState> previous;
  for (size_t t = 0; t < dialogue.turns.size(); ++t) {
    const Turn& turn = dialogue.turns[t];
    if (turn.speaker != Speaker::kUser) continue;
    involvement[t] = involved_services(turn.frames, previous);
    for (const Frame& frame : turn.frames) {
      if (frame.state) previous[frame.service] = *frame.state;
    }
  }
  return involvement;
}

DialogueExamples build_dialogue_examples(const Dialogue& dialogue,
                                         const Schema& schema,
                                         const WordPieceTokenizer& tokenizer,
                                         const BuildOptions& options) {
  bool predicted = options.mode == ContextMode::kPredictedContext;
  if (predicted && !options.predictor) {
    throw std::invalid_argument("predicted context requires a predictor");
  }
  auto involvement = options.involvement ? *options.involvement
                                         : compute_involvement(dialogue);
  if (involvement.size() != dialogue.turns.size()) {
    throw std::invalid_argument("involvement does not match dialogue " +
                                dialogue.dialogue_id);
  }

  DialogueExamples out;
  DialogueContext ctx = init_context(dialogue.dialogue_id, schema);
  std::map<std::string, DialogueState> running;  // state per service
  for (size_t t = 0; t < dialogue.turns.size(); ++t) {
    const Turn& turn = dialogue.turns[t];
    if (turn.speaker == Speaker::kSystem) {
      ctx.observe_system_turn(turn);
      continue;
    }
    const auto& involved = involvement[t];
    std::map<std::string, DialogueState> next_states;
    for (const Frame& frame : turn.frames) {
      const Service& service = schema.at(frame.service);
      bool is_involved = std::find(involved.begin(), involved.end(),
                                   frame.service) != involved.end();
      DialogueState next;
      if (!predicted) {
        if (!frame.state) {
          throw ValidationError("dialogue " + dialogue.dialogue_id +
                                ": gold context needs user states");
        }
        next = *frame.state;
      } else if (auto it = running.find(frame.service); it != running.end()) {
        // An uninvolved service keeps its whole previous state.
        next = it->second;
      }

      if (is_involved) {
        TurnExample example;
        example.dialogue_id = dialogue.dialogue_id;
        example.turn_index = static_cast<int>(t);
        example.id = dialogue.dialogue_id + "/" + std::to_string(t) + "/" +
                     frame.service;
        example.service = &service;
        example.input = make_turn_input(ctx, service, turn, tokenizer);
        example.prev_state.active_intent = example.input.prev_intent;
        example.prev_state.slot_values = example.input.prev_usr_values;
        if (frame.state) example.gold_state = frame.state;
        if (options.with_labels) {
          if (!frame.state) {
            throw ValidationError("dialogue " + dialogue.dialogue_id +
                                  ": labels need gold user annotations");
          }
          TurnLabels labels;
          IntentLabels intent = derive_intent_labels(ctx, service, *frame.state);
          labels.intent_status = intent.status;
          labels.intent_value = intent.value;
          labels.requested = derive_requested_labels(service, *frame.state);
          derive_slot_labels(service, example.input, frame, &labels);
          example.labels = std::move(labels);
        }
        if (predicted) next = options.predictor(example);
        out.examples.push_back(std::move(example));
      }
      out.frames.push_back({dialogue.dialogue_id, static_cast<int>(t),
                            frame.service, is_involved, next});
      next_states[frame.service] = next;
    }
    for (const auto& [service, state] : next_states) running[service] = state;
    ctx.observe_user_turn(next_states);
  }
  return out;
}

std::vector<TurnExample> build_turn_examples(
    const Dialogue& dialogue, const Schema& schema,
    const WordPieceTokenizer& tokenizer, ContextMode mode,
    const StatePredictor& predictor) {
  BuildOptions options;
  options.mode = mode;
  options.with_labels = mode == ContextMode::kGoldContext;
  options.predictor = predictor;
  return build_dialogue_examples(dialogue, schema, tokenizer, options).examples;
}

LabelStats label_stats(const std::vector<TurnExample>& examples) {
  LabelStats stats;
  for (const TurnExample& ex : examples) {
    if (!ex.labels) continue;
    ++stats.examples;
    for (size_t k = 0; k < ex.labels->changed.size(); ++k) {
      if (ex.labels->changed[k]) ++stats.changed_slots;
      if (ex.labels->unresolvable[k]) ++stats.unresolvable_slots;
    }
  }
  return stats;
}

json labels_to_json(const TurnExample& example) {
  json j;
  j["id"] = example.id;
  if (!example.labels) return j;
  const TurnLabels& l = *example.labels;
  const Service& service = *example.service;
  j["intent_status"] = l.intent_status == kIntentActive ? "active" : "none";
  if (l.intent_value >= 0) {
    j["intent_value"] = service.intents()[l.intent_value].name;
  }
  json requested = json::array();
  for (size_t i = 0; i < l.requested.size(); ++i) {
    if (l.requested[i]) requested.push_back(service.slots()[i].name);
  }
  j["requested"] = requested;
  json slots = json::object();
  static const char* kUser[] = {"none", "active", "dontcare"};
  for (size_t k = 0; k < l.user_status.size(); ++k) {
    const Slot& slot = service.slots()[service.informable()[k]];
    json s;
    s["user_status"] = kUser[l.user_status[k]];
    s["carryover_status"] = carryover_name(l.carryover_status[k]);
    if (l.categorical_value[k] >= 0) {
      s["value"] = slot.possible_values[l.categorical_value[k]];
    }
    if (l.span[k]) s["span"] = {l.span[k]->start, l.span[k]->end};
    if (l.cross_service_source[k] >= 0) {
      s["cross_service_source"] = l.cross_service_source[k];
    }
    if (l.unresolvable[k]) s["unresolvable"] = true;
    slots[slot.name] = s;
  }
  j["slots"] = slots;
  return j;
}

void write_label_dump(const std::vector<TurnExample>& examples,
                      std::ostream& out) {
  for (const TurnExample& ex : examples) out << labels_to_json(ex).dump() << '\n';
}

}  // namespace sgdst
