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

#include "sgdst/decoding.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace sgdst {
namespace {

template <std::size_t N>
int argmax_fixed(const std::array<double, N>& p) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(N); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return best;
}

template <std::size_t N>
std::array<double, N> softmax_row(const Matrix& logits, Eigen::Index row) {
  std::array<double, N> p{};
  double m = logits.row(row).maxCoeff();
  double z = 0.0;
  for (std::size_t c = 0; c < N; ++c) {
    p[c] = std::exp(logits(row, c) - m);
    z += p[c];
  }
  for (double& x : p) x /= z;
  return p;
}

const std::string* lookup(const std::map<std::string, std::string>& m,
                          const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? nullptr : &it->second;
}

}  // namespace

void DecodeOptions::validate() const {
  if (!(binary_threshold > 0.0 && binary_threshold < 1.0)) {
    throw std::invalid_argument("binary_threshold must be in (0, 1)");
  }
  for (int c : disabled_carryover) {
    if (c <= kCarryNone || c >= kNumCarryoverStatus) {
      throw std::invalid_argument("only carryover classes 1-3 can be disabled");
    }
  }
}

void DecodeDiagnostics::merge(const DecodeDiagnostics& other) {
  slots += other.slots;
  invalid_carryover += other.invalid_carryover;
  empty_span += other.empty_span;
  for (int c = 0; c < kNumCarryoverStatus; ++c) {
    carryover_argmax[c] += other.carryover_argmax[c];
  }
}

HeadScores scores_from_outputs(const HeadOutputs& outputs,
                               const HeadLayout& layout,
                               const TurnExample& example) {
  HeadScores s;
  const int n_inf = layout.num_informable;
  const int U = static_cast<int>(example.input.user_tokens.size());
  const int P = static_cast<int>(example.input.s_prev.size());

  s.intent_status = softmax_row<2>(outputs[kHeadIntentStatus], 0);
  for (int i = 0; i < layout.num_intents; ++i) {
    s.intent_value.push_back(sigmoid(outputs[kHeadIntentValue](i, 0)));
  }
  for (int i = 0; i < layout.num_slots; ++i) {
    s.requested.push_back(sigmoid(outputs[kHeadRequested](i, 0)));
  }
  for (int i = 0; i < n_inf; ++i) {
    s.user_status.push_back(softmax_row<kNumUserStatus>(outputs[kHeadUserStatus], i));
    s.carryover.push_back(
        softmax_row<kNumCarryoverStatus>(outputs[kHeadCarryover], i));
  }

  s.categorical.assign(n_inf, {});
  for (std::size_t k = 0; k < layout.categorical_slots.size(); ++k) {
    auto& probs = s.categorical[layout.categorical_slots[k]];
    for (int v = 0; v < layout.value_counts[k]; ++v) {
      probs.push_back(
          sigmoid(outputs[kHeadCategorical](layout.value_offsets[k] + v, 0)));
    }
  }

  s.start.assign(n_inf, {});
  s.end.assign(n_inf, {});
  for (std::size_t k = 0; k < layout.noncategorical_slots.size(); ++k) {
    int i = layout.noncategorical_slots[k];
    for (int h : {kHeadStart, kHeadEnd}) {
      auto& probs = h == kHeadStart ? s.start[i] : s.end[i];
      probs.assign(U, -1.0);
      const Matrix& logits = outputs[h];
      if (layout.num_user_tokens == 0) continue;
      double m = logits.row(k).maxCoeff();
      double z = (logits.row(k).array() - m).exp().sum();
      for (int u = 0; u < layout.num_user_tokens; ++u) {
        probs[layout.user_skipped + u] = std::exp(logits(k, u) - m) / z;
      }
    }
  }

  s.cross.assign(n_inf, std::vector<double>(P, -1.0));
  for (int i = 0; i < n_inf; ++i) {
    for (std::size_t j = 0; j < layout.cross_entries.size(); ++j) {
      s.cross[i][layout.cross_entries[j]] =
          sigmoid(outputs[kHeadCross](i, static_cast<Eigen::Index>(j)));
    }
  }
  return s;
}

HeadScores oracle_scores(const TurnLabels& labels, const TurnExample& example) {
  const Service& service = *example.service;
  const int n_inf = static_cast<int>(service.informable().size());
  const int U = static_cast<int>(example.input.user_tokens.size());
  const int P = static_cast<int>(example.input.s_prev.size());
  HeadScores s;
  s.intent_status = {labels.intent_status == kIntentActive ? 0.0 : 1.0,
                     labels.intent_status == kIntentActive ? 1.0 : 0.0};
  s.intent_value.assign(service.intents().size(), 0.0);
  if (labels.intent_value >= 0) s.intent_value[labels.intent_value] = 1.0;
  for (int r : labels.requested) s.requested.push_back(r ? 1.0 : 0.0);

  s.user_status.assign(n_inf, {1.0, 0.0, 0.0});
  s.carryover.assign(n_inf, {1.0, 0.0, 0.0, 0.0});
  s.categorical.assign(n_inf, {});
  s.start.assign(n_inf, {});
  s.end.assign(n_inf, {});
  s.cross.assign(n_inf, std::vector<double>(P, 0.0));
  for (int i = 0; i < n_inf; ++i) {
    const Slot& slot = service.slots()[service.informable()[i]];
    if (slot.is_categorical) {
      s.categorical[i].assign(slot.possible_values.size(), 0.0);
      if (labels.categorical_value[i] >= 0) {
        s.categorical[i][labels.categorical_value[i]] = 1.0;
      }
    } else {
      s.start[i].assign(U, 0.0);
      s.end[i].assign(U, 0.0);
      if (labels.span[i]) {
        s.start[i][labels.span[i]->start] = 1.0;
        s.end[i][labels.span[i]->end] = 1.0;
      }
    }
    if (labels.unresolvable[i]) continue;
    s.user_status[i] = {0.0, 0.0, 0.0};
    s.user_status[i][labels.user_status[i]] = 1.0;
    s.carryover[i] = {0.0, 0.0, 0.0, 0.0};
    s.carryover[i][labels.carryover_status[i]] = 1.0;
    if (labels.cross_service_source[i] >= 0) {
      s.cross[i][labels.cross_service_source[i]] = 1.0;
    }
  }
  return s;
}

int argmax(const std::vector<double>& probs) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    if (probs[i] < 0.0) continue;
    if (best < 0 || probs[i] > probs[best]) best = i;
  }
  return best;
}

std::string decode_intent(const HeadScores& scores, const Service& service,
                          const std::string& prev_intent) {
  if (argmax_fixed(scores.intent_status) != kIntentActive) return prev_intent;
  int best = argmax(scores.intent_value);
  return best < 0 ? prev_intent : service.intents()[best].name;
}

std::set<std::string> decode_requested(const HeadScores& scores,
                                       const Service& service,
                                       const DecodeOptions& options) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < scores.requested.size(); ++i) {
    if (scores.requested[i] > options.binary_threshold) {
      out.insert(service.slots()[i].name);
    }
  }
  return out;
}

SlotUpdate decode_slot_update(const HeadScores& scores, int informable_pos,
                              const TurnExample& example,
                              const DecodeOptions& options,
                              DecodeDiagnostics* diagnostics) {
  const Service& service = *example.service;
  const TurnInput& input = example.input;
  const int i = informable_pos;
  const Slot& slot = service.slots()[service.informable().at(i)];
  DecodeDiagnostics local;
  DecodeDiagnostics& diag = diagnostics ? *diagnostics : local;
  ++diag.slots;

  SlotUpdate update;
  update.user_argmax = argmax_fixed(scores.user_status.at(i));
  update.carryover_argmax = argmax_fixed(scores.carryover.at(i));
  ++diag.carryover_argmax[update.carryover_argmax];

  if (update.user_argmax == kUserActive) {
    if (slot.is_categorical) {
      int v = argmax(scores.categorical.at(i));
      if (v >= 0) {
        update.kind = SlotUpdate::Kind::kSet;
        update.value = slot.possible_values[v];
      }
      return update;
    }
    // Joint argmax over start <= end maximizing p_start * p_end.
    const auto& start = scores.start.at(i);
    const auto& end = scores.end.at(i);
    int best_s = -1;
    int best_e = -1;
    double best = -1.0;
    for (int s = 0; s < static_cast<int>(start.size()); ++s) {
      if (start[s] < 0.0) continue;
      for (int e = s; e < static_cast<int>(end.size()); ++e) {
        if (end[e] < 0.0) continue;
        double p = start[s] * end[e];
        if (p > best) {
          best = p;
          best_s = s;
          best_e = e;
        }
      }
    }
    if (best_s < 0) {
      ++diag.empty_span;
      return update;
    }
    const auto& tokens = input.user_tokens;
    update.kind = SlotUpdate::Kind::kSet;
    update.value = input.user_utterance.substr(
        tokens[best_s].begin, tokens[best_e].end - tokens[best_s].begin);
    return update;
  }
  if (update.user_argmax == kUserDontCare) {
    update.kind = SlotUpdate::Kind::kDontCare;
    update.value = kDontCare;
    return update;
  }

  int carry = update.carryover_argmax;
  if (options.disabled_carryover.count(carry)) carry = kCarryNone;
  const std::string* source = nullptr;
  switch (carry) {
    case kCarryInSysUttr:
      source = lookup(input.sys_uttr_values, slot.name);
      break;
    case kCarryInServiceHist:
      source = lookup(input.prev_sys_values, slot.name);
      break;
    case kCarryInCrossServiceHist: {
      int j = argmax(scores.cross.at(i));
      if (j >= 0) source = &input.s_prev[j].value;
      break;
    }
    default:
      return update;
  }
  if (!source || source->empty()) {
    ++diag.invalid_carryover;
    return update;
  }
  update.kind = SlotUpdate::Kind::kSet;
  update.value = *source;
  return update;
}

DialogueState update_state(const DialogueState& prev_state,
                           const std::string& intent,
                           const std::set<std::string>& requested,
                           const Service& service,
                           const std::vector<SlotUpdate>& updates) {
  if (updates.size() != service.informable().size()) {
    throw std::invalid_argument("one update per informable slot expected");
  }
  DialogueState state;
  state.active_intent = intent;
  state.requested_slots = requested;
  state.slot_values = prev_state.slot_values;
  for (std::size_t i = 0; i < updates.size(); ++i) {
    if (updates[i].kind == SlotUpdate::Kind::kKeep) continue;
    state.slot_values[service.slots()[service.informable()[i]].name] =
        updates[i].value;
  }
  return state;
}

TurnDecode decode_turn(const HeadScores& scores, const TurnExample& example,
                       const DecodeOptions& options,
                       DecodeDiagnostics* diagnostics) {
  const Service& service = *example.service;
  TurnDecode out;
  for (std::size_t i = 0; i < service.informable().size(); ++i) {
    out.updates.push_back(decode_slot_update(scores, static_cast<int>(i),
                                             example, options, diagnostics));
  }
  out.state = update_state(
      example.prev_state,
      decode_intent(scores, service, example.input.prev_intent),
      decode_requested(scores, service, options), service, out.updates);
  return out;
}

void write_predictions(const std::vector<FrameRecord>& frames,
                       std::ostream& out) {
  for (const FrameRecord& f : frames) {
    nlohmann::json j;
    j["dialogue_id"] = f.dialogue_id;
    j["turn_index"] = f.turn_index;
    j["service"] = f.service;
    j["involved"] = f.involved;
    j["state"] = to_json(f.state);
    out << j.dump() << '\n';
  }
}

std::vector<FrameRecord> read_predictions(std::istream& in) {
  std::vector<FrameRecord> frames;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      FrameRecord f;
      f.dialogue_id = j.at("dialogue_id").get<std::string>();
      f.turn_index = j.at("turn_index").get<int>();
      f.service = j.at("service").get<std::string>();
      f.involved = j.value("involved", true);
      f.state = state_from_json(j.at("state"));
      frames.push_back(std::move(f));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("predictions line " + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return frames;
}

}  // namespace sgdst
