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

#include "sgdst/evaluation.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>
#include <tuple>

namespace sgdst {
namespace {

using FrameKey = std::tuple<std::string, int, std::string>;

FrameKey key_of(const FrameRecord& f) {
  return {f.dialogue_id, f.turn_index, f.service};
}

std::string describe(const FrameKey& k) {
  return std::get<0>(k) + "/" + std::to_string(std::get<1>(k)) + "/" +
         std::get<2>(k);
}

std::string token_sort(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  std::sort(tokens.begin(), tokens.end());
  std::string out;
  for (const std::string& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::size_t lcs_length(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (char ca : a) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = ca == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

std::vector<std::string> gold_forms(const DialogueState& gold,
                                    const std::string& slot) {
  std::vector<std::string> forms{gold.slot_values.at(slot)};
  auto it = gold.alternatives.find(slot);
  if (it != gold.alternatives.end()) {
    forms.insert(forms.end(), it->second.begin(), it->second.end());
  }
  return forms;
}

double ratio(long numerator, long denominator) {
  return denominator == 0 ? std::numeric_limits<double>::quiet_NaN()
                          : static_cast<double>(numerator) / denominator;
}

template <typename F>
void for_each_pair(const std::vector<FrameRecord>& predicted,
                   const std::vector<FrameRecord>& gold, const Schema* schema,
                   F&& fn) {
  for (const FramePair& p : align_frames(predicted, gold)) {
    const Service* service = schema ? schema->find(p.gold->service) : nullptr;
    fn(score_frame(p.predicted->state, p.gold->state, service));
  }
}

}  // namespace

double fuzzy_match(std::string_view predicted, std::string_view gold) {
  std::string a = token_sort(predicted);
  std::string b = token_sort(gold);
  if (a.empty() && b.empty()) return 1.0;
  return 2.0 * static_cast<double>(lcs_length(a, b)) /
         static_cast<double>(a.size() + b.size());
}

bool value_matches(std::string_view predicted,
                   const std::vector<std::string>& gold_forms,
                   bool categorical) {
  for (const std::string& gold : gold_forms) {
    if (categorical || gold == kDontCare || predicted == kDontCare) {
      if (predicted == gold) return true;
    } else if (fuzzy_match(predicted, gold) >= kFuzzyMatchThreshold) {
      return true;
    }
  }
  return false;
}

TurnScore score_frame(const DialogueState& predicted, const DialogueState& gold,
                      const Service* service) {
  TurnScore score;
  std::set<std::string> slots;
  for (const auto& [slot, value] : gold.slot_values) slots.insert(slot);
  for (const auto& [slot, value] : predicted.slot_values) slots.insert(slot);
  for (const std::string& slot : slots) {
    auto g = gold.slot_values.find(slot);
    auto p = predicted.slot_values.find(slot);
    bool correct;
    if (g == gold.slot_values.end()) {
      correct = false;  // extra predicted slot
    } else {
      ++score.assigned_slots;
      const Slot* def = service ? service->find_slot(slot) : nullptr;
      bool categorical = def && def->is_categorical;
      correct = p != predicted.slot_values.end() &&
                value_matches(p->second, gold_forms(gold, slot), categorical);
      score.correct_assigned += correct;
    }
    score.slot_correct[slot] = correct;
    score.joint_correct = score.joint_correct && correct;
  }
  score.intent_correct = predicted.active_intent == gold.active_intent;

  for (const std::string& r : predicted.requested_slots) {
    if (gold.requested_slots.count(r)) {
      ++score.requested_tp;
    } else {
      ++score.requested_fp;
    }
  }
  score.requested_fn =
      static_cast<int>(gold.requested_slots.size()) - score.requested_tp;
  if (predicted.requested_slots.empty() && gold.requested_slots.empty()) {
    score.requested_f1 = 1.0;
  } else if (score.requested_tp == 0) {
    score.requested_f1 = 0.0;
  } else {
    double p = static_cast<double>(score.requested_tp) /
               predicted.requested_slots.size();
    double r = static_cast<double>(score.requested_tp) /
               gold.requested_slots.size();
    score.requested_f1 = 2 * p * r / (p + r);
  }
  return score;
}

std::vector<FramePair> align_frames(const std::vector<FrameRecord>& predicted,
                                    const std::vector<FrameRecord>& gold) {
  std::map<FrameKey, const FrameRecord*> by_key;
  for (const FrameRecord& f : predicted) {
    if (!by_key.emplace(key_of(f), &f).second) {
      throw ValidationError("duplicate predicted frame " + describe(key_of(f)));
    }
  }
  std::vector<FramePair> pairs;
  std::vector<std::string> missing;
  for (const FrameRecord& g : gold) {
    auto it = by_key.find(key_of(g));
    if (it == by_key.end()) {
      missing.push_back(describe(key_of(g)));
      continue;
    }
    pairs.push_back({it->second, &g});
    by_key.erase(it);
  }
  if (!missing.empty() || !by_key.empty()) {
    std::ostringstream msg;
    msg << "frame alignment failed";
    auto list = [&](const char* what, const std::vector<std::string>& keys) {
      if (keys.empty()) return;
      msg << "; " << keys.size() << ' ' << what << ':';
      for (std::size_t i = 0; i < keys.size() && i < 20; ++i) {
        msg << ' ' << keys[i];
      }
      if (keys.size() > 20) msg << " ...";
    };
    list("missing", missing);
    std::vector<std::string> extra;
    for (const auto& [k, f] : by_key) extra.push_back(describe(k));
    list("unexpected", extra);
    throw ValidationError(msg.str());
  }
  return pairs;
}

std::vector<FrameRecord> gold_frames(const std::vector<Dialogue>& dialogues) {
  std::vector<FrameRecord> frames;
  for (const Dialogue& d : dialogues) {
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const Turn& turn = d.turns[t];
      if (turn.speaker != Speaker::kUser) continue;
      for (const Frame& f : turn.frames) {
        if (!f.state) continue;
        frames.push_back(
            {d.dialogue_id, static_cast<int>(t), f.service, true, *f.state});
      }
    }
  }
  return frames;
}

void Metrics::add(const TurnScore& s) {
  ++frames;
  joint_correct += s.joint_correct;
  assigned_slots += s.assigned_slots;
  correct_assigned += s.correct_assigned;
  if (s.assigned_slots > 0) {
    ++goal_frames;
    goal_accuracy_sum +=
        static_cast<double>(s.correct_assigned) / s.assigned_slots;
  }
  intent_correct += s.intent_correct;
  requested_f1_sum += s.requested_f1;
}

double Metrics::jga() const { return ratio(joint_correct, frames); }
double Metrics::avg_ga() const {
  return goal_frames == 0 ? std::numeric_limits<double>::quiet_NaN()
                          : goal_accuracy_sum / goal_frames;
}
double Metrics::intent_acc() const { return ratio(intent_correct, frames); }
double Metrics::requested_f1() const {
  return frames == 0 ? std::numeric_limits<double>::quiet_NaN()
                     : requested_f1_sum / frames;
}

nlohmann::json Metrics::to_json() const {
  // JSON has no NaN; undefined metrics are written as null.
  auto num = [](double x) {
    return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x);
  };
  return {{"frames", frames},
          {"assigned_slots", assigned_slots},
          {"joint_goal_accuracy", num(jga())},
          {"average_goal_accuracy", num(avg_ga())},
          {"intent_accuracy", num(intent_acc())},
          {"requested_slot_f1", num(requested_f1())}};
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json services = nlohmann::json::object();
  for (const auto& [name, m] : per_service) services[name] = m.to_json();
  return {{"overall", overall.to_json()},
          {"seen", seen.to_json()},
          {"unseen", unseen.to_json()},
          {"per_service", services}};
}

void MetricsReport::write_csv(std::ostream& out) const {
  out << "group,frames,assigned_slots,joint_goal_accuracy,"
         "average_goal_accuracy,intent_accuracy,requested_slot_f1\n";
  auto row = [&](const std::string& name, const Metrics& m) {
    out << name << ',' << m.frames << ',' << m.assigned_slots << ',' << m.jga()
        << ',' << m.avg_ga() << ',' << m.intent_acc() << ','
        << m.requested_f1() << '\n';
  };
  row("overall", overall);
  row("seen", seen);
  row("unseen", unseen);
  for (const auto& [name, m] : per_service) row("service:" + name, m);
}

double joint_goal_accuracy(const std::vector<FrameRecord>& predicted,
                           const std::vector<FrameRecord>& gold,
                           const Schema* schema) {
  Metrics m;
  for_each_pair(predicted, gold, schema, [&](const TurnScore& s) { m.add(s); });
  return m.jga();
}

double average_goal_accuracy(const std::vector<FrameRecord>& predicted,
                             const std::vector<FrameRecord>& gold,
                             const Schema* schema) {
  Metrics m;
  for_each_pair(predicted, gold, schema, [&](const TurnScore& s) { m.add(s); });
  if (m.assigned_slots == 0) {
    std::cerr << "warning: no gold slot values; average goal accuracy is "
                 "undefined\n";
  }
  return m.avg_ga();
}

double intent_accuracy(const std::vector<FrameRecord>& predicted,
                       const std::vector<FrameRecord>& gold) {
  Metrics m;
  for_each_pair(predicted, gold, nullptr, [&](const TurnScore& s) { m.add(s); });
  return m.intent_acc();
}

double requested_slot_f1(const std::vector<FrameRecord>& predicted,
                         const std::vector<FrameRecord>& gold) {
  Metrics m;
  for_each_pair(predicted, gold, nullptr, [&](const TurnScore& s) { m.add(s); });
  return m.requested_f1();
}

MetricsReport evaluate_frames(const std::vector<FrameRecord>& predicted,
                              const std::vector<FrameRecord>& gold,
                              const Schema& schema,
                              const std::set<std::string>& train_services) {
  MetricsReport report;
  for (const FramePair& p : align_frames(predicted, gold)) {
    const std::string& name = p.gold->service;
    TurnScore s = score_frame(p.predicted->state, p.gold->state,
                              schema.find(name));
    report.overall.add(s);
    (train_services.count(name) ? report.seen : report.unseen).add(s);
    report.per_service[name].add(s);
  }
  if (report.overall.frames > 0 && report.overall.assigned_slots == 0) {
    std::cerr << "warning: no gold slot values; average goal accuracy is "
                 "undefined\n";
  }
  return report;
}

}  // namespace sgdst
