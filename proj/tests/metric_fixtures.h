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

// Hand-built and randomized frame lists for the metric tests.

#ifndef SGDST_TESTS_METRIC_FIXTURES_H_
#define SGDST_TESTS_METRIC_FIXTURES_H_

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sgdst/evaluation.h"

namespace sgdst::testing {

inline FrameRecord frame(int turn, std::map<std::string, std::string> slots,
                         std::string intent = "Find",
                         std::set<std::string> requested = {},
                         std::string service = "Svc_1",
                         std::string dialogue = "d0") {
  FrameRecord f;
  f.dialogue_id = std::move(dialogue);
  f.turn_index = turn;
  f.service = std::move(service);
  f.involved = true;
  f.state.active_intent = std::move(intent);
  f.state.slot_values = std::move(slots);
  f.state.requested_slots = std::move(requested);
  return f;
}

struct MetricFixture {
  std::string name;
  std::vector<FrameRecord> predicted;
  std::vector<FrameRecord> gold;
  double jga;
  double avg_ga;
  double intent;
  double req_f1;
};

// Small fixtures with their metrics worked out by hand.
inline std::vector<MetricFixture> hand_fixtures() {
  std::vector<MetricFixture> out;
  {
    // One wrong value in the last of four frames; the empty frame counts for
    // JGA but not for average goal accuracy.
    MetricFixture f{"one wrong value", {}, {}, 0.75, 0.0, 1.0, 1.0};
    f.gold = {frame(0, {{"a", "x"}, {"b", "y"}}), frame(1, {{"c", "z"}}),
              frame(2, {}), frame(3, {{"a", "x"}, {"b", "y"}, {"c", "z"}})};
    f.predicted = f.gold;
    f.predicted[3].state.slot_values["c"] = "w";
    f.avg_ga = (1.0 + 1.0 + 2.0 / 3.0) / 3.0;
    out.push_back(f);
  }
  {
    // Five slots in each of two frames, one of them missed: (1 + 4/5) / 2.
    MetricFixture f{"missed slot", {}, {}, 0.5, 0.9, 1.0, 1.0};
    std::map<std::string, std::string> five = {
        {"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "4"}, {"e", "5"}};
    f.gold = {frame(0, five), frame(1, five)};
    f.predicted = f.gold;
    f.predicted[1].state.slot_values.erase("e");
    out.push_back(f);
  }
  {
    // Frame means differ from the pooled slot ratio (2/5 would be pooled).
    MetricFixture f{"per-frame mean", {}, {}, 0.5, 0.625, 1.0, 1.0};
    f.gold = {frame(0, {{"a", "x"}}),
              frame(1, {{"a", "p"}, {"b", "q"}, {"c", "r"}, {"d", "s"}})};
    f.predicted = {frame(0, {{"a", "x"}}),
                   frame(1, {{"a", "p"}, {"b", "zzz"}, {"c", "uuu"}})};
    out.push_back(f);
  }
  {
    // An extra predicted slot breaks the joint goal only.
    MetricFixture f{"extra slot", {}, {}, 0.0, 1.0, 1.0, 1.0};
    f.gold = {frame(0, {{"a", "x"}})};
    f.predicted = {frame(0, {{"a", "x"}, {"b", "y"}})};
    out.push_back(f);
  }
  {
    // Two of five intents wrong.
    MetricFixture f{"intents", {}, {}, 1.0, 1.0, 0.6, 1.0};
    for (int t = 0; t < 5; ++t) f.gold.push_back(frame(t, {{"a", "x"}}, "Find"));
    f.predicted = f.gold;
    f.predicted[1].state.active_intent = "Reserve";
    f.predicted[4].state.active_intent = "NONE";
    out.push_back(f);
  }
  {
    // F1 of 2/3, both empty, and disjoint sets.
    MetricFixture f{"requested", {}, {}, 1.0, 1.0, 1.0, (2.0 / 3.0 + 1.0) / 3.0};
    f.gold = {frame(0, {{"a", "x"}}, "Find", {"a", "b"}),
              frame(1, {{"a", "x"}}, "Find", {}),
              frame(2, {{"a", "x"}}, "Find", {"c"})};
    f.predicted = f.gold;
    f.predicted[0].state.requested_slots = {"a"};
    f.predicted[2].state.requested_slots = {"d"};
    out.push_back(f);
  }
  {
    // Case differences match; other services are scored independently.
    // Frame 1 scores 1/2 and the others 1, so the mean is 5/6.
    MetricFixture f{"case and services", {}, {}, 2.0 / 3.0, 5.0 / 6.0, 2.0 / 3.0, 1.0};
    f.gold = {frame(0, {{"city", "San Jose"}}, "Find", {}, "Svc_1"),
              frame(0, {{"city", "Oakland"}, {"date", "today"}}, "Book", {}, "Svc_2"),
              frame(1, {{"city", "Oakland"}}, "Book", {}, "Svc_2")};
    f.predicted = f.gold;
    f.predicted[0].state.slot_values["city"] = "san jose";
    f.predicted[1].state.slot_values["city"] = "Fremont";
    f.predicted[2].state.active_intent = "Find";
    out.push_back(f);
  }
  return out;
}

// Random frames over a small vocabulary whose values are either identical up
// to case or far apart, so fuzzy matching reduces to equality. With
// `gold_slot_each` every gold frame carries at least one value.
inline MetricFixture random_fixture(std::mt19937_64& rng, int frames,
                                    bool gold_slot_each) {
  static const std::vector<std::string> slots = {"a", "b", "c", "d"};
  static const std::vector<std::string> values = {"alpha", "ALPHA", "gamma",
                                                  "mu", "omicron"};
  static const std::vector<std::string> intents = {"Find", "Book", "NONE"};
  std::uniform_int_distribution<int> coin(0, 1);
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
  };
  auto random_state = [&](bool need_value) {
    std::map<std::string, std::string> sv;
    do {
      for (const std::string& s : slots) {
        if (coin(rng)) sv[s] = pick(values);
      }
    } while (need_value && sv.empty());
    std::set<std::string> req;
    for (const std::string& s : slots) {
      if (coin(rng) && coin(rng)) req.insert(s);
    }
    return std::make_pair(sv, req);
  };
  MetricFixture f{"random", {}, {}, 0, 0, 0, 0};
  for (int t = 0; t < frames; ++t) {
    auto [gv, gr] = random_state(gold_slot_each);
    // Predictions copy the gold state often enough to hit every outcome.
    auto [pv, pr] = coin(rng) ? std::make_pair(gv, gr) : random_state(false);
    if (coin(rng) && !pv.empty()) pv.erase(pv.begin());
    std::string service = coin(rng) ? "Svc_1" : "Svc_2";
    std::string gi = pick(intents);
    std::string pi = coin(rng) ? gi : pick(intents);
    f.gold.push_back(frame(t, gv, gi, gr, service));
    f.predicted.push_back(frame(t, pv, pi, pr, service));
  }
  return f;
}

}  // namespace sgdst::testing

#endif  // SGDST_TESTS_METRIC_FIXTURES_H_
