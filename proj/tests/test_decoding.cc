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

#include <random>
#include <sstream>

#include "doctest.h"
#include "sgdst/decoding.h"
#include "test_util.h"

using namespace sgdst;
using testing::two_service_examples;

namespace {

int pos(const Service& s, const std::string& slot) {
  return s.informable_position(s.slot_index(slot));
}

// Scores of the right shape with every entry drawn uniformly.
HeadScores random_scores(const TurnExample& ex, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Service& s = *ex.service;
  const int n = static_cast<int>(s.informable().size());
  const int U = static_cast<int>(ex.input.user_tokens.size());
  HeadScores h;
  h.intent_status = {u(rng), u(rng)};
  for (size_t i = 0; i < s.intents().size(); ++i) h.intent_value.push_back(u(rng));
  for (size_t i = 0; i < s.slots().size(); ++i) h.requested.push_back(u(rng));
  h.user_status.resize(n);
  h.carryover.resize(n);
  h.categorical.resize(n);
  h.start.resize(n);
  h.end.resize(n);
  h.cross.resize(n);
  for (int i = 0; i < n; ++i) {
    const Slot& slot = s.slots()[s.informable()[i]];
    for (double& x : h.user_status[i]) x = u(rng);
    for (double& x : h.carryover[i]) x = u(rng);
    if (slot.is_categorical) {
      for (size_t v = 0; v < slot.possible_values.size(); ++v) {
        h.categorical[i].push_back(u(rng));
      }
    } else {
      for (int t = 0; t < U; ++t) {
        h.start[i].push_back(u(rng));
        h.end[i].push_back(u(rng));
      }
    }
    for (size_t e = 0; e < ex.input.s_prev.size(); ++e) h.cross[i].push_back(u(rng));
  }
  return h;
}

}  // namespace

TEST_CASE("reservation turn decodes from its gold labels") {
  const TurnExample& ex = two_service_examples().at(2);
  const Service& s = *ex.service;
  HeadScores scores = oracle_scores(*ex.labels, ex);
  DecodeDiagnostics diag;
  TurnDecode d = decode_turn(scores, ex, DecodeOptions{}, &diag);
  CHECK(d.state == *ex.gold_state);
  CHECK(d.state.active_intent == "ReserveRestaurant");
  CHECK(d.state.requested_slots.empty());

  const SlotUpdate& time = d.updates[pos(s, "time")];
  CHECK(time.kind == SlotUpdate::Kind::kSet);
  CHECK(time.value == "six in the evening");
  CHECK(d.updates[pos(s, "number_of_seats")].value == "4");
  CHECK(d.updates[pos(s, "restaurant_name")].value == "World Gourmet");
  CHECK(d.updates[pos(s, "date")].value == "March 8th");
  CHECK(d.updates[pos(s, "city")].kind == SlotUpdate::Kind::kKeep);

  // Starting from {city, cuisine} the turn adds exactly the four slots.
  CHECK(ex.prev_state.slot_values.size() == 2);
  CHECK(d.state.slot_values.size() == 6);
  CHECK(diag.invalid_carryover == 0);
  CHECK(diag.empty_span == 0);
}

TEST_CASE("every fixture turn round-trips") {
  for (const TurnExample& ex : two_service_examples()) {
    TurnDecode d = decode_turn(oracle_scores(*ex.labels, ex), ex, DecodeOptions{}, nullptr);
    CHECK(d.state == *ex.gold_state);
  }
}

TEST_CASE("intent decoding") {
  const TurnExample& ex = two_service_examples().at(2);
  const Service& s = *ex.service;
  HeadScores h = oracle_scores(*ex.labels, ex);

  SUBCASE("status none keeps the previous intent") {
    h.intent_status = {0.9, 0.1};
    CHECK(decode_intent(h, s, "FindRestaurants") == "FindRestaurants");
  }
  SUBCASE("ties go to the lowest index") {
    h.intent_status = {0.1, 0.9};
    std::fill(h.intent_value.begin(), h.intent_value.end(), 0.4);
    CHECK(decode_intent(h, s, "FindRestaurants") == kNoneIntent);
    h.intent_value[0] = 0.1;
    CHECK(decode_intent(h, s, "ReserveRestaurant") == "FindRestaurants");
  }
  CHECK(argmax({0.2, 0.7, 0.7}) == 1);
  CHECK(argmax({}) == -1);
}

TEST_CASE("requested slots use a strict threshold") {
  const TurnExample& ex = two_service_examples().at(2);
  const Service& s = *ex.service;
  HeadScores h = oracle_scores(*ex.labels, ex);
  DecodeOptions o;
  std::fill(h.requested.begin(), h.requested.end(), 0.01);
  CHECK(decode_requested(h, s, o).empty());
  h.requested[s.slot_index("phone_number")] = 0.99;
  CHECK(decode_requested(h, s, o) == std::set<std::string>{"phone_number"});
  h.requested[s.slot_index("city")] = 0.5;
  CHECK(decode_requested(h, s, o) == std::set<std::string>{"phone_number"});
}

TEST_CASE("slot update precedence") {
  const TurnExample& ex = two_service_examples().at(2);
  const Service& s = *ex.service;
  HeadScores h = oracle_scores(*ex.labels, ex);
  DecodeDiagnostics diag;
  int name = pos(s, "restaurant_name");

  SUBCASE("no status keeps the value") {
    h.carryover[name] = {1, 0, 0, 0};
    CHECK(decode_slot_update(h, name, ex, {}, &diag).kind == SlotUpdate::Kind::kKeep);
  }
  SUBCASE("dontcare wins over carryover") {
    h.user_status[name] = {0, 0, 1};
    SlotUpdate u = decode_slot_update(h, name, ex, {}, &diag);
    CHECK(u.kind == SlotUpdate::Kind::kDontCare);
    CHECK(u.value == kDontCare);
  }
  SUBCASE("an empty source degrades to keep") {
    h.carryover[name] = {0, 0, 1, 0};  // nothing in service history
    SlotUpdate u = decode_slot_update(h, name, ex, {}, &diag);
    CHECK(u.kind == SlotUpdate::Kind::kKeep);
    CHECK(diag.invalid_carryover == 1);
    CHECK(u.carryover_argmax == kCarryInServiceHist);
  }
  SUBCASE("a disabled class is treated as none") {
    DecodeOptions o;
    o.disabled_carryover = {kCarryInSysUttr};
    SlotUpdate u = decode_slot_update(h, name, ex, o, &diag);
    CHECK(u.kind == SlotUpdate::Kind::kKeep);
    CHECK(u.carryover_argmax == kCarryInSysUttr);
    CHECK(diag.invalid_carryover == 0);
  }
  SUBCASE("inverted spans are never chosen") {
    int time = pos(s, "time");
    std::fill(h.start[time].begin(), h.start[time].end(), 0.0);
    std::fill(h.end[time].begin(), h.end[time].end(), 0.0);
    h.start[time][5] = 0.9;
    h.end[time][2] = 0.9;  // best end lies before the best start
    h.end[time][6] = 0.5;
    SlotUpdate u = decode_slot_update(h, time, ex, {}, &diag);
    CHECK(u.value == "table for");
  }
}

TEST_CASE("state update") {
  const TurnExample& ex = two_service_examples().at(2);
  const Service& s = *ex.service;
  DialogueState prev = ex.prev_state;
  prev.requested_slots = {"phone_number"};
  std::vector<SlotUpdate> keep(s.informable().size());
  DialogueState same = update_state(prev, "FindRestaurants", {}, s, keep);
  CHECK(same.slot_values == prev.slot_values);
  CHECK(same.requested_slots.empty());  // replaced, not accumulated

  std::vector<SlotUpdate> set = keep;
  set[pos(s, "time")] = SlotUpdate{SlotUpdate::Kind::kSet, "7 pm"};
  DialogueState next = update_state(prev, "ReserveRestaurant", {"city"}, s, set);
  CHECK(next.slot_values.at("time") == "7 pm");
  CHECK(next.slot_values.size() == prev.slot_values.size() + 1);
  CHECK(next.active_intent == "ReserveRestaurant");
  CHECK(next.requested_slots == std::set<std::string>{"city"});
}

TEST_CASE("random scores: monotone states, valid spans, local ablations") {
  Dataset data = testing::toy_dataset("train", 20);
  WordPieceTokenizer tok = make_tokenizer(RunConfig{}, data);
  std::vector<TurnExample> examples = gold_examples(data, tok);
  std::mt19937_64 rng(2024);
  long changed_by_ablation = 0;
  for (const TurnExample& ex : examples) {
    HeadScores h = random_scores(ex, rng);
    TurnDecode base = decode_turn(h, ex, {}, nullptr);
    for (const auto& [slot, value] : ex.prev_state.slot_values) {
      CHECK(base.state.slot_values.count(slot) == 1);
    }
    for (size_t i = 0; i < base.updates.size(); ++i) {
      const SlotUpdate& u = base.updates[i];
      const Slot& slot = ex.service->slots()[ex.service->informable()[i]];
      if (u.kind == SlotUpdate::Kind::kSet && u.user_argmax == kUserActive &&
          !slot.is_categorical) {
        CHECK(!u.value.empty());
        CHECK(ex.input.user_utterance.find(u.value) != std::string::npos);
      }
    }
    for (int c : {kCarryInSysUttr, kCarryInServiceHist, kCarryInCrossServiceHist}) {
      DecodeOptions o;
      o.disabled_carryover = {c};
      TurnDecode ablated = decode_turn(h, ex, o, nullptr);
      for (size_t i = 0; i < base.updates.size(); ++i) {
        const SlotUpdate& a = base.updates[i];
        const SlotUpdate& b = ablated.updates[i];
        if (a == b) continue;
        ++changed_by_ablation;
        CHECK(a.carryover_argmax == c);
        CHECK(a.user_argmax == kUserNone);
        CHECK(b.kind == SlotUpdate::Kind::kKeep);
      }
    }
  }
  CHECK(changed_by_ablation > 0);
}

TEST_CASE("prediction dump round trip") {
  std::vector<FrameRecord> frames = gold_frames(testing::two_service_dataset().dialogues);
  REQUIRE(!frames.empty());
  std::stringstream io;
  write_predictions(frames, io);
  std::vector<FrameRecord> back = read_predictions(io);
  REQUIRE(back.size() == frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    CHECK(back[i].dialogue_id == frames[i].dialogue_id);
    CHECK(back[i].turn_index == frames[i].turn_index);
    CHECK(back[i].service == frames[i].service);
    CHECK(back[i].state == frames[i].state);
  }
}
