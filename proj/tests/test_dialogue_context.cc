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

#include "doctest.h"
#include "sgdst/dialogue_context.h"
#include "test_util.h"

using namespace sgdst;

namespace {

const Schema& schema() { return testing::two_service_dataset().schema; }

Turn system_turn(const std::string& service, std::vector<Action> actions) {
  Turn t;
  t.speaker = Speaker::kSystem;
  t.utterance = "system";
  t.frames.push_back(Frame{service, std::move(actions), std::nullopt, {}});
  return t;
}

Action act(const std::string& name, const std::string& slot,
           std::vector<std::string> values) {
  return Action{name, slot, values, values};
}

DialogueState state(const std::string& intent,
                    std::map<std::string, std::string> values) {
  DialogueState s;
  s.active_intent = intent;
  s.slot_values = std::move(values);
  return s;
}

}  // namespace

TEST_CASE("a fresh context has no history") {
  DialogueContext ctx = init_context("d", schema());
  CHECK(ctx.turn_index() == 0);
  CHECK(compute_s_prev(ctx, "Restaurants_2").empty());
  CHECK(compute_s_prev(ctx, "Homes_1").empty());
  CHECK_FALSE(ctx.prev_usr_slot_value("Restaurants_2", "city"));
  CHECK(ctx.prev_intent("Restaurants_2") == kNoneIntent);

  const Service& r2 = schema().at("Restaurants_2");
  for (const Slot& slot : r2.slots()) {
    BinaryFeatures f = binary_features(ctx, r2, slot);
    CHECK(f[0] == 1);
    CHECK(f[1] == 1);
  }
}

TEST_CASE("only single-valued system mentions are recorded") {
  DialogueContext ctx = init_context("d", schema());
  ctx.observe_system_turn(system_turn(
      "Restaurants_2", {act("OFFER", "restaurant_name", {"World Gourmet"}),
                        act("OFFER", "time", {"6 pm", "7 pm"}),
                        act("REQUEST", "city", {})}));
  CHECK(ctx.sys_uttr_slot_value("Restaurants_2", "restaurant_name") ==
        "World Gourmet");
  CHECK_FALSE(ctx.sys_uttr_slot_value("Restaurants_2", "time"));
  CHECK_FALSE(ctx.sys_uttr_slot_value("Restaurants_2", "city"));
  CHECK(ctx.last_system_actions("Restaurants_2").size() == 3);
  CHECK(ctx.last_system_actions("Homes_1").empty());
}

TEST_CASE("user states update history; absent services keep theirs") {
  DialogueContext ctx = init_context("d", schema());
  ctx.observe_user_turn(
      {{"Restaurants_2", state("FindRestaurants", {{"city", "San Jose"}})},
       {"Homes_1", state("FindApartment", {{"area", "dontcare"}})}});
  CHECK(ctx.prev_usr_slot_value("Restaurants_2", "city") == "San Jose");
  CHECK(ctx.prev_intent("Restaurants_2") == "FindRestaurants");
  CHECK(ctx.prev_usr_slot_value("Homes_1", "area") == "dontcare");

  ctx.observe_user_turn(
      {{"Restaurants_2",
        state("FindRestaurants", {{"city", "Palo Alto"}})}});
  CHECK(ctx.prev_usr_slot_value("Restaurants_2", "city") == "Palo Alto");
  CHECK(ctx.prev_usr_slot_value("Homes_1", "area") == "dontcare");
  CHECK(ctx.prev_intent("Homes_1") == "FindApartment");
  CHECK(ctx.turn_index() == 2);

  CHECK_THROWS_AS(ctx.observe_user_turn({{"Flights_9", DialogueState{}}}),
                  ValidationError);
}

TEST_CASE("S_prev prefers user values and follows first appearance") {
  DialogueContext ctx = init_context("d", schema());
  CHECK(compute_s_prev(ctx, "Restaurants_2").empty());

  ctx.observe_user_turn(
      {{"Homes_1", state("ScheduleVisit", {{"visit_date", "March 8th"}})}});
  std::vector<PrevSlotEntry> entries = compute_s_prev(ctx, "Restaurants_2");
  REQUIRE(entries.size() == 1);
  CHECK(entries[0] == PrevSlotEntry{"Homes_1", "visit_date", "March 8th",
                                    ValueSource::kUserHistory});

  // A later system mention of the same slot does not displace the user value,
  // while a system-only slot is listed with the system source.
  ctx.observe_system_turn(system_turn(
      "Homes_1", {act("CONFIRM", "visit_date", {"March 9th"}),
                  act("INFORM", "phone_number", {"555-0100"})}));
  ctx.observe_user_turn(
      {{"Homes_1", state("ScheduleVisit", {{"visit_date", "March 8th"}})}});
  ctx.observe_system_turn(system_turn("Restaurants_2", {}));
  entries = compute_s_prev(ctx, "Restaurants_2");
  REQUIRE(entries.size() == 2);
  // Homes_1 slot order: area, property_name, visit_date, phone_number.
  CHECK(entries[0].slot == "visit_date");
  CHECK(entries[0].value == "March 8th");
  CHECK(entries[0].source == ValueSource::kUserHistory);
  CHECK(entries[1].slot == "phone_number");
  CHECK(entries[1].source == ValueSource::kSystemHistory);

  for (const PrevSlotEntry& e : compute_s_prev(ctx, "Homes_1")) {
    CHECK(e.service != "Homes_1");
    CHECK_FALSE(e.value.empty());
  }
}

TEST_CASE("binary features on a two-turn dialogue") {
  const Service& r2 = schema().at("Restaurants_2");
  const Slot& name = *r2.find_slot("restaurant_name");
  const Slot& seats = *r2.find_slot("number_of_seats");
  DialogueContext ctx = init_context("d", schema());

  BinaryFeatures f = binary_features(ctx, r2, name);
  CHECK(f[0] == 1);
  CHECK(f[1] == 1);
  CHECK(f[2] == 0);
  CHECK(f[3] == 0);

  ctx.observe_user_turn({{"Restaurants_2", state("FindRestaurants", {})}});
  ctx.observe_system_turn(system_turn(
      "Restaurants_2", {act("OFFER", "restaurant_name", {"World Gourmet"})}));
  f = binary_features(ctx, r2, name);
  CHECK(f[0] == 0);
  CHECK(f[1] == 0);
  CHECK(f[2] == 1);
  CHECK(f[3] == 0);

  // The offer moves into service history one system turn later; a turn
  // without Restaurants_2 marks it switched.
  ctx.observe_user_turn({{"Homes_1", state("FindApartment", {})}});
  ctx.observe_system_turn(system_turn("Homes_1", {}));
  f = binary_features(ctx, r2, name);
  CHECK(f[0] == 0);
  CHECK(f[1] == 1);
  CHECK(f[2] == 0);
  CHECK(f[3] == 1);

  // Schema-static features: restaurant_name is required by ReserveRestaurant
  // and optional nowhere; number_of_seats likewise.
  for (const Slot* s : {&name, &seats}) {
    BinaryFeatures a = binary_features(ctx, r2, *s);
    BinaryFeatures b = binary_features(init_context("x", schema()), r2, *s);
    CHECK(a[4] == b[4]);
    CHECK(a[5] == b[5]);
  }
}

TEST_CASE("required in one intent and optional in another") {
  Intent a{"A", "", false, {"when"}, {}};
  Intent b{"B", "", false, {}, {"when", "where"}};
  Service s = Service::create("Demo_1", "", {a, b},
                              {Slot{"when", "", false, {}},
                               Slot{"where", "", false, {}}});
  Schema demo({s});
  DialogueContext ctx = init_context("d", demo);
  BinaryFeatures when = binary_features(ctx, demo.at("Demo_1"),
                                        demo.at("Demo_1").slots()[0]);
  CHECK(when[4] == 1);
  CHECK(when[5] == 0);
  BinaryFeatures where = binary_features(ctx, demo.at("Demo_1"),
                                         demo.at("Demo_1").slots()[1]);
  CHECK(where[4] == 0);
  CHECK(where[5] == 0);  // not optional in A
}

TEST_CASE("prev system value matches a brute-force scan") {
  const Service& r2 = schema().at("Restaurants_2");
  std::mt19937_64 rng(7);
  const std::vector<std::string> values = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 50; ++trial) {
    DialogueContext ctx = init_context("d", schema());
    std::vector<Turn> system_turns;
    int turns = 1 + static_cast<int>(rng() % 8);
    for (int t = 0; t < turns; ++t) {
      std::vector<Action> actions;
      int n = static_cast<int>(rng() % 4);
      for (int k = 0; k < n; ++k) {
        const Slot& slot = r2.slots()[rng() % r2.slots().size()];
        std::vector<std::string> vals;
        int nv = static_cast<int>(rng() % 3);
        for (int v = 0; v < nv; ++v) vals.push_back(values[rng() % 4]);
        actions.push_back(act("INFORM", slot.name, vals));
      }
      system_turns.push_back(system_turn("Restaurants_2", actions));
      ctx.observe_system_turn(system_turns.back());
      ctx.observe_user_turn({});
    }
    for (const Slot& slot : r2.slots()) {
      std::optional<std::string> expected;
      // Every system turn before the latest one.
      for (size_t t = 0; t + 1 < system_turns.size(); ++t) {
        for (const Action& a : system_turns[t].frames[0].actions) {
          if (a.slot == slot.name && a.values.size() == 1) {
            expected = a.values[0];
          }
        }
      }
      CHECK(ctx.prev_sys_slot_value("Restaurants_2", slot.name) == expected);

      std::optional<std::string> latest;
      for (const Action& a : system_turns.back().frames[0].actions) {
        if (a.slot == slot.name && a.values.size() == 1) latest = a.values[0];
      }
      CHECK(ctx.sys_uttr_slot_value("Restaurants_2", slot.name) == latest);
    }
  }
}

TEST_CASE("involved services are those whose state changed") {
  const Dialogue& d = testing::two_service_dataset().dialogues.at(0);
  std::map<std::string, DialogueState> previous;
  std::vector<std::vector<std::string>> per_turn;
  for (const Turn& t : d.turns) {
    if (t.speaker != Speaker::kUser) continue;
    per_turn.push_back(involved_services(t.frames, previous));
    for (const Frame& f : t.frames) previous[f.service] = *f.state;
  }
  REQUIRE(per_turn.size() == 3);
  CHECK(per_turn[0] == std::vector<std::string>{"Homes_1"});
  CHECK(per_turn[1] == std::vector<std::string>{"Restaurants_2"});
  CHECK(per_turn[2] == std::vector<std::string>{"Restaurants_2"});

  // Repeating the last user turn changes nothing.
  CHECK(involved_services(d.turns[4].frames, previous).empty());
}
