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

#include <sstream>

#include "doctest.h"
#include "sgdst/evaluation.h"
#include "sgdst/labeling.h"
#include "test_util.h"

using namespace sgdst;
using testing::two_service_dataset;
using testing::two_service_examples;
using testing::two_service_tokenizer;

namespace {

int pos(const Service& s, const std::string& slot) {
  return s.informable_position(s.slot_index(slot));
}

const TurnExample& reserve_turn() { return two_service_examples().at(2); }

Frame user_frame(const std::string& service, DialogueState state,
                 std::vector<Action> actions = {}) {
  return Frame{service, std::move(actions), std::move(state), {}};
}

}  // namespace

TEST_CASE("one example per involved service") {
  const std::vector<TurnExample>& ex = two_service_examples();
  REQUIRE(ex.size() == 3);
  CHECK(ex[0].turn_index == 0);
  CHECK(ex[0].service->name() == "Homes_1");
  CHECK(ex[1].turn_index == 2);
  CHECK(ex[1].service->name() == "Restaurants_2");
  CHECK(ex[2].turn_index == 4);
  CHECK(ex[2].service->name() == "Restaurants_2");
}

TEST_CASE("reservation turn labels") {
  const TurnExample& ex = reserve_turn();
  const Service& s = *ex.service;
  const TurnLabels& l = *ex.labels;

  CHECK(l.intent_status == kIntentActive);
  CHECK(s.intents().at(l.intent_value).name == "ReserveRestaurant");
  for (int r : l.requested) CHECK(r == 0);

  int time = pos(s, "time");
  CHECK(l.user_status[time] == kUserActive);
  REQUIRE(l.span[time].has_value());
  CHECK(testing::tokens_text(two_service_tokenizer(), ex.input.user_tokens,
                             l.span[time]->start, l.span[time]->end) ==
        "six in the evening");
  CHECK(l.carryover_status[time] == kCarryNone);

  int seats = pos(s, "number_of_seats");
  CHECK(l.user_status[seats] == kUserActive);
  const Slot& seats_slot = *s.find_slot("number_of_seats");
  CHECK(seats_slot.possible_values.at(l.categorical_value[seats]) == "4");

  int name = pos(s, "restaurant_name");
  CHECK(l.user_status[name] == kUserNone);
  CHECK(l.carryover_status[name] == kCarryInSysUttr);

  int date = pos(s, "date");
  CHECK(l.carryover_status[date] == kCarryInCrossServiceHist);
  REQUIRE(l.cross_service_source[date] >= 0);
  const PrevSlotEntry& src = ex.input.s_prev.at(l.cross_service_source[date]);
  CHECK(src.service == "Homes_1");
  CHECK(src.slot == "visit_date");
  CHECK(src.value == "March 8th");

  // city and cuisine were given on the previous turn.
  for (const char* kept : {"city", "cuisine"}) {
    CHECK_FALSE(l.changed[pos(s, kept)]);
    CHECK(l.user_status[pos(s, kept)] == kUserNone);
    CHECK(l.carryover_status[pos(s, kept)] == kCarryNone);
  }
}

TEST_CASE("intent labels") {
  const Dataset& data = two_service_dataset();
  const Service& r2 = data.schema.at("Restaurants_2");
  DialogueContext ctx = init_context("d", data.schema);

  DialogueState find;
  find.active_intent = "FindRestaurants";
  IntentLabels first = derive_intent_labels(ctx, r2, find);
  CHECK(first.status == kIntentActive);
  CHECK(r2.intents()[first.value].name == "FindRestaurants");

  ctx.observe_user_turn({{"Restaurants_2", find}});
  CHECK(derive_intent_labels(ctx, r2, find).status == kIntentNone);

  DialogueState reserve;
  reserve.active_intent = "ReserveRestaurant";
  IntentLabels sw = derive_intent_labels(ctx, r2, reserve);
  CHECK(sw.status == kIntentActive);
  CHECK(r2.intents()[sw.value].name == "ReserveRestaurant");

  DialogueState bogus;
  bogus.active_intent = "BookFlight";
  CHECK_THROWS_AS(derive_intent_labels(ctx, r2, bogus), ValidationError);
}

TEST_CASE("requested labels") {
  const Service& r2 = two_service_dataset().schema.at("Restaurants_2");
  DialogueState st;
  st.requested_slots = {"phone_number"};
  std::vector<int> req = derive_requested_labels(r2, st);
  REQUIRE(req.size() == r2.slots().size());
  for (size_t i = 0; i < req.size(); ++i) {
    CHECK(req[i] == (r2.slots()[i].name == "phone_number" ? 1 : 0));
  }
  Service empty = Service::create("Empty_1", "", {}, {});
  CHECK(derive_requested_labels(empty, DialogueState{}).empty());
}

TEST_CASE("source precedence") {
  const Service& r2 = two_service_dataset().schema.at("Restaurants_2");
  TurnInput input;
  input.user_utterance = "Golden Wok please";
  input.user_tokens = two_service_tokenizer().tokenize(input.user_utterance);
  input.sys_uttr_values = {{"restaurant_name", "Golden Wok"}};
  input.prev_sys_values = {{"restaurant_name", "golden  wok"},
                           {"city", "San Jose"}};
  input.s_prev = {{"Homes_1", "area", "san jose", ValueSource::kUserHistory}};

  DialogueState st;
  st.slot_values = {{"restaurant_name", "Golden Wok"}, {"city", "San Jose"}};
  TurnLabels l;

  SUBCASE("system utterance beats service history") {
    derive_slot_labels(r2, input, user_frame("Restaurants_2", st), &l);
    CHECK(l.carryover_status[pos(r2, "restaurant_name")] == kCarryInSysUttr);
    CHECK(l.carryover_status[pos(r2, "city")] == kCarryInServiceHist);
  }

  SUBCASE("a user inform beats every carryover") {
    Frame f = user_frame(
        "Restaurants_2", st,
        {Action{"INFORM", "restaurant_name", {"Golden Wok"}, {"Golden Wok"}}});
    f.slot_spans = {SlotSpan{"restaurant_name", 0, 10}};
    derive_slot_labels(r2, input, f, &l);
    int k = pos(r2, "restaurant_name");
    CHECK(l.user_status[k] == kUserActive);
    CHECK(l.carryover_status[k] == kCarryNone);
    REQUIRE(l.span[k].has_value());
    CHECK(l.span[k]->start == 0);
  }

  SUBCASE("dontcare needs no source") {
    st.slot_values["cuisine"] = kDontCare;
    derive_slot_labels(r2, input, user_frame("Restaurants_2", st), &l);
    CHECK(l.user_status[pos(r2, "cuisine")] == kUserDontCare);
  }

  SUBCASE("cross-service history is the last resort") {
    input.prev_sys_values.erase("city");
    derive_slot_labels(r2, input, user_frame("Restaurants_2", st), &l);
    CHECK(l.carryover_status[pos(r2, "city")] == kCarryInCrossServiceHist);
    CHECK(l.cross_service_source[pos(r2, "city")] == 0);
  }

  SUBCASE("no source is unresolvable") {
    st.slot_values["cuisine"] = "Thai";
    derive_slot_labels(r2, input, user_frame("Restaurants_2", st), &l);
    int k = pos(r2, "cuisine");
    CHECK(l.changed[k]);
    CHECK(l.unresolvable[k]);
    CHECK(l.user_status[k] == kUserNone);
    CHECK(l.carryover_status[k] == kCarryNone);
  }

  SUBCASE("categorical value outside the schema") {
    st.slot_values["number_of_seats"] = "99";
    CHECK_THROWS_AS(
        derive_slot_labels(r2, input, user_frame("Restaurants_2", st), &l),
        ValidationError);
  }
}

TEST_CASE("character spans snap outward to tokens") {
  std::vector<Token> tokens = two_service_tokenizer().tokenize("want a table for");
  REQUIRE(tokens.size() == 4);
  auto span = char_span_to_tokens(tokens, 8, 10);  // inside "table"
  REQUIRE(span.has_value());
  CHECK(span->start == 2);
  CHECK(span->end == 2);
  span = char_span_to_tokens(tokens, 3, 10);
  REQUIRE(span.has_value());
  CHECK(span->start == 0);
  CHECK(span->end == 2);
  CHECK_FALSE(char_span_to_tokens(tokens, 40, 45).has_value());
}

TEST_CASE("a five-turn single-service dialogue yields five examples") {
  const Dataset& data = two_service_dataset();
  Dialogue d;
  d.dialogue_id = "five";
  d.services = {"Restaurants_2"};
  const std::vector<std::string> asks = {"phone_number", "cuisine", "city",
                                         "time", "date"};
  for (int t = 0; t < 6; ++t) {
    DialogueState st;
    st.active_intent = "FindRestaurants";
    // The sixth turn repeats the fifth, so nothing changes.
    st.requested_slots = {asks[std::min(t, 4)]};
    Turn user;
    user.speaker = Speaker::kUser;
    user.utterance = "what about it";
    user.frames.push_back(user_frame("Restaurants_2", st,
                                     {Action{"REQUEST", asks[std::min(t, 4)],
                                             {}, {}}}));
    d.turns.push_back(user);
    Turn sys;
    sys.speaker = Speaker::kSystem;
    sys.utterance = "ok";
    sys.frames.push_back(Frame{"Restaurants_2", {}, std::nullopt, {}});
    d.turns.push_back(sys);
  }
  validate_dialogue(d, data.schema);
  std::vector<TurnExample> ex =
      build_turn_examples(d, data.schema, two_service_tokenizer());
  CHECK(ex.size() == 5);
  for (const TurnExample& e : ex) CHECK(e.turn_index < 10);
}

TEST_CASE("label invariants on the toy corpus") {
  Dataset data = testing::toy_dataset("train", 40);
  WordPieceTokenizer tok = make_tokenizer(RunConfig{}, data);
  std::vector<TurnExample> all = gold_examples(data, tok);
  REQUIRE(!all.empty());
  long spans = 0;
  for (const TurnExample& ex : all) {
    const TurnLabels& l = *ex.labels;
    const Service& s = *ex.service;
    for (size_t k = 0; k < l.user_status.size(); ++k) {
      const Slot& slot = s.slots()[s.informable()[k]];
      CHECK_FALSE((l.user_status[k] != kUserNone &&
                   l.carryover_status[k] != kCarryNone));
      CHECK((l.cross_service_source[k] >= 0) ==
            (l.carryover_status[k] == kCarryInCrossServiceHist));
      if (l.span[k]) {
        ++spans;
        CHECK(l.user_status[k] == kUserActive);
        CHECK_FALSE(slot.is_categorical);
        CHECK(l.span[k]->start >= 0);
        CHECK(l.span[k]->start <= l.span[k]->end);
        CHECK(l.span[k]->end < static_cast<int>(ex.input.user_tokens.size()));
        std::string text = testing::tokens_text(
            tok, ex.input.user_tokens, l.span[k]->start, l.span[k]->end);
        const std::string& gold = ex.gold_state->slot_values.at(slot.name);
        CHECK(fuzzy_match(text, gold) >= kFuzzyMatchThreshold);
      }
      if (l.cross_service_source[k] >= 0) {
        CHECK(l.cross_service_source[k] <
              static_cast<int>(ex.input.s_prev.size()));
      }
    }
  }
  CHECK(spans > 0);

  LabelStats stats = label_stats(all);
  CHECK(stats.examples == static_cast<long>(all.size()));
  CHECK(stats.unresolvable_rate() < 0.02);
}

TEST_CASE("label dump has one record per example") {
  std::ostringstream out;
  write_label_dump(two_service_examples(), out);
  std::istringstream in(out.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j.at("id") == two_service_examples()[n].id);
    ++n;
  }
  CHECK(n == 3);
}
