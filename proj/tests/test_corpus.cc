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

#include <fstream>

#include "doctest.h"
#include "sgdst/corpus.h"
#include "test_util.h"

using namespace sgdst;
using nlohmann::json;

namespace {

json one_service(json intents, json slots) {
  return json::array({{{"service_name", "Demo_1"},
                       {"description", "demo"},
                       {"slots", std::move(slots)},
                       {"intents", std::move(intents)}}});
}

json slot(const std::string& name) {
  return {{"name", name}, {"description", name}, {"is_categorical", false},
          {"possible_values", json::array()}};
}

json intent(const std::string& name, json required, json optional) {
  return {{"name", name},
          {"required_slots", std::move(required)},
          {"optional_slots", std::move(optional)}};
}

}  // namespace

TEST_CASE("normalize_name splits underscores and camel case") {
  CHECK(normalize_name("party_size") == "party size");
  CHECK(normalize_name("FindRestaurants") == "find restaurants");
  CHECK(normalize_name("number_of_seats") == "number of seats");
  CHECK(normalize_name("Restaurants_2") == "restaurants 2");
}

TEST_CASE("normalize_name is idempotent over corpus names") {
  std::vector<std::string> names;
  for (const Service& s : toy_services()) {
    names.push_back(s.name());
    for (const Intent& i : s.intents()) names.push_back(i.name);
    for (const Slot& sl : s.slots()) names.push_back(sl.name);
  }
  for (const std::string& n : names) {
    std::string once = normalize_name(n);
    CHECK(normalize_name(once) == once);
  }
}

TEST_CASE("schema with zero slots has only NONE plus declared intents") {
  Schema schema = parse_schema(
      one_service(json::array({intent("Greet", json::array(), json::array())}),
                  json::array()),
      "inline");
  const Service& s = schema.at("Demo_1");
  CHECK(s.slots().empty());
  REQUIRE(s.intents().size() == 2);
  CHECK(s.intents()[0].name == kNoneIntent);
  CHECK(s.intents()[1].name == "Greet");
  CHECK(s.informable().empty());
}

TEST_CASE("intent requiring an undeclared slot names the slot") {
  json j = one_service(
      json::array({intent("Book", json::array({"ghost"}), json::array())}),
      json::array({slot("city")}));
  try {
    parse_schema(j, "inline");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
}

TEST_CASE("informable slots follow the intents") {
  json j = one_service(
      json::array({intent("A", json::array({"city"}), json::array()),
                   intent("B", json::array(), json::array({"date"})),
                   intent("C", json::array(), json::array())}),
      json::array({slot("city"), slot("price"), slot("date")}));
  Service s = parse_schema(j, "inline").at("Demo_1");
  CHECK(informable_slots(s) == std::vector<std::string>{"city", "date"});
  CHECK_FALSE(s.is_informable("price"));

  const Service& r2 = testing::two_service_dataset().schema.at("Restaurants_2");
  std::vector<std::string> inf = informable_slots(r2);
  for (const char* name : {"restaurant_name", "time", "number_of_seats", "date"}) {
    CHECK(std::find(inf.begin(), inf.end(), name) != inf.end());
  }
}

TEST_CASE("informable slots are a schema-ordered subset") {
  for (const Service& s : toy_services()) {
    std::vector<std::string> inf = informable_slots(s);
    int last = -1;
    for (const std::string& name : inf) {
      int idx = s.slot_index(name);
      REQUIRE(idx >= 0);
      CHECK(idx > last);
      last = idx;
    }
    CHECK(informable_slots(s) == inf);
  }
}

TEST_CASE("malformed schema JSON reports the file") {
  testing::TempDir dir("corpus");
  auto path = dir.path() / "schema.json";
  std::ofstream(path) << "[{\"service_name\": ";
  try {
    load_schema(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("schema.json") != std::string::npos);
  }
}

TEST_CASE("dialogue files") {
  const Dataset& two_service = testing::two_service_dataset();
  testing::TempDir dir("dialogues");

  SUBCASE("empty directory gives no dialogues") {
    CHECK(load_dialogues(dir.path(), two_service.schema).empty());
  }

  SUBCASE("unknown service is rejected") {
    json d = to_json(two_service.dialogues.at(0));
    d["turns"][0]["frames"][0]["service"] = "Flights_9";
    CHECK_THROWS_AS(parse_dialogues(json::array({d}), two_service.schema, "inline"),
                    ValidationError);
  }

  SUBCASE("unknown slot is rejected") {
    json d = to_json(two_service.dialogues.at(0));
    d["turns"][0]["frames"][0]["state"]["slot_values"]["ghost"] =
        json::array({"x"});
    CHECK_THROWS_AS(parse_dialogues(json::array({d}), two_service.schema, "inline"),
                    ValidationError);
  }

  SUBCASE("round trip is structurally equal") {
    write_schema(two_service.schema, dir.path() / "schema.json");
    write_dialogues(two_service.dialogues, dir.path() / "dialogues_001.json");
    Schema schema = load_schema(dir.path() / "schema.json");
    CHECK(schema == two_service.schema);
    std::vector<Dialogue> again = load_dialogues(dir.path(), schema);
    CHECK(again == two_service.dialogues);
  }

  SUBCASE("files are read in name order") {
    Dialogue a = two_service.dialogues.at(0);
    Dialogue b = a;
    a.dialogue_id = "a";
    b.dialogue_id = "b";
    write_dialogues({b}, dir.path() / "dialogues_002.json");
    write_dialogues({a}, dir.path() / "dialogues_001.json");
    std::vector<Dialogue> got = load_dialogues(dir.path(), two_service.schema);
    REQUIRE(got.size() == 2);
    CHECK(got[0].dialogue_id == "a");
    CHECK(got[1].dialogue_id == "b");
  }
}

TEST_CASE("toy corpus round-trips through the SGD layout") {
  testing::TempDir dir("toy");
  ToyCorpusOptions options;
  options.train_dialogues = 6;
  options.dev_dialogues = 2;
  options.test_dialogues = 2;
  write_toy_corpus(dir.path(), options);
  for (const char* split : {"train", "dev", "test"}) {
    Dataset data = load_split(dir.path(), split);
    CHECK(!data.dialogues.empty());
    for (const Service& s : data.schema.services()) {
      CHECK(s.intents().at(0).name == kNoneIntent);
    }
  }
}

TEST_CASE("stripping removes user annotations only") {
  const Dialogue& d = testing::two_service_dataset().dialogues.at(0);
  Dialogue stripped = strip_user_annotations(d);
  REQUIRE(stripped.turns.size() == d.turns.size());
  for (size_t t = 0; t < d.turns.size(); ++t) {
    CHECK(stripped.turns[t].utterance == d.turns[t].utterance);
    if (d.turns[t].speaker == Speaker::kSystem) {
      CHECK(stripped.turns[t] == d.turns[t]);
      continue;
    }
    for (const Frame& f : stripped.turns[t].frames) {
      CHECK_FALSE(f.state.has_value());
      CHECK(f.actions.empty());
      CHECK(f.slot_spans.empty());
    }
  }
}
