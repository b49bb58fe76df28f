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

#include "sgdst/toy_corpus.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>

namespace sgdst {
namespace {

using Rng = std::mt19937_64;

const std::vector<std::string> kCities = {
    "San Jose",  "Oakland",   "San Francisco", "Berkeley",   "Palo Alto",
    "Sunnyvale", "Fremont",   "Santa Rosa",    "Sacramento", "Napa"};
const std::vector<std::string> kDates = {
    "tomorrow",  "next Monday",        "March 3rd",  "this Friday",
    "the 12th",  "day after tomorrow", "next Tuesday"};
const std::vector<std::string> kTimes = {
    "six in the evening", "7 pm",  "11:30 am", "half past 6 pm",
    "8:15 pm",            "noon",  "5:45 pm"};
const std::vector<std::string> kRestaurants = {
    "World Gourmet", "Sushi Boat",   "Taqueria Loco", "Pizza Garden",
    "Golden Dragon", "Blue Plate",   "Cafe Rustica",  "The Spice Route",
    "Harbor Grill",  "Little Saigon"};
const std::vector<std::string> kCuisines = {
    "Italian", "Mexican", "Chinese", "Indian",
    "Thai",    "Sushi",   "American", "Vegetarian"};
const std::vector<std::string> kProperties = {
    "Acacia Apartments", "Bay View Homes",  "Cedar Court",
    "Oak Terrace",       "Parkside Villas", "Willow Creek"};
const std::vector<std::string> kAddresses = {
    "123 Main Street", "45 Oak Avenue", "9 Harbor Way", "780 Elm Road",
    "16 Pine Street"};
const std::vector<std::string> kPhones = {"408-555-0134", "650-555-0199",
                                          "510-555-0101", "415-555-0147"};
const std::vector<std::string> kRatings = {"4.5", "4.2", "3.9", "4.8"};
const std::vector<std::string> kFares = {"$23.50", "$12.10", "$31.75"};
const std::vector<std::string> kDurations = {"15 minutes", "22 minutes",
                                             "9 minutes"};
const std::vector<std::string> kRents = {"$2,450 per month",
                                         "$3,100 per month",
                                         "$1,980 per month"};
const std::vector<std::string> kTemperatures = {"72 degrees", "65 degrees",
                                                "58 degrees"};
const std::vector<std::string> kPercents = {"10 percent", "25 percent",
                                            "40 percent", "55 percent"};
const std::vector<std::string> kWinds = {"8 miles per hour",
                                         "3 miles per hour"};
const std::vector<std::string> kPrices = {"$540", "$780", "$1,120"};
const std::vector<std::string> kBool = {"True", "False"};

// How one slot is sampled and phrased by the simulated user.
struct SlotGen {
  std::string role;  // cross-service family; empty when never carried
  std::vector<std::string> pool;
  std::string phrase;  // "{}" marks the value
  std::string true_phrase;
  std::string false_phrase;
};

struct ServiceSpec {
  Service service;
  std::string search_intent;  // empty when the service only transacts
  std::string transact_intent;
  std::string name_slot;  // offered result, required by the transaction
  std::vector<std::string> result_slots;  // offered after a search
  std::vector<std::string> info_slots;    // requestable details
  std::map<std::string, SlotGen> gens;
  std::map<std::string, std::string> intent_phrases;
  std::map<std::string, std::string> confirm_defaults;
};

Slot noncat(std::string name, std::string description) {
  return {std::move(name), std::move(description), false, {}};
}

Slot cat(std::string name, std::string description,
         std::vector<std::string> values) {
  return {std::move(name), std::move(description), true, std::move(values)};
}

SlotGen text_gen(std::string role, std::vector<std::string> pool,
                 std::string phrase) {
  return {std::move(role), std::move(pool), std::move(phrase), "", ""};
}

SlotGen bool_gen(std::string true_phrase, std::string false_phrase) {
  return {"", {}, "", std::move(true_phrase), std::move(false_phrase)};
}

std::vector<std::string> counts(int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(std::to_string(i));
  return out;
}

ServiceSpec restaurants_2() {
  ServiceSpec s;
  s.service = Service::create(
      "Restaurants_2", "A leading provider for restaurant search and reservations",
      {{"ReserveRestaurant", "Make a table reservation at a restaurant", true,
        {"restaurant_name", "location", "time"}, {"number_of_seats", "date"}},
       {"FindRestaurants", "Find restaurants by location and by category",
        false, {"category", "location"},
        {"price_range", "has_vegetarian_options", "has_seating_outdoors"}}},
      {noncat("restaurant_name", "Name of the restaurant"),
       noncat("date", "Tentative date of restaurant reservation"),
       noncat("time", "Tentative time of restaurant reservation"),
       cat("has_seating_outdoors", "Whether the restaurant has outdoor seating",
           kBool),
       cat("has_vegetarian_options",
           "Whether the restaurant has adequate vegetarian options", kBool),
       noncat("phone_number", "Phone number to contact restaurant"),
       noncat("rating", "Average user rating for restaurant on a scale of 5"),
       noncat("address", "Address of restaurant"),
       cat("number_of_seats", "Number of seats to reserve at the restaurant",
           counts(6)),
       cat("price_range", "Price range for the restaurant",
           {"cheap", "moderate", "expensive", "very expensive"}),
       noncat("location", "City where the restaurant is located"),
       noncat("category", "The category of food offered by the restaurant")});
  s.search_intent = "FindRestaurants";
  s.transact_intent = "ReserveRestaurant";
  s.name_slot = "restaurant_name";
  s.info_slots = {"phone_number", "rating", "address"};
  s.gens = {
      {"restaurant_name", text_gen("place", kRestaurants, "at {}")},
      {"date", text_gen("date", kDates, "for {}")},
      {"time", text_gen("time", kTimes, "at {}")},
      {"has_seating_outdoors",
       bool_gen("with outdoor seating", "without outdoor seating")},
      {"has_vegetarian_options",
       bool_gen("with vegetarian options", "without vegetarian options")},
      {"phone_number", text_gen("", kPhones, "")},
      {"rating", text_gen("", kRatings, "")},
      {"address", text_gen("", kAddresses, "")},
      {"number_of_seats", text_gen("count", {}, "for {} people")},
      {"price_range", text_gen("", {}, "in the {} price range")},
      {"location", text_gen("location", kCities, "in {}")},
      {"category", text_gen("", kCuisines, "serving {} food")}};
  s.intent_phrases = {{"FindRestaurants", "I'm looking for a place to eat"},
                      {"ReserveRestaurant", "I want to reserve a table there"}};
  s.confirm_defaults = {{"date", "today"}, {"number_of_seats", "2"}};
  return s;
}

ServiceSpec restaurants_1() {
  ServiceSpec s;
  s.service = Service::create(
      "Restaurants_1", "A popular restaurant search and reservation service",
      {{"ReserveRestaurant", "Reserve a table at a restaurant", true,
        {"restaurant_name", "city", "time"}, {"date", "party_size"}},
       {"FindRestaurants", "Find a restaurant of a particular cuisine in a city",
        false, {"cuisine", "city"},
        {"price_range", "serves_alcohol", "has_live_music"}}},
      {noncat("restaurant_name", "Name of the restaurant"),
       noncat("date", "Date for the reservation or to find availability"),
       noncat("time", "Time for the reservation or to find availability"),
       cat("serves_alcohol", "Boolean flag indicating if the restaurant serves alcohol",
           kBool),
       cat("has_live_music",
           "Boolean flag indicating if the restaurant has live music", kBool),
       noncat("phone_number", "Phone number of the restaurant"),
       noncat("street_address", "Address of the restaurant"),
       cat("party_size", "Party size for a reservation", counts(6)),
       cat("price_range", "Price range for the restaurant",
           {"inexpensive", "moderate", "pricey", "ultra high-end"}),
       noncat("city", "City in which the restaurant is located"),
       noncat("cuisine", "Cuisine of food served in the restaurant")});
  s.search_intent = "FindRestaurants";
  s.transact_intent = "ReserveRestaurant";
  s.name_slot = "restaurant_name";
  s.info_slots = {"phone_number", "street_address"};
  s.gens = {
      {"restaurant_name", text_gen("place", kRestaurants, "at {}")},
      {"date", text_gen("date", kDates, "on {}")},
      {"time", text_gen("time", kTimes, "at {}")},
      {"serves_alcohol", bool_gen("that serves alcohol", "with no alcohol")},
      {"has_live_music", bool_gen("with live music", "without live music")},
      {"phone_number", text_gen("", kPhones, "")},
      {"street_address", text_gen("", kAddresses, "")},
      {"party_size", text_gen("count", {}, "for a party of {}")},
      {"price_range", text_gen("", {}, "that is {}")},
      {"city", text_gen("location", kCities, "in {}")},
      {"cuisine", text_gen("", kCuisines, "with {} cuisine")}};
  s.intent_phrases = {{"FindRestaurants", "Can you find me a restaurant"},
                      {"ReserveRestaurant", "Please book a table"}};
  s.confirm_defaults = {{"date", "today"}, {"party_size", "2"}};
  return s;
}

ServiceSpec homes_1() {
  ServiceSpec s;
  s.service = Service::create(
      "Homes_1", "A widely used service for finding apartments and scheduling visits",
      {{"FindApartment", "Find an apartment in a given area", false,
        {"area", "number_of_beds"},
        {"furnished", "pets_allowed", "number_of_baths"}},
       {"ScheduleVisit", "Schedule a visit to a property on a given date", true,
        {"property_name", "visit_date"}, {}}},
      {noncat("area", "City where the apartment is located"),
       noncat("address", "Address of the apartment"),
       noncat("property_name", "Name of the apartment"),
       noncat("phone_number", "Phone number of the apartment"),
       cat("furnished", "Boolean flag indicating if the property is furnished",
           kBool),
       cat("pets_allowed", "Boolean flag indicating if pets are allowed", kBool),
       noncat("rent", "Rent per month of the apartment"),
       noncat("visit_date", "Date for the visit to the apartment"),
       cat("number_of_beds", "Number of bed rooms", counts(4)),
       cat("number_of_baths", "Number of baths in the apartment", counts(3))});
  s.search_intent = "FindApartment";
  s.transact_intent = "ScheduleVisit";
  s.name_slot = "property_name";
  s.info_slots = {"phone_number", "rent", "address"};
  s.gens = {
      {"area", text_gen("location", kCities, "in {}")},
      {"address", text_gen("", kAddresses, "")},
      {"property_name", text_gen("place", kProperties, "at {}")},
      {"phone_number", text_gen("", kPhones, "")},
      {"furnished", bool_gen("that is furnished", "that is unfurnished")},
      {"pets_allowed", bool_gen("that allows pets", "with no pets")},
      {"rent", text_gen("", kRents, "")},
      {"visit_date", text_gen("date", kDates, "on {}")},
      {"number_of_beds", text_gen("", {}, "with {} bedrooms")},
      {"number_of_baths", text_gen("", {}, "with {} bathrooms")}};
  s.intent_phrases = {{"FindApartment", "I need to find an apartment"},
                      {"ScheduleVisit", "I want to schedule a visit"}};
  return s;
}

ServiceSpec ridesharing_1() {
  ServiceSpec s;
  s.service = Service::create(
      "RideSharing_1", "On-demand taxi calling service",
      {{"GetRide", "Call a taxi to head to a given destination", true,
        {"destination", "number_of_riders", "shared_ride"}, {}}},
      {noncat("destination", "Destination for taxi ride"),
       cat("shared_ride", "Boolean flag whether ride is shared with other passengers",
           kBool),
       noncat("ride_fare", "Total fare for taxi ride"),
       noncat("approximate_ride_duration", "Approximate duration of ride to the destination"),
       cat("number_of_riders", "Number of riders to call taxi for", counts(4))});
  s.transact_intent = "GetRide";
  s.info_slots = {"ride_fare", "approximate_ride_duration"};
  s.gens = {
      {"destination", text_gen("place", kAddresses, "to {}")},
      {"shared_ride", bool_gen("in a shared ride", "in a private ride")},
      {"ride_fare", text_gen("", kFares, "")},
      {"approximate_ride_duration", text_gen("", kDurations, "")},
      {"number_of_riders", text_gen("count", {}, "for {} riders")}};
  s.intent_phrases = {{"GetRide", "I need a cab"}};
  return s;
}

ServiceSpec weather_1() {
  ServiceSpec s;
  s.service = Service::create(
      "Weather_1", "Check the weather for any place and any date",
      {{"GetWeather", "Get the weather of a certain location on a date", false,
        {"city"}, {"date"}}},
      {noncat("precipitation", "The possibility of rain or snow in percentage"),
       noncat("humidity", "Percentage humidity"),
       noncat("wind", "Wind speed in miles per hour"),
       noncat("temperature", "Temperature in Fahrenheit"),
       noncat("city", "Name of the city"),
       noncat("date", "Date for the weather")});
  s.search_intent = "GetWeather";
  s.result_slots = {"temperature", "precipitation"};
  s.info_slots = {"humidity", "wind"};
  s.gens = {{"precipitation", text_gen("", kPercents, "")},
            {"humidity", text_gen("", kPercents, "")},
            {"wind", text_gen("", kWinds, "")},
            {"temperature", text_gen("", kTemperatures, "")},
            {"city", text_gen("location", kCities, "in {}")},
            {"date", text_gen("date", kDates, "for {}")}};
  s.intent_phrases = {{"GetWeather", "What will the weather be like"}};
  return s;
}

ServiceSpec hotels_2() {
  ServiceSpec s;
  s.service = Service::create(
      "Hotels_2", "A popular service for searching and booking houses for short term stay",
      {{"SearchHouse", "Find a house at a given location", false,
        {"where_to"}, {"number_of_adults", "has_laundry_service"}},
       {"BookHouse", "Book the selected house for given dates and number of adults",
        true, {"where_to", "number_of_adults", "check_in_date", "check_out_date"},
        {}}},
      {noncat("where_to", "Location of the house"),
       cat("number_of_adults", "Number of people for the reservation", counts(5)),
       noncat("check_in_date", "Start date for the reservation"),
       noncat("check_out_date", "End date for the reservation"),
       noncat("rating", "Review rating of the house"),
       noncat("address", "Address of the house"),
       noncat("phone_number", "Phone number of the house"),
       noncat("total_price", "Price per night of the house"),
       cat("has_laundry_service", "Boolean flag indicating if the house has laundry service",
           kBool)});
  s.search_intent = "SearchHouse";
  s.transact_intent = "BookHouse";
  s.result_slots = {"address", "rating"};
  s.info_slots = {"phone_number", "total_price"};
  s.gens = {
      {"where_to", text_gen("location", kCities, "in {}")},
      {"number_of_adults", text_gen("count", {}, "for {} adults")},
      {"check_in_date", text_gen("date", kDates, "from {}")},
      {"check_out_date", text_gen("", {"the 20th", "next Sunday", "March 9th"},
                                  "until {}")},
      {"rating", text_gen("", kRatings, "")},
      {"address", text_gen("", kAddresses, "")},
      {"phone_number", text_gen("", kPhones, "")},
      {"total_price", text_gen("", kPrices, "")},
      {"has_laundry_service",
       bool_gen("with laundry service", "without laundry service")}};
  s.intent_phrases = {{"SearchHouse", "Find me a place to stay"},
                      {"BookHouse", "Please book the house"}};
  return s;
}

std::vector<ServiceSpec> all_specs() {
  return {restaurants_2(), restaurants_1(), homes_1(),
          ridesharing_1(), weather_1(),     hotels_2()};
}

std::vector<std::string> split_services(const std::string& split) {
  if (split == "train") {
    return {"Restaurants_2", "Homes_1", "RideSharing_1", "Weather_1"};
  }
  if (split == "dev") {
    return {"Restaurants_1", "Homes_1", "RideSharing_1", "Weather_1"};
  }
  if (split == "test") {
    return {"Restaurants_1", "Hotels_2", "RideSharing_1", "Homes_1"};
  }
  throw std::invalid_argument("unknown split '" + split + "'");
}

// A user utterance under construction with character spans for free-form
// values.
class Utterance {
 public:
  void add(const std::string& text) {
    if (text.empty()) return;
    if (!text_.empty()) text_.push_back(' ');
    text_ += text;
  }

  void add_value(const std::string& slot, const SlotGen& gen,
                 const std::string& value, bool categorical) {
    if (!gen.true_phrase.empty()) {
      add(value == "True" ? gen.true_phrase : gen.false_phrase);
      return;
    }
    std::string phrase = gen.phrase.empty() ? "{}" : gen.phrase;
    auto at = phrase.find("{}");
    std::string before = phrase.substr(0, at);
    if (!text_.empty()) text_.push_back(' ');
    text_ += before;
    int start = static_cast<int>(text_.size());
    text_ += value;
    if (!categorical) {
      spans_.push_back({slot, start, static_cast<int>(text_.size())});
    }
    text_ += phrase.substr(at + 2);
  }

  std::string text() const { return text_.empty() ? text_ : text_ + "."; }
  const std::vector<SlotSpan>& spans() const { return spans_; }

 private:
  std::string text_;
  std::vector<SlotSpan> spans_;
};

Action act(std::string name, std::string slot = "",
           std::vector<std::string> values = {}) {
  Action a;
  a.act = std::move(name);
  a.slot = std::move(slot);
  a.values = values;
  a.canonical_values = std::move(values);
  return a;
}

class DialogueBuilder {
 public:
  DialogueBuilder(std::string id, Rng& rng, double unresolvable_p)
      : rng_(rng), unresolvable_p_(unresolvable_p) {
    dialogue_.dialogue_id = std::move(id);
  }

  Dialogue build(const std::vector<const ServiceSpec*>& specs) {
    inject_at_ = coin(unresolvable_p_)
                     ? std::uniform_int_distribution<int>(
                           0, static_cast<int>(specs.size()) - 1)(rng_)
                     : -1;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      segment(*specs[i], static_cast<int>(i));
    }
    const ServiceSpec& last = *specs.back();
    Utterance u;
    u.add("Thanks, that's all I need");
    state(last).requested_slots.clear();
    user_turn(last, u, {act("THANK_YOU"), act("GOODBYE")});
    system_turn(last, {act("GOODBYE")});
    return std::move(dialogue_);
  }

 private:
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(
        rng_)];
  }

  DialogueState& state(const ServiceSpec& spec) {
    return states_[spec.service.name()];
  }

  std::string sample(const ServiceSpec& spec, const std::string& slot) {
    const Slot* def = spec.service.find_slot(slot);
    if (def->is_categorical) return pick(def->possible_values);
    return pick(spec.gens.at(slot).pool);
  }

  // A value from an earlier service whose slot shares this slot's role.
  std::optional<std::string> cross_candidate(const ServiceSpec& spec,
                                             const std::string& slot) {
    const std::string& role = spec.gens.at(slot).role;
    if (role.empty()) return std::nullopt;
    const Slot* def = spec.service.find_slot(slot);
    for (auto it = visited_.rbegin(); it != visited_.rend(); ++it) {
      const ServiceSpec* other = *it;
      if (other == &spec) continue;
      for (const auto& [name, value] : state(*other).slot_values) {
        auto gen = other->gens.find(name);
        if (gen == other->gens.end() || gen->second.role != role) continue;
        if (value == kDontCare) continue;
        if (def->is_categorical &&
            std::find(def->possible_values.begin(), def->possible_values.end(),
                      value) == def->possible_values.end()) {
          continue;
        }
        return value;
      }
    }
    return std::nullopt;
  }

  void ensure_service(const ServiceSpec& spec) {
    const std::string& name = spec.service.name();
    if (std::find(dialogue_.services.begin(), dialogue_.services.end(), name) ==
        dialogue_.services.end()) {
      dialogue_.services.push_back(name);
    }
  }

  void user_turn(const ServiceSpec& spec, const Utterance& u,
                 std::vector<Action> actions) {
    ensure_service(spec);
    Turn turn;
    turn.speaker = Speaker::kUser;
    turn.utterance = u.text();
    Frame frame;
    frame.service = spec.service.name();
    frame.actions = std::move(actions);
    frame.state = state(spec);
    frame.slot_spans = u.spans();
    turn.frames.push_back(std::move(frame));
    dialogue_.turns.push_back(std::move(turn));
  }

  void system_turn(const ServiceSpec& spec, std::vector<Action> actions) {
    std::string text;
    std::vector<std::string> confirms;
    for (const Action& a : actions) {
      std::string slot = normalize_name(a.slot);
      std::string value = a.values.empty() ? "" : a.values[0];
      std::string piece;
      if (a.act == "OFFER" && a.slot == spec.name_slot) {
        piece = "How about " + value + "?";
      } else if (a.act == "OFFER" || a.act == "INFORM") {
        piece = "The " + slot + " is " + value + ".";
      } else if (a.act == "INFORM_COUNT") {
        piece = "I found " + value + " options.";
      } else if (a.act == "REQUEST") {
        piece = value.empty() ? "What " + slot + " would you like?"
                              : "Would " + value + " work for the " + slot + "?";
      } else if (a.act == "CONFIRM") {
        confirms.push_back(slot + " " + value);
        continue;
      } else if (a.act == "NOTIFY_SUCCESS") {
        piece = "Done, it is all set.";
      } else if (a.act == "GOODBYE") {
        piece = "Have a nice day.";
      }
      if (!text.empty() && !piece.empty()) text.push_back(' ');
      text += piece;
    }
    if (!confirms.empty()) {
      std::string joined;
      for (const std::string& c : confirms) {
        joined += (joined.empty() ? "" : ", ") + c;
      }
      text = "Please confirm: " + joined + ".";
    }
    Turn turn;
    turn.speaker = Speaker::kSystem;
    turn.utterance = text;
    Frame frame;
    frame.service = spec.service.name();
    frame.actions = std::move(actions);
    turn.frames.push_back(std::move(frame));
    dialogue_.turns.push_back(std::move(turn));
  }

  const Intent& intent(const ServiceSpec& spec, const std::string& name) {
    return spec.service.intents()[spec.service.intent_index(name)];
  }

  // Mentions or carries the slot in the current user turn.
  void inform(const ServiceSpec& spec, const std::string& slot,
              const std::string& value, Utterance* u,
              std::vector<Action>* actions) {
    bool categorical = spec.service.find_slot(slot)->is_categorical;
    u->add_value(slot, spec.gens.at(slot), value, categorical);
    actions->push_back(act("INFORM", slot, {value}));
    state(spec).slot_values[slot] = value;
  }

  // Opening user turn for `intent_name`, with some slots told, carried or
  // left for the system to ask about.
  void open(const ServiceSpec& spec, const std::string& intent_name,
            bool first_of_service, int segment_index) {
    DialogueState& st = state(spec);
    st.requested_slots.clear();
    st.active_intent = intent_name;
    Utterance u;
    std::vector<Action> actions{act("INFORM_INTENT", "intent", {intent_name})};
    u.add(spec.intent_phrases.at(intent_name));
    const Intent& in = intent(spec, intent_name);
    bool said_there = false;
    for (const std::string& slot : in.required_slots) {
      if (st.slot_values.count(slot)) continue;
      if (auto carried = cross_candidate(spec, slot); carried && coin(0.6)) {
        st.slot_values[slot] = *carried;
        if (!said_there) u.add("there");
        said_there = true;
        continue;
      }
      if (coin(0.6)) inform(spec, slot, sample(spec, slot), &u, &actions);
    }
    for (const std::string& slot : in.optional_slots) {
      if (st.slot_values.count(slot) || !coin(0.25)) continue;
      const Slot* def = spec.service.find_slot(slot);
      if (def->is_categorical && coin(0.3)) {
        u.add("and I don't mind the " + normalize_name(slot));
        actions.push_back(act("INFORM", slot, {std::string(kDontCare)}));
        st.slot_values[slot] = kDontCare;
      } else {
        inform(spec, slot, sample(spec, slot), &u, &actions);
      }
    }
    if (first_of_service && segment_index == inject_at_) {
      // Annotation noise: a value with no mention anywhere.
      for (const std::string& slot : in.optional_slots) {
        if (st.slot_values.count(slot)) continue;
        st.slot_values[slot] = sample(spec, slot);
        break;
      }
    }
    user_turn(spec, u, std::move(actions));
  }

  void fill_required(const ServiceSpec& spec, const std::string& intent_name) {
    const Intent& in = intent(spec, intent_name);
    for (const std::string& slot : in.required_slots) {
      DialogueState& st = state(spec);
      if (st.slot_values.count(slot)) continue;
      if (coin(0.3)) {
        std::string value = sample(spec, slot);
        if (auto carried = cross_candidate(spec, slot)) value = *carried;
        system_turn(spec, {act("REQUEST", slot, {value})});
        st.requested_slots.clear();
        st.slot_values[slot] = value;
        Utterance u;
        u.add("Yes, that works");
        user_turn(spec, u, {act("AFFIRM")});
      } else {
        system_turn(spec, {act("REQUEST", slot)});
        st.requested_slots.clear();
        Utterance u;
        std::vector<Action> actions;
        inform(spec, slot, sample(spec, slot), &u, &actions);
        user_turn(spec, u, std::move(actions));
      }
    }
  }

  void request_info(const ServiceSpec& spec) {
    std::string slot = pick(spec.info_slots);
    DialogueState& st = state(spec);
    st.requested_slots = {slot};
    Utterance u;
    u.add("What is the " + normalize_name(slot) + "?");
    user_turn(spec, u, {act("REQUEST", slot)});
    system_turn(spec, {act("INFORM", slot, {sample(spec, slot)})});
  }

  void segment(const ServiceSpec& spec, int index) {
    visited_.push_back(&spec);
    std::string offered;
    if (!spec.search_intent.empty()) {
      open(spec, spec.search_intent, true, index);
      fill_required(spec, spec.search_intent);
      std::vector<Action> results;
      if (!spec.name_slot.empty()) {
        offered = sample(spec, spec.name_slot);
        results.push_back(act("OFFER", spec.name_slot, {offered}));
        results.push_back(act("INFORM_COUNT", "count",
                              {std::to_string(2 + index * 3 % 7)}));
      } else {
        for (const std::string& slot : spec.result_slots) {
          results.push_back(act("OFFER", slot, {sample(spec, slot)}));
        }
      }
      system_turn(spec, std::move(results));
      if (!spec.name_slot.empty() && coin(0.3)) {
        state(spec).requested_slots.clear();
        Utterance u;
        u.add("Can you find something else?");
        user_turn(spec, u, {act("REQUEST_ALTS")});
        std::string other = sample(spec, spec.name_slot);
        if (other != offered) offered = other;
        system_turn(spec, {act("OFFER", spec.name_slot, {offered})});
      }
      if (coin(0.5)) request_info(spec);
      if (spec.transact_intent.empty()) return;
    }

    DialogueState& st = state(spec);
    const std::string& transact = spec.transact_intent;
    if (spec.search_intent.empty()) {
      open(spec, transact, true, index);
    } else {
      st.requested_slots.clear();
      st.active_intent = transact;
      Utterance u;
      std::vector<Action> actions{act("INFORM_INTENT", "intent", {transact})};
      u.add(spec.intent_phrases.at(transact));
      if (!spec.name_slot.empty()) {
        if (coin(0.2)) {
          inform(spec, spec.name_slot, offered, &u, &actions);
        } else {
          st.slot_values[spec.name_slot] = offered;
        }
      }
      const Intent& in = intent(spec, transact);
      std::vector<std::string> slots = in.required_slots;
      slots.insert(slots.end(), in.optional_slots.begin(), in.optional_slots.end());
      for (const std::string& slot : slots) {
        if (st.slot_values.count(slot)) continue;
        if (auto carried = cross_candidate(spec, slot); carried && coin(0.5)) {
          st.slot_values[slot] = *carried;
        } else if (coin(0.35)) {
          inform(spec, slot, sample(spec, slot), &u, &actions);
        }
      }
      user_turn(spec, u, std::move(actions));
    }
    fill_required(spec, transact);

    // Confirmation, optionally with one correction by the user.
    const Intent& in = intent(spec, transact);
    auto confirm = [&]() {
      std::vector<Action> confirms;
      std::vector<std::string> slots = in.required_slots;
      slots.insert(slots.end(), in.optional_slots.begin(), in.optional_slots.end());
      for (const std::string& slot : slots) {
        auto it = st.slot_values.find(slot);
        if (it != st.slot_values.end()) {
          confirms.push_back(act("CONFIRM", slot, {it->second}));
        } else if (auto d = spec.confirm_defaults.find(slot);
                   d != spec.confirm_defaults.end()) {
          confirms.push_back(act("CONFIRM", slot, {d->second}));
        }
      }
      system_turn(spec, confirms);
      return confirms;
    };
    std::vector<Action> confirms = confirm();
    if (coin(0.15)) {
      std::vector<std::string> changeable;
      for (const Action& a : confirms) {
        const Slot* def = spec.service.find_slot(a.slot);
        if (!def->is_categorical && a.slot != spec.name_slot) {
          changeable.push_back(a.slot);
        }
      }
      if (!changeable.empty()) {
        std::string slot = pick(changeable);
        std::string value = sample(spec, slot);
        st.requested_slots.clear();
        // Defaults confirmed so far are accepted along with the correction.
        for (const Action& a : confirms) st.slot_values[a.slot] = a.values[0];
        Utterance u;
        u.add("No, change it");
        std::vector<Action> actions{act("NEGATE")};
        inform(spec, slot, value, &u, &actions);
        user_turn(spec, u, std::move(actions));
        confirms = confirm();
      }
    }
    st.requested_slots.clear();
    for (const Action& a : confirms) st.slot_values[a.slot] = a.values[0];
    Utterance yes;
    yes.add("Yes, please");
    user_turn(spec, yes, {act("AFFIRM")});
    std::vector<Action> done{act("NOTIFY_SUCCESS")};
    if (!spec.info_slots.empty() && coin(0.5)) {
      std::string slot = pick(spec.info_slots);
      done.push_back(act("INFORM", slot, {sample(spec, slot)}));
    }
    system_turn(spec, std::move(done));
  }

  Rng& rng_;
  double unresolvable_p_;
  int inject_at_ = -1;
  Dialogue dialogue_;
  std::map<std::string, DialogueState> states_;
  std::vector<const ServiceSpec*> visited_;
};

int split_number(const std::string& split) {
  if (split == "train") return 1;
  if (split == "dev") return 2;
  return 3;
}

}  // namespace

std::vector<Service> toy_services() {
  std::vector<Service> out;
  for (ServiceSpec& spec : all_specs()) out.push_back(std::move(spec.service));
  return out;
}

ToySplit generate_toy_split(const std::string& split, int num_dialogues,
                            std::uint64_t seed, double unresolvable_p) {
  std::vector<std::string> names = split_services(split);
  std::vector<ServiceSpec> specs;
  std::vector<Service> services;
  for (ServiceSpec& spec : all_specs()) {
    if (std::find(names.begin(), names.end(), spec.service.name()) !=
        names.end()) {
      services.push_back(spec.service);
      specs.push_back(std::move(spec));
    }
  }
  ToySplit out;
  out.schema = Schema(std::move(services));

  std::seed_seq seq{seed, static_cast<std::uint64_t>(split_number(split))};
  Rng rng(seq);
  for (int d = 0; d < num_dialogues; ++d) {
    int n = std::discrete_distribution<int>({0.3, 0.5, 0.2})(rng) + 1;
    std::vector<const ServiceSpec*> order;
    for (const ServiceSpec& s : specs) order.push_back(&s);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(n);
    char id[32];
    std::snprintf(id, sizeof(id), "%d_%05d", split_number(split), d);
    DialogueBuilder builder(id, rng, unresolvable_p);
    out.dialogues.push_back(builder.build(order));
  }
  for (const Dialogue& d : out.dialogues) validate_dialogue(d, out.schema);
  return out;
}

void write_toy_corpus(const std::filesystem::path& root,
                      const ToyCorpusOptions& options) {
  const std::pair<std::string, int> splits[] = {
      {"train", options.train_dialogues},
      {"dev", options.dev_dialogues},
      {"test", options.test_dialogues}};
  for (const auto& [split, count] : splits) {
    ToySplit data =
        generate_toy_split(split, count, options.seed, options.unresolvable_p);
    std::filesystem::create_directories(root / split);
    write_schema(data.schema, root / split / "schema.json");
    write_dialogues(data.dialogues, root / split / "dialogues_001.json");
  }
}

}  // namespace sgdst
