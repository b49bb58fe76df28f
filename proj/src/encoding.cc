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

#include "sgdst/encoding.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sgdst {
namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

void append(std::vector<int>* out, const std::vector<int>& more) {
  out->insert(out->end(), more.begin(), more.end());
}

}  // namespace

void EncoderOptions::validate() const {
  auto probability = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
    }
  };
  probability(word_dropout_p, "word_dropout_p");
  probability(schema_augment_p, "schema_augment_p");
  if (max_len <= 0) throw std::invalid_argument("max_len must be positive");
}

bool EncodedInput::operator==(const EncodedInput& other) const {
  const IndexMap& a = index_map;
  const IndexMap& b = other.index_map;
  return token_ids == other.token_ids && segment_ids == other.segment_ids &&
         attention_mask == other.attention_mask && overflow == other.overflow &&
         a.cls == b.cls && a.intents == b.intents && a.slots == b.slots &&
         a.values == b.values && a.prev_slots == b.prev_slots &&
         a.user_begin == b.user_begin && a.user_end == b.user_end &&
         a.user_skipped == b.user_skipped;
}

int InputParts::length() const {
  int n = mandatory_length() + static_cast<int>(part1.size() + part2.size());
  if (!prev_slots.empty()) {
    for (const PartElement& e : prev_slots) n += static_cast<int>(e.tokens.size());
    n += 1;
  }
  return n;
}

int InputParts::mandatory_length() const {
  // [CLS] and the separators after parts 1-4.
  int n = 5 + static_cast<int>(part3_header.size());
  for (const PartElement& e : intents) n += static_cast<int>(e.tokens.size());
  for (const SlotElement& s : slots) {
    n += static_cast<int>(s.tokens.size());
    for (const PartElement& v : s.values) n += static_cast<int>(v.tokens.size());
  }
  return n;
}

Thesaurus Thesaurus::builtin() {
  Thesaurus t;
  t.add("find", {"search", "look for", "locate"});
  t.add("search", {"find", "look for"});
  t.add("get", {"obtain", "fetch"});
  t.add("reserve", {"book"});
  t.add("book", {"reserve"});
  t.add("buy", {"purchase"});
  t.add("schedule", {"arrange", "plan"});
  t.add("restaurant", {"eatery", "diner"});
  t.add("restaurants", {"eateries", "diners"});
  t.add("name", {"title"});
  t.add("city", {"town"});
  t.add("area", {"region", "locality"});
  t.add("location", {"place"});
  t.add("date", {"day"});
  t.add("time", {"hour"});
  t.add("number", {"count", "amount"});
  t.add("seats", {"places", "chairs"});
  t.add("price", {"cost"});
  t.add("range", {"bracket", "level"});
  t.add("cuisine", {"food", "cooking"});
  t.add("phone", {"telephone"});
  t.add("address", {"location"});
  t.add("street", {"road"});
  t.add("visit", {"viewing", "tour"});
  t.add("property", {"home", "residence"});
  t.add("beds", {"bedrooms"});
  t.add("pets", {"animals"});
  t.add("allowed", {"permitted"});
  t.add("apartment", {"flat"});
  t.add("hotel", {"inn", "lodging"});
  t.add("house", {"home"});
  t.add("destination", {"target", "endpoint"});
  t.add("ride", {"trip", "lift"});
  t.add("riders", {"passengers"});
  t.add("shared", {"pooled"});
  t.add("movie", {"film"});
  t.add("movies", {"films"});
  t.add("tickets", {"passes"});
  t.add("show", {"screening"});
  t.add("genre", {"type", "kind"});
  t.add("event", {"occasion"});
  t.add("events", {"occasions"});
  t.add("category", {"type", "class"});
  t.add("weather", {"forecast"});
  t.add("music", {"songs"});
  t.add("live", {"in person"});
  t.add("party", {"group"});
  t.add("size", {"count"});
  t.add("rating", {"score"});
  t.add("cheap", {"inexpensive", "affordable"});
  t.add("moderate", {"average", "reasonable"});
  t.add("expensive", {"pricey", "costly"});
  t.add("check", {"verify"});
  t.add("adults", {"grownups"});
  t.add("rooms", {"chambers"});
  t.add("sports", {"athletics"});
  return t;
}

Thesaurus Thesaurus::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Thesaurus t;
  std::string line;
  while (std::getline(in, line)) {
    auto tab = line.find('\t');
    if (line.empty() || line[0] == '#' || tab == std::string::npos) continue;
    std::vector<std::string> synonyms;
    std::stringstream rest(line.substr(tab + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      if (!item.empty()) synonyms.push_back(item);
    }
    t.add(line.substr(0, tab), std::move(synonyms));
  }
  return t;
}

const std::vector<std::string>* Thesaurus::synonyms(
    const std::string& word) const {
  auto it = table_.find(word);
  return it == table_.end() || it->second.empty() ? nullptr : &it->second;
}

void Thesaurus::add(const std::string& word, std::vector<std::string> synonyms) {
  auto& list = table_[word];
  list.insert(list.end(), synonyms.begin(), synonyms.end());
}

std::string serialize_system_actions(const std::vector<Action>& actions) {
  std::string out;
  for (const Action& action : actions) {
    if (!out.empty()) out += " ; ";
    out += normalize_name(action.act);
    if (!action.slot.empty() && action.slot != "intent") {
      out += " " + normalize_name(action.slot);
    }
    for (const std::string& value : action.values) {
      out += " " + (action.slot == "intent" ? normalize_name(value) : value);
    }
  }
  return out;
}

SchemaTexts schema_texts(const Service& service) {
  SchemaTexts texts;
  texts.service = normalize_name(service.name());
  for (const Intent& intent : service.intents()) {
    texts.intents.push_back(normalize_name(intent.name));
  }
  texts.values.resize(service.slots().size());
  for (size_t i = 0; i < service.slots().size(); ++i) {
    const Slot& slot = service.slots()[i];
    texts.slots.push_back(normalize_name(slot.name));
    texts.slot_descriptions.push_back(slot.description);
    if (slot.is_categorical && service.informable_position(i) >= 0) {
      texts.values[i] = slot.possible_values;
    }
  }
  return texts;
}

std::string augment_text(const std::string& text, Rng& rng,
                         const Thesaurus& thesaurus) {
  std::vector<std::string> words = split_words(text);
  if (std::bernoulli_distribution(0.5)(rng)) {
    std::vector<int> candidates;
    for (size_t i = 0; i < words.size(); ++i) {
      if (thesaurus.synonyms(words[i])) candidates.push_back(static_cast<int>(i));
    }
    if (candidates.empty()) return text;
    int at = candidates[std::uniform_int_distribution<size_t>(
        0, candidates.size() - 1)(rng)];
    const auto& options = *thesaurus.synonyms(words[at]);
    words[at] =
        options[std::uniform_int_distribution<size_t>(0, options.size() - 1)(rng)];
  } else {
    if (words.size() < 2) return text;
    std::uniform_int_distribution<size_t> pick(0, words.size() - 1);
    size_t a = pick(rng);
    size_t b = pick(rng);
    while (b == a) b = pick(rng);
    std::swap(words[a], words[b]);
  }
  return join_words(words);
}

SchemaTexts apply_schema_augmentation(SchemaTexts texts, double p, Rng& rng,
                                      const Thesaurus& thesaurus) {
  if (p <= 0.0) return texts;
  std::bernoulli_distribution coin(p);
  auto maybe = [&](std::string* text) {
    if (coin(rng)) *text = augment_text(*text, rng, thesaurus);
  };
  for (std::string& t : texts.intents) maybe(&t);
  for (std::string& t : texts.slots) maybe(&t);
  for (auto& values : texts.values) {
    for (std::string& t : values) maybe(&t);
  }
  return texts;
}

InputParts build_parts(const TurnInput& input, const Service& service,
                       const SchemaTexts& texts,
                       const WordPieceTokenizer& tokenizer,
                       const EncoderOptions& options) {
  const SpecialIds& special = tokenizer.special();
  InputParts parts;
  parts.part1 = tokenizer.encode(options.use_system_actions
                                     ? serialize_system_actions(
                                           input.system_actions)
                                     : input.system_utterance);
  for (const Token& t : input.user_tokens) parts.part2.push_back(t.id);

  parts.part3_header = tokenizer.encode(texts.service);
  if (options.include_previous_state) {
    append(&parts.part3_header, tokenizer.encode(normalize_name(input.prev_intent)));
  }
  for (size_t i = 0; i < service.intents().size(); ++i) {
    PartElement e;
    e.index = static_cast<int>(i);
    e.tokens.push_back(special.intent);
    append(&e.tokens, tokenizer.encode(texts.intents[i]));
    parts.intents.push_back(std::move(e));
  }

  for (size_t i = 0; i < service.slots().size(); ++i) {
    const Slot& slot = service.slots()[i];
    bool informable = service.informable_position(static_cast<int>(i)) >= 0;
    SlotElement s;
    s.index = static_cast<int>(i);
    s.tokens.push_back(special.slot);
    append(&s.tokens, tokenizer.encode(texts.slots[i]));
    if (options.use_slot_descriptions) {
      append(&s.tokens, tokenizer.encode(texts.slot_descriptions[i]));
    }
    if (informable && options.include_previous_state) {
      auto it = input.prev_usr_values.find(slot.name);
      if (it != input.prev_usr_values.end()) {
        append(&s.tokens, tokenizer.encode(it->second));
      }
    }
    for (size_t v = 0; v < texts.values[i].size(); ++v) {
      PartElement value;
      value.index = static_cast<int>(v);
      value.tokens.push_back(special.value);
      append(&value.tokens, tokenizer.encode(texts.values[i][v]));
      s.values.push_back(std::move(value));
    }
    parts.slots.push_back(std::move(s));
  }

  int system_word = tokenizer.vocabulary().id("system");
  for (size_t e = 0; e < input.s_prev.size(); ++e) {
    const PrevSlotEntry& entry = input.s_prev[e];
    PartElement element;
    element.index = static_cast<int>(e);
    element.tokens = tokenizer.encode(normalize_name(entry.service));
    element.marker_offset = static_cast<int>(element.tokens.size());
    element.tokens.push_back(special.slot);
    if (entry.source == ValueSource::kSystemHistory) {
      if (system_word >= 0) {
        element.tokens.push_back(system_word);
      } else {
        append(&element.tokens, tokenizer.encode("system"));
      }
    }
    append(&element.tokens, tokenizer.encode(normalize_name(entry.slot)));
    append(&element.tokens, tokenizer.encode(entry.value));
    parts.prev_slots.push_back(std::move(element));
  }
  parts.num_prev_slots = static_cast<int>(input.s_prev.size());
  return parts;
}

void shuffle_schema_elements(InputParts* parts, Rng& rng) {
  std::shuffle(parts->intents.begin(), parts->intents.end(), rng);
  std::shuffle(parts->slots.begin(), parts->slots.end(), rng);
  for (SlotElement& s : parts->slots) {
    std::shuffle(s.values.begin(), s.values.end(), rng);
  }
  std::shuffle(parts->prev_slots.begin(), parts->prev_slots.end(), rng);
}

bool truncate(InputParts* parts, int max_len) {
  while (parts->length() > max_len && !parts->prev_slots.empty()) {
    parts->prev_slots.pop_back();
  }
  int excess = parts->length() - max_len;
  if (excess > 0) {
    int cut = std::min<int>(excess, static_cast<int>(parts->part1.size()));
    parts->part1.resize(parts->part1.size() - cut);
    excess -= cut;
  }
  if (excess > 0) {
    int cut = std::min<int>(excess, static_cast<int>(parts->part2.size()));
    parts->part2.erase(parts->part2.begin(), parts->part2.begin() + cut);
    parts->part2_skipped += cut;
  }
  return parts->length() > max_len;
}

EncodedInput assemble(const InputParts& parts, const Service& service,
                      const SpecialIds& special) {
  EncodedInput out;
  IndexMap& map = out.index_map;
  auto& ids = out.token_ids;
  auto& seg = out.segment_ids;
  auto push = [&](int id, int segment) {
    ids.push_back(id);
    seg.push_back(segment);
  };
  auto push_all = [&](const std::vector<int>& tokens, int segment) {
    for (int id : tokens) push(id, segment);
  };

  map.cls = 0;
  push(special.cls, 0);
  push_all(parts.part1, 0);
  push(special.sep, 0);
  map.user_begin = out.size();
  push_all(parts.part2, 0);
  map.user_end = out.size();
  map.user_skipped = parts.part2_skipped;
  push(special.sep, 0);

  map.intents.assign(service.intents().size(), -1);
  push_all(parts.part3_header, 1);
  for (const PartElement& e : parts.intents) {
    map.intents[e.index] = out.size() + e.marker_offset;
    push_all(e.tokens, 1);
  }
  push(special.sep, 1);

  map.slots.assign(service.slots().size(), -1);
  map.values.assign(service.slots().size(), {});
  for (const SlotElement& s : parts.slots) {
    map.slots[s.index] = out.size();
    push_all(s.tokens, 1);
    map.values[s.index].assign(s.values.size(), -1);
    for (const PartElement& v : s.values) {
      map.values[s.index][v.index] = out.size() + v.marker_offset;
      push_all(v.tokens, 1);
    }
  }
  push(special.sep, 1);

  map.prev_slots.assign(parts.num_prev_slots, -1);
  if (!parts.prev_slots.empty()) {
    for (const PartElement& e : parts.prev_slots) {
      map.prev_slots[e.index] = out.size() + e.marker_offset;
      push_all(e.tokens, 1);
    }
    push(special.sep, 1);
  }
  out.attention_mask.assign(ids.size(), 1);
  return out;
}

EncodedInput build_input(const TurnInput& input, const Service& service,
                         const WordPieceTokenizer& tokenizer,
                         const EncoderOptions& options) {
  InputParts parts =
      build_parts(input, service, schema_texts(service), tokenizer, options);
  bool overflow = truncate(&parts, options.max_len);
  EncodedInput encoded = assemble(parts, service, tokenizer.special());
  encoded.overflow = overflow;
  return encoded;
}

EncodedInput build_training_input(const TurnInput& input,
                                  const Service& service,
                                  const WordPieceTokenizer& tokenizer,
                                  const EncoderOptions& options,
                                  const Thesaurus& thesaurus, Rng& rng) {
  SchemaTexts texts = apply_schema_augmentation(
      schema_texts(service), options.schema_augment_p, rng, thesaurus);
  InputParts parts = build_parts(input, service, texts, tokenizer, options);
  if (options.shuffle_schema) shuffle_schema_elements(&parts, rng);
  bool overflow = truncate(&parts, options.max_len);
  EncodedInput encoded = assemble(parts, service, tokenizer.special());
  encoded.overflow = overflow;
  if (options.word_dropout_p > 0.0) {
    apply_word_dropout(&encoded, options.word_dropout_p, rng,
                       tokenizer.special().unk);
  }
  return encoded;
}

void apply_word_dropout(EncodedInput* encoded, double p, Rng& rng,
                        int unk_id) {
  if (p <= 0.0) return;
  std::bernoulli_distribution drop(p);
  for (int i = encoded->index_map.user_begin; i < encoded->index_map.user_end;
       ++i) {
    if (drop(rng)) encoded->token_ids[i] = unk_id;
  }
}

std::string render_encoded(const EncodedInput& encoded,
                           const WordPieceTokenizer& tokenizer) {
  static const char* kPartNames[] = {"system", "user", "service/intents",
                                     "slots", "other services"};
  std::ostringstream out;
  int part = 0;
  std::vector<int> pending;
  auto flush = [&]() {
    if (part < 5) {
      out << "  part " << part + 1 << " (" << kPartNames[part]
          << "): " << tokenizer.decode(pending) << '\n';
    }
    pending.clear();
    ++part;
  };
  for (int i = 1; i < encoded.size(); ++i) {
    int id = encoded.token_ids[i];
    if (id == tokenizer.special().sep) {
      flush();
    } else {
      pending.push_back(id);
    }
  }
  if (!pending.empty()) flush();
  while (part < 5) flush();
  if (encoded.overflow) out << "  (overflow)\n";
  return out.str();
}

}  // namespace sgdst
