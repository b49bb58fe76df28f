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

#include "sgdst/config.h"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace sgdst {
namespace {

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
  bool hashed = true;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long to_integer(const std::string& text) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected an integer, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_unsigned(const std::string& text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected an unsigned integer, got '" + text +
                                "'");
  }
  return v;
}

double to_double(const std::string& text) {
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw std::invalid_argument("expected a number, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + text + "'");
}

std::string from_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string from_bool(bool v) { return v ? "true" : "false"; }

template <typename T>
Field int_field(std::string key, T RunConfig::*member, bool hashed = true) {
  return {std::move(key),
          [member](RunConfig& c, const std::string& v) {
            c.*member = static_cast<T>(to_integer(v));
          },
          [member](const RunConfig& c) { return std::to_string(c.*member); },
          hashed};
}

Field seed_field(std::string key, std::uint64_t RunConfig::*member) {
  return {std::move(key),
          [member](RunConfig& c, const std::string& v) {
            c.*member = to_unsigned(v);
          },
          [member](const RunConfig& c) { return std::to_string(c.*member); },
          true};
}

Field double_field(std::string key, std::function<double&(RunConfig&)> ref,
                   bool hashed = true) {
  return {std::move(key),
          [ref](RunConfig& c, const std::string& v) { ref(c) = to_double(v); },
          [ref](const RunConfig& c) {
            return from_double(ref(const_cast<RunConfig&>(c)));
          },
          hashed};
}

Field bool_field(std::string key, std::function<bool&(RunConfig&)> ref) {
  return {std::move(key),
          [ref](RunConfig& c, const std::string& v) { ref(c) = to_bool(v); },
          [ref](const RunConfig& c) {
            return from_bool(ref(const_cast<RunConfig&>(c)));
          },
          true};
}

Field int_ref_field(std::string key, std::function<int&(RunConfig&)> ref) {
  return {std::move(key),
          [ref](RunConfig& c, const std::string& v) {
            ref(c) = static_cast<int>(to_integer(v));
          },
          [ref](const RunConfig& c) {
            return std::to_string(ref(const_cast<RunConfig&>(c)));
          },
          true};
}

Field path_field(std::string key, std::filesystem::path RunConfig::*member,
                 bool hashed) {
  return {std::move(key),
          [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return (c.*member).string(); },
          hashed};
}

Field string_field(std::string key, std::string RunConfig::*member) {
  return {std::move(key),
          [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }, true};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(path_field("data.root", &RunConfig::data_root, false));
    f.push_back(string_field("data.train_split", &RunConfig::train_split));
    f.push_back(string_field("data.dev_split", &RunConfig::dev_split));
    f.push_back(string_field("data.test_split", &RunConfig::test_split));
    f.push_back(path_field("data.output_dir", &RunConfig::output_dir, false));
    f.push_back(path_field("data.vocab", &RunConfig::vocab_path, true));
    f.push_back(path_field("data.thesaurus", &RunConfig::thesaurus_path, true));
    f.push_back(int_field("data.vocab_min_count", &RunConfig::vocab_min_count));
    f.push_back(
        int_field("data.max_train_examples", &RunConfig::max_train_examples));

    f.push_back(int_ref_field("input.max_len",
                              [](RunConfig& c) -> int& { return c.encoder.max_len; }));
    f.push_back(bool_field("input.system_actions", [](RunConfig& c) -> bool& {
      return c.encoder.use_system_actions;
    }));
    f.push_back(bool_field("input.slot_descriptions", [](RunConfig& c) -> bool& {
      return c.encoder.use_slot_descriptions;
    }));
    f.push_back(bool_field("input.previous_state", [](RunConfig& c) -> bool& {
      return c.encoder.include_previous_state;
    }));
    f.push_back(double_field("input.word_dropout", [](RunConfig& c) -> double& {
      return c.encoder.word_dropout_p;
    }));
    f.push_back(double_field("input.schema_augmentation",
                             [](RunConfig& c) -> double& {
                               return c.encoder.schema_augment_p;
                             }));
    f.push_back(bool_field("input.shuffle_schema", [](RunConfig& c) -> bool& {
      return c.encoder.shuffle_schema;
    }));

    f.push_back({"model.encoder",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "tiny") {
                     c.model.encoder.kind = EncoderSpec::Kind::kTiny;
                   } else if (v == "pretrained") {
                     c.model.encoder.kind = EncoderSpec::Kind::kPretrained;
                   } else {
                     throw std::invalid_argument(
                         "expected tiny or pretrained, got '" + v + "'");
                   }
                 },
                 [](const RunConfig& c) -> std::string {
                   return c.model.encoder.kind == EncoderSpec::Kind::kTiny
                              ? "tiny"
                              : "pretrained";
                 },
                 true});
    f.push_back({"model.pretrained_dir",
                 [](RunConfig& c, const std::string& v) {
                   c.model.encoder.pretrained_dir = v;
                 },
                 [](const RunConfig& c) {
                   return c.model.encoder.pretrained_dir.string();
                 },
                 true});
    f.push_back(int_ref_field("model.layers", [](RunConfig& c) -> int& {
      return c.model.encoder.layers;
    }));
    f.push_back(int_ref_field("model.hidden", [](RunConfig& c) -> int& {
      return c.model.encoder.hidden;
    }));
    f.push_back(int_ref_field("model.attention_heads", [](RunConfig& c) -> int& {
      return c.model.encoder.heads;
    }));
    f.push_back(int_ref_field("model.intermediate", [](RunConfig& c) -> int& {
      return c.model.encoder.intermediate;
    }));
    f.push_back(int_ref_field("model.max_position", [](RunConfig& c) -> int& {
      return c.model.encoder.max_position;
    }));
    f.push_back(double_field("model.hidden_dropout", [](RunConfig& c) -> double& {
      return c.model.encoder.hidden_dropout;
    }));
    f.push_back(double_field("model.attention_dropout",
                             [](RunConfig& c) -> double& {
                               return c.model.encoder.attention_dropout;
                             }));
    f.push_back(double_field("model.initializer_range",
                             [](RunConfig& c) -> double& {
                               return c.model.encoder.initializer_range;
                             }));
    f.push_back(int_ref_field("model.head_hidden", [](RunConfig& c) -> int& {
      return c.model.head_hidden;
    }));
    f.push_back(double_field("model.head_dropout", [](RunConfig& c) -> double& {
      return c.model.head_dropout;
    }));
    f.push_back(bool_field("model.binary_features", [](RunConfig& c) -> bool& {
      return c.model.use_binary_features;
    }));

    for (int i = 0; i < 8; ++i) {
      f.push_back(double_field("loss.w" + std::to_string(i + 1),
                               [i](RunConfig& c) -> double& { return c.loss.w[i]; }));
    }
    f.push_back(double_field("loss.lambda1",
                             [](RunConfig& c) -> double& { return c.loss.lambda1; }));
    f.push_back(double_field("loss.lambda2",
                             [](RunConfig& c) -> double& { return c.loss.lambda2; }));
    f.push_back(double_field("loss.lambda3",
                             [](RunConfig& c) -> double& { return c.loss.lambda3; }));

    f.push_back(double_field("optim.learning_rate", [](RunConfig& c) -> double& {
      return c.optimizer.learning_rate;
    }));
    f.push_back(double_field("optim.warmup_fraction", [](RunConfig& c) -> double& {
      return c.optimizer.warmup_fraction;
    }));
    f.push_back(double_field("optim.weight_decay", [](RunConfig& c) -> double& {
      return c.optimizer.weight_decay;
    }));
    f.push_back(double_field("optim.beta1",
                             [](RunConfig& c) -> double& { return c.optimizer.beta1; }));
    f.push_back(double_field("optim.beta2",
                             [](RunConfig& c) -> double& { return c.optimizer.beta2; }));
    f.push_back(double_field("optim.epsilon", [](RunConfig& c) -> double& {
      return c.optimizer.epsilon;
    }));
    f.push_back(double_field("optim.max_grad_norm", [](RunConfig& c) -> double& {
      return c.optimizer.max_grad_norm;
    }));

    f.push_back(int_field("train.batch_size", &RunConfig::batch_size));
    f.push_back(int_field("train.total_steps", &RunConfig::total_steps));
    f.push_back(int_field("train.eval_every", &RunConfig::eval_every, false));
    f.push_back(int_field("train.dev_dialogues", &RunConfig::dev_dialogues, false));
    f.push_back(int_field("train.log_every", &RunConfig::log_every, false));
    f.push_back(double_field(
        "train.early_stop_loss",
        [](RunConfig& c) -> double& { return c.early_stop_loss; }, false));

    f.push_back(double_field(
        "decode.threshold",
        [](RunConfig& c) -> double& { return c.decode.binary_threshold; }, false));
    f.push_back({"decode.disable_carryover",
                 [](RunConfig& c, const std::string& v) {
                   c.decode.disabled_carryover.clear();
                   std::stringstream ss(v);
                   std::string item;
                   while (std::getline(ss, item, ',')) {
                     item = trim(item);
                     if (!item.empty()) {
                       c.decode.disabled_carryover.insert(
                           parse_carryover_name(item));
                     }
                   }
                 },
                 [](const RunConfig& c) {
                   std::string out;
                   for (int k : c.decode.disabled_carryover) {
                     if (!out.empty()) out += ",";
                     out += carryover_name(k);
                   }
                   return out;
                 },
                 false});

    f.push_back(seed_field("seed", &RunConfig::seed));
    f.push_back(seed_field("seed.data", &RunConfig::data_seed));
    f.push_back(seed_field("seed.augment", &RunConfig::augment_seed));
    f.push_back(seed_field("seed.init", &RunConfig::init_seed));
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const Field& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RunConfig::effective_data_seed() const {
  return data_seed != 0 ? data_seed : mix(seed, 1);
}
std::uint64_t RunConfig::effective_augment_seed() const {
  return augment_seed != 0 ? augment_seed : mix(seed, 2);
}
std::uint64_t RunConfig::effective_init_seed() const {
  return init_seed != 0 ? init_seed : mix(seed, 3);
}
std::uint64_t RunConfig::dropout_seed() const {
  return mix(effective_init_seed(), 4);
}

std::filesystem::path RunConfig::resolved_data_root() const {
  if (!data_root.empty()) return data_root;
  if (const char* env = std::getenv(kDataRootEnv)) return env;
  throw ValidationError(std::string("no data root: set data.root or $") +
                        kDataRootEnv);
}

int RunConfig::warmup_steps() const {
  return static_cast<int>(optimizer.warmup_fraction * total_steps);
}

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ValidationError("config " + key + ": " + why);
  };
  if (optimizer.warmup_fraction < 0 || optimizer.warmup_fraction >= 1) {
    fail("optim.warmup_fraction", "must be in [0, 1)");
  }
  if (optimizer.learning_rate <= 0) fail("optim.learning_rate", "must be > 0");
  if (optimizer.weight_decay < 0) fail("optim.weight_decay", "must be >= 0");
  if (optimizer.beta1 < 0 || optimizer.beta1 >= 1) fail("optim.beta1", "must be in [0, 1)");
  if (optimizer.beta2 < 0 || optimizer.beta2 >= 1) fail("optim.beta2", "must be in [0, 1)");
  if (optimizer.epsilon <= 0) fail("optim.epsilon", "must be > 0");
  if (optimizer.max_grad_norm < 0) fail("optim.max_grad_norm", "must be >= 0");
  if (batch_size < 1) fail("train.batch_size", "must be >= 1");
  if (total_steps < 1) fail("train.total_steps", "must be >= 1");
  if (eval_every < 1 || eval_every > total_steps) {
    fail("train.eval_every", "must be in [1, train.total_steps]");
  }
  if (dev_dialogues < 0) fail("train.dev_dialogues", "must be >= 0");
  if (log_every < 1) fail("train.log_every", "must be >= 1");
  if (max_train_examples < 0) fail("data.max_train_examples", "must be >= 0");
  if (vocab_min_count < 1) fail("data.vocab_min_count", "must be >= 1");
  if (early_stop_loss < 0) fail("train.early_stop_loss", "must be >= 0");
  try {
    encoder.validate();
    model.validate();
    loss.validate();
    decode.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

void set_config_value(RunConfig* config, const std::string& key,
                      const std::string& value) {
  const Field* f = find_field(key);
  if (!f) throw ValidationError("unknown config key '" + key + "'");
  try {
    f->set(*config, value);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("config " + key + ": " + e.what());
  }
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
  RunConfig config;
  std::string line;
  int number = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++number;
    std::string where = origin + ":" + std::to_string(number);
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(where + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ParseError(where + ": duplicate key '" + key + "'");
    }
    try {
      set_config_value(&config, key, value);
    } catch (const ValidationError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  return parse_config(in, path.string());
}

std::string config_to_text(const RunConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::string config_hash(const RunConfig& config) {
  // FNV-1a over the hashed assignments.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Field& f : fields()) {
    if (!f.hashed) continue;
    for (char c : f.key + "=" + f.get(config) + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

std::vector<std::string> ablation_names() {
  return {"no_system_actions",      "slot_descriptions", "no_previous_state",
          "no_schema_augmentation", "no_word_dropout",   "no_binary_features"};
}

void apply_ablation(RunConfig* config, const std::string& name) {
  if (name == "no_system_actions") {
    config->encoder.use_system_actions = false;
  } else if (name == "slot_descriptions") {
    config->encoder.use_slot_descriptions = true;
  } else if (name == "no_previous_state") {
    config->encoder.include_previous_state = false;
  } else if (name == "no_schema_augmentation") {
    config->encoder.schema_augment_p = 0.0;
  } else if (name == "no_word_dropout") {
    config->encoder.word_dropout_p = 0.0;
  } else if (name == "no_binary_features") {
    config->model.use_binary_features = false;
  } else {
    throw ValidationError("unknown ablation '" + name + "'");
  }
}

}  // namespace sgdst
