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

#include "sgdst/checkpoint.h"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sgdst {
namespace {

constexpr char kMagic[8] = {'S', 'G', 'D', 'S', 'T', 'C', 'K', '1'};

nlohmann::json describe(const NamedTensors& tensors) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [name, m] : tensors) {
    out.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  }
  return out;
}

void write_data(std::ostream& out, const NamedTensors& tensors) {
  for (const auto& [name, m] : tensors) {
    // Row-major on disk regardless of Eigen's storage order.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    out.write(reinterpret_cast<const char*>(rm.data()),
              static_cast<std::streamsize>(rm.size() * sizeof(double)));
  }
}

NamedTensors read_data(std::istream& in, const nlohmann::json& layout,
                       const std::string& origin) {
  NamedTensors tensors;
  for (const auto& entry : layout) {
    long rows = entry.at("rows").get<long>();
    long cols = entry.at("cols").get<long>();
    if (rows < 0 || cols < 0) throw ParseError(origin + ": negative shape");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
        rows, cols);
    in.read(reinterpret_cast<char*>(rm.data()),
            static_cast<std::streamsize>(rm.size() * sizeof(double)));
    if (!in) throw ParseError(origin + ": truncated tensor data");
    tensors.emplace_back(entry.at("name").get<std::string>(), Matrix(rm));
  }
  return tensors;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  nlohmann::json header = {
      {"step", checkpoint.step},
      {"config", checkpoint.config_text},
      {"config_hash", checkpoint.config_hash},
      {"best_metric", checkpoint.best_metric},
      {"best_step", checkpoint.best_step},
      {"vocabulary", checkpoint.vocabulary},
      {"schema", checkpoint.schema_fingerprint},
      {"params", describe(checkpoint.params)},
      {"adam_m", describe(checkpoint.adam_m)},
      {"adam_v", describe(checkpoint.adam_v)},
  };
  std::string text = header.dump();
  std::uint64_t length = text.size();

  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&length), sizeof(length));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_data(out, checkpoint.params);
    write_data(out, checkpoint.adam_m);
    write_data(out, checkpoint.adam_v);
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::string origin = path.string();
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(origin + ": not a checkpoint (bad magic)");
  }
  std::uint64_t length = 0;
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  if (!in || length > (1ULL << 32)) throw ParseError(origin + ": bad header");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw ParseError(origin + ": truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": header: " + e.what());
  }
  Checkpoint c;
  try {
    c.step = header.at("step").get<int>();
    c.config_text = header.at("config").get<std::string>();
    c.config_hash = header.at("config_hash").get<std::string>();
    c.best_metric = header.at("best_metric").get<double>();
    c.best_step = header.at("best_step").get<int>();
    c.vocabulary = header.at("vocabulary").get<std::vector<std::string>>();
    c.schema_fingerprint = header.at("schema");
    c.params = read_data(in, header.at("params"), origin);
    c.adam_m = read_data(in, header.at("adam_m"), origin);
    c.adam_v = read_data(in, header.at("adam_v"), origin);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": header: " + e.what());
  }
  return c;
}

NamedTensors export_values(const ParameterStore& store) {
  NamedTensors out;
  for (const Parameter& p : store.all()) out.emplace_back(p.name, p.value);
  return out;
}

void import_values(const NamedTensors& tensors, ParameterStore* store) {
  if (tensors.size() != store->size()) {
    throw ValidationError("checkpoint has " + std::to_string(tensors.size()) +
                          " tensors, model expects " +
                          std::to_string(store->size()));
  }
  for (const auto& [name, m] : tensors) {
    if (!store->contains(name)) {
      throw ValidationError("checkpoint tensor '" + name + "' not in model");
    }
    Parameter& p = store->at(name);
    if (p.value.rows() != m.rows() || p.value.cols() != m.cols()) {
      throw ValidationError("checkpoint tensor '" + name + "' has shape " +
                            std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", model expects " +
                            std::to_string(p.value.rows()) + "x" +
                            std::to_string(p.value.cols()));
    }
    p.value = m;
  }
}

nlohmann::json schema_fingerprint(const Schema& schema) {
  nlohmann::json out = nlohmann::json::object();
  for (const Service& s : schema.services()) {
    nlohmann::json intents = nlohmann::json::array();
    for (const Intent& i : s.intents()) intents.push_back(i.name);
    nlohmann::json slots = nlohmann::json::array();
    for (const Slot& slot : s.slots()) {
      slots.push_back({{"name", slot.name},
                       {"categorical", slot.is_categorical},
                       {"values", slot.possible_values}});
    }
    out[s.name()] = {{"intents", intents}, {"slots", slots}};
  }
  return out;
}

void check_schema_compatible(const nlohmann::json& fingerprint,
                             const Schema& schema) {
  nlohmann::json current = schema_fingerprint(schema);
  for (const auto& [name, entry] : current.items()) {
    if (fingerprint.contains(name) && fingerprint.at(name) != entry) {
      throw ValidationError("schema mismatch for service " + name +
                            ": the checkpoint was trained on a different "
                            "definition");
    }
  }
}

}  // namespace sgdst
