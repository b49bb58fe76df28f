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

#include "sgdst/model.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sgdst {
namespace {

constexpr char kWeightsMagic[8] = {'S', 'G', 'D', 'S', 'T', 'W', '0', '1'};
constexpr double kMaskedScore = -10000.0;

const char* const kHeadNames[kNumHeads] = {
    "intent_status", "intent_value", "requested",
    "user_status",   "carryover",    "categorical",
    "start",         "end",          "cross"};

// Output classes and whether the input is a pair of token states.
constexpr int kHeadClasses[kNumHeads] = {2, 1, 1, 3, 4, 1, 1, 1, 1};
constexpr bool kHeadPairInput[kNumHeads] = {false, false, false, false, false,
                                            false, true,  true,  true};
constexpr bool kHeadFeatures[kNumHeads] = {false, false, true,  true, true,
                                           false, false, false, false};

std::string layer_prefix(int layer) {
  return "encoder.layer." + std::to_string(layer) + ".";
}

std::string head_prefix(int head) {
  return std::string("heads.") + kHeadNames[head] + ".";
}

Matrix feature_rows(const std::vector<BinaryFeatures>& features,
                    const std::vector<int>& slots) {
  Matrix m(slots.size(), kNumBinaryFeatures);
  for (std::size_t r = 0; r < slots.size(); ++r) {
    if (slots[r] < 0 || slots[r] >= static_cast<int>(features.size())) {
      throw std::out_of_range("binary features missing for slot");
    }
    for (int c = 0; c < kNumBinaryFeatures; ++c) {
      m(r, c) = features[slots[r]][c];
    }
  }
  return m;
}

int checked_position(int position, int length, const char* what) {
  if (position < 0 || position >= length) {
    throw std::out_of_range(std::string(what) + " position " +
                            std::to_string(position) + " outside input of " +
                            std::to_string(length) + " tokens");
  }
  return position;
}

}  // namespace

const char* head_name(int head) { return kHeadNames[head]; }

bool is_softmax_head(int head) {
  return head == kHeadIntentStatus || head == kHeadUserStatus ||
         head == kHeadCarryover || head == kHeadStart || head == kHeadEnd;
}

void EncoderSpec::validate() const {
  if (layers <= 0 || hidden <= 0 || heads <= 0 || hidden % heads != 0) {
    throw std::invalid_argument(
        "encoder needs positive layers/hidden/heads with hidden divisible by "
        "heads");
  }
  if (max_position <= 0 || type_vocab < 2) {
    throw std::invalid_argument("encoder max_position/type_vocab invalid");
  }
  for (double p : {hidden_dropout, attention_dropout}) {
    if (!(p >= 0.0 && p < 1.0)) {
      throw std::invalid_argument("encoder dropout must be in [0, 1)");
    }
  }
}

void ModelConfig::validate() const {
  if (encoder.kind == EncoderSpec::Kind::kTiny) encoder.validate();
  if (head_hidden < 0) throw std::invalid_argument("head_hidden < 0");
  if (!(head_dropout >= 0.0 && head_dropout < 1.0)) {
    throw std::invalid_argument("head_dropout must be in [0, 1)");
  }
}

HeadLayout make_layout(const Service& service, const EncodedInput& encoded) {
  const IndexMap& map = encoded.index_map;
  HeadLayout layout;
  layout.num_intents = static_cast<int>(service.intents().size());
  layout.num_slots = static_cast<int>(service.slots().size());
  layout.num_informable = static_cast<int>(service.informable().size());
  if (static_cast<int>(map.intents.size()) != layout.num_intents ||
      static_cast<int>(map.slots.size()) != layout.num_slots ||
      static_cast<int>(map.values.size()) != layout.num_slots) {
    throw std::invalid_argument("index map does not match service " +
                                service.name());
  }
  int offset = 0;
  for (int i = 0; i < layout.num_informable; ++i) {
    int slot = service.informable()[i];
    layout.informable_slots.push_back(slot);
    const Slot& s = service.slots()[slot];
    if (s.is_categorical) {
      int n = static_cast<int>(s.possible_values.size());
      if (static_cast<int>(map.values[slot].size()) != n) {
        throw std::invalid_argument("index map lacks values of " + s.name);
      }
      layout.categorical_slots.push_back(i);
      layout.value_offsets.push_back(offset);
      layout.value_counts.push_back(n);
      offset += n;
    } else {
      layout.noncategorical_slots.push_back(i);
    }
  }
  layout.user_skipped = map.user_skipped;
  layout.num_user_tokens = map.num_user_tokens();
  layout.num_prev_slots = static_cast<int>(map.prev_slots.size());
  for (int j = 0; j < layout.num_prev_slots; ++j) {
    if (map.prev_slots[j] >= 0) layout.cross_entries.push_back(j);
  }
  return layout;
}

int HeadTargets::count(int head) const {
  int n = 0;
  for (int t : targets[head]) n += t >= 0;
  return n;
}

HeadTargets align_targets(const TurnLabels& labels, const Service& service,
                          const HeadLayout& layout) {
  HeadTargets out;
  const int n_inf = layout.num_informable;
  if (static_cast<int>(labels.user_status.size()) != n_inf ||
      static_cast<int>(labels.requested.size()) != layout.num_slots) {
    throw std::invalid_argument("labels do not match service " +
                                service.name());
  }
  out[kHeadIntentStatus] = {labels.intent_status};
  out[kHeadIntentValue].assign(layout.num_intents, -1);
  if (labels.intent_status == kIntentActive) {
    for (int i = 0; i < layout.num_intents; ++i) {
      out[kHeadIntentValue][i] = i == labels.intent_value ? 1 : 0;
    }
  }
  out[kHeadRequested] = labels.requested;

  // A cross-service source removed by truncation leaves the slot without an
  // observable source, so it is treated as unresolvable.
  const int P = static_cast<int>(layout.cross_entries.size());
  std::vector<int> cross_column(n_inf, -1);
  std::vector<bool> masked(labels.unresolvable.begin(),
                           labels.unresolvable.end());
  for (int i = 0; i < n_inf; ++i) {
    if (masked[i] || labels.carryover_status[i] != kCarryInCrossServiceHist) {
      continue;
    }
    for (int j = 0; j < P; ++j) {
      if (layout.cross_entries[j] == labels.cross_service_source[i]) {
        cross_column[i] = j;
      }
    }
    if (cross_column[i] < 0) masked[i] = true;
  }

  auto user_active = [&](int i) {
    return !masked[i] && labels.user_status[i] == kUserActive;
  };
  out[kHeadUserStatus].resize(n_inf);
  out[kHeadCarryover].resize(n_inf);
  for (int i = 0; i < n_inf; ++i) {
    out[kHeadUserStatus][i] = masked[i] ? -1 : labels.user_status[i];
    out[kHeadCarryover][i] = masked[i] ? -1 : labels.carryover_status[i];
  }

  for (std::size_t k = 0; k < layout.categorical_slots.size(); ++k) {
    int i = layout.categorical_slots[k];
    int value = user_active(i) ? labels.categorical_value[i] : -1;
    for (int v = 0; v < layout.value_counts[k]; ++v) {
      out[kHeadCategorical].push_back(value < 0 ? -1 : (v == value ? 1 : 0));
    }
  }

  const int U = layout.num_user_tokens;
  for (int i : layout.noncategorical_slots) {
    int start = -1;
    int end = -1;
    if (user_active(i) && labels.span[i]) {
      int s = labels.span[i]->start - layout.user_skipped;
      int e = labels.span[i]->end - layout.user_skipped;
      if (s >= 0 && e < U && s <= e) {
        start = s;
        end = e;
      }
    }
    out[kHeadStart].push_back(start);
    out[kHeadEnd].push_back(end);
  }

  out[kHeadCross].assign(static_cast<std::size_t>(n_inf) * P, -1);
  for (int i = 0; i < n_inf; ++i) {
    if (cross_column[i] < 0) continue;
    for (int j = 0; j < P; ++j) {
      out[kHeadCross][i + static_cast<std::size_t>(j) * n_inf] =
          j == cross_column[i];
    }
  }
  return out;
}

double LossWeights::head_weight(int head) const {
  switch (head) {
    case kHeadIntentStatus: return lambda1 * w[0];
    case kHeadIntentValue: return lambda1 * w[1];
    case kHeadRequested: return lambda2;
    case kHeadUserStatus: return lambda3 * w[2];
    case kHeadCarryover: return lambda3 * w[3];
    case kHeadCategorical: return lambda3 * w[4];
    case kHeadStart: return lambda3 * w[5];
    case kHeadEnd: return lambda3 * w[6];
    case kHeadCross: return lambda3 * w[7];
  }
  throw std::out_of_range("bad head");
}

void LossWeights::validate() const {
  bool any = false;
  auto check = [&](double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("loss weights must be finite and >= 0");
    }
    any = any || x > 0.0;
  };
  for (double x : w) check(x);
  check(lambda1);
  check(lambda2);
  check(lambda3);
  if (!any) throw std::invalid_argument("at least one loss weight must be > 0");
}

namespace {

Var head_cross_entropy_sum(Tape& tape, int head, Var logits,
                           const std::vector<int>& targets) {
  return is_softmax_head(head)
             ? softmax_cross_entropy_sum(tape, logits, targets)
             : sigmoid_cross_entropy_sum(tape, logits, targets);
}

void check_target_shape(int head, const Matrix& logits,
                        const std::vector<int>& targets) {
  std::size_t expected = is_softmax_head(head)
                             ? static_cast<std::size_t>(logits.rows())
                             : static_cast<std::size_t>(logits.size());
  if (targets.size() != expected) {
    throw std::invalid_argument(std::string("target shape mismatch for head ") +
                                kHeadNames[head]);
  }
}

}  // namespace

LossBreakdown compute_loss(const std::vector<HeadOutputs>& outputs,
                           const std::vector<HeadTargets>& targets,
                           const LossWeights& weights) {
  if (outputs.size() != targets.size()) {
    throw std::invalid_argument("outputs and targets differ in batch size");
  }
  LossBreakdown result;
  std::array<double, kNumHeads> sums{};
  for (std::size_t b = 0; b < outputs.size(); ++b) {
    Tape tape;
    for (int h = 0; h < kNumHeads; ++h) {
      check_target_shape(h, outputs[b][h], targets[b][h]);
      Var logits = tape.constant(outputs[b][h]);
      sums[h] += tape.scalar(head_cross_entropy_sum(tape, h, logits,
                                                    targets[b][h]));
      result.counts[h] += targets[b].count(h);
    }
  }
  for (int h = 0; h < kNumHeads; ++h) {
    result.components[h] = result.counts[h] > 0 ? sums[h] / result.counts[h] : 0.0;
    result.total += weights.head_weight(h) * result.components[h];
  }
  return result;
}

std::array<double, kNumHeads> loss_coefficients(
    const std::vector<HeadTargets>& batch, const LossWeights& weights) {
  std::array<double, kNumHeads> coef{};
  for (int h = 0; h < kNumHeads; ++h) {
    int count = 0;
    for (const HeadTargets& t : batch) count += t.count(h);
    coef[h] = count > 0 ? weights.head_weight(h) / count : 0.0;
  }
  return coef;
}

Var example_loss(Tape& tape, const HeadVars& logits, const HeadTargets& targets,
                 const std::array<double, kNumHeads>& coefficients) {
  Var total = tape.constant(Matrix::Zero(1, 1));
  for (int h = 0; h < kNumHeads; ++h) {
    if (coefficients[h] == 0.0 || targets.count(h) == 0) continue;
    check_target_shape(h, tape.value(logits[h]), targets[h]);
    Var ce = head_cross_entropy_sum(tape, h, logits[h], targets[h]);
    total = add(tape, total, scale(tape, ce, coefficients[h]));
  }
  return total;
}

Model::Model(ModelConfig config, int vocab_size)
    : config_(std::move(config)), vocab_size_(vocab_size) {
  register_parameters();
}

void Model::register_parameters() {
  const EncoderSpec& e = config_.encoder;
  const int H = e.hidden;
  const int I = e.intermediate_size();
  auto dense = [&](const std::string& name, int out, int in) {
    params_.add(name + ".weight", Matrix::Zero(out, in));
    params_.add(name + ".bias", Matrix::Zero(1, out));
  };
  auto norm = [&](const std::string& name) {
    params_.add(name + ".weight", Matrix::Ones(1, H));
    params_.add(name + ".bias", Matrix::Zero(1, H));
  };
  params_.add("embeddings.word_embeddings.weight", Matrix::Zero(vocab_size_, H));
  params_.add("embeddings.position_embeddings.weight",
              Matrix::Zero(e.max_position, H));
  params_.add("embeddings.token_type_embeddings.weight",
              Matrix::Zero(e.type_vocab, H));
  norm("embeddings.LayerNorm");
  for (int l = 0; l < e.layers; ++l) {
    std::string p = layer_prefix(l);
    dense(p + "attention.self.query", H, H);
    dense(p + "attention.self.key", H, H);
    dense(p + "attention.self.value", H, H);
    dense(p + "attention.output.dense", H, H);
    norm(p + "attention.output.LayerNorm");
    dense(p + "intermediate.dense", I, H);
    dense(p + "output.dense", H, I);
    norm(p + "output.LayerNorm");
  }
  const int hh = config_.head_hidden_size();
  for (int h = 0; h < kNumHeads; ++h) {
    int in = kHeadPairInput[h] ? 2 * H : H;
    int extra = kHeadFeatures[h] && config_.use_binary_features
                    ? ModelConfig::kBinaryFeatureDim
                    : 0;
    dense(head_prefix(h) + "dense", hh, in);
    dense(head_prefix(h) + "out", kHeadClasses[h], hh + extra);
  }
}

Model Model::shell(const ModelConfig& config, int vocab_size) {
  config.validate();
  if (vocab_size <= 0) throw std::invalid_argument("vocabulary is empty");
  return Model(config, vocab_size);
}

Model Model::init(const ModelConfig& config, int vocab_size,
                  std::uint64_t seed) {
  ModelConfig resolved = config;
  ParameterStore pretrained;
  if (config.encoder.kind == EncoderSpec::Kind::kPretrained) {
    const auto& dir = config.encoder.pretrained_dir;
    auto weights = dir / "weights.bin";
    if (!std::filesystem::exists(dir / "config.json") ||
        !std::filesystem::exists(weights)) {
      throw std::runtime_error(
          "pretrained encoder not found in '" + dir.string() +
          "' (expected config.json, vocab.txt and weights.bin); create it "
          "with: python3 tools/export_bert.py --model bert-base-uncased --out " +
          dir.string());
    }
    EncoderSpec spec = read_pretrained_config(dir);
    spec.kind = EncoderSpec::Kind::kPretrained;
    spec.pretrained_dir = dir;
    resolved.encoder = spec;
    resolved.encoder.validate();
    pretrained = read_weights_file(weights);
  }
  Model model = shell(resolved, vocab_size);

  Rng rng(seed);
  std::normal_distribution<double> normal(
      0.0, model.config_.encoder.initializer_range);
  for (Parameter& p : model.params_.all()) {
    bool is_norm = p.name.find("LayerNorm") != std::string::npos;
    bool is_bias = p.name.size() > 5 &&
                   p.name.compare(p.name.size() - 5, 5, ".bias") == 0;
    if (is_norm || is_bias) continue;  // ones / zeros from registration
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      p.value.data()[i] = normal(rng);
    }
  }

  if (resolved.encoder.kind == EncoderSpec::Kind::kPretrained) {
    for (Parameter& p : model.params_.all()) {
      if (p.name.rfind("heads.", 0) == 0) continue;
      if (!pretrained.contains(p.name)) {
        throw std::runtime_error("pretrained weights lack " + p.name);
      }
      const Matrix& src = pretrained.at(p.name).value;
      if (p.name == "embeddings.word_embeddings.weight") {
        if (src.cols() != p.value.cols() || src.rows() > p.value.rows()) {
          throw std::runtime_error("word embedding shape mismatch");
        }
        // Rows past the pretrained vocabulary keep their random init.
        p.value.topRows(src.rows()) = src;
      } else {
        if (src.rows() != p.value.rows() || src.cols() != p.value.cols()) {
          throw std::runtime_error("shape mismatch for " + p.name);
        }
        p.value = src;
      }
    }
  }
  return model;
}

Var Model::encode(Tape& t, const EncodedInput& encoded, Rng* rng) {
  const EncoderSpec& e = config_.encoder;
  const int L = encoded.size();
  if (L == 0) throw std::invalid_argument("empty encoder input");
  if (L > e.max_position) {
    throw std::invalid_argument("input of " + std::to_string(L) +
                                " tokens exceeds max_position");
  }
  if (static_cast<int>(encoded.segment_ids.size()) != L ||
      static_cast<int>(encoded.attention_mask.size()) != L) {
    throw std::invalid_argument("segment ids / attention mask length mismatch");
  }
  bool any_visible = false;
  bool any_masked = false;
  for (int m : encoded.attention_mask) {
    any_visible = any_visible || m != 0;
    any_masked = any_masked || m == 0;
  }
  if (!any_visible) throw std::invalid_argument("input is entirely padding");

  auto P = [&](const std::string& name) { return t.param(params_.at(name)); };
  std::vector<int> positions(L);
  for (int i = 0; i < L; ++i) positions[i] = i;

  Var h = add(t, gather_rows(t, P("embeddings.word_embeddings.weight"),
                             encoded.token_ids),
              gather_rows(t, P("embeddings.position_embeddings.weight"),
                          positions));
  h = add(t, h,
          gather_rows(t, P("embeddings.token_type_embeddings.weight"),
                      encoded.segment_ids));
  h = layer_norm(t, h, P("embeddings.LayerNorm.weight"),
                 P("embeddings.LayerNorm.bias"), e.layer_norm_eps);
  if (rng) h = dropout(t, h, e.hidden_dropout, *rng);

  Var mask;
  if (any_masked) {
    Matrix row(1, L);
    for (int i = 0; i < L; ++i) {
      row(0, i) = encoded.attention_mask[i] ? 0.0 : kMaskedScore;
    }
    mask = t.constant(std::move(row));
  }

  const int head_dim = e.hidden / e.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  for (int l = 0; l < e.layers; ++l) {
    std::string p = layer_prefix(l);
    auto dense = [&](Var x, const std::string& name) {
      return linear(t, x, P(p + name + ".weight"), P(p + name + ".bias"));
    };
    Var q = dense(h, "attention.self.query");
    Var k = dense(h, "attention.self.key");
    Var v = dense(h, "attention.self.value");
    std::vector<Var> contexts;
    for (int a = 0; a < e.heads; ++a) {
      Var qa = slice_cols(t, q, a * head_dim, head_dim);
      Var ka = slice_cols(t, k, a * head_dim, head_dim);
      Var va = slice_cols(t, v, a * head_dim, head_dim);
      Var scores = scale(t, matmul_nt(t, qa, ka), inv_sqrt);
      if (mask.valid()) scores = add_row(t, scores, mask);
      Var probs = softmax_rows(t, scores);
      if (rng) probs = dropout(t, probs, e.attention_dropout, *rng);
      contexts.push_back(matmul(t, probs, va));
    }
    Var context = e.heads == 1 ? contexts[0] : concat_cols(t, contexts);
    Var attn = dense(context, "attention.output.dense");
    if (rng) attn = dropout(t, attn, e.hidden_dropout, *rng);
    h = layer_norm(t, add(t, attn, h), P(p + "attention.output.LayerNorm.weight"),
                   P(p + "attention.output.LayerNorm.bias"), e.layer_norm_eps);
    Var inter = gelu(t, dense(h, "intermediate.dense"));
    Var out = dense(inter, "output.dense");
    if (rng) out = dropout(t, out, e.hidden_dropout, *rng);
    h = layer_norm(t, add(t, out, h), P(p + "output.LayerNorm.weight"),
                   P(p + "output.LayerNorm.bias"), e.layer_norm_eps);
  }
  return h;
}

Var Model::head(Tape& t, const std::string& name, Var input,
                const Matrix* features, Rng* rng) {
  auto P = [&](const std::string& suffix) {
    return t.param(params_.at("heads." + name + "." + suffix));
  };
  Var h = gelu(t, linear(t, input, P("dense.weight"), P("dense.bias")));
  if (rng) h = dropout(t, h, config_.head_dropout, *rng);
  if (features) h = concat_cols(t, {h, t.constant(*features)});
  return linear(t, h, P("out.weight"), P("out.bias"));
}

HeadVars Model::forward(Tape& t, const EncodedInput& encoded,
                        const HeadLayout& layout,
                        const std::vector<BinaryFeatures>& features, Rng* rng) {
  const IndexMap& map = encoded.index_map;
  const int L = encoded.size();
  if (static_cast<int>(features.size()) != layout.num_slots) {
    throw std::invalid_argument("expected one binary feature vector per slot");
  }
  Var hidden = encode(t, encoded, rng);
  HeadVars out;
  const bool use_features = config_.use_binary_features;

  auto run = [&](int h, const std::vector<int>& rows_a,
                 const std::vector<int>& rows_b, const Matrix* feats) {
    const int classes = kHeadClasses[h];
    if (rows_a.empty()) {
      return t.constant(Matrix::Zero(0, classes));
    }
    Var input = gather_rows(t, hidden, rows_a);
    if (kHeadPairInput[h]) {
      input = concat_cols(t, {input, gather_rows(t, hidden, rows_b)});
    }
    return head(t, kHeadNames[h], input, use_features ? feats : nullptr, rng);
  };

  std::vector<int> cls = {checked_position(map.cls, L, "[CLS]")};
  out[kHeadIntentStatus] = run(kHeadIntentStatus, cls, {}, nullptr);

  std::vector<int> intents;
  for (int p : map.intents) intents.push_back(checked_position(p, L, "[INTENT]"));
  out[kHeadIntentValue] = run(kHeadIntentValue, intents, {}, nullptr);

  std::vector<int> all_slots(layout.num_slots);
  std::vector<int> slot_rows;
  for (int s = 0; s < layout.num_slots; ++s) {
    all_slots[s] = s;
    slot_rows.push_back(checked_position(map.slots[s], L, "[SLOT]"));
  }
  Matrix slot_features = feature_rows(features, all_slots);
  out[kHeadRequested] = run(kHeadRequested, slot_rows, {}, &slot_features);

  std::vector<int> informable_rows;
  for (int slot : layout.informable_slots) {
    informable_rows.push_back(slot_rows[slot]);
  }
  Matrix informable_features = feature_rows(features, layout.informable_slots);
  out[kHeadUserStatus] =
      run(kHeadUserStatus, informable_rows, {}, &informable_features);
  out[kHeadCarryover] =
      run(kHeadCarryover, informable_rows, {}, &informable_features);

  std::vector<int> value_rows;
  for (int i : layout.categorical_slots) {
    for (int p : map.values[layout.informable_slots[i]]) {
      value_rows.push_back(checked_position(p, L, "[VALUE]"));
    }
  }
  out[kHeadCategorical] = run(kHeadCategorical, value_rows, {}, nullptr);

  // Span heads score every (slot, kept user token) pair, slot-major.
  const int n_noncat = static_cast<int>(layout.noncategorical_slots.size());
  const int U = layout.num_user_tokens;
  std::vector<int> token_rows;
  std::vector<int> span_slot_rows;
  for (int i : layout.noncategorical_slots) {
    for (int u = 0; u < U; ++u) {
      token_rows.push_back(checked_position(map.user_begin + u, L, "user"));
      span_slot_rows.push_back(informable_rows[i]);
    }
  }
  for (int h : {kHeadStart, kHeadEnd}) {
    Var flat = run(h, token_rows, span_slot_rows, nullptr);
    out[h] = token_rows.empty() ? t.constant(Matrix::Zero(n_noncat, U))
                                : reshape(t, flat, n_noncat, U);
  }

  // Cross-service pairs: [part-5 slot ; target part-4 slot], target-major.
  const int n_inf = layout.num_informable;
  const int P = static_cast<int>(layout.cross_entries.size());
  std::vector<int> prev_rows;
  std::vector<int> target_rows;
  for (int i = 0; i < n_inf; ++i) {
    for (int j : layout.cross_entries) {
      prev_rows.push_back(checked_position(map.prev_slots[j], L, "part-5"));
      target_rows.push_back(informable_rows[i]);
    }
  }
  Var cross = run(kHeadCross, prev_rows, target_rows, nullptr);
  out[kHeadCross] = prev_rows.empty() ? t.constant(Matrix::Zero(n_inf, P))
                                      : reshape(t, cross, n_inf, P);
  return out;
}

HeadOutputs Model::predict(const EncodedInput& encoded,
                           const HeadLayout& layout,
                           const std::vector<BinaryFeatures>& features) {
  Tape tape;
  HeadVars vars = forward(tape, encoded, layout, features, nullptr);
  HeadOutputs out;
  for (int h = 0; h < kNumHeads; ++h) out[h] = tape.value(vars[h]);
  return out;
}

long encoder_parameter_count(const EncoderSpec& spec, int vocab_size,
                             bool with_pooler) {
  const long H = spec.hidden;
  const long I = spec.intermediate_size();
  long n = (static_cast<long>(vocab_size) + spec.max_position + spec.type_vocab) * H +
           2 * H;
  long per_layer = 4 * (H * H + H) + 2 * H + (I * H + I) + (H * I + H) + 2 * H;
  n += spec.layers * per_layer;
  if (with_pooler) n += H * H + H;
  return n;
}

EncoderSpec read_pretrained_config(const std::filesystem::path& dir) {
  std::ifstream in(dir / "config.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "config.json").string());
  nlohmann::json j = nlohmann::json::parse(in);
  EncoderSpec spec;
  spec.kind = EncoderSpec::Kind::kPretrained;
  spec.pretrained_dir = dir;
  spec.hidden = j.at("hidden_size").get<int>();
  spec.layers = j.at("num_hidden_layers").get<int>();
  spec.heads = j.at("num_attention_heads").get<int>();
  spec.intermediate = j.at("intermediate_size").get<int>();
  spec.max_position = j.value("max_position_embeddings", 512);
  spec.type_vocab = j.value("type_vocab_size", 2);
  spec.layer_norm_eps = j.value("layer_norm_eps", 1e-12);
  spec.hidden_dropout = j.value("hidden_dropout_prob", 0.1);
  spec.attention_dropout = j.value("attention_probs_dropout_prob", 0.1);
  spec.initializer_range = j.value("initializer_range", 0.02);
  if (j.value("hidden_act", std::string("gelu")) != "gelu") {
    throw std::runtime_error("only the erf GELU activation is supported");
  }
  return spec;
}

ParameterStore read_weights_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kWeightsMagic, 8) != 0) {
    throw std::runtime_error(path.string() + " is not a weights file");
  }
  std::uint64_t header_size = 0;
  in.read(reinterpret_cast<char*>(&header_size), sizeof(header_size));
  std::string header(header_size, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_size));
  if (!in) throw std::runtime_error("truncated weights header");
  nlohmann::json j = nlohmann::json::parse(header);
  ParameterStore store;
  std::vector<float> buffer;
  for (const auto& tensor : j.at("tensors")) {
    std::vector<long> shape = tensor.at("shape").get<std::vector<long>>();
    long rows = shape.size() == 2 ? shape[0] : 1;
    long cols = shape.size() == 2 ? shape[1] : shape.at(0);
    buffer.resize(static_cast<std::size_t>(rows * cols));
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated weights data");
    Matrix m(rows, cols);
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) m(r, c) = buffer[r * cols + c];
    }
    store.add(tensor.at("name").get<std::string>(), std::move(m));
  }
  return store;
}

}  // namespace sgdst
