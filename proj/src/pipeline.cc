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

#include "sgdst/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace sgdst {
namespace {

// Seeds an engine from up to three 64-bit values without truncation.
Rng seeded(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return Rng(seq);
}

bool is_decay_exempt(const std::string& name) {
  bool is_bias =
      name.size() > 5 && name.compare(name.size() - 5, 5, ".bias") == 0;
  return is_bias || name.find("LayerNorm") != std::string::npos;
}

std::set<std::string> service_names(const Schema& schema) {
  std::set<std::string> out;
  for (const Service& s : schema.services()) out.insert(s.name());
  return out;
}

Dataset head_of(const Dataset& data, int max_dialogues) {
  if (max_dialogues <= 0 ||
      max_dialogues >= static_cast<int>(data.dialogues.size())) {
    return data;
  }
  Dataset out;
  out.schema = data.schema;
  out.dialogues.assign(data.dialogues.begin(),
                       data.dialogues.begin() + max_dialogues);
  return out;
}

void merge_into(PredictResult* total, PredictResult&& part) {
  total->frames.insert(total->frames.end(),
                       std::make_move_iterator(part.frames.begin()),
                       std::make_move_iterator(part.frames.end()));
  total->diagnostics.merge(part.diagnostics);
  total->examples += part.examples;
  total->slot_updates.merge(part.slot_updates);
}

Checkpoint snapshot(const RunConfig& resolved, const std::string& hash,
                    int step, double best_metric, int best_step,
                    const WordPieceTokenizer& tokenizer, const Schema& schema,
                    const Model& model, const AdamW& optimizer) {
  Checkpoint c;
  c.step = step;
  c.config_text = config_to_text(resolved);
  c.config_hash = hash;
  c.best_metric = best_metric;
  c.best_step = best_step;
  c.vocabulary = tokenizer.vocabulary().tokens();
  c.schema_fingerprint = schema_fingerprint(schema);
  c.params = export_values(model.params());
  c.adam_m = optimizer.first_moments();
  c.adam_v = optimizer.second_moments();
  return c;
}

void write_log_header(std::ostream& out) {
  out << "step\tlearning_rate\tgrad_norm\ttotal";
  for (int h = 0; h < kNumHeads; ++h) out << '\t' << head_name(h);
  out << '\n';
}

void write_log_row(std::ostream& out, const LossRecord& r) {
  char buf[64];
  out << r.step;
  std::snprintf(buf, sizeof(buf), "\t%.6e\t%.6g\t%.9g", r.learning_rate,
                r.grad_norm, r.loss.total);
  out << buf;
  for (int h = 0; h < kNumHeads; ++h) {
    std::snprintf(buf, sizeof(buf), "\t%.6g", r.loss.components[h]);
    out << buf;
  }
  out << '\n';
}

}  // namespace

Dataset load_split(const std::filesystem::path& root, const std::string& split) {
  std::filesystem::path dir = root / split;
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("split directory not found: " + dir.string());
  }
  Dataset data;
  data.schema = load_schema(dir / "schema.json");
  data.dialogues = load_dialogues(dir, data.schema);
  return data;
}

WordPieceTokenizer make_tokenizer(const RunConfig& config, const Dataset& train) {
  if (config.model.encoder.kind == EncoderSpec::Kind::kPretrained) {
    Vocabulary vocab =
        Vocabulary::load(config.model.encoder.pretrained_dir / "vocab.txt");
    vocab.add_marker_tokens();
    return WordPieceTokenizer(std::move(vocab));
  }
  if (!config.vocab_path.empty()) {
    Vocabulary vocab = Vocabulary::load(config.vocab_path);
    vocab.add_marker_tokens();
    return WordPieceTokenizer(std::move(vocab));
  }
  std::vector<std::string> texts{"system none dontcare"};
  for (const Dialogue& d : train.dialogues) {
    for (const Turn& t : d.turns) {
      texts.push_back(t.utterance);
      if (t.speaker != Speaker::kSystem) continue;
      for (const Frame& f : t.frames) {
        texts.push_back(serialize_system_actions(f.actions));
      }
    }
  }
  for (const Service& s : train.schema.services()) {
    SchemaTexts st = schema_texts(s);
    texts.push_back(st.service);
    for (const auto& group : {st.intents, st.slots, st.slot_descriptions}) {
      texts.insert(texts.end(), group.begin(), group.end());
    }
    for (const auto& values : st.values) {
      texts.insert(texts.end(), values.begin(), values.end());
    }
    texts.push_back(s.description());
  }
  return WordPieceTokenizer(build_vocabulary(texts, config.vocab_min_count));
}

std::vector<TurnExample> gold_examples(const Dataset& data,
                                       const WordPieceTokenizer& tokenizer,
                                       int limit) {
  std::vector<TurnExample> out;
  for (const Dialogue& d : data.dialogues) {
    for (TurnExample& e : build_turn_examples(d, data.schema, tokenizer)) {
      out.push_back(std::move(e));
      if (limit > 0 && static_cast<int>(out.size()) >= limit) return out;
    }
  }
  return out;
}

double learning_rate_at(const RunConfig& config, int step) {
  const double base = config.optimizer.learning_rate;
  const int warmup = config.warmup_steps();
  const int total = config.total_steps;
  if (step < warmup) return base * (step + 1) / warmup;
  if (total == warmup) return base;
  return base * std::max(0.0, static_cast<double>(total - step) / (total - warmup));
}

AdamW::AdamW(const OptimizerConfig& config, const ParameterStore& params)
    : config_(config) {
  for (const Parameter& p : params.all()) {
    m_.emplace_back(p.name, Matrix::Zero(p.value.rows(), p.value.cols()));
    v_.emplace_back(p.name, Matrix::Zero(p.value.rows(), p.value.cols()));
    decay_.push_back(!is_decay_exempt(p.name));
  }
}

void AdamW::update(ParameterStore* params, double lr, int t) {
  auto& all = params->all();
  if (all.size() != m_.size()) {
    throw std::logic_error("optimizer state does not match the parameters");
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < all.size(); ++i) {
    Parameter& p = all[i];
    Matrix& m = m_[i].second;
    Matrix& v = v_[i].second;
    m = b1 * m + (1.0 - b1) * p.grad;
    v = b2 * v + (1.0 - b2) * p.grad.cwiseProduct(p.grad);
    if (decay_[i] && config_.weight_decay > 0) {
      p.value *= 1.0 - lr * config_.weight_decay;
    }
    p.value.array() -= lr * (m.array() / c1) /
                       ((v.array() / c2).sqrt() + config_.epsilon);
  }
}

double clip_gradients(ParameterStore* params, double max_norm) {
  double sq = 0.0;
  for (const Parameter& p : params->all()) sq += p.grad.squaredNorm();
  double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    double scale = max_norm / (norm + 1e-12);
    for (Parameter& p : params->all()) p.grad *= scale;
  }
  return norm;
}

PreparedExample prepare_example(const TurnExample& example,
                                const WordPieceTokenizer& tokenizer,
                                const RunConfig& config,
                                const Thesaurus& thesaurus, int step,
                                int position) {
  if (!example.labels) throw std::invalid_argument("training example lacks labels");
  Rng rng = seeded(config.effective_augment_seed(), step, position);
  PreparedExample p;
  p.example = &example;
  p.encoded = build_training_input(example.input, *example.service, tokenizer,
                                   config.encoder, thesaurus, rng);
  p.layout = make_layout(*example.service, p.encoded);
  p.targets = align_targets(*example.labels, *example.service, p.layout);
  return p;
}

PreparedExample prepare_eval_example(const TurnExample& example,
                                     const WordPieceTokenizer& tokenizer,
                                     const EncoderOptions& options) {
  PreparedExample p;
  p.example = &example;
  p.encoded = build_input(example.input, *example.service, tokenizer, options);
  p.layout = make_layout(*example.service, p.encoded);
  if (example.labels) {
    p.targets = align_targets(*example.labels, *example.service, p.layout);
  }
  return p;
}

LossBreakdown accumulate_batch_gradients(Model* model,
                                         const std::vector<PreparedExample>& batch,
                                         const RunConfig& config, int step,
                                         bool train_mode) {
  std::vector<HeadTargets> targets;
  for (const PreparedExample& p : batch) targets.push_back(p.targets);
  auto coef = loss_coefficients(targets, config.loss);

  std::vector<HeadOutputs> outputs;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const PreparedExample& p = batch[k];
    Rng rng = seeded(config.dropout_seed(), step, k);
    Tape tape;
    HeadVars logits = model->forward(tape, p.encoded, p.layout,
                                     p.example->input.features,
                                     train_mode ? &rng : nullptr);
    Var loss = example_loss(tape, logits, p.targets, coef);
    tape.backward(loss);
    HeadOutputs o;
    for (int h = 0; h < kNumHeads; ++h) o[h] = tape.value(logits[h]);
    outputs.push_back(std::move(o));
  }
  return compute_loss(outputs, targets, config.loss);
}

TrainResult train(const RunConfig& config, const TrainOptions& options) {
  config.validate();
  const std::string hash = config_hash(config);
  const auto root = config.resolved_data_root();
  Dataset train_data = load_split(root, config.train_split);
  std::optional<Dataset> dev;
  if (!config.dev_split.empty() &&
      std::filesystem::is_directory(root / config.dev_split)) {
    dev = head_of(load_split(root, config.dev_split), config.dev_dialogues);
  }
  const std::set<std::string> seen = service_names(train_data.schema);

  WordPieceTokenizer tokenizer = make_tokenizer(config, train_data);
  Thesaurus thesaurus = config.thesaurus_path.empty()
                            ? Thesaurus::builtin()
                            : Thesaurus::load(config.thesaurus_path);
  std::vector<TurnExample> examples =
      gold_examples(train_data, tokenizer, config.max_train_examples);
  if (examples.empty()) throw ValidationError("no training examples");

  Model model = Model::init(config.model, tokenizer.vocabulary().size(),
                            config.effective_init_seed());
  RunConfig resolved = config;
  resolved.model = model.config();
  AdamW optimizer(config.optimizer, model.params());

  TrainResult result;
  int start = 0;
  double best = -1.0;
  int best_step = -1;
  if (!options.resume.empty()) {
    Checkpoint ck = load_checkpoint(options.resume);
    if (ck.config_hash != hash && !options.force) {
      throw ValidationError("cannot resume from " + options.resume.string() +
                            ": config hash " + ck.config_hash +
                            " differs from " + hash + " (use --force)");
    }
    if (ck.vocabulary != tokenizer.vocabulary().tokens()) {
      throw ValidationError("cannot resume: vocabulary differs");
    }
    if (ck.adam_m.empty()) {
      throw ValidationError("cannot resume: checkpoint has no optimizer state");
    }
    import_values(ck.params, &model.params());
    optimizer.first_moments() = ck.adam_m;
    optimizer.second_moments() = ck.adam_v;
    start = ck.step;
    best = ck.best_metric;
    best_step = ck.best_step;
  }

  std::filesystem::create_directories(config.output_dir);
  result.best_checkpoint = config.output_dir / "best.ckpt";
  result.last_checkpoint = config.output_dir / "last.ckpt";
  result.loss_log = config.output_dir / "loss_log.tsv";
  std::ofstream log(result.loss_log, start > 0 ? std::ios::app : std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write " + result.loss_log.string());
  if (start == 0) write_log_header(log);

  const int n = static_cast<int>(examples.size());
  const int batch_size = config.batch_size;
  std::vector<int> order(n);
  long order_epoch = -1;
  auto example_at = [&](long j) {
    long epoch = j / n;
    if (epoch != order_epoch) {
      std::iota(order.begin(), order.end(), 0);
      Rng rng = seeded(config.effective_data_seed(), epoch);
      std::shuffle(order.begin(), order.end(), rng);
      order_epoch = epoch;
    }
    return order[j % n];
  };

  auto evaluate_dev = [&]() -> double {
    if (!dev) return std::nan("");
    PredictOptions po;
    po.decode = config.decode;
    PredictResult pr = predict_dataset(&model, tokenizer, config.encoder, *dev, po);
    return evaluate_predictions(pr.frames, *dev, seen).overall.jga();
  };

  int step = start;
  int run_steps = 0;
  while (step < config.total_steps) {
    std::vector<PreparedExample> batch;
    for (int k = 0; k < batch_size; ++k) {
      long j = static_cast<long>(step) * batch_size + k;
      batch.push_back(prepare_example(examples[example_at(j)], tokenizer, config,
                                      thesaurus, step, k));
    }
    model.params().zero_grad();
    LossRecord record;
    record.step = step;
    record.loss = accumulate_batch_gradients(&model, batch, config, step);
    record.grad_norm = clip_gradients(&model.params(), config.optimizer.max_grad_norm);
    record.learning_rate = learning_rate_at(config, step);
    optimizer.update(&model.params(), record.learning_rate, step + 1);
    write_log_row(log, record);
    result.losses.push_back(record);
    ++step;
    ++run_steps;
    if (options.verbose && (step % config.log_every == 0 || step == 1)) {
      std::fprintf(stderr, "step %d/%d lr %.3e loss %.6f\n", step,
                   config.total_steps, record.learning_rate, record.loss.total);
    }

    bool converged =
        config.early_stop_loss > 0 && record.loss.total < config.early_stop_loss;
    bool interrupted = options.stop_after > 0 && run_steps >= options.stop_after;
    bool eval_point = step % config.eval_every == 0 ||
                      step == config.total_steps || converged;
    if (eval_point) {
      double jga = evaluate_dev();
      // Without a dev split the latest model stands in for the best one.
      bool improved = std::isnan(jga) || jga > best;
      if (options.verbose) {
        std::fprintf(stderr, "step %d dev JGA %.4f%s\n", step, jga,
                     improved ? " (best)" : "");
      }
      if (improved) {
        best = std::isnan(jga) ? best : jga;
        best_step = step;
        save_checkpoint(snapshot(resolved, hash, step, best, best_step,
                                 tokenizer, train_data.schema, model, optimizer),
                        result.best_checkpoint);
      }
    }
    if (eval_point || interrupted) {
      save_checkpoint(snapshot(resolved, hash, step, best, best_step, tokenizer,
                               train_data.schema, model, optimizer),
                      result.last_checkpoint);
    }
    if (converged || interrupted) break;
  }
  log.flush();
  result.final_step = step;
  result.best_dev_jga = best;
  result.best_step = best_step;
  return result;
}

LoadedModel load_model(const std::filesystem::path& checkpoint) {
  Checkpoint ck = load_checkpoint(checkpoint);
  std::istringstream text(ck.config_text);
  LoadedModel out;
  out.config = parse_config(text, checkpoint.string() + ":config");
  out.tokenizer = std::make_unique<WordPieceTokenizer>(Vocabulary(ck.vocabulary));
  out.model = std::make_unique<Model>(
      Model::shell(out.config.model, static_cast<int>(ck.vocabulary.size())));
  import_values(ck.params, &out.model->params());
  out.schema_fingerprint = ck.schema_fingerprint;
  return out;
}

TurnDecode decode_with_model(Model* model, const TurnExample& example,
                             const WordPieceTokenizer& tokenizer,
                             const EncoderOptions& options,
                             const DecodeOptions& decode,
                             DecodeDiagnostics* diagnostics) {
  EncodedInput encoded =
      build_input(example.input, *example.service, tokenizer, options);
  HeadLayout layout = make_layout(*example.service, encoded);
  HeadOutputs outputs = model->predict(encoded, layout, example.input.features);
  return decode_turn(scores_from_outputs(outputs, layout, example), example,
                     decode, diagnostics);
}

namespace {

PredictResult run_predicted_context(
    const Dialogue& dialogue, const Schema& schema,
    const WordPieceTokenizer& tokenizer, BuildOptions build,
    const std::function<TurnDecode(const TurnExample&, DecodeDiagnostics*)>& step) {
  PredictResult out;
  build.mode = ContextMode::kPredictedContext;
  build.predictor = [&](const TurnExample& e) {
    TurnDecode d = step(e, &out.diagnostics);
    const auto& informable = e.service->informable();
    for (std::size_t i = 0; i < informable.size(); ++i) {
      out.slot_updates[e.id + "/" + e.service->slots()[informable[i]].name] =
          d.updates[i];
    }
    ++out.examples;
    return d.state;
  };
  out.frames = build_dialogue_examples(dialogue, schema, tokenizer, build).frames;
  return out;
}

}  // namespace

PredictResult predict_unlabeled_dialogue(
    Model* model, const WordPieceTokenizer& tokenizer,
    const EncoderOptions& options, const Schema& schema,
    const Dialogue& unlabeled,
    const std::vector<std::vector<std::string>>& involvement,
    const DecodeOptions& decode) {
  for (const Turn& t : unlabeled.turns) {
    if (t.speaker != Speaker::kUser) continue;
    for (const Frame& f : t.frames) {
      if (f.state || !f.actions.empty() || !f.slot_spans.empty()) {
        throw std::invalid_argument("dialogue " + unlabeled.dialogue_id +
                                    " still carries user annotations");
      }
    }
  }
  BuildOptions build;
  build.with_labels = false;
  build.involvement = involvement;
  return run_predicted_context(
      unlabeled, schema, tokenizer, build,
      [&](const TurnExample& e, DecodeDiagnostics* diag) {
        return decode_with_model(model, e, tokenizer, options, decode, diag);
      });
}

PredictResult predict_dataset(Model* model, const WordPieceTokenizer& tokenizer,
                              const EncoderOptions& options, const Dataset& data,
                              const PredictOptions& predict) {
  PredictResult total;
  Dataset subset = head_of(data, predict.max_dialogues);
  for (const Dialogue& d : subset.dialogues) {
    merge_into(&total, predict_unlabeled_dialogue(
                           model, tokenizer, options, data.schema,
                           strip_user_annotations(d), compute_involvement(d),
                           predict.decode));
  }
  return total;
}

PredictResult predict_oracle(const WordPieceTokenizer& tokenizer,
                             const EncoderOptions& /*options*/,
                             const Dataset& data, const PredictOptions& predict) {
  PredictResult total;
  Dataset subset = head_of(data, predict.max_dialogues);
  for (const Dialogue& d : subset.dialogues) {
    BuildOptions build;
    build.with_labels = true;
    merge_into(&total,
               run_predicted_context(
                   d, data.schema, tokenizer, build,
                   [&](const TurnExample& e, DecodeDiagnostics* diag) {
                     return decode_turn(oracle_scores(*e.labels, e), e,
                                        predict.decode, diag);
                   }));
  }
  return total;
}

MetricsReport evaluate_predictions(const std::vector<FrameRecord>& predicted,
                                   const Dataset& gold,
                                   const std::set<std::string>& train_services) {
  return evaluate_frames(predicted, gold_frames(gold.dialogues), gold.schema,
                         train_services);
}

double turn_level_jga(Model* model, const std::vector<TurnExample>& examples,
                      const WordPieceTokenizer& tokenizer,
                      const EncoderOptions& options) {
  if (examples.empty()) return std::nan("");
  long correct = 0;
  for (const TurnExample& e : examples) {
    if (!e.gold_state) throw std::invalid_argument("example lacks a gold state");
    TurnDecode d =
        decode_with_model(model, e, tokenizer, options, DecodeOptions{}, nullptr);
    correct += score_frame(d.state, *e.gold_state, e.service).joint_correct;
  }
  return static_cast<double>(correct) / examples.size();
}

nlohmann::json OracleReport::to_json() const {
  return {{"examples", labels.examples},
          {"changed_slots", labels.changed_slots},
          {"unresolvable_slots", labels.unresolvable_slots},
          {"unresolvable_rate", labels.unresolvable_rate()},
          {"invalid_carryover", diagnostics.invalid_carryover},
          {"gold_context", gold_context.to_json()},
          {"predicted_context", predicted_context.to_json()}};
}

OracleReport oracle_check(const Dataset& data,
                          const WordPieceTokenizer& tokenizer) {
  OracleReport report;
  std::vector<FrameRecord> frames;
  std::vector<TurnExample> all;
  for (const Dialogue& d : data.dialogues) {
    BuildOptions build;
    DialogueExamples de =
        build_dialogue_examples(d, data.schema, tokenizer, build);
    std::map<std::string, DialogueState> decoded;
    for (const TurnExample& e : de.examples) {
      decoded[e.id] = decode_turn(oracle_scores(*e.labels, e), e, DecodeOptions{},
                                  &report.diagnostics)
                          .state;
    }
    for (FrameRecord& f : de.frames) {
      if (!f.involved) continue;  // unchanged gold state, kept as is
      f.state = decoded.at(f.dialogue_id + "/" + std::to_string(f.turn_index) +
                           "/" + f.service);
    }
    frames.insert(frames.end(), de.frames.begin(), de.frames.end());
    std::move(de.examples.begin(), de.examples.end(), std::back_inserter(all));
  }
  report.labels = label_stats(all);
  const std::set<std::string> seen = service_names(data.schema);
  report.gold_context = evaluate_predictions(frames, data, seen);
  PredictResult pr = predict_oracle(tokenizer, EncoderOptions{}, data, {});
  report.predicted_context = evaluate_predictions(pr.frames, data, seen);
  return report;
}

void dump_examples(const Dataset& data, const WordPieceTokenizer& tokenizer,
                   const EncoderOptions& options, std::ostream& out, int limit) {
  for (const TurnExample& e : gold_examples(data, tokenizer, limit)) {
    EncodedInput encoded =
        build_input(e.input, *e.service, tokenizer, options);
    out << "=== " << e.id << (encoded.overflow ? " (schema does not fit)" : "") << '\n'
        << render_encoded(encoded, tokenizer) << '\n'
        << labels_to_json(e).dump(2) << "\n\n";
  }
}

}  // namespace sgdst
