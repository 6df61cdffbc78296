#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "srl/adam.hpp"
#include "srl/checkpoint.hpp"
#include "srl/conll.hpp"
#include "srl/decomposition.hpp"
#include "srl/embeddings.hpp"
#include "srl/errors.hpp"
#include "srl/evaluation.hpp"
#include "srl/labels.hpp"
#include "srl/model.hpp"
#include "srl/ops.hpp"
#include "srl/rng.hpp"
#include "srl/tape.hpp"
#include "srl/vocab.hpp"

namespace srl {

struct TrainConfig {
  ModelConfig model;
  AdamConfig adam;
  PruningConfig pruning;
  TaskMode mode = TaskMode::kConll2009;
  std::size_t batch_tokens = 5000;
  std::size_t max_epochs = 50;
  std::uint64_t seed = 1;
  std::size_t eval_every = 1;
  std::size_t patience = 10;
  double clip_norm = 5.0;  // global gradient norm; 0 disables clipping
  std::set<std::string> frozen;  // parameter names excluded from updates

  void validate() const {
    model.validate();
    if (batch_tokens == 0) throw ConfigError("batch_tokens must be positive");
    if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
    if (eval_every == 0) throw ConfigError("eval_every must be positive");
    if (patience == 0) throw ConfigError("patience must be positive");
    if (!(clip_norm >= 0.0)) throw ConfigError("clip_norm must be non-negative");
    if (adam.anneal_period == 0) throw ConfigError("anneal_period must be positive");
    if (!(adam.learning_rate > 0.0L)) throw ConfigError("learning_rate must be positive");
  }
};

// One encoder pass over a sentence and the labeled pairs it scores.
// `indicator` is the marked predicate position (0 for the unmarked pass).
struct PassUnit {
  std::size_t sentence = 0;
  int indicator = 0;
  std::size_t tokens = 0;
  std::vector<WordPairSample> samples;
};

// conll2009: one pass per predicate with its sense pair and role pairs.
// conll2008: one unmarked pass with the root pair of every word, then one
// pass per predicate with its role pairs.
inline std::vector<PassUnit> make_units(const Corpus& corpus, TaskMode mode,
                                        const LabelSpace& labels,
                                        const PruningConfig& pruning = {}) {
  std::vector<PassUnit> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Sentence& s = corpus[i];
    if (s.size() == 0) continue;
    auto roles_of = [&](int p) {
      std::vector<int> candidates;
      if (pruning.enabled) candidates = prune_candidates(s, p, pruning);
      return role_pairs(s, p, &labels, pruning.enabled ? &candidates : nullptr);
    };
    if (mode == TaskMode::kConll2008) {
      out.push_back({i, 0, s.size(), sense_pairs(s, SenseMode::kAllWords, &labels)});
    }
    const auto senses = sense_pairs(s, SenseMode::kGivenPredicates, &labels);
    std::size_t k = 0;
    for (int p : s.predicate_positions()) {
      PassUnit unit{i, p, s.size(), {}};
      if (mode == TaskMode::kConll2009) unit.samples.push_back(senses.at(k));
      auto roles = roles_of(p);
      unit.samples.insert(unit.samples.end(), roles.begin(), roles.end());
      out.push_back(std::move(unit));
      ++k;
    }
  }
  return out;
}

struct Batch {
  std::vector<std::size_t> units;  // indices into the unit list
  std::size_t tokens = 0;
};

// Seeded shuffle, then greedy fill up to the token budget. A pass larger
// than the budget forms its own batch.
inline std::vector<Batch> make_batches(const std::vector<PassUnit>& units, std::size_t budget,
                                       std::uint64_t seed) {
  if (budget == 0) throw ArgumentError("token budget must be positive");
  std::vector<std::size_t> order(units.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<Batch> out;
  Batch current;
  for (std::size_t u : order) {
    const std::size_t n = units[u].tokens;
    if (!current.units.empty() && current.tokens + n > budget) {
      out.push_back(std::move(current));
      current = Batch{};
    }
    current.units.push_back(u);
    current.tokens += n;
  }
  if (!current.units.empty()) out.push_back(std::move(current));
  return out;
}

// Mean cross-entropy over every pair of the batch.
inline Var batch_loss(Tape& tape, SrlModel& model, const std::vector<EncodedSentence>& inputs,
                      const std::vector<PassUnit>& units, const Batch& batch, Mode mode,
                      Rng& rng) {
  std::vector<Var> losses;
  for (std::size_t u : batch.units) {
    const PassUnit& unit = units.at(u);
    const int marked = model.config().use_indicator ? unit.indicator : 0;
    PassStates states = model.run_pass(tape, inputs.at(unit.sentence), marked, mode, rng);
    for (const WordPairSample& p : unit.samples) {
      if (p.label < 0) throw ArgumentError("unlabeled pair in a training batch");
      losses.push_back(cross_entropy(model.score(tape, states, p.head, p.dependent),
                                     static_cast<std::size_t>(p.label)));
    }
  }
  if (losses.empty()) throw ArgumentError("batch without pairs");
  return mean(losses);
}

// Fraction of gold pairs whose decoded label is correct, in inference mode.
inline double pair_accuracy(SrlModel& model, const Corpus& corpus, TaskMode mode,
                            const PruningConfig& pruning = {}) {
  const auto units = make_units(corpus, mode, model.labels(), pruning);
  std::size_t correct = 0, total = 0;
  Rng unused(0);
  for (const PassUnit& unit : units) {
    Tape tape;
    const int marked = model.config().use_indicator ? unit.indicator : 0;
    PassStates states =
        model.run_pass(tape, model.encode_inputs(corpus[unit.sentence]), marked, Mode::kInfer, unused);
    for (const WordPairSample& p : unit.samples) {
      const Tensor& scores = model.score(tape, states, p.head, p.dependent).value();
      correct += argmax(scores.data(), model.mask_for(p.kind)) == static_cast<std::size_t>(p.label);
      ++total;
    }
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 1.0;
}

struct EpochRecord {
  std::size_t epoch = 0;
  std::uint64_t step = 0;
  double mean_loss = 0.0;
  double learning_rate = 0.0;
  std::optional<Counts> dev;  // semantic counts when the epoch was evaluated
};

inline std::string format_epoch_record(const EpochRecord& r) {
  char buf[256];
  if (r.dev) {
    std::snprintf(buf, sizeof buf,
                  "epoch %zu\tstep %llu\tloss %.6f\tlr %.9g\tdev_p %.2f\tdev_r %.2f\tdev_f1 %.2f",
                  r.epoch, static_cast<unsigned long long>(r.step), r.mean_loss, r.learning_rate,
                  r.dev->precision(), r.dev->recall(), r.dev->f1());
  } else {
    std::snprintf(buf, sizeof buf, "epoch %zu\tstep %llu\tloss %.6f\tlr %.9g", r.epoch,
                  static_cast<unsigned long long>(r.step), r.mean_loss, r.learning_rate);
  }
  return buf;
}

struct StepInfo {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  std::uint64_t step = 0;  // optimizer step the update used
  double loss = 0.0;
  double learning_rate = 0.0;
  double grad_norm = 0.0;
};

struct TrainHooks {
  std::function<void(const std::string&)> log;
  std::function<void(const StepInfo&)> on_step;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochRecord> epochs;
  std::vector<std::string> log;
  std::size_t best_epoch = 0;
};

// Builds the model from the training corpus and optimizes it. After every
// `eval_every` epochs the dev set is decoded and scored; the weights with the
// highest semantic F1 are kept, and training stops after `patience`
// evaluations without improvement.
inline TrainResult train(const Corpus& train_corpus, const Corpus& dev_corpus,
                         const TrainConfig& cfg, const EmbeddingTable* embeddings = nullptr,
                         const TrainHooks& hooks = {}) {
  cfg.validate();
  const ModelConfig& mc = cfg.model;
  Vocabulary vocab = build_vocab(train_corpus, mc.min_count, mc.columns);
  LabelSpace labels = build_label_space(train_corpus);
  SenseLexicon lexicon = build_sense_lexicon(train_corpus, mc.columns);
  PretrainedRows pretrained;
  if (mc.use_pretrained) {
    EmbeddingTable empty;
    empty.dim = mc.pretrained_dim;
    const EmbeddingTable& table = embeddings ? *embeddings : empty;
    if (table.dim != mc.pretrained_dim) {
      throw ConfigError("embedding file has " + std::to_string(table.dim) +
                        " dimensions but pretrained_dim is " + std::to_string(mc.pretrained_dim));
    }
    pretrained = select_pretrained(table, {&train_corpus, &dev_corpus});
  }
  SrlModel model(mc, std::move(vocab), std::move(labels), std::move(lexicon),
                 std::move(pretrained), cfg.seed);
  for (const std::string& name : cfg.frozen) model.params().get(name).trainable = false;

  const auto units = make_units(train_corpus, cfg.mode, model.labels(), cfg.pruning);
  if (units.empty()) throw DataError("training corpus has no sentences to learn from");
  std::vector<EncodedSentence> inputs;
  inputs.reserve(train_corpus.size());
  for (const Sentence& s : train_corpus) inputs.push_back(model.encode_inputs(s));

  TrainResult result;
  auto emit = [&](const std::string& line) {
    result.log.push_back(line);
    if (hooks.log) hooks.log(line);
  };

  AdamState optimizer(cfg.adam);
  Rng dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::optional<ParameterStore> best_params;
  std::optional<AdamState> best_optimizer;
  double best_f1 = -1.0;
  std::uint64_t best_step = 0;
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto batches = make_batches(units, cfg.batch_tokens, cfg.seed + epoch);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      Tape tape;
      Var loss = batch_loss(tape, model, inputs, units, batches[b], Mode::kTrain, dropout_rng);
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite loss at step " + std::to_string(optimizer.step) +
                            " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) +
                            ")");
      }
      tape.backward(loss);
      const double norm = clip_gradients(model.params(), cfg.clip_norm);
      const std::uint64_t step = optimizer.step;
      adam_step(model.params(), optimizer);
      loss_sum += value;
      if (hooks.on_step) {
        hooks.on_step({epoch, b, step, value, optimizer.last_learning_rate, norm});
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.step = optimizer.step;
    record.mean_loss = loss_sum / static_cast<double>(batches.size());
    record.learning_rate = optimizer.last_learning_rate;
    const bool evaluate = epoch % cfg.eval_every == 0 || epoch == cfg.max_epochs;
    bool stop = false;
    if (evaluate) {
      const Corpus& dev = dev_corpus.empty() ? train_corpus : dev_corpus;
      const EvalReport report =
          score_semantic(dev, predict_corpus(model, dev, cfg.mode, cfg.pruning), cfg.mode);
      record.dev = report.semantic;
      const double f1 = report.semantic.f1();
      if (f1 > best_f1) {
        best_f1 = f1;
        best_params = model.params();
        best_optimizer = optimizer;
        best_step = optimizer.step;
        result.best_epoch = epoch;
        stale = 0;
      } else {
        stop = ++stale >= cfg.patience;
      }
    }
    result.epochs.push_back(record);
    emit(format_epoch_record(record));
    if (stop) break;
  }

  if (best_params) model.params() = *best_params;
  result.best.mode = cfg.mode;
  result.best.pruning = cfg.pruning;
  result.best.best_dev_f1 = best_f1 < 0.0 ? 0.0 : best_f1;
  result.best.step = best_step;
  result.best.optimizer = best_optimizer ? std::move(best_optimizer) : std::optional(optimizer);
  result.best.model = std::make_unique<SrlModel>(std::move(model));
  char buf[96];
  std::snprintf(buf, sizeof buf, "best epoch %zu\tdev_f1 %.2f", result.best_epoch,
                result.best.best_dev_f1);
  emit(buf);
  return result;
}

}  // namespace srl
