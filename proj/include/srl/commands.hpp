#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "srl/checkpoint.hpp"
#include "srl/config.hpp"
#include "srl/conll.hpp"
#include "srl/embeddings.hpp"
#include "srl/errors.hpp"
#include "srl/evaluation.hpp"
#include "srl/model.hpp"
#include "srl/pruning.hpp"
#include "srl/training.hpp"

namespace srl {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitInternal = 4 };

// Maps library errors onto the exit-code contract and reports them on `err`.
inline int run_guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == CheckpointError::Kind::kConfig ? kExitUsage : kExitData;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

namespace detail {

inline Corpus read_corpus(const std::string& path, Format format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  try {
    return parse_conll(in, format);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline void write_corpus(const std::string& path, const Corpus& corpus, Format format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_conll(out, corpus, format);
  if (!out) throw DataError("write to " + path + " failed");
}

inline std::optional<EmbeddingTable> read_embeddings(const std::string& path) {
  if (path.empty()) return std::nullopt;
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  try {
    return load_embeddings(in);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline Format natural_format(TaskMode mode) {
  return mode == TaskMode::kConll2009 ? Format::kConll2009 : Format::kConll2008;
}

struct TrainedRun {
  TrainResult result;
  Corpus dev;
};

inline TrainedRun train_from_config(const RunConfig& cfg, const TrainHooks& hooks) {
  if (cfg.train_file.empty()) throw ConfigError("train_file is not set");
  Corpus train_corpus = read_corpus(cfg.train_file, cfg.format);
  Corpus dev_corpus = cfg.dev_file.empty() ? Corpus{} : read_corpus(cfg.dev_file, cfg.format);
  const auto embeddings = cfg.train.model.use_pretrained ? read_embeddings(cfg.embeddings_file)
                                                         : std::nullopt;
  TrainedRun run;
  run.result = train(train_corpus, dev_corpus, cfg.train, embeddings ? &*embeddings : nullptr, hooks);
  run.dev = dev_corpus.empty() ? std::move(train_corpus) : std::move(dev_corpus);
  return run;
}

}  // namespace detail

// Trains per the config file; writes the checkpoint and the epoch log.
inline int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
                     std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    RunConfig cfg = load_run_config(config_path);
    if (seed) cfg.train.seed = *seed;
    std::ofstream log;
    TrainHooks hooks;
    hooks.log = [&](const std::string& line) {
      if (!log.is_open()) {
        log.open(cfg.effective_log_file());
        if (!log) throw DataError("cannot write " + cfg.effective_log_file());
      }
      log << line << '\n';
      out << line << '\n';
    };
    const detail::TrainedRun run = detail::train_from_config(cfg, hooks);
    save_checkpoint(run.result.best, cfg.model_file);
    out << "checkpoint written to " << cfg.model_file << '\n';
  });
}

// Labels `input` with a trained model. `format` defaults to the layout that
// matches the task mode.
inline int cmd_predict(const std::string& model_path, const std::string& input_path,
                       const std::string& output_path, const std::string& mode_name,
                       std::ostream& err, const std::string& format_name = "") {
  return run_guarded(err, [&] {
    const TaskMode mode = parse_task_mode(mode_name);
    const Format format = format_name.empty() ? detail::natural_format(mode) : parse_format(format_name);
    Checkpoint ckpt = load_checkpoint(model_path);
    if (ckpt.mode != mode) {
      throw ConfigError(std::string("checkpoint was trained in ") + task_mode_name(ckpt.mode) +
                        " mode, prediction requested in " + task_mode_name(mode) + " mode");
    }
    const Corpus input = detail::read_corpus(input_path, format);
    detail::write_corpus(output_path, predict_corpus(*ckpt.model, input, mode, ckpt.pruning),
                         format);
  });
}

inline int cmd_evaluate(const std::string& gold_path, const std::string& pred_path,
                        const std::string& mode_name, bool tsv, std::ostream& out,
                        std::ostream& err, const std::string& format_name = "") {
  return run_guarded(err, [&] {
    const TaskMode mode = parse_task_mode(mode_name);
    const Format format = format_name.empty() ? detail::natural_format(mode) : parse_format(format_name);
    const Corpus gold = detail::read_corpus(gold_path, format);
    const Corpus pred = detail::read_corpus(pred_path, format);
    const EvalReport report = score_semantic(gold, pred, mode);
    out << (tsv ? format_report_tsv(report) : format_report(report));
  });
}

// Coverage and reduction (percent) for k = 1..k_max.
inline std::string pruning_table(const Corpus& corpus, int k_max, HeadSource heads) {
  std::string text = "k\tcoverage\treduction\n";
  char buf[96];
  for (int k = 1; k <= k_max; ++k) {
    const PruningStats stats = pruning_stats(corpus, k, heads);
    std::snprintf(buf, sizeof buf, "%d\t%.2f\t%.2f\n", k, 100.0 * stats.coverage(),
                  100.0 * stats.reduction());
    text += buf;
  }
  return text;
}

inline int cmd_stats(const std::string& input_path, int k_max, const std::string& format_name,
                     const std::string& heads_name, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    if (k_max < 1) throw ConfigError("--k-max must be at least 1");
    const Format format = parse_format(format_name);
    const HeadSource heads = parse_head_source(heads_name);
    out << pruning_table(detail::read_corpus(input_path, format), k_max, heads);
  });
}

// Applies a named ablation to a base configuration. Names: full, no-pos,
// no-lemma, no-indicator, no-pretrained, sba, dba, with-pruning and
// with-pruning(K).
inline TrainConfig ablation_variant(TrainConfig base, const std::string& name) {
  if (name == "full") return base;
  if (name == "no-pos") {
    base.model.use_pos = false;
  } else if (name == "no-lemma") {
    base.model.use_lemma = false;
  } else if (name == "no-indicator") {
    base.model.use_indicator = false;
  } else if (name == "no-pretrained") {
    base.model.use_pretrained = false;
  } else if (name == "sba" || name == "SBA") {
    base.model.variant = Variant::kSba;
  } else if (name == "dba" || name == "DBA") {
    base.model.variant = Variant::kDba;
  } else if (name == "with-pruning") {
    base.pruning.enabled = true;
  } else if (name.rfind("with-pruning(", 0) == 0 && name.back() == ')') {
    const std::string k = name.substr(13, name.size() - 14);
    base.pruning.enabled = true;
    base.pruning.k = static_cast<int>(detail::parse_unsigned(name, k));
  } else {
    throw ConfigError("unknown variant '" + name + "'");
  }
  return base;
}

struct AblationRow {
  std::string name;
  TrainConfig config;
  EvalReport report;
  double pair_accuracy = 0.0;
};

// Trains every variant on the same data and seed and scores it on the dev
// set (the training set when no dev file is configured).
inline std::vector<AblationRow> run_ablation(const RunConfig& base,
                                             const std::vector<std::string>& variants,
                                             const TrainHooks& hooks = {}) {
  std::vector<std::pair<std::string, TrainConfig>> configs;
  for (const std::string& name : variants) configs.emplace_back(name, ablation_variant(base.train, name));
  std::vector<AblationRow> rows;
  for (auto& [name, train_cfg] : configs) {
    RunConfig cfg = base;
    cfg.train = train_cfg;
    detail::TrainedRun run = detail::train_from_config(cfg, hooks);
    SrlModel& model = *run.result.best.model;
    AblationRow row{name, train_cfg, {}, 0.0};
    row.report = score_semantic(run.dev, predict_corpus(model, run.dev, cfg.train.mode, cfg.train.pruning),
                                cfg.train.mode);
    row.pair_accuracy = pair_accuracy(model, run.dev, cfg.train.mode, cfg.train.pruning);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline int cmd_ablate(const std::string& config_path, const std::vector<std::string>& variants,
                      std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    if (variants.empty()) throw ConfigError("no variants given");
    const RunConfig cfg = load_run_config(config_path);
    for (const std::string& v : variants) ablation_variant(cfg.train, v);
    TrainHooks hooks;
    hooks.log = [&](const std::string& line) { err << line << '\n'; };
    const auto rows = run_ablation(cfg, variants, hooks);
    std::vector<std::pair<std::string, EvalReport>> table;
    for (const AblationRow& r : rows) table.emplace_back(r.name, r.report);
    out << ablation_report(table);
    for (const AblationRow& r : rows) {
      nlohmann::json j = r.config.model;
      j["pruning"] = r.config.pruning.enabled;
      j["pruning_k"] = r.config.pruning.k;
      out << "config " << r.name << ' ' << j.dump() << '\n';
    }
  });
}

}  // namespace srl
