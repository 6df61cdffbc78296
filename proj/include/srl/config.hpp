#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "srl/conll.hpp"
#include "srl/errors.hpp"
#include "srl/training.hpp"

namespace srl {

// Everything a command needs: data locations, file layout, task mode and the
// training recipe. Absent keys keep the defaults of TrainConfig.
struct RunConfig {
  std::string train_file;
  std::string dev_file;
  std::string test_file;
  std::string embeddings_file;
  std::string model_file = "model.ckpt";
  std::string log_file;  // defaults to model_file + ".log"
  Format format = Format::kConll2009;
  TrainConfig train;

  std::string effective_log_file() const {
    return log_file.empty() ? model_file + ".log" : log_file;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw ConfigError("key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

inline long double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long double out = 0;
  try {
    out = std::stold(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

inline const std::map<std::string, Setter>& config_setters() {
  static const std::map<std::string, Setter> setters = [] {
    std::map<std::string, Setter> s;
    auto size = [](std::size_t ModelConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) {
        c.train.model.*field = static_cast<std::size_t>(parse_unsigned(k, v));
      };
    };
    auto real = [](double ModelConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) {
        c.train.model.*field = static_cast<double>(parse_real(k, v));
      };
    };
    auto flag = [](bool ModelConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) {
        c.train.model.*field = parse_bool(k, v);
      };
    };
    auto path = [](std::string RunConfig::*field) {
      return [field](RunConfig& c, const std::string&, const std::string& v) { c.*field = v; };
    };

    s["train_file"] = path(&RunConfig::train_file);
    s["dev_file"] = path(&RunConfig::dev_file);
    s["test_file"] = path(&RunConfig::test_file);
    s["embeddings_file"] = path(&RunConfig::embeddings_file);
    s["model_file"] = path(&RunConfig::model_file);
    s["log_file"] = path(&RunConfig::log_file);
    s["format"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.format = parse_format(v);
    };
    s["mode"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.train.mode = parse_task_mode(v);
    };
    s["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.seed = parse_unsigned(k, v);
    };

    s["word_dim"] = size(&ModelConfig::word_dim);
    s["pretrained_dim"] = size(&ModelConfig::pretrained_dim);
    s["lemma_dim"] = size(&ModelConfig::lemma_dim);
    s["pos_dim"] = size(&ModelConfig::pos_dim);
    s["indicator_dim"] = size(&ModelConfig::indicator_dim);
    s["lstm_layers"] = size(&ModelConfig::lstm_layers);
    s["lstm_hidden"] = size(&ModelConfig::lstm_hidden);
    s["proj_dim"] = size(&ModelConfig::proj_dim);
    s["min_count"] = size(&ModelConfig::min_count);
    s["word_dropout"] = real(&ModelConfig::word_dropout);
    s["recurrent_keep"] = real(&ModelConfig::recurrent_keep);
    s["proj_keep"] = real(&ModelConfig::proj_keep);
    s["use_pretrained"] = flag(&ModelConfig::use_pretrained);
    s["use_lemma"] = flag(&ModelConfig::use_lemma);
    s["use_pos"] = flag(&ModelConfig::use_pos);
    s["use_indicator"] = flag(&ModelConfig::use_indicator);
    s["decode_mask"] = flag(&ModelConfig::decode_mask);
    s["variant"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.train.model.variant = parse_variant(v);
    };
    s["input_columns"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "gold") {
        c.train.model.columns = InputColumns::kGold;
      } else if (v == "predicted") {
        c.train.model.columns = InputColumns::kPredicted;
      } else {
        throw ConfigError("key '" + k + "' expects gold or predicted, got '" + v + "'");
      }
    };

    s["learning_rate"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.adam.learning_rate = parse_real(k, v);
    };
    s["anneal_factor"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.adam.anneal_factor = parse_real(k, v);
    };
    s["anneal_period"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.adam.anneal_period = parse_unsigned(k, v);
    };
    s["beta1"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.adam.beta1 = static_cast<double>(parse_real(k, v));
    };
    s["beta2"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.adam.beta2 = static_cast<double>(parse_real(k, v));
    };
    s["epsilon"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.adam.epsilon = static_cast<double>(parse_real(k, v));
    };

    s["batch_tokens"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.batch_tokens = parse_unsigned(k, v);
    };
    s["max_epochs"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.max_epochs = parse_unsigned(k, v);
    };
    s["eval_every"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.eval_every = parse_unsigned(k, v);
    };
    s["patience"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.patience = parse_unsigned(k, v);
    };
    s["clip_norm"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.clip_norm = static_cast<double>(parse_real(k, v));
    };
    s["frozen"] = [](RunConfig& c, const std::string&, const std::string& v) {
      const auto names = split_list(v);
      c.train.frozen = std::set<std::string>(names.begin(), names.end());
    };

    s["pruning"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.pruning.enabled = parse_bool(k, v);
    };
    s["pruning_k"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.pruning.k = static_cast<int>(parse_unsigned(k, v));
    };
    s["pruning_heads"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.train.pruning.heads = parse_head_source(v);
    };
    return s;
  }();
  return setters;
}

inline const std::vector<std::string> kPathKeys = {"train_file",      "dev_file",   "test_file",
                                                   "embeddings_file", "model_file", "log_file"};

}  // namespace detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [key, setter] : detail::config_setters()) out.push_back(key);
  return out;
}

// Parses `key = value` lines. '#' starts a comment. Relative paths are taken
// relative to `base_dir` when it is non-empty.
inline RunConfig parse_run_config(std::istream& in, const std::string& base_dir = "") {
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    const auto& setters = detail::config_setters();
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (auto prev = seen.find(key); prev != seen.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                        "' already set on line " + std::to_string(prev->second));
    }
    seen[key] = line_no;
    const bool is_path = std::find(detail::kPathKeys.begin(), detail::kPathKeys.end(), key) !=
                         detail::kPathKeys.end();
    if (is_path && !base_dir.empty() && !value.empty() &&
        std::filesystem::path(value).is_relative()) {
      value = (std::filesystem::path(base_dir) / value).string();
    }
    it->second(cfg, key, value);
  }
  cfg.train.validate();
  return cfg;
}

inline RunConfig parse_run_config(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  return parse_run_config(in, std::filesystem::path(path).parent_path().string());
}

}  // namespace srl
