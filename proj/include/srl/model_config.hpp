#pragma once

#include <cstddef>
#include <string>

#include <nlohmann/json.hpp>

#include "srl/errors.hpp"
#include "srl/vocab.hpp"

namespace srl {

// full: two projection heads and the biaffine scorer.
// sba:  one shared projection head feeding both roles.
// dba:  pure bilinear scorer without the pair and class bias terms.
enum class Variant { kFull, kSba, kDba };

inline Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::kFull;
  if (name == "sba" || name == "SBA") return Variant::kSba;
  if (name == "dba" || name == "DBA") return Variant::kDba;
  throw ConfigError("unknown variant '" + name + "' (expected full, sba or dba)");
}

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kSba: return "sba";
    case Variant::kDba: return "dba";
  }
  return "full";
}

struct ModelConfig {
  std::size_t word_dim = 100;
  std::size_t pretrained_dim = 100;
  std::size_t lemma_dim = 100;
  std::size_t pos_dim = 100;
  std::size_t indicator_dim = 16;
  std::size_t lstm_layers = 3;
  std::size_t lstm_hidden = 400;  // per direction
  std::size_t proj_dim = 300;
  double word_dropout = 0.20;     // drop probability on the word representation
  double recurrent_keep = 0.80;   // between time-steps and layers
  double proj_keep = 0.80;
  Variant variant = Variant::kFull;
  bool use_pretrained = true;
  bool use_lemma = true;
  bool use_pos = true;
  bool use_indicator = true;
  // Restrict argmax to {None} plus senses on sense pairs and {None} plus
  // roles on role pairs.
  bool decode_mask = true;
  InputColumns columns = InputColumns::kPredicted;
  std::size_t min_count = 2;

  std::size_t representation_dim() const {
    return word_dim + (use_pretrained ? pretrained_dim : 0) + (use_lemma ? lemma_dim : 0) +
           (use_pos ? pos_dim : 0) + (use_indicator ? indicator_dim : 0);
  }

  void validate() const {
    auto positive = [](std::size_t v, const char* key) {
      if (v == 0) throw ConfigError(std::string(key) + " must be positive");
    };
    positive(word_dim, "word_dim");
    if (use_pretrained) positive(pretrained_dim, "pretrained_dim");
    if (use_lemma) positive(lemma_dim, "lemma_dim");
    if (use_pos) positive(pos_dim, "pos_dim");
    if (use_indicator) positive(indicator_dim, "indicator_dim");
    positive(lstm_layers, "lstm_layers");
    positive(lstm_hidden, "lstm_hidden");
    positive(proj_dim, "proj_dim");
    positive(min_count, "min_count");
    auto probability = [](double v, const char* key) {
      if (!(v > 0.0 && v <= 1.0)) throw ConfigError(std::string(key) + " must lie in (0, 1]");
    };
    if (!(word_dropout >= 0.0 && word_dropout < 1.0)) {
      throw ConfigError("word_dropout must lie in [0, 1)");
    }
    probability(recurrent_keep, "recurrent_keep");
    probability(proj_keep, "proj_keep");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{
      {"word_dim", c.word_dim},
      {"pretrained_dim", c.pretrained_dim},
      {"lemma_dim", c.lemma_dim},
      {"pos_dim", c.pos_dim},
      {"indicator_dim", c.indicator_dim},
      {"lstm_layers", c.lstm_layers},
      {"lstm_hidden", c.lstm_hidden},
      {"proj_dim", c.proj_dim},
      {"word_dropout", c.word_dropout},
      {"recurrent_keep", c.recurrent_keep},
      {"proj_keep", c.proj_keep},
      {"variant", variant_name(c.variant)},
      {"use_pretrained", c.use_pretrained},
      {"use_lemma", c.use_lemma},
      {"use_pos", c.use_pos},
      {"use_indicator", c.use_indicator},
      {"decode_mask", c.decode_mask},
      {"columns", c.columns == InputColumns::kGold ? "gold" : "predicted"},
      {"min_count", c.min_count},
  };
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("word_dim").get_to(c.word_dim);
  j.at("pretrained_dim").get_to(c.pretrained_dim);
  j.at("lemma_dim").get_to(c.lemma_dim);
  j.at("pos_dim").get_to(c.pos_dim);
  j.at("indicator_dim").get_to(c.indicator_dim);
  j.at("lstm_layers").get_to(c.lstm_layers);
  j.at("lstm_hidden").get_to(c.lstm_hidden);
  j.at("proj_dim").get_to(c.proj_dim);
  j.at("word_dropout").get_to(c.word_dropout);
  j.at("recurrent_keep").get_to(c.recurrent_keep);
  j.at("proj_keep").get_to(c.proj_keep);
  c.variant = parse_variant(j.at("variant").get<std::string>());
  j.at("use_pretrained").get_to(c.use_pretrained);
  j.at("use_lemma").get_to(c.use_lemma);
  j.at("use_pos").get_to(c.use_pos);
  j.at("use_indicator").get_to(c.use_indicator);
  j.at("decode_mask").get_to(c.decode_mask);
  c.columns = j.at("columns").get<std::string>() == "gold" ? InputColumns::kGold
                                                           : InputColumns::kPredicted;
  j.at("min_count").get_to(c.min_count);
}

}  // namespace srl
