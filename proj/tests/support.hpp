#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "srl/srl.hpp"

namespace srl::test {

inline std::string data_path(const std::string& name) {
  return std::string(SRL_TEST_DATA) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline Corpus fixture(const std::string& name) {
  const Format f = name.ends_with(".conll08") ? Format::kConll2008 : Format::kConll2009;
  return parse_conll(read_file(data_path(name)), f);
}

inline const std::vector<std::string>& conll09_fixtures() {
  static const std::vector<std::string> names = {"gene.conll09", "two_token.conll09",
                                                 "mixed.conll09", "score_gold.conll09",
                                                 "score_pred.conll09", "trees.conll09"};
  return names;
}

inline const std::vector<std::string>& conll08_fixtures() {
  static const std::vector<std::string> names = {"small.conll08", "pred_gold.conll08",
                                                 "pred_pred.conll08"};
  return names;
}

// Fresh scratch directory under the system temp dir.
inline std::string scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("srl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

// Synthetic CoNLL-2009 corpus with a learnable annotation. Every sentence has
// one to three verbs; a verb's sense depends on the verb, the nearest noun to
// its left is A0, the nearest noun to its right is A1 and an immediately
// preceding modal is AM-MOD. Heads: the first verb is the root, other verbs
// attach to it, every other word to its nearest verb.
inline std::string toy_corpus_text(std::size_t sentences, std::uint64_t seed,
                                   std::size_t nouns = 20, std::size_t verbs = 10) {
  Rng rng(seed);
  std::string out;
  for (std::size_t s = 0; s < sentences; ++s) {
    struct Word {
      std::string form, pos;
      int verb = -1;
    };
    std::vector<Word> words;
    const std::size_t n_verbs = 1 + rng.below(3);
    for (std::size_t v = 0; v < n_verbs; ++v) {
      if (rng.bernoulli(0.6)) words.push_back({"the", "DT"});
      words.push_back({"noun" + std::to_string(rng.below(nouns)), "NN"});
      if (rng.bernoulli(0.3)) words.push_back({"quickly", "RB"});
      if (rng.bernoulli(0.4)) words.push_back({"can", "MD"});
      const int verb = static_cast<int>(rng.below(verbs));
      words.push_back({"verb" + std::to_string(verb), "VB", verb});
    }
    if (rng.bernoulli(0.7)) words.push_back({"noun" + std::to_string(rng.below(nouns)), "NN"});
    words.push_back({".", "."});

    const int n = static_cast<int>(words.size());
    std::vector<int> verb_positions;
    for (int i = 0; i < n; ++i) {
      if (words[i].verb >= 0) verb_positions.push_back(i + 1);
    }
    std::vector<int> heads(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
      if (i == verb_positions.front()) {
        heads[i] = 0;
      } else if (words[i - 1].verb >= 0) {
        heads[i] = verb_positions.front();
      } else {
        int best = verb_positions.front();
        for (int v : verb_positions) {
          if (std::abs(v - i) < std::abs(best - i)) best = v;
        }
        heads[i] = best;
      }
    }
    std::vector<std::vector<std::string>> args(n + 1, std::vector<std::string>(verb_positions.size(), "_"));
    for (std::size_t k = 0; k < verb_positions.size(); ++k) {
      const int p = verb_positions[k];
      for (int i = p - 1; i >= 1; --i) {
        if (words[i - 1].pos == "NN") {
          args[i][k] = "A0";
          break;
        }
      }
      for (int i = p + 1; i <= n; ++i) {
        if (words[i - 1].pos == "NN") {
          args[i][k] = "A1";
          break;
        }
      }
      if (p > 1 && words[p - 2].pos == "MD") args[p - 1][k] = "AM-MOD";
    }
    for (int i = 1; i <= n; ++i) {
      const Word& w = words[i - 1];
      const bool is_pred = w.verb >= 0;
      const std::string sense = is_pred ? (w.verb < static_cast<int>(verbs / 2) ? "01" : "02") : "";
      std::vector<std::string> cols = {std::to_string(i),
                                       w.form,
                                       w.form,
                                       w.form,
                                       w.pos,
                                       w.pos,
                                       "_",
                                       "_",
                                       std::to_string(heads[i]),
                                       std::to_string(heads[i]),
                                       "dep",
                                       "dep",
                                       is_pred ? "Y" : "_",
                                       is_pred ? w.form + "." + sense : "_"};
      for (const std::string& a : args[i]) cols.push_back(a);
      for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "\t" : "") + cols[c];
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

inline Corpus toy_corpus(std::size_t sentences = 50, std::uint64_t seed = 11) {
  return parse_conll(toy_corpus_text(sentences, seed), Format::kConll2009);
}

// Small dimensions for fast tests.
inline ModelConfig tiny_config() {
  ModelConfig c;
  c.word_dim = 8;
  c.pretrained_dim = 8;
  c.lemma_dim = 8;
  c.pos_dim = 8;
  c.indicator_dim = 4;
  c.lstm_layers = 1;
  c.lstm_hidden = 16;
  c.proj_dim = 8;
  c.min_count = 1;
  c.use_pretrained = false;
  return c;
}

inline std::unique_ptr<SrlModel> make_model(const Corpus& corpus, const ModelConfig& config,
                                            std::uint64_t seed = 3) {
  return std::make_unique<SrlModel>(config, build_vocab(corpus, config.min_count, config.columns),
                                    build_label_space(corpus),
                                    build_sense_lexicon(corpus, config.columns), PretrainedRows{},
                                    seed);
}

// Overwrites every value with a uniform draw in [-bound, bound].
inline void randomize(ParameterStore& params, std::uint64_t seed, double bound = 0.5) {
  Rng rng(seed);
  for (Parameter& p : params) {
    for (double& v : p.value.data()) v = rng.uniform(-bound, bound);
  }
}

inline Tensor random_tensor(const Shape& shape, Rng& rng, double bound = 1.0) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-5});
}

// Central differences of a scalar function with respect to every entry of
// `x`, evaluated in place.
inline Tensor numeric_gradient(Tensor& x, const std::function<double()>& f, double h = 1e-6) {
  Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f();
    x[i] = saved - h;
    const double down = f();
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace srl::test
