#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srl/conll.hpp"
#include "srl/decomposition.hpp"
#include "srl/embeddings.hpp"
#include "srl/errors.hpp"
#include "srl/labels.hpp"
#include "srl/model_config.hpp"
#include "srl/ops.hpp"
#include "srl/pruning.hpp"
#include "srl/rng.hpp"
#include "srl/tape.hpp"
#include "srl/vocab.hpp"

namespace srl {

// Frozen pre-trained vectors kept by the model: the rows of the embedding
// file whose (lowercased) keys occur in the given corpora. Rows for the
// reserved ids are zero.
struct PretrainedRows {
  StringIds keys;
  std::vector<std::vector<double>> rows;
};

inline PretrainedRows select_pretrained(const EmbeddingTable& table,
                                        const std::vector<const Corpus*>& corpora) {
  PretrainedRows out;
  for (const Corpus* corpus : corpora) {
    for (const Sentence& s : *corpus) {
      for (const Token& t : s.tokens) {
        const std::string key = lowercase(t.form);
        if (table.vectors.count(key) && !out.keys.contains(key)) out.keys.add(key);
      }
    }
  }
  out.rows.assign(out.keys.size(), std::vector<double>(table.dim, 0.0));
  for (std::size_t id = 3; id < out.keys.size(); ++id) {
    out.rows[id] = table.vectors.at(out.keys.string(id));
  }
  return out;
}

// Per-position input ids; position 0 is the virtual root.
struct EncodedSentence {
  std::vector<std::size_t> forms;
  std::vector<std::size_t> pretrained;
  std::vector<std::size_t> lemmas;
  std::vector<std::size_t> pos;

  std::size_t length() const { return forms.size(); }
};

// Projected states of one encoder pass, h^(pred)_i and h^(arg)_i for every
// position including the root. `contracted` caches the bilinear weight
// contracted with a head's predicate state.
struct PassStates {
  std::vector<Var> pred;
  std::vector<Var> arg;
  std::map<int, Var> contracted;
};

// Scores of the pairs (head, d) for the listed dependents, one row each.
struct ScoreMatrix {
  int head = 0;
  std::vector<int> dependents;
  Tensor scores;  // [dependents x labels]

  std::span<const double> row(std::size_t i) const {
    const std::size_t n = scores.dim(1);
    return scores.data().subspan(i * n, n);
  }
};

// Highest-scoring permitted label; ties go to the lowest id.
inline std::size_t argmax(std::span<const double> scores, const std::vector<bool>* mask = nullptr) {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (mask && !(*mask)[k]) continue;
    if (!best || scores[k] > scores[*best]) best = k;
  }
  if (!best) throw ArgumentError("decode with an empty permitted label set");
  return *best;
}

inline std::vector<std::size_t> decode(const ScoreMatrix& m,
                                       const std::vector<bool>* mask = nullptr) {
  std::vector<std::size_t> out;
  out.reserve(m.dependents.size());
  for (std::size_t i = 0; i < m.dependents.size(); ++i) out.push_back(argmax(m.row(i), mask));
  return out;
}

// s = h_arg^T W h_pred + U (h_arg ⊕ h_pred) + b, with W of shape
// [d_h, labels, d_h] and U of shape [labels, 2 d_h]. Without U and b this is
// the pure bilinear form.
inline Var biaffine_score(Var h_arg, Var h_pred, Var w, std::optional<Var> u = std::nullopt,
                          std::optional<Var> b = std::nullopt) {
  Var s = bilinear(w, h_arg, h_pred);
  if (u) s = add(s, matmul(*u, concat({h_arg, h_pred})));
  if (b) s = add(s, *b);
  return s;
}

class SrlModel {
 public:
  SrlModel(ModelConfig config, Vocabulary vocab, LabelSpace labels, SenseLexicon lexicon,
           PretrainedRows pretrained, std::uint64_t seed)
      : config_(std::move(config)),
        vocab_(std::move(vocab)),
        labels_(std::move(labels)),
        lexicon_(std::move(lexicon)),
        pretrained_keys_(std::move(pretrained.keys)),
        seed_(seed) {
    config_.validate();
    sense_mask_ = labels_.sense_mask();
    role_mask_ = labels_.role_mask();
    Rng rng(seed);
    init_parameters(rng, pretrained.rows);
  }

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const LabelSpace& labels() const { return labels_; }
  const SenseLexicon& lexicon() const { return lexicon_; }
  const StringIds& pretrained_keys() const { return pretrained_keys_; }
  std::uint64_t seed() const { return seed_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  EncodedSentence encode_inputs(const Sentence& s) const {
    EncodedSentence e;
    e.forms.push_back(StringIds::kRoot);
    e.pretrained.push_back(StringIds::kRoot);
    e.lemmas.push_back(StringIds::kRoot);
    e.pos.push_back(StringIds::kRoot);
    for (const Token& t : s.tokens) {
      e.forms.push_back(vocab_.forms.id(t.form));
      e.pretrained.push_back(pretrained_keys_.id(lowercase(t.form)));
      e.lemmas.push_back(vocab_.lemmas.id(input_lemma(t, config_.columns)));
      e.pos.push_back(vocab_.pos.id(input_pos(t, config_.columns)));
    }
    return e;
  }

  // e^(r) ⊕ e^(p) ⊕ e^(l) ⊕ e^(pos) ⊕ e^(i), with disabled blocks left out.
  Var word_representation(Tape& tape, const EncodedSentence& e, std::size_t position,
                          bool is_current_predicate, Mode mode, Rng& rng) {
    std::vector<Var> blocks;
    blocks.push_back(lookup(tape, params_.get("emb.word"), e.forms.at(position)));
    if (config_.use_pretrained) {
      blocks.push_back(lookup(tape, params_.get("emb.pretrained"), e.pretrained.at(position)));
    }
    if (config_.use_lemma) {
      blocks.push_back(lookup(tape, params_.get("emb.lemma"), e.lemmas.at(position)));
    }
    if (config_.use_pos) blocks.push_back(lookup(tape, params_.get("emb.pos"), e.pos.at(position)));
    if (config_.use_indicator) {
      blocks.push_back(
          lookup(tape, params_.get("emb.indicator"), is_current_predicate ? 1 : 0));
    }
    return dropout(concat(blocks), 1.0 - config_.word_dropout, mode, rng);
  }

  // Stacked BiLSTM; g_i is the forward state followed by the backward state.
  std::vector<Var> encode(Tape& tape, std::vector<Var> inputs, Mode mode, Rng& rng) {
    if (inputs.empty()) throw ArgumentError("encode needs a non-empty sequence");
    for (std::size_t layer = 0; layer < config_.lstm_layers; ++layer) {
      const std::string prefix = "lstm." + std::to_string(layer);
      auto forward = run_lstm(tape, inputs, prefix + ".fwd", false, layer > 0, mode, rng);
      auto backward = run_lstm(tape, inputs, prefix + ".bwd", true, layer > 0, mode, rng);
      for (std::size_t t = 0; t < inputs.size(); ++t) {
        inputs[t] = concat({forward[t], backward[t]});
      }
    }
    return inputs;
  }

  // (h^(pred), h^(arg)) of one encoder state.
  std::pair<Var, Var> project(Tape& tape, Var g, Mode mode, Rng& rng) {
    const double keep = config_.proj_keep;
    if (config_.variant == Variant::kSba) {
      Var h = relu(affine(tape.param(params_.get("proj.shared.W")), g,
                          tape.param(params_.get("proj.shared.b"))));
      h = dropout(h, keep, mode, rng);
      return {h, h};
    }
    Var pred = relu(affine(tape.param(params_.get("proj.pred.W")), g,
                           tape.param(params_.get("proj.pred.b"))));
    Var arg = relu(affine(tape.param(params_.get("proj.arg.W")), g,
                          tape.param(params_.get("proj.arg.b"))));
    return {dropout(pred, keep, mode, rng), dropout(arg, keep, mode, rng)};
  }

  // One encoder pass. The indicator marks `indicator_position` (no word is
  // marked when it is negative or zero).
  PassStates run_pass(Tape& tape, const EncodedSentence& e, int indicator_position, Mode mode,
                      Rng& rng) {
    std::vector<Var> reps;
    reps.reserve(e.length());
    for (std::size_t i = 0; i < e.length(); ++i) {
      const bool marked = indicator_position > 0 && static_cast<int>(i) == indicator_position;
      reps.push_back(word_representation(tape, e, i, marked, mode, rng));
    }
    PassStates states;
    for (Var g : encode(tape, std::move(reps), mode, rng)) {
      auto [pred, arg] = project(tape, g, mode, rng);
      states.pred.push_back(pred);
      states.arg.push_back(arg);
    }
    return states;
  }

  // Label scores s_ij for the pair (head j, dependent i).
  Var score(Tape& tape, PassStates& states, int head, int dependent) {
    auto it = states.contracted.find(head);
    if (it == states.contracted.end()) {
      Var contracted = bilinear_right(tape.param(params_.get("biaffine.W")),
                                      states.pred.at(static_cast<std::size_t>(head)));
      it = states.contracted.emplace(head, contracted).first;
    }
    Var h_arg = states.arg.at(static_cast<std::size_t>(dependent));
    Var s = matmul(h_arg, it->second);
    if (config_.variant == Variant::kDba) return s;
    Var pair = matmul(tape.param(params_.get("biaffine.U")),
                      concat({h_arg, states.pred.at(static_cast<std::size_t>(head))}));
    return add_n({s, pair, tape.param(params_.get("biaffine.b"))});
  }

  // Inference-mode scores for (head, d) over `dependents`, using an existing
  // pass.
  ScoreMatrix score_matrix(Tape& tape, PassStates& states, int head,
                           const std::vector<int>& dependents) {
    ScoreMatrix m;
    m.head = head;
    m.dependents = dependents;
    m.scores = Tensor(Shape{std::max<std::size_t>(dependents.size(), 1), labels_.size()});
    for (std::size_t r = 0; r < dependents.size(); ++r) {
      const Tensor& row = score(tape, states, head, dependents[r]).value();
      for (std::size_t k = 0; k < row.size(); ++k) m.scores.at(r, k) = row[k];
    }
    return m;
  }

  // Mask for a pair kind, or nullptr when masking is disabled.
  const std::vector<bool>* mask_for(PairKind kind) const {
    if (!config_.decode_mask) return nullptr;
    return kind == PairKind::kSense ? &sense_mask_ : &role_mask_;
  }

 private:
  std::vector<Var> run_lstm(Tape& tape, const std::vector<Var>& xs, const std::string& name,
                            bool reverse, bool input_dropout, Mode mode, Rng& rng) {
    const std::size_t hidden = config_.lstm_hidden;
    const double keep = config_.recurrent_keep;
    Var w = tape.param(params_.get(name + ".W"));
    Var b = tape.param(params_.get(name + ".b"));
    const bool masked = mode == Mode::kTrain && keep < 1.0;
    std::optional<Var> in_mask, h_mask;
    if (masked && input_dropout) {
      in_mask = constant(tape, dropout_mask(xs.front().shape(), keep, rng));
    }
    if (masked) h_mask = constant(tape, dropout_mask(Shape{hidden}, keep, rng));

    Var h = constant(tape, Tensor(Shape{hidden}));
    Var c = constant(tape, Tensor(Shape{hidden}));
    std::vector<Var> out(xs.size());
    for (std::size_t step = 0; step < xs.size(); ++step) {
      const std::size_t t = reverse ? xs.size() - 1 - step : step;
      Var x = in_mask ? mul(xs[t], *in_mask) : xs[t];
      Var h_in = h_mask ? mul(h, *h_mask) : h;
      Var z = affine(w, concat({x, h_in}), b);
      Var i = sigmoid(slice(z, 0, hidden));
      Var f = sigmoid(slice(z, hidden, hidden));
      Var o = sigmoid(slice(z, 2 * hidden, hidden));
      Var g = tanh(slice(z, 3 * hidden, hidden));
      c = add(mul(f, c), mul(i, g));
      h = mul(o, tanh(c));
      out[t] = h;
    }
    return out;
  }

  static Tensor uniform(Shape shape, double bound, Rng& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng.uniform(-bound, bound);
    return t;
  }

  static Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng) {
    return uniform(Shape{rows, cols}, std::sqrt(6.0 / static_cast<double>(rows + cols)), rng);
  }

  void init_parameters(Rng& rng, const std::vector<std::vector<double>>& pretrained_rows) {
    constexpr double kSmall = 0.01;
    const ModelConfig& c = config_;
    params_.add("emb.word", uniform(Shape{vocab_.forms.size(), c.word_dim}, kSmall, rng));
    if (c.use_pretrained) {
      Tensor table(Shape{pretrained_keys_.size(), c.pretrained_dim});
      for (std::size_t r = 0; r < pretrained_rows.size(); ++r) {
        if (pretrained_rows[r].size() != c.pretrained_dim) {
          throw ConfigError("pre-trained vectors have " +
                            std::to_string(pretrained_rows[r].size()) +
                            " dimensions but pretrained_dim is " +
                            std::to_string(c.pretrained_dim));
        }
        for (std::size_t k = 0; k < c.pretrained_dim; ++k) table.at(r, k) = pretrained_rows[r][k];
      }
      params_.add("emb.pretrained", std::move(table), /*trainable=*/false);
    }
    if (c.use_lemma) {
      params_.add("emb.lemma", uniform(Shape{vocab_.lemmas.size(), c.lemma_dim}, kSmall, rng));
    }
    if (c.use_pos) params_.add("emb.pos", uniform(Shape{vocab_.pos.size(), c.pos_dim}, kSmall, rng));
    if (c.use_indicator) {
      params_.add("emb.indicator", uniform(Shape{2, c.indicator_dim}, kSmall, rng));
    }

    std::size_t input = c.representation_dim();
    const std::size_t hidden = c.lstm_hidden;
    for (std::size_t layer = 0; layer < c.lstm_layers; ++layer) {
      for (const char* dir : {"fwd", "bwd"}) {
        const std::string prefix = "lstm." + std::to_string(layer) + "." + dir;
        params_.add(prefix + ".W", glorot(4 * hidden, input + hidden, rng));
        Tensor bias = uniform(Shape{4 * hidden}, kSmall, rng);
        for (std::size_t k = hidden; k < 2 * hidden; ++k) bias[k] = 1.0;
        params_.add(prefix + ".b", std::move(bias));
      }
      input = 2 * hidden;
    }

    const std::size_t d = c.proj_dim;
    for (const char* head : c.variant == Variant::kSba ? std::vector<const char*>{"shared"}
                                                      : std::vector<const char*>{"pred", "arg"}) {
      params_.add(std::string("proj.") + head + ".W", glorot(d, 2 * hidden, rng));
      params_.add(std::string("proj.") + head + ".b", uniform(Shape{d}, kSmall, rng));
    }
    const std::size_t n = labels_.size();
    params_.add("biaffine.W", Tensor(Shape{d, n, d}));
    if (c.variant != Variant::kDba) {
      params_.add("biaffine.U", Tensor(Shape{n, 2 * d}));
      params_.add("biaffine.b", uniform(Shape{n}, kSmall, rng));
    }
  }

  ModelConfig config_;
  Vocabulary vocab_;
  LabelSpace labels_;
  SenseLexicon lexicon_;
  StringIds pretrained_keys_;
  std::uint64_t seed_;
  ParameterStore params_;
  std::vector<bool> sense_mask_;
  std::vector<bool> role_mask_;
};

struct Prediction {
  Sentence sentence;        // input with FILLPRED/PRED/APRED rewritten
  Annotation annotation;
  std::size_t encoder_passes = 0;
};

namespace detail {

inline std::string predicted_sense(SrlModel& model, const ScoreMatrix& m, const Token& token,
                                   bool predicate_given) {
  const LabelSpace& labels = model.labels();
  const std::vector<bool>* mask = model.mask_for(PairKind::kSense);
  std::size_t id = argmax(m.row(0), mask);
  if (!labels.is_sense(id)) {
    if (!predicate_given) return {};
    // A given predicate still needs a sense: take the best sense label.
    const auto senses_only = [&] {
      std::vector<bool> only(labels.size(), false);
      for (std::size_t k = 0; k < labels.size(); ++k) only[k] = labels.is_sense(k);
      return only;
    }();
    bool any = false;
    for (bool b : senses_only) any = any || b;
    if (!any) return model.lexicon().default_sense;
    id = argmax(m.row(0), &senses_only);
  }
  if (!model.lexicon().knows(input_lemma(token, model.config().columns))) {
    return model.lexicon().default_sense;
  }
  return labels.label(id).name;
}

inline std::map<int, std::string> predicted_arguments(SrlModel& model, Tape& tape,
                                                      PassStates& states, const Sentence& s,
                                                      int predicate,
                                                      const PruningConfig& pruning) {
  std::vector<int> dependents;
  if (pruning.enabled) {
    dependents = prune_candidates(s, predicate, pruning);
  } else {
    for (const Token& t : s.tokens) dependents.push_back(t.index);
  }
  const ScoreMatrix m = model.score_matrix(tape, states, predicate, dependents);
  const auto ids = decode(m, model.mask_for(PairKind::kRole));
  std::map<int, std::string> out;
  for (std::size_t r = 0; r < dependents.size(); ++r) {
    if (model.labels().is_role(ids[r])) out[dependents[r]] = model.labels().label(ids[r]).name;
  }
  return out;
}

}  // namespace detail

// conll2009: one pass per given predicate, scoring its sense pair and its
// role pairs. conll2008: a first pass without predicate marking scores the
// root pair of every word to find and disambiguate predicates, then one pass
// per found predicate labels its arguments.
inline Prediction predict_sentence(SrlModel& model, const Sentence& sentence, TaskMode mode,
                                   const PruningConfig& pruning = {}) {
  Prediction out;
  Rng unused(0);
  const EncodedSentence e = model.encode_inputs(sentence);
  const bool indicator = model.config().use_indicator;

  std::vector<PredicateFrame> frames;
  if (mode == TaskMode::kConll2009) {
    for (int p : sentence.predicate_positions()) {
      Tape tape;
      PassStates states = model.run_pass(tape, e, indicator ? p : 0, Mode::kInfer, unused);
      ++out.encoder_passes;
      PredicateFrame f;
      f.position = p;
      f.sense = detail::predicted_sense(model, model.score_matrix(tape, states, kVirtualRoot, {p}),
                                        sentence.at(p), true);
      f.arguments = detail::predicted_arguments(model, tape, states, sentence, p, pruning);
      frames.push_back(std::move(f));
    }
    out.annotation.frames = std::move(frames);
    out.sentence = apply_annotation(sentence, out.annotation, model.config().columns);
    return out;
  }

  const Sentence blank = strip_annotation(sentence, /*keep_predicates=*/false);
  std::vector<int> predicates;
  {
    Tape tape;
    PassStates states = model.run_pass(tape, e, 0, Mode::kInfer, unused);
    ++out.encoder_passes;
    for (const Token& t : sentence.tokens) {
      const std::string sense = detail::predicted_sense(
          model, model.score_matrix(tape, states, kVirtualRoot, {t.index}), t, false);
      if (sense.empty()) continue;
      PredicateFrame f;
      f.position = t.index;
      f.sense = sense;
      frames.push_back(std::move(f));
    }
  }
  for (PredicateFrame& f : frames) {
    Tape tape;
    PassStates states = model.run_pass(tape, e, indicator ? f.position : 0, Mode::kInfer, unused);
    ++out.encoder_passes;
    f.arguments = detail::predicted_arguments(model, tape, states, sentence, f.position, pruning);
  }
  out.annotation.frames = std::move(frames);
  out.sentence = apply_annotation(blank, out.annotation, model.config().columns);
  return out;
}

inline Corpus predict_corpus(SrlModel& model, const Corpus& corpus, TaskMode mode,
                             const PruningConfig& pruning = {}) {
  Corpus out;
  out.reserve(corpus.size());
  for (const Sentence& s : corpus) out.push_back(predict_sentence(model, s, mode, pruning).sentence);
  return out;
}

}  // namespace srl
