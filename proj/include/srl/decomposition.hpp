#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srl/conll.hpp"
#include "srl/errors.hpp"
#include "srl/labels.hpp"
#include "srl/pruning.hpp"
#include "srl/vocab.hpp"

namespace srl {

enum class PairKind { kSense, kRole };

inline constexpr int kVirtualRoot = 0;
inline constexpr long kNoLabel = -1;

// One classification unit: the label of the (head, dependent) word pair.
// Sense pairs are headed by the virtual root.
struct WordPairSample {
  int head = 0;
  int dependent = 0;
  PairKind kind = PairKind::kRole;
  long label = kNoLabel;

  friend bool operator==(const WordPairSample&, const WordPairSample&) = default;
};

// conll2009: predicates are given, one sense pair per predicate.
// conll2008: every word is a predicate candidate.
enum class SenseMode { kGivenPredicates, kAllWords };

// Procedure used for training and prediction (independent of file layout).
enum class TaskMode { kConll2009, kConll2008 };

inline TaskMode parse_task_mode(const std::string& name) {
  if (name == "conll2009") return TaskMode::kConll2009;
  if (name == "conll2008") return TaskMode::kConll2008;
  throw ConfigError("unknown mode '" + name + "' (expected conll2009 or conll2008)");
}

inline const char* task_mode_name(TaskMode m) {
  return m == TaskMode::kConll2009 ? "conll2009" : "conll2008";
}

inline SenseMode sense_mode_for(TaskMode m) {
  return m == TaskMode::kConll2009 ? SenseMode::kGivenPredicates : SenseMode::kAllWords;
}

namespace detail {

inline long sense_label(const Token& t, const LabelSpace& labels) {
  if (!t.pred) {
    throw DataError("predicate '" + t.form + "' at position " + std::to_string(t.index) +
                    " has no sense annotation");
  }
  const std::string sense = split_predicate(*t.pred).second;
  auto id = labels.sense_id(sense);
  if (!id) throw DataError("sense '" + sense + "' is not in the label space");
  return static_cast<long>(*id);
}

}  // namespace detail

// Virtual-root pairs. Gold labels are filled in when `labels` is given.
inline std::vector<WordPairSample> sense_pairs(const Sentence& s, SenseMode mode,
                                               const LabelSpace* labels = nullptr) {
  std::vector<WordPairSample> out;
  for (const Token& t : s.tokens) {
    if (mode == SenseMode::kGivenPredicates && !t.fillpred) continue;
    WordPairSample sample{kVirtualRoot, t.index, PairKind::kSense, kNoLabel};
    if (labels) {
      sample.label = t.fillpred ? detail::sense_label(t, *labels)
                                : static_cast<long>(LabelSpace::kNone);
    }
    out.push_back(sample);
  }
  return out;
}

// (predicate, w) for every word w, the predicate itself included. With
// `candidates`, only those dependents are emitted.
inline std::vector<WordPairSample> role_pairs(const Sentence& s, int predicate,
                                              const LabelSpace* labels = nullptr,
                                              const std::vector<int>* candidates = nullptr) {
  const auto slot = s.predicate_slot(predicate);
  if (!slot) {
    throw ArgumentError("position " + std::to_string(predicate) + " is not a predicate");
  }
  std::vector<int> dependents;
  if (candidates) {
    dependents = *candidates;
  } else {
    for (const Token& t : s.tokens) dependents.push_back(t.index);
  }
  std::vector<WordPairSample> out;
  out.reserve(dependents.size());
  for (int w : dependents) {
    WordPairSample sample{predicate, w, PairKind::kRole, kNoLabel};
    if (labels) {
      const auto& cell = s.at(w).apreds.at(*slot);
      if (cell) {
        auto id = labels->role_id(*cell);
        if (!id) throw DataError("role '" + *cell + "' is not in the label space");
        sample.label = static_cast<long>(*id);
      } else {
        sample.label = static_cast<long>(LabelSpace::kNone);
      }
    }
    out.push_back(sample);
  }
  return out;
}

// Predicate-argument structure of one sentence, independent of columns.
struct PredicateFrame {
  int position = 0;
  std::string sense;                           // suffix, e.g. "01"
  std::map<int, std::string> arguments;        // dependent position -> role

  friend bool operator==(const PredicateFrame&, const PredicateFrame&) = default;
};

struct Annotation {
  std::vector<PredicateFrame> frames;  // by increasing position

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

inline Annotation annotation_of(const Sentence& s) {
  Annotation a;
  for (int p : s.predicate_positions()) {
    PredicateFrame f;
    f.position = p;
    if (s.at(p).pred) f.sense = split_predicate(*s.at(p).pred).second;
    for (const Token& t : s.tokens) {
      if (auto role = s.argument(p, t.index)) f.arguments[t.index] = *role;
    }
    a.frames.push_back(std::move(f));
  }
  return a;
}

// Collects labeled pairs back into frames. Sense pairs labeled None (or with
// a non-sense label) do not open a frame; role pairs labeled None or with a
// non-role label are dropped.
inline Annotation annotation_from_pairs(const std::vector<WordPairSample>& samples,
                                        const LabelSpace& labels) {
  std::map<int, PredicateFrame> frames;
  for (const WordPairSample& p : samples) {
    if (p.kind != PairKind::kSense || p.label < 0) continue;
    if (!labels.is_sense(static_cast<std::size_t>(p.label))) continue;
    PredicateFrame& f = frames[p.dependent];
    f.position = p.dependent;
    f.sense = labels.label(static_cast<std::size_t>(p.label)).name;
  }
  for (const WordPairSample& p : samples) {
    if (p.kind != PairKind::kRole || p.label < 0) continue;
    if (!labels.is_role(static_cast<std::size_t>(p.label))) continue;
    auto it = frames.find(p.head);
    if (it == frames.end()) continue;
    it->second.arguments[p.dependent] = labels.label(static_cast<std::size_t>(p.label)).name;
  }
  Annotation a;
  for (auto& [pos, f] : frames) a.frames.push_back(std::move(f));
  return a;
}

// Lemma part written in front of the sense: the one already in PRED if the
// token carries a value, otherwise the model's input lemma column.
inline std::string predicate_lemma(const Token& t, InputColumns columns) {
  if (t.pred) {
    auto [lemma, sense] = split_predicate(*t.pred);
    return lemma;
  }
  return input_lemma(t, columns);
}

// Clears the semantic columns. With keep_predicates, FILLPRED flags survive
// (the conll2009 setting, where predicates are given).
inline Sentence strip_annotation(const Sentence& s, bool keep_predicates) {
  Sentence out = s;
  std::size_t predicates = 0;
  for (Token& t : out.tokens) {
    if (!keep_predicates) t.fillpred = false;
    t.pred.reset();
    if (t.fillpred) ++predicates;
  }
  for (Token& t : out.tokens) t.apreds.assign(predicates, std::nullopt);
  return out;
}

// Rewrites FILLPRED, PRED and the APRED columns of `s` from `a`.
inline Sentence apply_annotation(const Sentence& s, const Annotation& a,
                                 InputColumns columns = InputColumns::kPredicted) {
  Sentence out = s;
  std::vector<const PredicateFrame*> by_position(s.length(), nullptr);
  for (const PredicateFrame& f : a.frames) {
    if (f.position < 1 || f.position > static_cast<int>(s.size())) {
      throw ArgumentError("frame position outside sentence");
    }
    by_position[f.position] = &f;
  }
  std::vector<const PredicateFrame*> ordered;
  for (Token& t : out.tokens) {
    const PredicateFrame* f = by_position[t.index];
    if (f) {
      t.pred = join_predicate(predicate_lemma(s.at(t.index), columns), f->sense);
      t.fillpred = true;
      ordered.push_back(f);
    } else {
      t.pred.reset();
      t.fillpred = false;
    }
  }
  for (Token& t : out.tokens) {
    t.apreds.assign(ordered.size(), std::nullopt);
    for (std::size_t k = 0; k < ordered.size(); ++k) {
      auto it = ordered[k]->arguments.find(t.index);
      if (it != ordered[k]->arguments.end()) t.apreds[k] = it->second;
    }
  }
  return out;
}

// Every labeled pair of a sentence as used for training: sense pairs plus the
// role pairs of each gold predicate (restricted to k-order candidates when
// pruning is enabled).
inline std::vector<WordPairSample> decompose(const Sentence& s, TaskMode mode,
                                             const LabelSpace& labels,
                                             const PruningConfig& pruning = {}) {
  auto out = sense_pairs(s, sense_mode_for(mode), &labels);
  for (int p : s.predicate_positions()) {
    std::vector<int> candidates;
    if (pruning.enabled) candidates = prune_candidates(s, p, pruning);
    auto roles = role_pairs(s, p, &labels, pruning.enabled ? &candidates : nullptr);
    out.insert(out.end(), roles.begin(), roles.end());
  }
  return out;
}

}  // namespace srl
