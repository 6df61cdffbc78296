#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "srl/conll.hpp"
#include "srl/errors.hpp"
#include "srl/vocab.hpp"

namespace srl {

enum class LabelKind { kNone, kRole, kSense };

struct Label {
  std::string name;
  LabelKind kind;

  friend bool operator==(const Label&, const Label&) = default;
};

// Splits a PRED value such as "prevent.01" into its lemma part and sense
// suffix. A value without a dot is taken as a bare sense.
inline std::pair<std::string, std::string> split_predicate(const std::string& pred) {
  const auto dot = pred.rfind('.');
  if (dot == std::string::npos) return {"", pred};
  return {pred.substr(0, dot), pred.substr(dot + 1)};
}

inline std::string join_predicate(const std::string& lemma, const std::string& sense) {
  return lemma.empty() ? sense : lemma + "." + sense;
}

// Unified inventory: None (id 0), role labels and sense labels. Roles and
// senses live in separate namespaces, so a role spelled "01" and the sense
// "01" get distinct ids.
class LabelSpace {
 public:
  static constexpr std::size_t kNone = 0;
  static constexpr const char* kNoneName = "None";

  LabelSpace() { labels_.push_back({kNoneName, LabelKind::kNone}); }

  explicit LabelSpace(const std::vector<Label>& labels) : LabelSpace() {
    if (labels.empty() || labels.front().kind != LabelKind::kNone) {
      throw ArgumentError("label list must start with None");
    }
    for (std::size_t i = 1; i < labels.size(); ++i) {
      if (labels[i].kind == LabelKind::kRole) add_role(labels[i].name);
      else if (labels[i].kind == LabelKind::kSense) add_sense(labels[i].name);
      else throw ArgumentError("None may appear only once");
    }
  }

  std::size_t add_role(const std::string& name) { return add(roles_, name, LabelKind::kRole); }
  std::size_t add_sense(const std::string& name) { return add(senses_, name, LabelKind::kSense); }

  std::optional<std::size_t> role_id(const std::string& name) const { return find(roles_, name); }
  std::optional<std::size_t> sense_id(const std::string& name) const {
    return find(senses_, name);
  }

  std::size_t size() const { return labels_.size(); }
  const Label& label(std::size_t id) const { return labels_.at(id); }
  const std::vector<Label>& labels() const { return labels_; }

  bool is_sense(std::size_t id) const { return labels_.at(id).kind == LabelKind::kSense; }
  bool is_role(std::size_t id) const { return labels_.at(id).kind == LabelKind::kRole; }

  // Permitted-label masks for decoding; both include None.
  std::vector<bool> sense_mask() const { return mask(LabelKind::kSense); }
  std::vector<bool> role_mask() const { return mask(LabelKind::kRole); }

  friend bool operator==(const LabelSpace& a, const LabelSpace& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::size_t add(std::map<std::string, std::size_t>& table, const std::string& name,
                  LabelKind kind) {
    auto [it, inserted] = table.emplace(name, labels_.size());
    if (inserted) labels_.push_back({name, kind});
    return it->second;
  }

  static std::optional<std::size_t> find(const std::map<std::string, std::size_t>& table,
                                         const std::string& name) {
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
  }

  std::vector<bool> mask(LabelKind kind) const {
    std::vector<bool> out(labels_.size(), false);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      out[i] = labels_[i].kind == kind || labels_[i].kind == LabelKind::kNone;
    }
    return out;
  }

  std::vector<Label> labels_;
  std::map<std::string, std::size_t> roles_;
  std::map<std::string, std::size_t> senses_;
};

// None, then the observed roles in sorted order, then the observed sense
// suffixes in sorted order.
inline LabelSpace build_label_space(const Corpus& corpus) {
  std::set<std::string> roles, senses;
  for (const Sentence& s : corpus) {
    for (const Token& t : s.tokens) {
      if (t.pred) senses.insert(split_predicate(*t.pred).second);
      for (const auto& a : t.apreds) {
        if (a) roles.insert(*a);
      }
    }
  }
  LabelSpace space;
  for (const auto& r : roles) space.add_role(r);
  for (const auto& s : senses) space.add_sense(s);
  return space;
}

// Which lemmas were seen as predicates in training, and the sense to fall
// back to for lemmas that never were.
struct SenseLexicon {
  std::set<std::string> predicate_lemmas;
  std::string default_sense = "01";

  bool knows(const std::string& lemma) const { return predicate_lemmas.count(lemma) > 0; }

  friend bool operator==(const SenseLexicon&, const SenseLexicon&) = default;
};

inline SenseLexicon build_sense_lexicon(const Corpus& corpus,
                                        InputColumns columns = InputColumns::kPredicted) {
  SenseLexicon lexicon;
  std::map<std::string, std::size_t> counts;
  for (const Sentence& s : corpus) {
    for (const Token& t : s.tokens) {
      if (!t.fillpred || !t.pred) continue;
      lexicon.predicate_lemmas.insert(input_lemma(t, columns));
      ++counts[split_predicate(*t.pred).second];
    }
  }
  std::size_t best = 0;
  for (const auto& [sense, n] : counts) {
    if (n > best) {
      best = n;
      lexicon.default_sense = sense;
    }
  }
  return lexicon;
}

}  // namespace srl
