#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "srl/conll.hpp"
#include "srl/errors.hpp"

namespace srl {

// Dense string ids with reserved entries for padding, unknown strings and the
// virtual root.
class StringIds {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kRoot = 2;
  static constexpr const char* kPadSymbol = "<PAD>";
  static constexpr const char* kUnkSymbol = "<UNK>";
  static constexpr const char* kRootSymbol = "<VR>";

  StringIds() {
    add(kPadSymbol);
    add(kUnkSymbol);
    add(kRootSymbol);
  }

  // Rebuilds from an explicit id order; the reserved symbols must come first.
  explicit StringIds(const std::vector<std::string>& strings) {
    if (strings.size() < 3 || strings[kPad] != kPadSymbol || strings[kUnk] != kUnkSymbol ||
        strings[kRoot] != kRootSymbol) {
      throw ArgumentError("string table is missing its reserved symbols");
    }
    for (const std::string& s : strings) add(s);
  }

  std::size_t add(const std::string& s) {
    auto [it, inserted] = ids_.emplace(s, strings_.size());
    if (inserted) strings_.push_back(s);
    return it->second;
  }

  std::size_t id(const std::string& s) const {
    auto it = ids_.find(s);
    return it == ids_.end() ? kUnk : it->second;
  }

  bool contains(const std::string& s) const { return ids_.count(s) > 0; }
  std::size_t size() const { return strings_.size(); }
  const std::string& string(std::size_t id) const { return strings_.at(id); }
  const std::vector<std::string>& strings() const { return strings_; }

  friend bool operator==(const StringIds& a, const StringIds& b) {
    return a.strings_ == b.strings_;
  }

 private:
  std::vector<std::string> strings_;
  std::unordered_map<std::string, std::size_t> ids_;
};

// Which lemma/POS columns feed the model.
enum class InputColumns { kPredicted, kGold };

inline const std::string& input_lemma(const Token& t, InputColumns c) {
  return c == InputColumns::kGold ? t.lemma : t.plemma;
}

inline const std::string& input_pos(const Token& t, InputColumns c) {
  return c == InputColumns::kGold ? t.pos : t.ppos;
}

struct Vocabulary {
  StringIds forms;
  StringIds lemmas;
  StringIds pos;

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

// Forms and lemmas seen fewer than min_count times map to UNK; every POS tag
// is kept. Strings are added in order of first occurrence.
inline Vocabulary build_vocab(const Corpus& corpus, std::size_t min_count,
                              InputColumns columns = InputColumns::kPredicted) {
  if (min_count < 1) throw ArgumentError("min_count must be at least 1");
  std::map<std::string, std::size_t> form_counts, lemma_counts;
  std::vector<std::string> form_order, lemma_order;
  Vocabulary vocab;
  for (const Sentence& s : corpus) {
    for (const Token& t : s.tokens) {
      if (form_counts[t.form]++ == 0) form_order.push_back(t.form);
      const std::string& lemma = input_lemma(t, columns);
      if (lemma_counts[lemma]++ == 0) lemma_order.push_back(lemma);
      vocab.pos.add(input_pos(t, columns));
    }
  }
  for (const std::string& f : form_order) {
    if (form_counts[f] >= min_count) vocab.forms.add(f);
  }
  for (const std::string& l : lemma_order) {
    if (lemma_counts[l] >= min_count) vocab.lemmas.add(l);
  }
  return vocab;
}

}  // namespace srl
