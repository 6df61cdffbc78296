#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "srl/conll.hpp"
#include "srl/decomposition.hpp"
#include "srl/errors.hpp"
#include "srl/labels.hpp"

namespace srl {

// Item counts for one category. Rates are percentages. With nothing
// predicted, precision is 0 unless there was also nothing to find (then 100);
// recall is handled symmetrically.
struct Counts {
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  double precision() const {
    if (!predicted) return gold ? 0.0 : 100.0;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(predicted);
  }
  double recall() const {
    if (!gold) return predicted ? 0.0 : 100.0;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(gold);
  }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }

  Counts& operator+=(const Counts& o) {
    correct += o.correct;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
};

struct EvalReport {
  TaskMode mode = TaskMode::kConll2009;
  Counts semantic;    // senses and arguments pooled
  Counts arguments;   // argument labeling only
  Counts predicates;  // sense items; in conll2008 mode, identification + labeling
  // (gold role, predicted role) for argument positions of predicates found in
  // both corpora, None included.
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;

  // Correct senses over gold predicates.
  double disambiguation_precision() const {
    return predicates.gold ? 100.0 * predicates.correct / predicates.gold : 0.0;
  }
};

namespace detail {

inline void check_aligned(const Corpus& gold, const Corpus& predicted) {
  const std::size_t n = std::min(gold.size(), predicted.size());
  for (std::size_t i = 0; i < n; ++i) {
    bool same = gold[i].size() == predicted[i].size();
    for (std::size_t t = 0; same && t < gold[i].size(); ++t) {
      same = gold[i].tokens[t].form == predicted[i].tokens[t].form;
    }
    if (!same) {
      throw AlignmentError("corpora diverge at sentence " + std::to_string(i + 1));
    }
  }
  if (gold.size() != predicted.size()) {
    throw AlignmentError("corpora diverge at sentence " + std::to_string(n + 1) + " (gold has " +
                         std::to_string(gold.size()) + " sentences, prediction has " +
                         std::to_string(predicted.size()) + ")");
  }
}

// conll2009 compares the sense suffix (predicates are given, so the lemma is
// fixed); conll2008 compares the full PRED value.
inline std::string sense_key(const Token& t, TaskMode mode) {
  if (!t.pred) return "";
  return mode == TaskMode::kConll2009 ? split_predicate(*t.pred).second : *t.pred;
}

template <typename T>
Counts count_items(const std::set<T>& gold, const std::set<T>& predicted) {
  Counts c;
  c.gold = gold.size();
  c.predicted = predicted.size();
  for (const T& item : predicted) c.correct += gold.count(item);
  return c;
}

}  // namespace detail

inline EvalReport score_semantic(const Corpus& gold, const Corpus& predicted,
                                 TaskMode mode = TaskMode::kConll2009) {
  detail::check_aligned(gold, predicted);
  EvalReport report;
  report.mode = mode;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    using SenseItem = std::pair<int, std::string>;
    using ArgItem = std::tuple<int, int, std::string>;
    std::set<SenseItem> gold_senses, pred_senses;
    std::set<ArgItem> gold_args, pred_args;
    auto collect = [mode](const Sentence& s, std::set<SenseItem>& senses, std::set<ArgItem>& args) {
      for (int p : s.predicate_positions()) {
        senses.emplace(p, detail::sense_key(s.at(p), mode));
        for (const Token& t : s.tokens) {
          if (auto role = s.argument(p, t.index)) args.emplace(p, t.index, *role);
        }
      }
    };
    collect(gold[i], gold_senses, gold_args);
    collect(predicted[i], pred_senses, pred_args);
    const Counts senses = detail::count_items(gold_senses, pred_senses);
    const Counts args = detail::count_items(gold_args, pred_args);
    report.predicates += senses;
    report.arguments += args;
    report.semantic += senses;
    report.semantic += args;

    const auto gold_preds = gold[i].predicate_positions();
    for (int p : gold_preds) {
      if (!predicted[i].predicate_slot(p)) continue;
      for (const Token& t : gold[i].tokens) {
        const std::string g = gold[i].argument(p, t.index).value_or(LabelSpace::kNoneName);
        const std::string q = predicted[i].argument(p, t.index).value_or(LabelSpace::kNoneName);
        ++report.confusion[{g, q}];
      }
    }
  }
  return report;
}

// Predicate identification and labeling: an item is (sentence, position,
// full PRED value).
inline Counts score_predicates_2008(const Corpus& gold, const Corpus& predicted) {
  return score_semantic(gold, predicted, TaskMode::kConll2008).predicates;
}

inline std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

namespace detail {

inline std::string counts_line(const char* name, const Counts& c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-26s P %6.2f  R %6.2f  F1 %6.2f  (correct %zu, predicted %zu, gold %zu)\n",
                name, c.precision(), c.recall(), c.f1(), c.correct, c.predicted, c.gold);
  return buf;
}

inline void counts_tsv(std::string& out, const std::string& prefix, const Counts& c) {
  out += prefix + "_p\t" + format_percent(c.precision()) + "\n";
  out += prefix + "_r\t" + format_percent(c.recall()) + "\n";
  out += prefix + "_f1\t" + format_percent(c.f1()) + "\n";
  out += prefix + "_correct\t" + std::to_string(c.correct) + "\n";
  out += prefix + "_predicted\t" + std::to_string(c.predicted) + "\n";
  out += prefix + "_gold\t" + std::to_string(c.gold) + "\n";
}

}  // namespace detail

inline std::string format_report(const EvalReport& r) {
  std::string out;
  out += detail::counts_line("Semantic labeling", r.semantic);
  out += detail::counts_line("Argument labeling", r.arguments);
  if (r.mode == TaskMode::kConll2009) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-26s P %6.2f\n", "Predicate disambiguation",
                  r.disambiguation_precision());
    out += buf;
  } else {
    out += detail::counts_line("Predicate labeling", r.predicates);
  }
  return out;
}

// key<TAB>value records.
inline std::string format_report_tsv(const EvalReport& r) {
  std::string out = std::string("mode\t") + task_mode_name(r.mode) + "\n";
  detail::counts_tsv(out, "semantic", r.semantic);
  detail::counts_tsv(out, "argument", r.arguments);
  if (r.mode == TaskMode::kConll2009) {
    out += "pd_precision\t" + format_percent(r.disambiguation_precision()) + "\n";
  } else {
    detail::counts_tsv(out, "predicate", r.predicates);
  }
  return out;
}

// One row per configuration, sorted by name: argument-labeling P/R/F1 and
// predicate-disambiguation precision.
inline std::string ablation_report(std::vector<std::pair<std::string, EvalReport>> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t width = 6;
  for (const auto& [name, r] : rows) width = std::max(width, name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s | %6s %6s %6s | %6s\n", static_cast<int>(width), "System",
                "AL-P", "AL-R", "AL-F1", "PD-P");
  out += buf;
  out += std::string(width, '-') + "-+-" + std::string(20, '-') + "-+-" + std::string(6, '-') + "\n";
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof buf, "%-*s | %6.2f %6.2f %6.2f | %6.2f\n", static_cast<int>(width),
                  name.c_str(), r.arguments.precision(), r.arguments.recall(), r.arguments.f1(),
                  r.disambiguation_precision());
    out += buf;
  }
  return out;
}

}  // namespace srl
