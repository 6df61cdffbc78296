#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "srl/conll.hpp"
#include "srl/errors.hpp"

namespace srl {

enum class HeadSource { kGold, kPredicted };

inline HeadSource parse_head_source(const std::string& name) {
  if (name == "gold") return HeadSource::kGold;
  if (name == "pred" || name == "predicted") return HeadSource::kPredicted;
  throw ConfigError("unknown head source '" + name + "' (expected gold or pred)");
}

inline const char* head_source_name(HeadSource s) {
  return s == HeadSource::kGold ? "gold" : "pred";
}

struct PruningConfig {
  bool enabled = false;
  int k = 10;
  HeadSource heads = HeadSource::kPredicted;

  friend bool operator==(const PruningConfig&, const PruningConfig&) = default;
};

// Syntactic heads indexed by position (entry 0 unused), validated to form a
// single tree rooted at the virtual root.
inline std::vector<int> syntactic_heads(const Sentence& s, HeadSource source) {
  const int n = static_cast<int>(s.size());
  std::vector<int> heads(n + 1, 0);
  for (const Token& t : s.tokens) {
    const int h = source == HeadSource::kGold ? t.head : t.phead;
    if (h == kNoHead) {
      throw DataError(std::string("token ") + std::to_string(t.index) + " has no " +
                      (source == HeadSource::kGold ? "HEAD" : "PHEAD") + " value");
    }
    if (h > n) {
      throw DataError("head " + std::to_string(h) + " of token " + std::to_string(t.index) +
                      " is outside the sentence");
    }
    heads[t.index] = h;
  }
  for (int w = 1; w <= n; ++w) {
    int cur = w;
    for (int steps = 0; cur != 0; ++steps) {
      if (steps > n) {
        throw DataError("cyclic head structure through token " + std::to_string(w));
      }
      cur = heads[cur];
    }
  }
  return heads;
}

// Largest depth of any word, the topmost words having depth 0.
inline int tree_height(const Sentence& s, HeadSource source) {
  const auto heads = syntactic_heads(s, source);
  int height = 0;
  for (int w = 1; w < static_cast<int>(heads.size()); ++w) {
    int depth = 0;
    for (int cur = heads[w]; cur != 0; cur = heads[cur]) ++depth;
    height = std::max(height, depth);
  }
  return height;
}

// k-order argument candidates of `predicate`: every word within k levels
// below the predicate or below one of its syntactic ancestors. The predicate
// and its ancestors are always kept. Returned in increasing order.
inline std::vector<int> prune_candidates(const Sentence& s, int predicate, int k,
                                         HeadSource source) {
  if (k < 0) throw ArgumentError("pruning order must be non-negative");
  const auto heads = syntactic_heads(s, source);
  const int n = static_cast<int>(s.size());
  if (predicate < 1 || predicate > n) throw ArgumentError("predicate outside sentence");
  std::vector<std::vector<int>> children(n + 1);
  for (int w = 1; w <= n; ++w) children[heads[w]].push_back(w);

  std::vector<bool> keep(n + 1, false);
  for (int anchor = predicate; anchor != 0; anchor = heads[anchor]) {
    std::vector<int> frontier{anchor};
    for (int depth = 0; depth <= k && !frontier.empty(); ++depth) {
      std::vector<int> next;
      for (int w : frontier) {
        keep[w] = true;
        next.insert(next.end(), children[w].begin(), children[w].end());
      }
      frontier = std::move(next);
    }
  }
  std::vector<int> out;
  for (int w = 1; w <= n; ++w) {
    if (keep[w]) out.push_back(w);
  }
  return out;
}

inline std::vector<int> prune_candidates(const Sentence& s, int predicate,
                                         const PruningConfig& cfg) {
  return prune_candidates(s, predicate, cfg.k, cfg.heads);
}

struct PruningStats {
  std::size_t true_arguments = 0;
  std::size_t retained_arguments = 0;
  std::size_t candidates = 0;
  std::size_t pruned = 0;

  // Both rates are 1 and 0 respectively on a corpus without arguments.
  double coverage() const {
    return true_arguments ? static_cast<double>(retained_arguments) / true_arguments : 1.0;
  }
  double reduction() const {
    return candidates ? static_cast<double>(pruned) / candidates : 0.0;
  }
};

inline PruningStats pruning_stats(const Corpus& corpus, int k, HeadSource source) {
  PruningStats stats;
  for (const Sentence& s : corpus) {
    for (int p : s.predicate_positions()) {
      const auto retained = prune_candidates(s, p, k, source);
      std::vector<bool> keep(s.length(), false);
      for (int w : retained) keep[w] = true;
      stats.candidates += s.size();
      stats.pruned += s.size() - retained.size();
      for (const Token& t : s.tokens) {
        if (!s.argument(p, t.index)) continue;
        ++stats.true_arguments;
        if (keep[t.index]) ++stats.retained_arguments;
      }
    }
  }
  return stats;
}

}  // namespace srl
