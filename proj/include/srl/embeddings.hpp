#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "srl/errors.hpp"

namespace srl {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Pre-trained vectors in the "key v1 ... vd" text format. Keys and lookups are
// lowercased; absent keys get the all-zero out-of-vocabulary vector.
struct EmbeddingTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
  std::vector<double> oov;
  std::vector<std::string> warnings;

  bool contains(const std::string& key) const { return vectors.count(lowercase(key)) > 0; }

  const std::vector<double>& lookup(const std::string& key) const {
    auto it = vectors.find(lowercase(key));
    return it == vectors.end() ? oov : it->second;
  }
};

inline EmbeddingTable load_embeddings(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size()) {
        throw ParseError(line_no, "'" + tok + "' is not a number");
      }
      values.push_back(v);
    }
    if (table.dim == 0) {
      if (values.empty()) throw ParseError(line_no, "embedding line without values");
      table.dim = values.size();
      table.oov.assign(table.dim, 0.0);
    } else if (values.size() != table.dim) {
      throw ParseError(line_no, "expected " + std::to_string(table.dim) + " values, found " +
                                    std::to_string(values.size()));
    }
    key = lowercase(key);
    if (table.vectors.count(key)) {
      table.warnings.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key +
                               "', keeping the last vector");
    }
    table.vectors[key] = std::move(values);
  }
  return table;
}

}  // namespace srl
