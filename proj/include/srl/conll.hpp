#pragma once

#include <charconv>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "srl/errors.hpp"

namespace srl {

// CoNLL shared-task column layouts.
//
// conll2009 (14 fixed columns, then one APRED per predicate):
//   ID FORM LEMMA PLEMMA POS PPOS FEAT PFEAT HEAD PHEAD DEPREL PDEPREL
//   FILLPRED PRED APRED...
//
// conll2008 (10 fixed columns, then PRED and one ARG per predicate):
//   ID FORM LEMMA GPOS PPOS SPLIT_FORM SPLIT_LEMMA PPOSS HEAD DEPREL PRED ARG...
// mapped as lemma=LEMMA, plemma=SPLIT_LEMMA, pos=GPOS, ppos=PPOSS. There is no
// FILLPRED column; a token is a predicate iff PRED is not "_". There is no
// predicted head column either, so phead is unavailable.
enum class Format { kConll2009, kConll2008 };

inline const char* format_name(Format f) {
  return f == Format::kConll2009 ? "conll2009" : "conll2008";
}

inline Format parse_format(std::string_view name) {
  if (name == "conll2009") return Format::kConll2009;
  if (name == "conll2008") return Format::kConll2008;
  throw ConfigError("unknown format '" + std::string(name) +
                    "' (expected conll2009 or conll2008)");
}

namespace conll_layout {
struct Columns {
  std::size_t fixed;  // columns before the first APRED
  std::size_t lemma, plemma, pos, ppos, head, deprel;
  std::optional<std::size_t> phead, pdeprel, fillpred;
  std::size_t pred;
};

inline Columns of(Format f) {
  if (f == Format::kConll2009) return {14, 2, 3, 4, 5, 8, 10, 9, 11, 12, 13};
  return {11, 2, 6, 3, 7, 8, 9, std::nullopt, std::nullopt, std::nullopt, 10};
}
}  // namespace conll_layout

inline constexpr int kNoHead = -1;

struct Token {
  int index = 0;  // 1-based
  std::string form;
  std::string lemma;
  std::string plemma;
  std::string pos;
  std::string ppos;
  int head = kNoHead;
  int phead = kNoHead;
  std::string deprel;
  std::string pdeprel;
  bool fillpred = false;
  std::optional<std::string> pred;
  std::vector<std::optional<std::string>> apreds;
  // Fixed columns verbatim; unowned columns are written back from here.
  std::vector<std::string> columns;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;

  // Number of words, excluding the virtual root.
  std::size_t size() const { return tokens.size(); }
  // Length including the virtual root at position 0.
  std::size_t length() const { return tokens.size() + 1; }

  const Token& at(int position) const { return tokens.at(position - 1); }
  Token& at(int position) { return tokens.at(position - 1); }

  // Positions (1-based) of tokens flagged as predicates, in order.
  std::vector<int> predicate_positions() const {
    std::vector<int> out;
    for (const Token& t : tokens) {
      if (t.fillpred) out.push_back(t.index);
    }
    return out;
  }

  // Column (0-based APRED slot) carrying the arguments of the predicate at
  // `position`, or nullopt if it is not a predicate.
  std::optional<std::size_t> predicate_slot(int position) const {
    std::size_t slot = 0;
    for (const Token& t : tokens) {
      if (t.index == position) {
        if (!t.fillpred) return std::nullopt;
        return slot;
      }
      if (t.fillpred) ++slot;
    }
    return std::nullopt;
  }

  // APRED cell for (predicate position, argument position).
  std::optional<std::string> argument(int predicate, int argument) const {
    auto slot = predicate_slot(predicate);
    if (!slot) return std::nullopt;
    const Token& t = at(argument);
    if (*slot >= t.apreds.size()) return std::nullopt;
    return t.apreds[*slot];
  }

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

using Corpus = std::vector<Sentence>;

namespace detail {

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  const bool tabbed = line.find('\t') != std::string_view::npos;
  std::size_t i = 0;
  while (i <= line.size()) {
    if (tabbed) {
      std::size_t j = line.find('\t', i);
      if (j == std::string_view::npos) j = line.size();
      out.emplace_back(line.substr(i, j - i));
      i = j + 1;
    } else {
      while (i < line.size() && (line[i] == ' ')) ++i;
      if (i >= line.size()) break;
      std::size_t j = line.find(' ', i);
      if (j == std::string_view::npos) j = line.size();
      out.emplace_back(line.substr(i, j - i));
      i = j + 1;
    }
  }
  return out;
}

inline bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

inline std::optional<int> to_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline int parse_head(const std::string& field, std::size_t line) {
  if (field == "_") return kNoHead;
  auto v = to_int(field);
  if (!v || *v < 0) throw ParseError(line, "head '" + field + "' is not a position");
  return *v;
}

inline std::optional<std::string> cell(const std::string& field) {
  if (field == "_") return std::nullopt;
  return field;
}

struct PendingRow {
  std::vector<std::string> fields;
  std::size_t line;
};

inline Sentence build_sentence(const std::vector<PendingRow>& rows, Format format) {
  const auto layout = conll_layout::of(format);
  Sentence sentence;
  const std::size_t width = rows.front().fields.size();
  for (const PendingRow& row : rows) {
    if (row.fields.size() != width) {
      throw ParseError(row.line, "expected " + std::to_string(width) +
                                     " columns as on line " +
                                     std::to_string(rows.front().line) + ", found " +
                                     std::to_string(row.fields.size()));
    }
    if (row.fields.size() < layout.fixed) {
      throw ParseError(row.line, std::string(format_name(format)) + " rows need at least " +
                                     std::to_string(layout.fixed) + " columns, found " +
                                     std::to_string(row.fields.size()));
    }
  }
  std::size_t predicates = 0;
  for (const PendingRow& row : rows) {
    const auto& f = row.fields;
    Token t;
    auto id = to_int(f[0]);
    if (!id) throw ParseError(row.line, "ID '" + f[0] + "' is not an integer");
    if (*id != static_cast<int>(sentence.tokens.size()) + 1) {
      throw ParseError(row.line, "ID " + f[0] + " out of sequence");
    }
    t.index = *id;
    t.form = f[1];
    t.lemma = f[layout.lemma];
    t.plemma = f[layout.plemma];
    t.pos = f[layout.pos];
    t.ppos = f[layout.ppos];
    t.head = parse_head(f[layout.head], row.line);
    t.deprel = f[layout.deprel];
    if (layout.phead) t.phead = parse_head(f[*layout.phead], row.line);
    if (layout.pdeprel) t.pdeprel = f[*layout.pdeprel];
    t.pred = cell(f[layout.pred]);
    if (layout.fillpred) {
      const std::string& flag = f[*layout.fillpred];
      if (flag != "Y" && flag != "_") {
        throw ParseError(row.line, "FILLPRED must be 'Y' or '_', found '" + flag + "'");
      }
      t.fillpred = flag == "Y";
      if (t.pred && !t.fillpred) {
        throw ParseError(row.line, "PRED '" + *t.pred + "' on a token without FILLPRED");
      }
    } else {
      t.fillpred = t.pred.has_value();
    }
    if (t.fillpred) ++predicates;
    t.columns.assign(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(layout.fixed));
    for (std::size_t c = layout.fixed; c < f.size(); ++c) t.apreds.push_back(cell(f[c]));
    sentence.tokens.push_back(std::move(t));
  }
  // Unannotated input (e.g. a blind test file) may omit the APRED columns.
  const std::size_t apreds = width - layout.fixed;
  if (apreds != predicates) {
    if (apreds != 0) {
      throw ParseError(rows.front().line,
                       "sentence has " + std::to_string(predicates) + " predicates but " +
                           std::to_string(apreds) + " argument columns");
    }
    for (Token& t : sentence.tokens) t.apreds.assign(predicates, std::nullopt);
  }
  return sentence;
}

}  // namespace detail

// Reads blank-line separated sentences. Accepts LF or CRLF line endings and
// tab- or space-separated columns.
inline Corpus parse_conll(std::istream& in, Format format) {
  Corpus corpus;
  std::vector<detail::PendingRow> rows;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!rows.empty()) corpus.push_back(detail::build_sentence(rows, format));
    rows.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::is_blank(line)) {
      flush();
      continue;
    }
    rows.push_back({detail::split_fields(line), line_no});
  }
  flush();
  return corpus;
}

inline Corpus parse_conll(const std::string& text, Format format) {
  std::istringstream in(text);
  return parse_conll(in, format);
}

// Writes tab-separated rows with LF endings and a blank line after every
// sentence. Only FILLPRED, PRED and the APRED columns are taken from the typed
// fields; every other column is copied from Token::columns.
inline void write_conll(std::ostream& out, const Corpus& corpus, Format format) {
  const auto layout = conll_layout::of(format);
  for (const Sentence& sentence : corpus) {
    for (const Token& t : sentence.tokens) {
      std::vector<std::string> fields = t.columns;
      if (fields.size() < layout.fixed) {
        // Tokens built in memory rather than parsed.
        fields.resize(layout.fixed, "_");
        fields[0] = std::to_string(t.index);
        fields[1] = t.form;
      }
      if (layout.fillpred) fields[*layout.fillpred] = t.fillpred ? "Y" : "_";
      fields[layout.pred] = t.pred.value_or("_");
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << '\t';
        out << fields[i];
      }
      for (const auto& a : t.apreds) out << '\t' << a.value_or("_");
      out << '\n';
    }
    out << '\n';
  }
}

inline std::string write_conll(const Corpus& corpus, Format format) {
  std::ostringstream out;
  write_conll(out, corpus, format);
  return out.str();
}

}  // namespace srl
