#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rawcode/baselines.hpp"
#include "rawcode/coding.hpp"

namespace rawcode {

/// Reads whitespace/newline separated unsigned decimals, each below
/// `alphabet`. Errors name the origin and the line.
inline SymbolStream read_symbol_stream(std::istream& in, size_t alphabet, const std::string& origin = "<stream>") {
  std::vector<Symbol> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (tok.find_first_not_of("0123456789") != std::string::npos || tok.size() > 9)
        throw InputError(origin + ":" + std::to_string(lineno) + ": '" + tok + "' is not an unsigned decimal symbol");
      const unsigned long v = std::stoul(tok);
      if (v >= alphabet)
        throw InputError(origin + ":" + std::to_string(lineno) + ": symbol " + tok + " outside alphabet of size " +
                         std::to_string(alphabet));
      out.push_back(static_cast<Symbol>(v));
    }
  }
  return SymbolStream(alphabet, std::move(out));
}

inline SymbolStream read_symbol_stream_file(const std::string& path, size_t alphabet) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open stream file '" + path + "'");
  return read_symbol_stream(in, alphabet, path);
}

/// One symbol per line.
inline void write_symbol_stream(std::ostream& out, const SymbolStream& s) {
  std::string buf;
  buf.reserve(s.size() * 2);
  for (Symbol v : s.symbols) {
    buf += std::to_string(v);
    buf += '\n';
  }
  out << buf;
}

/// Rows of whitespace-separated rationals; blank lines and '#' comments
/// ignored.
inline RationalMatrix read_rational_rows(std::istream& in, const std::string& origin = "<matrix>") {
  RationalMatrix rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    std::vector<Rational> row;
    while (ls >> tok) {
      try {
        row.push_back(parse_rational(tok));
      } catch (const InputError& e) {
        throw InputError(origin + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

inline StochasticMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open matrix file '" + path + "'");
  try {
    return StochasticMatrix(read_rational_rows(in, path));
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_matrix(std::ostream& out, const StochasticMatrix& m) {
  for (const auto& row : m.rows()) {
    for (size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << to_string(row[j]);
    out << '\n';
  }
}

/// "lo:hi,lo:hi,..." -> union of [lo,hi) pieces; "empty" for the empty set.
inline IntervalSet parse_interval_set(const std::string& text) {
  if (text == "empty" || text.empty()) return IntervalSet();
  std::vector<Interval> parts;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    const auto colon = piece.find(':');
    if (colon == std::string::npos) throw InputError("interval '" + piece + "' must look like lo:hi");
    Interval iv{parse_rational(piece.substr(0, colon)), parse_rational(piece.substr(colon + 1))};
    if (iv.lo < 0 || iv.hi > 1 || !(iv.lo < iv.hi))
      throw InputError("interval '" + piece + "' must satisfy 0 <= lo < hi <= 1");
    parts.push_back(std::move(iv));
  }
  return IntervalSet(std::move(parts));
}

/// Map file: one branch per line, "lo hi slope offset" (rationals).
inline IntervalMap read_map_file(const std::string& path, Backend backend = Backend::rational) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open map file '" + path + "'");
  std::vector<Branch> branches;
  for (const auto& row : read_rational_rows(in, path)) {
    if (row.size() != 4) throw InputError(path + ": each branch needs 'lo hi slope offset'");
    branches.push_back(Branch{{row[0], row[1]}, row[2], row[3]});
  }
  try {
    return IntervalMap(path, std::move(branches), backend);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

} // namespace rawcode
