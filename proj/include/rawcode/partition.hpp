#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rawcode/interval_set.hpp"

namespace rawcode {

using Symbol = std::uint32_t;

/// Finite partition of [0,1) into consecutive half-open intervals
/// X_0 .. X_{M-1}, stored as the interior cut points.
class Partition {
public:
  /// `cuts` must be strictly increasing inside (0,1); an empty list is the
  /// trivial one-element partition.
  explicit Partition(std::vector<Rational> cuts, std::string name = "")
      : cuts_(std::move(cuts)), name_(std::move(name)) {
    Rational prev = 0;
    for (const auto& c : cuts_) {
      if (!(prev < c)) throw InputError("partition elements must have positive length (cut " + to_string(c) + ")");
      prev = c;
    }
    if (!(prev < 1)) throw InputError("partition elements must have positive length (last cut " + to_string(prev) + ")");
  }

  /// Builds from an explicit element list; the intervals must be sorted and
  /// tile [0,1).
  static Partition from_intervals(const std::vector<Interval>& elements, std::string name = "") {
    if (elements.empty()) throw InputError("partition has no elements");
    std::vector<Rational> cuts;
    Rational cursor = 0;
    for (size_t i = 0; i < elements.size(); ++i) {
      const Interval& e = elements[i];
      if (e.lo != cursor)
        throw InputError("partition element " + std::to_string(i + 1) + " " + to_string(e) + " does not continue at " +
                         to_string(cursor));
      if (e.empty()) throw InputError("partition element " + std::to_string(i + 1) + " has zero length");
      if (i > 0) cuts.push_back(e.lo);
      cursor = e.hi;
    }
    if (cursor != 1) throw InputError("partition does not reach 1");
    return Partition(std::move(cuts), std::move(name));
  }

  static Partition binary() { return Partition({make_rational(1, 2)}, "binary"); }

  /// 2^K equal bins.
  static Partition dyadic(unsigned k) {
    if (k > 24) throw InputError("dyadic:K supports K <= 24");
    std::vector<Rational> cuts;
    const unsigned long n = 1UL << k;
    for (unsigned long i = 1; i < n; ++i) cuts.push_back(make_rational(static_cast<long>(i), n));
    return Partition(std::move(cuts), "dyadic:" + std::to_string(k));
  }

  /// Element [1/2 - 2^-k, 1/2 + 2^-k) straddling 1/2, the rest of [0,1)
  /// split into bins of width 2^-k (dyadic:k with its two central bins
  /// merged).
  static Partition bridge(unsigned k) {
    if (k == 0) throw InputError("bridge:k needs k >= 1 so that the straddling element fits in [0,1)");
    if (k > 24) throw InputError("bridge:k supports k <= 24");
    std::vector<Rational> cuts;
    const unsigned long n = 1UL << k;
    for (unsigned long i = 1; i < n; ++i)
      if (2 * i != n) cuts.push_back(make_rational(static_cast<long>(i), n));
    return Partition(std::move(cuts), "bridge:" + std::to_string(k));
  }

  /// "a/b c/d" per line; blank lines and '#' comments ignored.
  static Partition parse(std::istream& in, const std::string& origin = "<partition>") {
    std::vector<Interval> elements;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      std::istringstream ls(line);
      std::string a, b, extra;
      if (!(ls >> a)) continue;
      if (!(ls >> b) || (ls >> extra))
        throw InputError(origin + ":" + std::to_string(lineno) + ": expected two rational endpoints");
      try {
        elements.push_back({parse_rational(a), parse_rational(b)});
      } catch (const InputError& e) {
        throw InputError(origin + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    try {
      return from_intervals(elements, origin);
    } catch (const InputError& e) {
      throw InputError(origin + ": " + e.what());
    }
  }

  /// "binary", "dyadic:K", "bridge:k" or "@path".
  static Partition from_spec(const std::string& spec) {
    auto number_after = [&](size_t pos) {
      const std::string digits = spec.substr(pos);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 6)
        throw InputError("malformed partition spec '" + spec + "'");
      return static_cast<unsigned>(std::stoul(digits));
    };
    if (spec == "binary") return binary();
    if (spec.rfind("dyadic:", 0) == 0) return dyadic(number_after(7));
    if (spec.rfind("bridge:", 0) == 0) return bridge(number_after(7));
    if (!spec.empty() && spec[0] == '@') {
      std::ifstream in(spec.substr(1));
      if (!in) throw InputError("cannot open partition file '" + spec.substr(1) + "'");
      return parse(in, spec.substr(1));
    }
    throw InputError("unknown partition '" + spec + "' (binary | dyadic:K | bridge:k | @file)");
  }

  size_t size() const noexcept { return cuts_.size() + 1; }
  const std::vector<Rational>& cuts() const noexcept { return cuts_; }
  const std::string& name() const noexcept { return name_; }

  Interval element(size_t i) const {
    if (i >= size()) throw DomainError("partition element index out of range");
    return {i == 0 ? Rational(0) : cuts_[i - 1], i == cuts_.size() ? Rational(1) : cuts_[i]};
  }

  std::vector<Interval> elements() const {
    std::vector<Interval> out;
    for (size_t i = 0; i < size(); ++i) out.push_back(element(i));
    return out;
  }

  /// Index of the element containing x.
  Symbol locate(const Rational& x) const {
    if (x < 0 || x >= 1) throw DomainError("point " + to_string(x) + " outside [0,1)");
    return static_cast<Symbol>(std::upper_bound(cuts_.begin(), cuts_.end(), x) - cuts_.begin());
  }

  friend bool operator==(const Partition& a, const Partition& b) { return a.cuts_ == b.cuts_; }

private:
  std::vector<Rational> cuts_;
  std::string name_;
};

} // namespace rawcode
