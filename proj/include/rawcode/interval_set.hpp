#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include "rawcode/rational.hpp"

namespace rawcode {

/// Half-open interval [lo, hi) with rational endpoints.
struct Interval {
  Rational lo;
  Rational hi;

  bool empty() const { return !(lo < hi); }
  Rational length() const { return empty() ? Rational(0) : Rational(hi - lo); }
  bool contains(const Rational& x) const { return lo <= x && x < hi; }
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }

  friend bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }
};

inline std::string to_string(const Interval& iv) {
  return "[" + to_string(iv.lo) + "," + to_string(iv.hi) + ")";
}

/// Finite union of disjoint half-open intervals, kept in canonical form:
/// sorted, non-empty parts, with touching parts merged. Two sets are equal
/// exactly when their canonical part lists are equal.
class IntervalSet {
public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> parts) : parts_(std::move(parts)) { normalize(); }
  IntervalSet(const Rational& lo, const Rational& hi) {
    if (lo < hi) parts_.push_back({lo, hi});
  }

  static IntervalSet unit() { return IntervalSet(Rational(0), Rational(1)); }

  const std::vector<Interval>& parts() const noexcept { return parts_; }
  size_t size() const noexcept { return parts_.size(); }
  bool empty() const noexcept { return parts_.empty(); }

  Rational measure() const {
    Rational total = 0;
    for (const auto& p : parts_) total += p.hi - p.lo;
    return total;
  }

  bool contains(const Rational& x) const {
    auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                               [](const Rational& v, const Interval& iv) { return v < iv.lo; });
    if (it == parts_.begin()) return false;
    return x < std::prev(it)->hi;
  }

  bool contains(const Interval& iv) const {
    if (iv.empty()) return true;
    auto it = std::upper_bound(parts_.begin(), parts_.end(), iv.lo,
                               [](const Rational& v, const Interval& p) { return v < p.lo; });
    if (it == parts_.begin()) return false;
    return std::prev(it)->contains(iv);
  }

  IntervalSet unite(const IntervalSet& other) const {
    std::vector<Interval> all = parts_;
    all.insert(all.end(), other.parts_.begin(), other.parts_.end());
    return IntervalSet(std::move(all));
  }

  IntervalSet intersect(const IntervalSet& other) const {
    std::vector<Interval> out;
    size_t i = 0, j = 0;
    while (i < parts_.size() && j < other.parts_.size()) {
      const Interval& a = parts_[i];
      const Interval& b = other.parts_[j];
      const Rational& lo = a.lo < b.lo ? b.lo : a.lo;
      const Rational& hi = a.hi < b.hi ? a.hi : b.hi;
      if (lo < hi) out.push_back({lo, hi});
      if (a.hi < b.hi) ++i;
      else ++j;
    }
    IntervalSet result;
    result.parts_ = std::move(out); // already canonical
    return result;
  }

  /// Complement inside [0,1).
  IntervalSet complement() const {
    std::vector<Interval> out;
    Rational cursor = 0;
    for (const auto& p : parts_) {
      if (cursor < p.lo) out.push_back({cursor, p.lo});
      cursor = p.hi;
    }
    if (cursor < 1) out.push_back({cursor, Rational(1)});
    return IntervalSet(std::move(out));
  }

  IntervalSet minus(const IntervalSet& other) const { return intersect(other.complement()); }

  /// Image under x -> x + shift (mod 1). Requires the set to lie in [0,1).
  IntervalSet translate_mod1(const Rational& shift) const {
    const Rational s = frac(shift);
    std::vector<Interval> out;
    for (const auto& p : parts_) {
      Rational lo = p.lo + s;
      Rational hi = p.hi + s;
      if (hi <= 1) {
        out.push_back({lo, hi});
      } else if (lo >= 1) {
        out.push_back({lo - 1, hi - 1});
      } else {
        out.push_back({lo, Rational(1)});
        out.push_back({Rational(0), hi - 1});
      }
    }
    return IntervalSet(std::move(out));
  }

  friend bool operator==(const IntervalSet& a, const IntervalSet& b) { return a.parts_ == b.parts_; }

private:
  void normalize() {
    std::erase_if(parts_, [](const Interval& iv) { return iv.empty(); });
    std::sort(parts_.begin(), parts_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    merged.reserve(parts_.size());
    for (auto& p : parts_) {
      if (!merged.empty() && p.lo <= merged.back().hi) {
        if (merged.back().hi < p.hi) merged.back().hi = p.hi;
      } else {
        merged.push_back(std::move(p));
      }
    }
    parts_ = std::move(merged);
  }

  std::vector<Interval> parts_;
};

inline Rational measure(const IntervalSet& s) { return s.measure(); }

inline std::string to_string(const IntervalSet& s) {
  if (s.empty()) return "{}";
  std::string out;
  for (const auto& p : s.parts()) {
    if (!out.empty()) out += " U ";
    out += to_string(p);
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const IntervalSet& s) { return os << to_string(s); }

} // namespace rawcode
