#pragma once

// Reference implementations used only by the tests. Each one recomputes a
// library quantity by a different route (enumeration, brute force, direct
// formulas) so a shared bug cannot make both sides agree.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rawcode/rational.hpp"

namespace oracle {

using rawcode::Rational;

/// First t0 with streams equal at every t in t0+1..t0+L (direct scan).
inline std::optional<size_t> find_window(const std::vector<std::vector<int>>& s, size_t L) {
  const size_t h = s.front().size();
  for (size_t t0 = 0; t0 + L < h; ++t0) {
    bool ok = true;
    for (size_t t = t0 + 1; t <= t0 + L && ok; ++t)
      for (const auto& other : s)
        if (other[t] != s.front()[t]) ok = false;
    if (ok) return t0;
  }
  return std::nullopt;
}

/// Longest stretch of all-equal positions, by trying every start and end.
inline size_t max_run(const std::vector<std::vector<int>>& s) {
  const size_t h = s.front().size();
  auto agree = [&](size_t t) {
    return std::all_of(s.begin(), s.end(), [&](const auto& v) { return v[t] == s.front()[t]; });
  };
  size_t best = 0;
  for (size_t a = 0; a < h; ++a)
    for (size_t b = a; b < h && agree(b); ++b) best = std::max(best, b - a + 1);
  return best;
}

inline Rational power(const Rational& q, size_t e) {
  Rational r = 1;
  while (e--) r *= q;
  return r;
}

/// P(first L-run of successes completes at trial t), t = 1..H, by summing
/// over all 2^H outcome sequences.
inline std::vector<Rational> run_completion_pmf(const Rational& q, size_t L, size_t H) {
  std::vector<Rational> pmf(H, Rational(0));
  for (std::uint32_t mask = 0; mask < (1u << H); ++mask) {
    Rational w = 1;
    size_t run = 0;
    std::optional<size_t> done;
    for (size_t t = 0; t < H; ++t) {
      const bool hit = (mask >> t) & 1u;
      w *= hit ? q : Rational(1 - q);
      run = hit ? run + 1 : 0;
      if (!done && run == L) done = t + 1;
    }
    if (done) pmf[*done - 1] += w;
  }
  return pmf;
}

/// E[number of maximal success runs of length >= L] over H trials, by
/// enumeration.
inline Rational expected_long_runs(const Rational& q, size_t L, size_t H) {
  Rational e = 0;
  for (std::uint32_t mask = 0; mask < (1u << H); ++mask) {
    Rational w = 1;
    size_t run = 0, count = 0;
    for (size_t t = 0; t < H; ++t) {
      const bool hit = (mask >> t) & 1u;
      w *= hit ? q : Rational(1 - q);
      run = hit ? run + 1 : 0;
      if (run == L) ++count;
    }
    e += w * Rational(static_cast<long>(count));
  }
  return e;
}

inline Rational frac(const Rational& x) {
  Rational r = x;
  while (r >= 1) r -= 1;
  while (r < 0) r += 1;
  return r;
}

inline int cell(const std::vector<Rational>& cuts, const Rational& x) {
  return static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
}

/// Largest L such that some z has z + j*alpha and z + d + j*alpha in the
/// same partition cell for all j < L. The condition only changes at the
/// points c - j*alpha and c - d - j*alpha (c a cut or 0), so testing the
/// midpoint of every elementary arc between consecutive breakpoints is
/// exact. Returns nullopt past `cap`.
inline std::optional<size_t> rotation_run_bound(const Rational& alpha, const std::vector<Rational>& cuts,
                                                const Rational& d, size_t cap) {
  std::vector<Rational> ends = cuts;
  ends.insert(ends.begin(), Rational(0));
  for (size_t L = 1; L <= cap; ++L) {
    std::vector<Rational> bp{Rational(0), Rational(1)};
    for (size_t j = 0; j < L; ++j)
      for (const auto& c : ends) {
        bp.push_back(frac(c - Rational(static_cast<long>(j)) * alpha));
        bp.push_back(frac(c - d - Rational(static_cast<long>(j)) * alpha));
      }
    std::sort(bp.begin(), bp.end());
    bool some = false;
    for (size_t i = 0; i + 1 < bp.size() && !some; ++i) {
      if (bp[i] == bp[i + 1]) continue;
      const Rational z = (bp[i] + bp[i + 1]) / 2;
      bool ok = true;
      for (size_t j = 0; j < L && ok; ++j) {
        const Rational a = frac(z + Rational(static_cast<long>(j)) * alpha);
        ok = cell(cuts, a) == cell(cuts, frac(a + d));
      }
      some = ok;
    }
    if (!some) return L - 1;
  }
  return std::nullopt;
}

// Maps written out directly from their formulas.
inline Rational doubling(const Rational& x) { return frac(2 * x); }

inline Rational bridge(const Rational& x) {
  if (x < Rational(1, 4)) return 2 * x;
  if (x < Rational(3, 4)) return 2 * x - Rational(1, 2);
  return 2 * x - 1;
}

/// Symbols of x, Tx, ..., T^(n-1)x for the partition given by its cuts.
inline std::vector<int> code(const std::function<Rational(const Rational&)>& t, Rational x,
                             const std::vector<Rational>& cuts, size_t n) {
  std::vector<int> out;
  for (size_t i = 0; i < n; ++i) {
    out.push_back(cell(cuts, x));
    x = t(x);
  }
  return out;
}

} // namespace oracle
