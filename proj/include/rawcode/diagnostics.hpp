#pragma once

#include <boost/math/distributions/beta.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rawcode/baselines.hpp"
#include "rawcode/coding.hpp"

namespace rawcode {

inline constexpr size_t kDefaultIntervalCap = size_t{1} << 20;

/// Exact mu(T^-k A ∩ B) for Lebesgue measure. The iterated preimage is
/// built interval by interval; past `interval_cap` parts a ResourceError is
/// raised so the caller can switch to sampling.
inline Rational correlation_exact(const IntervalMap& map, const IntervalSet& a, const IntervalSet& b, size_t k,
                                  size_t interval_cap = kDefaultIntervalCap) {
  IntervalSet pulled = a;
  for (size_t i = 0; i < k; ++i) {
    pulled = preimage(map, pulled);
    if (pulled.size() > interval_cap)
      throw ResourceError("T^-" + std::to_string(i + 1) + " A has " + std::to_string(pulled.size()) +
                          " intervals, above cap " + std::to_string(interval_cap));
  }
  return pulled.intersect(b).measure();
}

/// Sampled estimate with a Clopper-Pearson interval.
struct McEstimate {
  size_t hits = 0;
  size_t samples = 0;
  double confidence = 0.99;
  double lo = 0.0;
  double hi = 1.0;

  double estimate() const { return samples ? static_cast<double>(hits) / static_cast<double>(samples) : 0.0; }
  bool covers(double v) const { return lo <= v && v <= hi; }
};

inline McEstimate clopper_pearson(size_t hits, size_t samples, double confidence = 0.99) {
  McEstimate e;
  e.hits = hits;
  e.samples = samples;
  e.confidence = confidence;
  const double alpha = 1.0 - confidence;
  if (samples == 0) return e;
  const double h = static_cast<double>(hits), n = static_cast<double>(samples);
  e.lo = hits == 0 ? 0.0 : boost::math::ibeta_inv(h, n - h + 1, alpha / 2);
  e.hi = hits == samples ? 1.0 : boost::math::ibeta_inv(h + 1, n - h, 1 - alpha / 2);
  return e;
}

/// Fraction of uniformly sampled x with x in B and T^k x in A; estimates
/// mu(T^-k A ∩ B). Sample i uses substream i of `seed`.
inline McEstimate correlation_mc(const IntervalMap& map, const IntervalSet& a, const IntervalSet& b, size_t k,
                                 size_t samples, std::uint64_t seed, double confidence = 0.99) {
  size_t hits = 0;
  if (!a.empty() && !b.empty()) {
    for (size_t i = 0; i < samples; ++i) {
      TrajectorySource src = make_sampled_source(map, SeedSpec{seed, i}, k);
      if (!b.contains(src.current())) continue;
      for (size_t s = 0; s < k; ++s) src.advance();
      if (a.contains(src.current())) ++hits;
    }
  }
  return clopper_pearson(hits, samples, confidence);
}

enum class MixingMode { exact, monte_carlo, automatic };

inline const char* to_string(MixingMode m) {
  switch (m) {
    case MixingMode::exact: return "exact";
    case MixingMode::monte_carlo: return "monte-carlo";
    case MixingMode::automatic: return "auto";
  }
  return "?";
}

struct MixingTerm {
  size_t k = 0;
  std::optional<Rational> exact;  // |mu(T^-k A ∩ B) - mu(A) mu(B)|
  std::optional<McEstimate> sampled;
  double value = 0.0;
};

/// Terms |mu(T^-k A ∩ B) - mu(A)mu(B)| for k < n and their Cesaro means
/// W_1 .. W_n. Exact means are present only while every term is exact.
struct MixingSeries {
  IntervalSet a;
  IntervalSet b;
  std::vector<MixingTerm> terms;
  std::vector<double> cesaro;
  std::vector<std::optional<Rational>> cesaro_exact;

  std::optional<Rational> final_exact() const { return cesaro_exact.empty() ? std::nullopt : cesaro_exact.back(); }
};

struct MixingOptions {
  size_t mc_samples = 100000;
  std::uint64_t seed = 0;
  size_t interval_cap = kDefaultIntervalCap;
};

inline MixingSeries weak_mixing_series(const IntervalMap& map, const IntervalSet& a, const IntervalSet& b, size_t n,
                                       MixingMode mode, const MixingOptions& opt = {}) {
  MixingSeries s;
  s.a = a;
  s.b = b;
  const Rational product = a.measure() * b.measure();
  IntervalSet pulled = a;
  bool exact = mode != MixingMode::monte_carlo;
  Rational exact_sum = 0;
  double sum = 0.0;
  for (size_t k = 0; k < n; ++k) {
    MixingTerm term;
    term.k = k;
    if (exact && k > 0) {
      IntervalSet next = preimage(map, pulled);
      if (next.size() > opt.interval_cap) {
        if (mode == MixingMode::exact)
          throw ResourceError("T^-" + std::to_string(k) + " A exceeds the interval cap in exact mode");
        exact = false;
      } else {
        pulled = std::move(next);
      }
    }
    if (exact) {
      Rational diff = pulled.intersect(b).measure() - product;
      term.exact = Rational(abs(diff));
      term.value = to_double(*term.exact);
      exact_sum += *term.exact;
    } else {
      McEstimate e = correlation_mc(map, a, b, k, opt.mc_samples, opt.seed + k);
      const double p = to_double(product);
      term.value = std::abs(e.estimate() - p);
      term.sampled = e;
    }
    sum += term.value;
    s.terms.push_back(std::move(term));
    s.cesaro.push_back(sum / static_cast<double>(k + 1));
    if (exact && (s.cesaro_exact.empty() || s.cesaro_exact.back())) {
      Rational w = exact_sum / Rational(static_cast<long>(k + 1));
      s.cesaro.back() = to_double(w);
      s.cesaro_exact.push_back(std::move(w));
    } else {
      s.cesaro_exact.push_back(std::nullopt);
    }
  }
  return s;
}

/// Ulam approximation on a bin partition: P_ij = m(B_i ∩ T^-1 B_j) / m(B_i).
struct UlamModel {
  Partition bins;
  StochasticMatrix matrix;
};

inline UlamModel ulam_matrix(const IntervalMap& map, const Partition& bins) {
  const size_t n = bins.size();
  std::vector<IntervalSet> cells, pulled;
  for (size_t j = 0; j < n; ++j) {
    const Interval e = bins.element(j);
    cells.emplace_back(e.lo, e.hi);
    pulled.push_back(preimage(map, cells.back()));
  }
  RationalMatrix rows(n, std::vector<Rational>(n, Rational(0)));
  for (size_t i = 0; i < n; ++i) {
    const Rational mi = cells[i].measure();
    for (size_t j = 0; j < n; ++j) rows[i][j] = cells[i].intersect(pulled[j]).measure() / mi;
  }
  return UlamModel{bins, StochasticMatrix(std::move(rows))};
}

/// Communicating-class structure of a transition matrix. Closed classes
/// are the candidate ergodic components.
struct ErgodicBlockReport {
  size_t scc_count = 0;
  std::vector<std::vector<size_t>> sccs;
  std::vector<size_t> closed_sccs;        // indices into sccs
  std::vector<IntervalSet> closed_supports; // bin unions, when bins are known
  bool primitive = false;
  std::optional<size_t> kappa;
  std::optional<size_t> period;

  bool connected() const { return scc_count == 1; }
};

inline ErgodicBlockReport ergodic_block_report(const StochasticMatrix& matrix,
                                               const std::optional<Partition>& bins = std::nullopt) {
  const PrimitivityResult p = is_primitive(matrix);
  ErgodicBlockReport r;
  r.scc_count = p.scc_count;
  r.sccs = p.graph.sccs;
  r.primitive = p.primitive;
  r.kappa = p.kappa;
  r.period = p.period;
  for (size_t c = 0; c < r.sccs.size(); ++c) {
    if (!p.graph.closed[c]) continue;
    r.closed_sccs.push_back(c);
    if (bins) {
      std::vector<Interval> parts;
      for (size_t i : r.sccs[c]) parts.push_back(bins->element(i));
      r.closed_supports.emplace_back(std::move(parts));
    }
  }
  return r;
}

inline ErgodicBlockReport ergodic_block_report(const UlamModel& model) {
  return ergodic_block_report(model.matrix, model.bins);
}

} // namespace rawcode
