#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rawcode/coding.hpp"
#include "rawcode/rng.hpp"

namespace rawcode {

// ---------------------------------------------------------------------------
// Exact linear algebra
// ---------------------------------------------------------------------------

using RationalMatrix = std::vector<std::vector<Rational>>;

/// Solves A x = b exactly by Gauss-Jordan elimination. Throws on a singular
/// system.
inline std::vector<Rational> solve_linear(RationalMatrix a, std::vector<Rational> b) {
  const size_t n = a.size();
  if (b.size() != n) throw InputError("solve_linear: dimension mismatch");
  for (const auto& row : a)
    if (row.size() != n) throw InputError("solve_linear: matrix not square");
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) throw DomainError("solve_linear: singular system");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    const Rational inv = 1 / a[col][col];
    for (size_t j = col; j < n; ++j) a[col][j] *= inv;
    b[col] *= inv;
    for (size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Rational f = a[r][col];
      for (size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
      b[r] -= f * b[col];
    }
  }
  return b;
}

/// Row-stochastic matrix with exact non-negative entries.
class StochasticMatrix {
public:
  StochasticMatrix() = default;
  explicit StochasticMatrix(RationalMatrix rows) : rows_(std::move(rows)) {
    const size_t n = rows_.size();
    if (n == 0) throw InputError("stochastic matrix is empty");
    for (size_t i = 0; i < n; ++i) {
      if (rows_[i].size() != n) throw InputError("stochastic matrix row " + std::to_string(i + 1) + " has wrong length");
      Rational sum = 0;
      for (const auto& v : rows_[i]) {
        if (v < 0) throw InputError("negative entry in stochastic matrix row " + std::to_string(i + 1));
        sum += v;
      }
      if (sum != 1)
        throw InputError("stochastic matrix row " + std::to_string(i + 1) + " sums to " + to_string(sum) + ", not 1");
    }
  }

  static StochasticMatrix identity(size_t n) {
    RationalMatrix m(n, std::vector<Rational>(n, Rational(0)));
    for (size_t i = 0; i < n; ++i) m[i][i] = 1;
    return StochasticMatrix(std::move(m));
  }

  size_t size() const noexcept { return rows_.size(); }
  const Rational& operator()(size_t i, size_t j) const { return rows_[i][j]; }
  const RationalMatrix& rows() const noexcept { return rows_; }

  bool doubly_stochastic() const {
    for (size_t j = 0; j < size(); ++j) {
      Rational s = 0;
      for (size_t i = 0; i < size(); ++i) s += rows_[i][j];
      if (s != 1) return false;
    }
    return true;
  }

  friend bool operator==(const StochasticMatrix&, const StochasticMatrix&) = default;

private:
  RationalMatrix rows_;
};

// ---------------------------------------------------------------------------
// Support digraph: strongly connected components, period, primitivity
// ---------------------------------------------------------------------------

struct GraphStructure {
  std::vector<std::vector<size_t>> sccs; // components, each sorted, ordered by smallest member
  std::vector<bool> closed;              // no edge leaves the component
  std::optional<size_t> period;          // only when strongly connected
};

inline std::vector<std::vector<size_t>> support_graph(const StochasticMatrix& m) {
  std::vector<std::vector<size_t>> adj(m.size());
  for (size_t i = 0; i < m.size(); ++i)
    for (size_t j = 0; j < m.size(); ++j)
      if (m(i, j) > 0) adj[i].push_back(j);
  return adj;
}

/// Tarjan's algorithm (iterative) plus the cycle-length gcd when the graph is
/// strongly connected.
inline GraphStructure analyze_graph(const std::vector<std::vector<size_t>>& adj) {
  const size_t n = adj.size();
  constexpr size_t kUnvisited = static_cast<size_t>(-1);
  std::vector<size_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<size_t> stack;
  std::vector<std::vector<size_t>> sccs;
  size_t counter = 0;

  for (size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    std::vector<std::pair<size_t, size_t>> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      if (next < adj[v].size()) {
        const size_t w = adj[v][next++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<size_t> c;
        size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = sccs.size();
          c.push_back(w);
        } while (w != v);
        std::sort(c.begin(), c.end());
        sccs.push_back(std::move(c));
      }
      const size_t finished = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[finished]);
    }
  }

  std::vector<size_t> order(sccs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return sccs[a].front() < sccs[b].front(); });
  GraphStructure g;
  std::vector<size_t> remap(sccs.size());
  for (size_t k = 0; k < order.size(); ++k) {
    remap[order[k]] = k;
    g.sccs.push_back(sccs[order[k]]);
  }
  for (auto& c : comp) c = remap[c];
  g.closed.assign(g.sccs.size(), true);
  for (size_t v = 0; v < n; ++v)
    for (size_t w : adj[v])
      if (comp[w] != comp[v]) g.closed[comp[v]] = false;

  if (g.sccs.size() == 1 && n > 0) {
    std::vector<size_t> level(n, kUnvisited);
    std::vector<size_t> queue{0};
    level[0] = 0;
    for (size_t qi = 0; qi < queue.size(); ++qi)
      for (size_t w : adj[queue[qi]])
        if (level[w] == kUnvisited) {
          level[w] = level[queue[qi]] + 1;
          queue.push_back(w);
        }
    size_t d = 0;
    for (size_t v = 0; v < n; ++v)
      for (size_t w : adj[v]) {
        const long diff = static_cast<long>(level[v]) + 1 - static_cast<long>(level[w]);
        d = std::gcd(d, static_cast<size_t>(diff < 0 ? -diff : diff));
      }
    g.period = d;
  }
  return g;
}

struct PrimitivityResult {
  bool primitive = false;
  std::optional<size_t> kappa;  // least k with pi^k > 0, when primitive
  size_t scc_count = 0;
  std::optional<size_t> period; // when irreducible
  GraphStructure graph;
};

/// pi^kappa > 0 for some kappa iff the support digraph is strongly connected
/// with period 1; the least such kappa is found by boolean powers, which
/// cannot exceed Wielandt's bound (M-1)^2 + 1.
inline PrimitivityResult is_primitive(const StochasticMatrix& m) {
  PrimitivityResult r;
  const auto adj = support_graph(m);
  r.graph = analyze_graph(adj);
  r.scc_count = r.graph.sccs.size();
  r.period = r.graph.period;
  if (r.scc_count != 1 || r.period != size_t{1}) return r;
  r.primitive = true;

  const size_t n = m.size();
  const size_t words = (n + 63) / 64;
  using Bits = std::vector<std::uint64_t>;
  std::vector<Bits> base(n, Bits(words, 0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j : adj[i]) base[i][j / 64] |= std::uint64_t{1} << (j % 64);
  auto full = [&](const std::vector<Bits>& p) {
    for (size_t i = 0; i < n; ++i)
      for (size_t w = 0; w < words; ++w) {
        const size_t bits = std::min<size_t>(64, n - 64 * w);
        const std::uint64_t want = bits == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
        if (p[i][w] != want) return false;
      }
    return true;
  };
  std::vector<Bits> power = base;
  const size_t bound = (n - 1) * (n - 1) + 1;
  for (size_t k = 1; k <= bound; ++k) {
    if (full(power)) {
      r.kappa = k;
      return r;
    }
    std::vector<Bits> next(n, Bits(words, 0));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j)
        if ((power[i][j / 64] >> (j % 64)) & 1U)
          for (size_t w = 0; w < words; ++w) next[i][w] |= base[j][w];
    power = std::move(next);
  }
  throw DomainError("primitive matrix exceeded Wielandt bound (internal inconsistency)");
}

/// Exact stationary row vector of an irreducible chain (pi P = pi, sum 1).
inline std::vector<Rational> stationary_distribution(const StochasticMatrix& m) {
  const size_t n = m.size();
  RationalMatrix a(n, std::vector<Rational>(n, Rational(0)));
  std::vector<Rational> b(n, Rational(0));
  // rows 0..n-2: (P^T - I) pi = 0; last row: sum pi = 1
  for (size_t i = 0; i + 1 < n; ++i) {
    for (size_t j = 0; j < n; ++j) a[i][j] = m(j, i);
    a[i][i] -= 1;
  }
  for (size_t j = 0; j < n; ++j) a[n - 1][j] = 1;
  b[n - 1] = 1;
  return solve_linear(std::move(a), std::move(b));
}

// ---------------------------------------------------------------------------
// Bernoulli and Markov sources
// ---------------------------------------------------------------------------

struct BernoulliSpec {
  std::vector<Rational> p;

  explicit BernoulliSpec(std::vector<Rational> probs) : p(std::move(probs)) {
    if (p.empty()) throw InputError("Bernoulli spec needs at least one probability");
    Rational s = 0;
    for (const auto& v : p) {
      if (v < 0) throw InputError("negative probability " + to_string(v));
      s += v;
    }
    if (s != 1) throw InputError("probabilities sum to " + to_string(s) + ", not 1");
  }

  static BernoulliSpec uniform(size_t m) {
    return BernoulliSpec(std::vector<Rational>(m, make_rational(1, static_cast<unsigned long>(m))));
  }
  size_t alphabet() const noexcept { return p.size(); }
};

struct MarkovChainSpec {
  StochasticMatrix transition;
  std::vector<Rational> initial;

  MarkovChainSpec(StochasticMatrix pi, std::vector<Rational> init) : transition(std::move(pi)), initial(std::move(init)) {
    BernoulliSpec check(initial); // validates the initial distribution
    if (initial.size() != transition.size()) throw InputError("initial distribution has wrong length");
  }
};

/// Probability that a Bernoulli sequence reproduces `word` on a fixed window:
/// the product of the symbol probabilities (p^K q^(L-K) in the binary case).
inline Rational window_match_probability(const BernoulliSpec& spec, std::span<const Symbol> word) {
  Rational prob = 1;
  for (Symbol s : word) {
    if (s >= spec.alphabet()) throw InputError("word symbol " + std::to_string(s) + " outside alphabet");
    prob *= spec.p[s];
  }
  return prob;
}

/// Probability that N independent draws coincide: sum_i p_i^N.
inline Rational coincidence_rate(const BernoulliSpec& spec, size_t n) {
  if (n < 2) throw InputError("coincidence_rate needs N >= 2");
  Rational total = 0;
  for (const auto& v : spec.p) {
    Rational term = 1;
    for (size_t k = 0; k < n; ++k) term *= v;
    total += term;
  }
  return total;
}

namespace detail {
// floor(CDF_i * 2^64) for each i; the last entry is 2^64.
inline std::vector<u128> cdf_thresholds(const std::vector<Rational>& p) {
  std::vector<u128> out;
  Rational cdf = 0;
  const BigInt two64 = BigInt(1) << 64;
  for (const auto& v : p) {
    cdf += v;
    out.push_back(to_u128(floor_of(cdf * two64)));
  }
  return out;
}
inline Symbol draw(const std::vector<u128>& thresholds, std::uint64_t u) {
  Symbol s = 0;
  while (static_cast<u128>(u) >= thresholds[s]) ++s;
  return s;
}
} // namespace detail

/// i.i.d. symbols by exact CDF inversion of 64-bit uniforms (per-symbol bias
/// below 2^-64).
inline SymbolStream bernoulli_stream(const BernoulliSpec& spec, const SeedSpec& seed, size_t length) {
  const auto th = detail::cdf_thresholds(spec.p);
  CounterRng rng(seed);
  std::vector<Symbol> out(length);
  for (auto& s : out) s = detail::draw(th, rng.next_u64());
  return SymbolStream(spec.alphabet(), std::move(out));
}

inline SymbolStream markov_stream(const MarkovChainSpec& spec, const SeedSpec& seed, size_t length) {
  const auto init = detail::cdf_thresholds(spec.initial);
  std::vector<std::vector<u128>> rows;
  for (const auto& row : spec.transition.rows()) rows.push_back(detail::cdf_thresholds(row));
  CounterRng rng(seed);
  std::vector<Symbol> out(length);
  if (length > 0) out[0] = detail::draw(init, rng.next_u64());
  for (size_t t = 1; t < length; ++t) out[t] = detail::draw(rows[out[t - 1]], rng.next_u64());
  return SymbolStream(spec.transition.size(), std::move(out));
}

// ---------------------------------------------------------------------------
// Waiting time for a run of L successes
// ---------------------------------------------------------------------------

namespace detail {
inline void check_rate(const Rational& q) {
  if (q <= 0 || q >= 1) throw DomainError("success probability must lie strictly between 0 and 1, got " + to_string(q));
}
inline Rational rpow(const Rational& q, size_t e) {
  Rational r = 1;
  for (size_t i = 0; i < e; ++i) r *= q;
  return r;
}
} // namespace detail

/// E[first completion time of L consecutive successes], trials numbered 1, 2, ...
inline Rational run_waiting_mean_closed_form(const Rational& q, size_t L) {
  detail::check_rate(q);
  const Rational ql = detail::rpow(q, L);
  return (1 - ql) / ((1 - q) * ql);
}

/// Same mean from the fundamental equations of the absorbing streak chain:
/// m_s = 1 + q m_{s+1} + (1-q) m_0 for s < L, m_L = 0.
inline Rational run_waiting_mean_chain(const Rational& q, size_t L) {
  detail::check_rate(q);
  if (L == 0) throw DomainError("run length must be positive");
  RationalMatrix a(L, std::vector<Rational>(L, Rational(0)));
  std::vector<Rational> b(L, Rational(1));
  for (size_t s = 0; s < L; ++s) {
    a[s][s] += 1;
    a[s][0] -= 1 - q;
    if (s + 1 < L) a[s][s + 1] -= q;
  }
  return solve_linear(std::move(a), std::move(b))[0];
}

template <class Scalar>
struct RunWaitingDistribution {
  Rational q;
  size_t run_length = 0;
  size_t horizon = 0;
  std::vector<Scalar> pmf; // pmf[t-1] = P(t_end = t), t = 1 .. horizon
  Scalar deficit{};         // P(t_end > horizon)
  Rational mean;            // untruncated mean

  Scalar probability(size_t t) const { return t >= 1 && t <= pmf.size() ? pmf[t - 1] : Scalar(0); }
};

namespace detail {
template <class Scalar>
Scalar scalar_from(const Rational& r) {
  if constexpr (std::is_same_v<Scalar, Rational>) return r;
  else return static_cast<Scalar>(r.get_d());
}
} // namespace detail

/// Distribution of the completion time of an L-run, by propagating the
/// state vector of the (L+1)-state streak chain for `horizon` steps. Use
/// Scalar = Rational for exact values, double for long horizons.
template <class Scalar = Rational>
RunWaitingDistribution<Scalar> run_waiting(const Rational& q, size_t L, size_t horizon) {
  detail::check_rate(q);
  if (L == 0) throw DomainError("run length must be positive");
  RunWaitingDistribution<Scalar> d;
  d.q = q;
  d.run_length = L;
  d.horizon = horizon;
  d.mean = run_waiting_mean_chain(q, L);
  const Scalar qs = detail::scalar_from<Scalar>(q);
  const Scalar fs = detail::scalar_from<Scalar>(Rational(1 - q));
  std::vector<Scalar> state(L, Scalar(0)); // streak lengths 0 .. L-1
  state[0] = Scalar(1);
  d.pmf.reserve(horizon);
  for (size_t t = 1; t <= horizon; ++t) {
    Scalar alive = Scalar(0);
    for (const auto& v : state) alive += v;
    d.pmf.push_back(state[L - 1] * qs);
    for (size_t s = L - 1; s > 0; --s) state[s] = state[s - 1] * qs;
    state[0] = alive * fs;
  }
  Scalar rest = Scalar(0);
  for (const auto& v : state) rest += v;
  d.deficit = rest;
  return d;
}

/// Expected number of maximal runs of length >= L among H i.i.d. positions
/// with success probability q: a run may start at position 0 (prob q^L) or
/// right after a failure (prob (1-q) q^L for each of the H-L later starts).
inline Rational expected_long_runs(const Rational& q, size_t L, size_t H) {
  if (L == 0) throw DomainError("run length must be positive");
  if (H < L) return 0;
  const Rational ql = detail::rpow(q, L);
  return ql + Rational(static_cast<long>(H - L)) * (1 - q) * ql;
}

/// Oracle mean of t_end for the doubling map coded by dyadic:K with N
/// independent trajectories. Symbol agreement at t means binary digits
/// t+1 .. t+K agree, so an L-window is a digit-agreement run of length
/// L+K-1 over digits 2, 3, ...; each digit agrees with probability 2^(1-N).
inline Rational doubling_dyadic_mean_t_end(size_t k, size_t n, size_t L) {
  if (k == 0 || n < 2 || L == 0) throw DomainError("doubling_dyadic_mean_t_end: bad arguments");
  const Rational q = pow2(1 - static_cast<long>(n));
  return run_waiting_mean_closed_form(q, L + k - 1) - Rational(static_cast<long>(k - 1));
}

} // namespace rawcode
