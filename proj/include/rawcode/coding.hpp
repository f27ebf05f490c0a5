#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rawcode/partition.hpp"
#include "rawcode/trajectory.hpp"

namespace rawcode {

/// Code of a trajectory: symbols over the alphabet {0 .. alphabet-1}.
struct SymbolStream {
  size_t alphabet = 0;
  std::vector<Symbol> symbols;

  SymbolStream() = default;
  SymbolStream(size_t alphabet_size, std::vector<Symbol> syms) : alphabet(alphabet_size), symbols(std::move(syms)) {
    for (size_t t = 0; t < symbols.size(); ++t)
      if (symbols[t] >= alphabet)
        throw InputError("symbol " + std::to_string(symbols[t]) + " at position " + std::to_string(t) +
                         " outside alphabet of size " + std::to_string(alphabet));
  }

  size_t size() const noexcept { return symbols.size(); }
  Symbol operator[](size_t t) const { return symbols[t]; }
  friend bool operator==(const SymbolStream&, const SymbolStream&) = default;
};

/// Raw coding of a single point: index of the partition element holding x.
inline Symbol encode_point(const Partition& partition, const Rational& x) { return partition.locate(x); }

/// A partition compiled against one trajectory's backend representation, so
/// that coding a step costs a few integer comparisons.
class Encoder {
public:
  Encoder(const Partition& partition, const TrajectorySource& source) {
    std::visit([&](const auto& s) { compile(partition, s); }, source.state());
  }

  Symbol operator()(const TrajectorySource::RationalState& s) const {
    const auto& c = std::get<std::vector<Rational>>(cuts_);
    return static_cast<Symbol>(std::upper_bound(c.begin(), c.end(), s.x) - c.begin());
  }
  Symbol operator()(const TrajectorySource::ShiftState& s) const {
    const auto& c = std::get<std::vector<std::uint64_t>>(cuts_);
    Symbol k = 0;
    if (c.size() <= 8) {
      while (k < c.size() && c[k] <= s.head) ++k;
      return k;
    }
    return static_cast<Symbol>(std::upper_bound(c.begin(), c.end(), s.head) - c.begin());
  }
  Symbol operator()(const TrajectorySource::Rotation128& s) const {
    const auto& c = std::get<std::vector<u128>>(cuts_);
    Symbol k = 0;
    if (c.size() <= 8) {
      while (k < c.size() && c[k] <= s.a) ++k;
      return k;
    }
    return static_cast<Symbol>(std::upper_bound(c.begin(), c.end(), s.a) - c.begin());
  }
  Symbol operator()(const TrajectorySource::RotationBig& s) const {
    const auto& c = std::get<std::vector<BigInt>>(cuts_);
    return static_cast<Symbol>(std::upper_bound(c.begin(), c.end(), s.a) - c.begin());
  }
  Symbol operator()(const TrajectorySource& source) const {
    return std::visit([&](const auto& s) { return (*this)(s); }, source.state());
  }

private:
  void compile(const Partition& p, const TrajectorySource::RationalState&) { cuts_ = p.cuts(); }

  // x >= c  <=>  head >= c * 2^64 whenever c * 2^64 is an integer.
  void compile(const Partition& p, const TrajectorySource::ShiftState&) {
    std::vector<std::uint64_t> out;
    for (const auto& c : p.cuts()) {
      auto e = dyadic_exponent(c);
      if (!e || *e > 64)
        throw BackendError("shift-stream coding needs partition cuts on the 2^-64 grid; " + to_string(c) +
                           " is not (use the rational backend)");
      out.push_back(static_cast<std::uint64_t>(to_u128(floor_of(c * (BigInt(1) << 64)))));
    }
    cuts_ = std::move(out);
  }

  // a / D >= c  <=>  a >= ceil(c * D) for integer a.
  void compile(const Partition& p, const TrajectorySource::Rotation128& s) {
    std::vector<u128> out;
    const BigInt den = from_u128(s.den);
    for (const auto& c : p.cuts()) out.push_back(to_u128(ceil_of(c * den)));
    cuts_ = std::move(out);
  }
  void compile(const Partition& p, const TrajectorySource::RotationBig& s) {
    std::vector<BigInt> out;
    for (const auto& c : p.cuts()) out.push_back(ceil_of(c * s.den));
    cuts_ = std::move(out);
  }

  std::variant<std::vector<Rational>, std::vector<std::uint64_t>, std::vector<u128>, std::vector<BigInt>> cuts_;
};

/// Streams the code of one trajectory in blocks.
class CodeCursor {
public:
  CodeCursor(TrajectorySource source, const Partition& partition)
      : source_(std::move(source)), encoder_(partition, source_), alphabet_(partition.size()) {}

  /// Writes the next out.size() symbols (times t, t+1, ...).
  void fill(std::span<Symbol> out) {
    if (out.empty()) return;
    const size_t n = out.size();
    const size_t steps = started_ ? n : n - 1;
    const bool first = !started_;
    source_.step_with(steps, [&](auto& s) {
      size_t i = 0;
      if (first) out[i++] = encoder_(s);
      for (; i < n; ++i) {
        s.step();
        out[i] = encoder_(s);
      }
    });
    started_ = true;
  }

  Symbol next() {
    Symbol s;
    fill(std::span<Symbol>(&s, 1));
    return s;
  }

  /// Time index of the next symbol to be emitted.
  size_t position() const noexcept { return started_ ? source_.time() + 1 : 0; }
  const TrajectorySource& source() const noexcept { return source_; }
  const Encoder& encoder() const noexcept { return encoder_; }
  size_t alphabet() const noexcept { return alphabet_; }

private:
  TrajectorySource source_;
  Encoder encoder_;
  size_t alphabet_;
  bool started_ = false;
};

/// s_t = encode_point(partition, T^t x0) for t < horizon.
inline SymbolStream encode_trajectory(TrajectorySource source, const Partition& partition, size_t horizon) {
  if (horizon == 0) throw DomainError("horizon must be positive");
  CodeCursor cursor(std::move(source), partition);
  std::vector<Symbol> out(horizon);
  cursor.fill(out);
  return SymbolStream(partition.size(), std::move(out));
}

/// Exact T^{-1}(s): per-branch affine pullbacks clipped to branch domains.
inline IntervalSet preimage(const IntervalMap& map, const IntervalSet& s) {
  std::vector<Interval> out;
  for (const auto& br : map.branches()) {
    const Interval img = br.image();
    for (const auto& part : s.parts()) {
      const Rational& lo = part.lo < img.lo ? img.lo : part.lo;
      const Rational& hi = part.hi < img.hi ? part.hi : img.hi;
      if (!(lo < hi)) continue;
      out.push_back({(lo - br.offset) / br.slope, (hi - br.offset) / br.slope});
    }
  }
  return IntervalSet(std::move(out));
}

/// Element of the n-th refinement: points whose first n+1 code symbols are
/// `word`.
struct Cylinder {
  std::vector<Symbol> word;
  IntervalSet support;
  Rational measure;
};

/// All non-empty cylinders of one refinement order, in lexicographic word
/// order.
struct RefinementTable {
  size_t order = 0;
  std::vector<Cylinder> cylinders;

  Rational total_measure() const {
    Rational t = 0;
    for (const auto& c : cylinders) t += c.measure;
    return t;
  }

  /// Index of the cylinder containing x.
  size_t locate(const Rational& x) const {
    if (index_.empty()) build_index();
    auto it = std::upper_bound(index_.begin(), index_.end(), x,
                               [](const Rational& v, const IndexEntry& e) { return v < e.lo; });
    if (it == index_.begin()) throw DomainError("point " + to_string(x) + " not covered by refinement");
    return std::prev(it)->cylinder;
  }

private:
  struct IndexEntry {
    Rational lo;
    size_t cylinder;
  };
  void build_index() const {
    for (size_t i = 0; i < cylinders.size(); ++i)
      for (const auto& p : cylinders[i].support.parts()) index_.push_back({p.lo, i});
    std::sort(index_.begin(), index_.end(), [](const IndexEntry& a, const IndexEntry& b) { return a.lo < b.lo; });
  }
  mutable std::vector<IndexEntry> index_;
};

inline constexpr size_t kDefaultRefinementCap = 20;

namespace detail {

// A piece of a cylinder on which T^n is a single affine map x -> m x + c.
struct AffinePiece {
  Interval domain;
  Rational m;
  Rational c;
};

inline void extend_cylinders(const IntervalMap& map, const Partition& partition, size_t depth, size_t order,
                             std::vector<Symbol>& word, const std::vector<AffinePiece>& pieces,
                             std::vector<Cylinder>& out) {
  if (depth == order) {
    std::vector<Interval> support;
    for (const auto& p : pieces) support.push_back(p.domain);
    IntervalSet s(std::move(support));
    Rational m = s.measure();
    out.push_back(Cylinder{word, std::move(s), std::move(m)});
    return;
  }
  // Push every piece through one more application of T, split by branch.
  std::vector<AffinePiece> advanced;
  for (const auto& p : pieces) {
    const Rational ilo = p.m * p.domain.lo + p.c;
    const Rational ihi = p.m * p.domain.hi + p.c;
    for (const auto& br : map.branches()) {
      const Rational& lo = ilo < br.domain.lo ? br.domain.lo : ilo;
      const Rational& hi = ihi < br.domain.hi ? ihi : br.domain.hi;
      if (!(lo < hi)) continue;
      advanced.push_back(AffinePiece{{(lo - p.c) / p.m, (hi - p.c) / p.m}, br.slope * p.m, br.slope * p.c + br.offset});
    }
  }
  for (Symbol j = 0; j < partition.size(); ++j) {
    const Interval target = partition.element(j);
    std::vector<AffinePiece> next;
    for (const auto& p : advanced) {
      const Rational ilo = p.m * p.domain.lo + p.c;
      const Rational ihi = p.m * p.domain.hi + p.c;
      const Rational& lo = ilo < target.lo ? target.lo : ilo;
      const Rational& hi = ihi < target.hi ? ihi : target.hi;
      if (!(lo < hi)) continue;
      next.push_back(AffinePiece{{(lo - p.c) / p.m, (hi - p.c) / p.m}, p.m, p.c});
    }
    if (next.empty()) continue;
    word.push_back(j);
    extend_cylinders(map, partition, depth + 1, order, word, next, out);
    word.pop_back();
  }
}

} // namespace detail

/// The n-th refinement of `partition` under `map`: every non-empty cylinder
/// {x : code(T^t x) = word_t, t = 0..n}. Words are grown depth-first and
/// pruned as soon as their support is empty.
inline RefinementTable refine(const IntervalMap& map, const Partition& partition, size_t n,
                              size_t cap = kDefaultRefinementCap) {
  if (n > cap)
    throw ResourceError("refinement order " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
  RefinementTable table;
  table.order = n;
  std::vector<Symbol> word;
  for (Symbol j = 0; j < partition.size(); ++j) {
    word.assign(1, j);
    std::vector<detail::AffinePiece> root{{partition.element(j), Rational(1), Rational(0)}};
    detail::extend_cylinders(map, partition, 0, n, word, root, table.cylinders);
  }
  return table;
}

/// One step of the recursion xi^(n+1) = xi^(n) v T^{-1} xi^(n), taken
/// literally: all non-empty C_w ∩ T^{-1} C_v. Quadratic in the table size.
inline RefinementTable common_refinement(const IntervalMap& map, const RefinementTable& table) {
  RefinementTable out;
  out.order = table.order + 1;
  std::vector<IntervalSet> pulled;
  pulled.reserve(table.cylinders.size());
  for (const auto& c : table.cylinders) pulled.push_back(preimage(map, c.support));
  for (const auto& w : table.cylinders) {
    for (size_t v = 0; v < table.cylinders.size(); ++v) {
      IntervalSet s = w.support.intersect(pulled[v]);
      if (s.empty()) continue;
      std::vector<Symbol> word = w.word;
      word.push_back(table.cylinders[v].word.back());
      Rational m = s.measure();
      out.cylinders.push_back(Cylinder{std::move(word), std::move(s), std::move(m)});
    }
  }
  std::sort(out.cylinders.begin(), out.cylinders.end(),
            [](const Cylinder& a, const Cylinder& b) { return a.word < b.word; });
  return out;
}

} // namespace rawcode
