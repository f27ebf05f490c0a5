#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rawcode/coding.hpp"
#include "rawcode/parallel.hpp"

namespace rawcode {

namespace detail {
inline void check_streams(std::span<const SymbolStream> streams) {
  if (streams.empty()) throw InputError("no streams given");
  for (const auto& s : streams) {
    if (s.size() != streams[0].size()) throw InputError("streams differ in length");
    if (s.alphabet != streams[0].alphabet) throw InputError("streams differ in alphabet size");
  }
}
} // namespace detail

/// Position t is true iff all streams carry the same symbol at t.
inline std::vector<bool> agreement_stream(std::span<const SymbolStream> streams) {
  detail::check_streams(streams);
  const size_t h = streams[0].size();
  std::vector<bool> out(h, true);
  for (size_t t = 0; t < h; ++t)
    for (size_t i = 1; i < streams.size(); ++i)
      if (streams[i][t] != streams[0][t]) {
        out[t] = false;
        break;
      }
  return out;
}

/// Incremental bookkeeping over an agreement sequence fed one position at a
/// time. A window for t0 covers positions t0+1 .. t0+L, so a run that only
/// uses position 0 never counts as a window.
class AgreementTracker {
public:
  explicit AgreementTracker(size_t window) : window_(window) {
    if (window == 0) throw DomainError("window length L must be positive");
  }

  void push(bool agree) {
    const size_t t = position_++;
    if (agree) {
      ++agreements_;
      ++run_;
      max_run_ = std::max(max_run_, run_);
      if (t >= 1) {
        ++window_run_;
        if (!t0_ && window_run_ >= window_) t0_ = t - window_;
      }
    } else {
      run_ = 0;
      window_run_ = 0;
    }
  }

  size_t position() const noexcept { return position_; }
  const std::optional<size_t>& t0() const noexcept { return t0_; }
  size_t max_run() const noexcept { return max_run_; }
  size_t agreements() const noexcept { return agreements_; }
  size_t window() const noexcept { return window_; }

private:
  size_t window_;
  size_t position_ = 0;
  size_t run_ = 0;
  size_t window_run_ = 0;
  size_t max_run_ = 0;
  size_t agreements_ = 0;
  std::optional<size_t> t0_;
};

/// Smallest t0 >= 0 with agreement at every t in {t0+1, ..., t0+L}; nullopt
/// when no such window fits in the streams.
inline std::optional<size_t> find_window(std::span<const SymbolStream> streams, size_t L) {
  AgreementTracker tracker(L);
  for (bool a : agreement_stream(streams)) {
    tracker.push(a);
    if (tracker.t0()) break;
  }
  return tracker.t0();
}

/// Longest block of consecutive all-agree positions (position 0 included).
inline size_t max_run(std::span<const SymbolStream> streams) {
  size_t best = 0, run = 0;
  for (bool a : agreement_stream(streams)) {
    run = a ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

/// Number of maximal all-agree runs of length >= L.
inline size_t count_long_runs(const std::vector<bool>& agreement, size_t L) {
  if (L == 0) throw DomainError("run length must be positive");
  size_t count = 0, run = 0;
  for (bool a : agreement) {
    run = a ? run + 1 : 0;
    if (run == L) ++count;
  }
  return count;
}

struct CoincidenceReport {
  size_t horizon = 0;
  size_t window = 0;
  std::optional<size_t> t0;
  std::optional<size_t> t_end; // t0 + L
  size_t max_run = 0;
  size_t agreement_count = 0;
};

inline CoincidenceReport analyze(std::span<const SymbolStream> streams, size_t L) {
  AgreementTracker tracker(L);
  for (bool a : agreement_stream(streams)) tracker.push(a);
  CoincidenceReport r;
  r.horizon = tracker.position();
  r.window = L;
  r.t0 = tracker.t0();
  if (r.t0) r.t_end = *r.t0 + L;
  r.max_run = tracker.max_run();
  r.agreement_count = tracker.agreements();
  return r;
}

/// Left/right half of every coordinate: true means x >= 1/2.
struct QuadrantLabel {
  std::vector<bool> right;

  std::string to_string() const {
    std::string s;
    for (bool r : right) s += r ? 'R' : 'L';
    return s;
  }
  friend bool operator==(const QuadrantLabel&, const QuadrantLabel&) = default;
};

inline QuadrantLabel quadrant_of(std::span<const Rational> points) {
  const Rational half = make_rational(1, 2);
  QuadrantLabel q;
  for (const auto& x : points) {
    if (x < 0 || x >= 1) throw DomainError("point " + rawcode::to_string(x) + " outside [0,1)");
    q.right.push_back(!(x < half));
  }
  return q;
}

/// How the N initial points of one sample are drawn.
enum class Sampler {
  independent,  // N independent points
  diagonal,     // one point repeated N times
  offset,       // x, x + d, x + 2d, ... (mod 1)
  cross_halves, // alternating halves: [0,1/2), [1/2,1), [0,1/2), ...
};

inline const char* to_string(Sampler s) {
  switch (s) {
    case Sampler::independent: return "independent";
    case Sampler::diagonal: return "diagonal";
    case Sampler::offset: return "offset";
    case Sampler::cross_halves: return "cross-halves";
  }
  return "?";
}

struct CoincidenceQuery {
  IntervalMap map;
  Partition partition;
  size_t trajectories = 2; // N
  size_t window = 1;       // L
  size_t horizon = 0;
  size_t samples = 1;
  std::uint64_t seed = 0;
  Sampler sampler = Sampler::independent;
  std::optional<Rational> offset; // for Sampler::offset

  void validate() const {
    if (trajectories < 2) throw InputError("N must be at least 2");
    if (window < 1) throw InputError("L must be at least 1");
    if (horizon < window + 1) throw InputError("horizon must be at least L + 1");
    if (samples < 1) throw InputError("samples must be positive");
    if (sampler == Sampler::offset && !offset) throw InputError("offset sampler needs an offset");
  }
};

/// Outcome of one N-tuple of trajectories.
struct SampleOutcome {
  std::optional<size_t> t0;
  size_t max_run = 0;            // over the positions actually scanned
  size_t agreements = 0;
  size_t scanned = 0;            // number of positions scanned
  std::optional<size_t> max_run_at_checkpoint;
  size_t quadrant_violations = 0;
};

/// How far each sample is scanned.
struct ScanOptions {
  bool stop_at_first_window = true;
  std::optional<size_t> checkpoint; // record max_run over positions < checkpoint
  bool audit_quadrants = false;     // check every orbit stays in its initial half
};

/// Initial trajectories of sample `index` (substreams index*N + i of the
/// master seed).
inline std::vector<TrajectorySource> sample_sources(const CoincidenceQuery& q, size_t index) {
  std::vector<TrajectorySource> out;
  out.reserve(q.trajectories);
  const size_t base = index * q.trajectories;
  switch (q.sampler) {
    case Sampler::independent:
      for (size_t i = 0; i < q.trajectories; ++i)
        out.push_back(make_sampled_source(q.map, SeedSpec{q.seed, base + i}, q.horizon));
      break;
    case Sampler::diagonal:
      for (size_t i = 0; i < q.trajectories; ++i)
        out.push_back(make_sampled_source(q.map, SeedSpec{q.seed, base}, q.horizon));
      break;
    case Sampler::cross_halves:
      for (size_t i = 0; i < q.trajectories; ++i)
        out.push_back(make_sampled_source(q.map, SeedSpec{q.seed, base + i}, q.horizon, i % 2 == 1));
      break;
    case Sampler::offset: {
      TrajectorySource first = make_sampled_source(q.map, SeedSpec{q.seed, base}, q.horizon);
      const Rational x = first.current();
      const bool shift = q.map.backend() == Backend::shift_stream;
      out.push_back(std::move(first));
      for (size_t i = 1; i < q.trajectories; ++i) {
        const Rational xi = frac(x + Rational(static_cast<long>(i)) * *q.offset);
        if (shift) out.emplace_back(q.map, xi, q.horizon + 64);
        else out.emplace_back(q.map, xi);
      }
      break;
    }
  }
  return out;
}

/// Codes the N trajectories of one sample and scans their agreement.
inline SampleOutcome scan_sample(const CoincidenceQuery& q, size_t index, const ScanOptions& opt) {
  std::vector<CodeCursor> cursors;
  for (auto& src : sample_sources(q, index)) cursors.emplace_back(std::move(src), q.partition);
  AgreementTracker tracker(q.window);
  SampleOutcome out;
  const size_t n = cursors.size();

  if (opt.audit_quadrants) {
    const Partition halves = Partition::binary();
    std::vector<Encoder> quadrant;
    std::vector<Symbol> initial;
    for (auto& c : cursors) quadrant.emplace_back(halves, c.source());
    for (size_t t = 0; t < q.horizon; ++t) {
      Symbol first = cursors[0].next();
      bool agree = true;
      for (size_t i = 0; i < n; ++i) {
        if (i > 0) agree = (cursors[i].next() == first) && agree;
        const Symbol half = quadrant[i](cursors[i].source());
        if (t == 0) initial.push_back(half);
        else if (half != initial[i]) ++out.quadrant_violations;
      }
      tracker.push(agree);
      if (opt.checkpoint && tracker.position() == *opt.checkpoint) out.max_run_at_checkpoint = tracker.max_run();
      if (opt.stop_at_first_window && tracker.t0()) break;
    }
  } else {
    std::vector<std::vector<Symbol>> blocks(n);
    size_t block = opt.stop_at_first_window ? 64 : 4096;
    while (tracker.position() < q.horizon) {
      const size_t len = std::min(block, q.horizon - tracker.position());
      for (size_t i = 0; i < n; ++i) {
        blocks[i].resize(len);
        cursors[i].fill(blocks[i]);
      }
      bool done = false;
      for (size_t k = 0; k < len && !done; ++k) {
        bool agree = true;
        for (size_t i = 1; i < n; ++i) agree = agree && blocks[i][k] == blocks[0][k];
        tracker.push(agree);
        if (opt.checkpoint && tracker.position() == *opt.checkpoint) out.max_run_at_checkpoint = tracker.max_run();
        done = opt.stop_at_first_window && tracker.t0().has_value();
      }
      if (done) break;
      block = std::min<size_t>(block * 2, 1 << 14);
    }
  }
  out.t0 = tracker.t0();
  out.max_run = tracker.max_run();
  out.agreements = tracker.agreements();
  out.scanned = tracker.position();
  return out;
}

/// Aggregated hitting times. Every field is an exact count or an exact
/// rational, so results do not depend on how samples were scheduled.
struct HittingStats {
  size_t samples = 0;
  size_t successes = 0;
  size_t horizon = 0;
  size_t window = 0;
  size_t trajectories = 0;
  BigInt sum_t_end = 0;
  std::map<size_t, size_t> t_end_counts;
  /// counts of t_end in [2^j, 2^(j+1)), j = 0, 1, ...
  std::vector<size_t> log2_histogram;

  double success_rate() const { return samples ? static_cast<double>(successes) / static_cast<double>(samples) : 0.0; }
  std::optional<Rational> mean_t_end() const {
    if (successes == 0) return std::nullopt;
    return make_rational(sum_t_end, BigInt(static_cast<unsigned long>(successes)));
  }
};

inline HittingStats aggregate(const CoincidenceQuery& q, const std::vector<SampleOutcome>& outcomes) {
  HittingStats s;
  s.samples = outcomes.size();
  s.horizon = q.horizon;
  s.window = q.window;
  s.trajectories = q.trajectories;
  for (const auto& o : outcomes) {
    if (!o.t0) continue;
    const size_t t_end = *o.t0 + q.window;
    ++s.successes;
    s.sum_t_end += BigInt(static_cast<unsigned long>(t_end));
    ++s.t_end_counts[t_end];
    size_t bin = 0;
    while ((size_t{2} << bin) <= t_end) ++bin;
    if (s.log2_histogram.size() <= bin) s.log2_histogram.resize(bin + 1, 0);
    ++s.log2_histogram[bin];
  }
  return s;
}

inline std::vector<SampleOutcome> run_samples(const CoincidenceQuery& q, const ScanOptions& opt,
                                              unsigned workers = default_workers()) {
  q.validate();
  return parallel_map(q.samples, workers, [&](size_t i) { return scan_sample(q, i, opt); });
}

/// Monte Carlo form of the coincidence theorem: for each sampled N-tuple,
/// the first t0 whose window t0+1..t0+L carries identical codes.
inline HittingStats hitting_experiment(const CoincidenceQuery& q, unsigned workers = default_workers()) {
  return aggregate(q, run_samples(q, ScanOptions{}, workers));
}

struct BridgeScenarioResult {
  HittingStats stats;
  size_t quadrant_violations = 0;
  bool quadrants_invariant() const { return quadrant_violations == 0; }
};

/// Bridge map with partition bridge:k, pairs drawn across the two invariant
/// halves. Every orbit pair is followed over the whole horizon to audit
/// that each coordinate stays in its initial half.
inline BridgeScenarioResult bridge_scenario(unsigned k, size_t L, size_t samples, size_t horizon, std::uint64_t seed,
                                            unsigned workers = default_workers()) {
  CoincidenceQuery q{make_bridge_map(), Partition::bridge(k), 2, L, horizon, samples, seed, Sampler::cross_halves, {}};
  ScanOptions opt;
  opt.stop_at_first_window = false;
  opt.audit_quadrants = true;
  auto outcomes = run_samples(q, opt, workers);
  BridgeScenarioResult r;
  r.stats = aggregate(q, outcomes);
  for (const auto& o : outcomes) r.quadrant_violations += o.quadrant_violations;
  return r;
}

/// Largest L such that two rotation orbits at distance `offset` can share L
/// consecutive code symbols: max L with  ∩_{j<L} (S - j*alpha) != ∅, where
/// S = {z : z and z + offset lie in the same partition element}. nullopt if
/// the bound reaches `cap`.
inline std::optional<size_t> rotation_run_bound(const IntervalMap& rotation, const Partition& partition,
                                                const Rational& offset, size_t cap = 1 << 20) {
  if (!rotation.rotation_angle()) throw InputError("rotation_run_bound needs a rotation map");
  const Rational& alpha = *rotation.rotation_angle();
  IntervalSet same;
  for (const auto& e : partition.elements()) {
    IntervalSet elem(e.lo, e.hi);
    same = same.unite(elem.intersect(elem.translate_mod1(-offset)));
  }
  if (same.empty()) return 0;
  IntervalSet inter = same;
  for (size_t L = 1; L < cap; ++L) {
    IntervalSet next = inter.intersect(same.translate_mod1(-Rational(static_cast<long>(L)) * alpha));
    if (next.empty()) return L;
    inter = std::move(next);
  }
  return std::nullopt;
}

} // namespace rawcode
