#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "rawcode/rawcode.hpp"

using namespace rawcode;

namespace {

Rational r(long p, unsigned long q = 1) { return make_rational(p, q); }

// Independent SplitMix64 finaliser for pinning the generator.
std::uint64_t splitmix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace

TEST(Rational, ParsesFractionsAndDecimals) {
  EXPECT_EQ(parse_rational("3/4"), r(3, 4));
  EXPECT_EQ(parse_rational("6/8"), r(3, 4));
  EXPECT_EQ(parse_rational("0.25"), r(1, 4));
  EXPECT_EQ(parse_rational("-1.5"), r(-3, 2));
  EXPECT_EQ(parse_rational("7"), r(7));
  EXPECT_THROW(parse_rational("1/0"), InputError);
  EXPECT_THROW(parse_rational("abc"), InputError);
  EXPECT_THROW(parse_rational(""), InputError);
}

TEST(Rational, DyadicHelpers) {
  EXPECT_EQ(pow2(-3), r(1, 8));
  EXPECT_EQ(pow2(4), r(16));
  EXPECT_EQ(dyadic_exponent(r(3, 8)), 3UL);
  EXPECT_EQ(dyadic_exponent(r(0)), 0UL);
  EXPECT_FALSE(dyadic_exponent(r(1, 3)));
  EXPECT_EQ(frac(r(-1, 4)), r(3, 4));
  EXPECT_EQ(floor_of(r(-1, 4)), BigInt(-1));
  EXPECT_EQ(ceil_of(r(5, 4)), BigInt(2));
  const BigInt big = BigInt(1) << 100;
  EXPECT_EQ(from_u128(to_u128(big + 7)), big + 7);
}

TEST(Rng, PinnedAlgorithm) {
  EXPECT_STREQ(kRngVersion, "splitmix64-counter/v1");
  const SeedSpec seed{12345, 6};
  const std::uint64_t key = splitmix(splitmix(12345) ^ (6 * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  CounterRng rng(seed);
  for (std::uint64_t i = 0; i < 5; ++i) EXPECT_EQ(rng.next_u64(), splitmix(key + (i + 1) * 0x9E3779B97F4A7C15ULL));
}

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  CounterRng a(SeedSpec{7, 0}), b(SeedSpec{7, 0}), c(SeedSpec{7, 1}), d(SeedSpec{8, 0});
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    EXPECT_NE(va, c.next_u64());
    EXPECT_NE(va, d.next_u64());
  }
}

TEST(Rng, BelowIsInRangeAndCoversIt) {
  CounterRng rng(SeedSpec{1, 2});
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  const BigInt bound = (BigInt(1) << 130) + 3;
  for (int i = 0; i < 100; ++i) {
    const BigInt v = rng.below(bound);
    ASSERT_GE(v, 0);
    ASSERT_LT(v, bound);
  }
}

TEST(IntervalSet, MeasureExamples) {
  IntervalSet s({{r(0), r(1, 2)}, {r(3, 4), r(1)}});
  EXPECT_EQ(s.measure(), r(3, 4));
  EXPECT_EQ(IntervalSet().measure(), 0);
}

TEST(IntervalSet, CanonicalForm) {
  IntervalSet s({{r(1, 2), r(3, 4)}, {r(0), r(1, 4)}, {r(1, 4), r(1, 2)}, {r(3, 4), r(3, 4)}});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s, IntervalSet(r(0), r(3, 4)));
  EXPECT_EQ(IntervalSet(r(0), r(1, 3)).unite(IntervalSet(r(1, 3), r(1))), IntervalSet::unit());
}

TEST(IntervalSet, AlgebraMatchesPointwiseMembership) {
  // Random sets on the grid k/24; membership is checked at every grid cell
  // midpoint, which decides set identity for such sets.
  CounterRng rng(SeedSpec{99, 0});
  auto random_set = [&] {
    std::vector<Interval> parts;
    const int n = static_cast<int>(rng.below(4));
    for (int i = 0; i < n; ++i) {
      long a = static_cast<long>(rng.below(24)), b = static_cast<long>(rng.below(25));
      if (a > b) std::swap(a, b);
      parts.push_back({r(a, 24), r(b, 24)});
    }
    return IntervalSet(parts);
  };
  for (int trial = 0; trial < 300; ++trial) {
    const IntervalSet a = random_set(), b = random_set();
    const IntervalSet u = a.unite(b), i = a.intersect(b), c = a.complement(), m = a.minus(b);
    const Rational shift = r(static_cast<long>(rng.below(48)), 48);
    const IntervalSet t = a.translate_mod1(shift);
    Rational ma = 0;
    for (long k = 0; k < 48; ++k) {
      const Rational x = r(2 * k + 1, 96);
      const bool ia = a.contains(x), ib = b.contains(x);
      EXPECT_EQ(u.contains(x), ia || ib);
      EXPECT_EQ(i.contains(x), ia && ib);
      EXPECT_EQ(c.contains(x), !ia);
      EXPECT_EQ(m.contains(x), ia && !ib);
      EXPECT_EQ(t.contains(oracle::frac(x + shift)), ia);
      if (ia) ma += r(1, 48);
    }
    EXPECT_EQ(a.measure(), ma);
    EXPECT_EQ(t.measure(), ma);
    EXPECT_EQ(u.measure() + i.measure(), a.measure() + b.measure());
  }
}

TEST(Maps, EvalExamples) {
  const auto bridge = make_bridge_map(Backend::rational);
  EXPECT_EQ(eval_map(bridge, r(1, 5)), r(2, 5));
  EXPECT_EQ(eval_map(bridge, r(1, 2)), r(1, 2));
  EXPECT_EQ(eval_map(bridge, r(3, 10)), r(1, 10));
  EXPECT_EQ(eval_map(bridge, r(8, 10)), r(6, 10));
  EXPECT_EQ(eval_map(make_doubling_map(), r(3, 4)), r(1, 2));
  EXPECT_THROW(eval_map(bridge, r(1)), DomainError);
  EXPECT_THROW(eval_map(bridge, r(-1, 3)), DomainError);
}

TEST(Maps, BridgeKeepsLeftHalf) {
  const auto bridge = make_bridge_map();
  const IntervalSet left(r(0), r(1, 2));
  EXPECT_EQ(preimage(bridge, left), left);
}

TEST(Maps, RotationPrecision) {
  for (unsigned bits : {64u, 80u, 128u, 200u}) {
    const auto rot = make_rotation(bits);
    const Rational& alpha = *rot.rotation_angle();
    EXPECT_GE(BigInt(alpha.get_den()), BigInt(1) << bits);
    // |alpha - phi^-1| < 1/q^2, with phi^-1 = (sqrt5 - 1)/2: compare via
    // (2 alpha + 1)^2 - 5 = (2 alpha + 1 - sqrt5)(2 alpha + 1 + sqrt5).
    const Rational t = 2 * alpha + 1;
    const Rational gap = t * t - 5;
    const Rational q2 = Rational(BigInt(alpha.get_den()) * BigInt(alpha.get_den()));
    // |2 alpha + 1 - sqrt5| < |gap| / 4 since 2 alpha + 1 + sqrt5 > 4.
    EXPECT_LT(abs(gap) / 4, 2 / q2);
    EXPECT_EQ(eval_map(rot, r(0)), alpha);
    TrajectorySource src(rot, r(0));
    for (long t2 = 0; t2 < 50; ++t2) {
      EXPECT_EQ(src.current(), frac(Rational(t2) * alpha));
      src.advance();
    }
  }
  EXPECT_THROW(make_rotation(32), DomainError);
}

TEST(Maps, ClosureOnSampledPoints) {
  const std::vector<IntervalMap> maps{make_doubling_map(Backend::rational), make_bridge_map(Backend::rational),
                                      make_rotation(64, Backend::rational)};
  for (const auto& m : maps)
    for (std::uint64_t i = 0; i < 500; ++i) {
      const Rational y = m(sample_initial(SeedSpec{3, i}, 80));
      ASSERT_GE(y, 0);
      ASSERT_LT(y, 1);
    }
}

TEST(Maps, RejectsMalformedBranches) {
  EXPECT_THROW(IntervalMap("gap", {Branch{{r(0), r(1, 2)}, r(1), r(0)}}, Backend::rational), InputError);
  EXPECT_THROW(IntervalMap("escape", {Branch{{r(0), r(1)}, r(2), r(0)}}, Backend::rational), InputError);
  // slope 3 cannot use the shift-stream backend
  const std::vector<Branch> tripling{Branch{{r(0), r(1, 3)}, r(3), r(0)}, Branch{{r(1, 3), r(2, 3)}, r(3), r(-1)},
                                     Branch{{r(2, 3), r(1)}, r(3), r(-2)}};
  EXPECT_NO_THROW(IntervalMap("tripling", tripling, Backend::rational));
  EXPECT_THROW(IntervalMap("tripling", tripling, Backend::shift_stream), BackendError);
  EXPECT_THROW(IntervalMap("tripling", tripling, Backend::rotation_closed_form), BackendError);
}

TEST(Trajectory, IterateExamples) {
  TrajectorySource d(make_doubling_map(Backend::rational), r(1, 3));
  EXPECT_EQ(iterate(d, 3), (std::vector<Rational>{r(1, 3), r(2, 3), r(1, 3)}));
  TrajectorySource b(make_bridge_map(), r(1, 2), 200);
  for (const auto& x : iterate(b, 100)) EXPECT_EQ(x, r(1, 2));
  const auto rot = make_rotation();
  TrajectorySource z(rot, r(0));
  EXPECT_EQ(iterate(z, 2), (std::vector<Rational>{r(0), *rot.rotation_angle()}));
}

TEST(Trajectory, SampleInitial) {
  const SeedSpec seed{2024, 5};
  EXPECT_EQ(sample_initial(seed, 8), sample_initial(seed, 8));
  const Rational x = sample_initial(seed, 8);
  EXPECT_LE(dyadic_exponent(x).value_or(99), 8u);
  EXPECT_EQ(DyadicBits::of(r(1, 2), 8).value(), r(1, 2)); // bits 10000000
  EXPECT_TRUE(DyadicBits::of(r(1, 2), 8).digit(1));
  EXPECT_FALSE(DyadicBits::of(r(1, 2), 8).digit(2));
  double sum = 0;
  for (std::uint64_t i = 0; i < 100000; ++i) sum += to_double(sample_initial(SeedSpec{1, i}, 64));
  EXPECT_NEAR(sum / 100000, 0.5, 0.003);
}

TEST(Trajectory, ShiftStreamMatchesRationalIteration) {
  for (const auto& map : {make_doubling_map(), make_bridge_map()}) {
    const IntervalMap exact = map.with_backend(Backend::rational);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const size_t bits = 64 + 300;
      const DyadicBits db = DyadicBits::seeded(SeedSpec{11, s}, bits);
      TrajectorySource fast(map, db);
      TrajectorySource slow(exact, db.value());
      ASSERT_EQ(fast.max_time(), bits - 64);
      for (size_t t = 0; t < bits - 64; ++t) {
        const Rational x = slow.current();
        ASSERT_EQ(fast.current(), x) << map.name() << " t=" << t;
        // window = digits t+1..t+64 of x_t
        ASSERT_EQ(BigInt(from_u64(fast.shift_window())), floor_of(x * Rational(BigInt(1) << 64)));
        fast.advance();
        slow.advance();
      }
      EXPECT_THROW(fast.advance(), PrecisionError);
    }
  }
}

TEST(Trajectory, BridgeHalvesAreInvariant) {
  const auto bridge = make_bridge_map(Backend::rational);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const Rational x = sample_initial(SeedSpec{5, i}, 72);
    const Rational left = x / 2, right = x / 2 + r(1, 2);
    ASSERT_LT(bridge(left), r(1, 2));
    ASSERT_GE(bridge(right), r(1, 2));
  }
}

TEST(Trajectory, RotationClosedFormMatchesRationalIteration) {
  for (unsigned bits : {64u, 130u}) {
    const auto rot = make_rotation(bits);
    for (const Rational& x0 : {r(0), r(2, 5), r(12345, 65536)}) {
      TrajectorySource fast(rot, x0);
      TrajectorySource slow(rot.with_backend(Backend::rational), x0);
      for (int t = 0; t <= 1000; ++t) {
        ASSERT_EQ(fast.current(), slow.current()) << "t=" << t;
        fast.advance();
        slow.advance();
      }
    }
  }
}

TEST(Trajectory, PrecisionIsNeverSilentlyExceeded) {
  TrajectorySource s = make_sampled_source(make_doubling_map(), SeedSpec{1, 1}, 100);
  EXPECT_EQ(s.max_time(), 100u);
  EXPECT_THROW(iterate(s, 102), PrecisionError);
  // the explicit point 1/4 carries only 2 bits of budget
  TrajectorySource q(make_doubling_map(), r(1, 4));
  EXPECT_THROW(q.advance(), PrecisionError);
  EXPECT_THROW(TrajectorySource(make_doubling_map(), r(1, 3)), BackendError);
  // rotation horizon is bounded by sqrt(den alpha)
  const auto rot = make_rotation();
  TrajectorySource z(rot, r(0));
  EXPECT_THROW(z.check_can_advance(std::size_t{1} << 33), PrecisionError);
}
