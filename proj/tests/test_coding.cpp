#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "rawcode/rawcode.hpp"

using namespace rawcode;

namespace {

Rational r(long p, unsigned long q = 1) { return make_rational(p, q); }

Partition ternary() { return Partition({r(1, 4), r(3, 4)}, "ternary"); }

std::vector<IntervalMap> builtin_maps() {
  return {make_doubling_map(), make_bridge_map(), make_rotation()};
}

// Supports pairwise disjoint and measures summing to one.
void expect_partition_of_unity(const RefinementTable& t) {
  IntervalSet seen;
  Rational total = 0;
  for (const auto& c : t.cylinders) {
    ASSERT_TRUE(seen.intersect(c.support).empty());
    ASSERT_EQ(c.measure, c.support.measure());
    ASSERT_GT(c.measure, 0);
    seen = seen.unite(c.support);
    total += c.measure;
  }
  EXPECT_EQ(total, 1);
  EXPECT_EQ(seen, IntervalSet::unit());
}

} // namespace

TEST(Partition, Builtins) {
  EXPECT_EQ(Partition::binary().size(), 2u);
  EXPECT_EQ(Partition::dyadic(3).size(), 8u);
  const Partition b2 = Partition::bridge(2);
  ASSERT_EQ(b2.size(), 3u);
  EXPECT_EQ(b2.element(1).lo, r(1, 4));
  EXPECT_EQ(b2.element(1).hi, r(3, 4));
  const Partition b3 = Partition::bridge(3);
  ASSERT_EQ(b3.size(), 7u);
  EXPECT_EQ(b3.element(3).lo, r(3, 8));
  EXPECT_EQ(b3.element(3).hi, r(5, 8));
  EXPECT_THROW(Partition::bridge(0), InputError);
  EXPECT_EQ(Partition::from_spec("dyadic:2"), Partition::dyadic(2));
  EXPECT_THROW(Partition::from_spec("dyadic:"), InputError);
  EXPECT_THROW(Partition::from_spec("hexagonal"), InputError);
}

TEST(Partition, FileGrammar) {
  std::istringstream ok("# three pieces\n0 1/4\n1/4 3/4  \n\n3/4 1\n");
  EXPECT_EQ(Partition::parse(ok), ternary());
  std::istringstream gap("0 1/4\n1/3 1\n");
  EXPECT_THROW(Partition::parse(gap), InputError);
  std::istringstream zero("0 1/2\n1/2 1/2\n1/2 1\n");
  EXPECT_THROW(Partition::parse(zero), InputError);
  std::istringstream junk("0 x\n");
  try {
    Partition::parse(junk, "p.txt");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("p.txt:1"), std::string::npos);
  }
}

TEST(Coding, EncodePointExamples) {
  EXPECT_EQ(encode_point(Partition::binary(), r(3, 10)), 0u);
  EXPECT_EQ(encode_point(Partition::binary(), r(1, 2)), 1u);
  EXPECT_EQ(encode_point(ternary(), r(1, 4)), 1u);
  EXPECT_THROW(encode_point(ternary(), r(1)), DomainError);
  EXPECT_THROW(encode_point(ternary(), r(-1, 2)), DomainError);
}

TEST(Coding, EncodeTrajectoryExamples) {
  const SymbolStream s =
      encode_trajectory(TrajectorySource(make_doubling_map(Backend::rational), r(1, 3)), Partition::binary(), 10);
  for (size_t t = 0; t < s.size(); ++t) EXPECT_EQ(s[t], t % 2);
  for (const Partition& p : {ternary(), Partition::bridge(2), Partition::bridge(4), Partition::binary()}) {
    const Symbol j = p.locate(r(1, 2));
    const SymbolStream f = encode_trajectory(TrajectorySource(make_bridge_map(), r(1, 2), 600), p, 500);
    for (Symbol v : f.symbols) ASSERT_EQ(v, j);
  }
}

TEST(Coding, DoublingSymbolsAreBinaryDigits) {
  const auto fast = make_doubling_map();
  const auto exact = fast.with_backend(Backend::rational);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const size_t horizon = 40;
    const DyadicBits bits = DyadicBits::seeded(SeedSpec{77, seed}, horizon + 64);
    const SymbolStream a = encode_trajectory(TrajectorySource(fast, bits), Partition::binary(), horizon);
    const auto b = oracle::code(oracle::doubling, bits.value(), {r(1, 2)}, horizon);
    for (size_t t = 0; t < horizon; ++t) {
      ASSERT_EQ(a[t], static_cast<Symbol>(bits.digit(t + 1)));
      ASSERT_EQ(static_cast<int>(a[t]), b[t]);
    }
    if (seed < 50) {
      const SymbolStream c = encode_trajectory(TrajectorySource(exact, bits.value()), Partition::binary(), horizon);
      ASSERT_EQ(a, c);
    }
  }
}

TEST(Coding, EncodersAgreeAcrossBackends) {
  // Every backend must code exactly like rational iteration, also for
  // partitions with many cuts.
  for (const std::string spec : {"binary", "dyadic:5", "bridge:3"}) {
    const Partition p = Partition::from_spec(spec);
    for (const auto& map : builtin_maps()) {
      const IntervalMap exact = map.with_backend(Backend::rational);
      for (std::uint64_t i = 0; i < 10; ++i) {
        TrajectorySource fast = make_sampled_source(map, SeedSpec{8, i}, 300);
        TrajectorySource slow(exact, fast.current());
        ASSERT_EQ(encode_trajectory(fast, p, 300), encode_trajectory(slow, p, 300)) << map.name() << " " << spec;
      }
    }
  }
}

TEST(Coding, CodeCursorBlocksMatchSingleSteps) {
  const Partition p = Partition::dyadic(2);
  TrajectorySource base = make_sampled_source(make_bridge_map(), SeedSpec{4, 4}, 1000);
  const SymbolStream whole = encode_trajectory(base, p, 1000);
  CodeCursor cursor(base, p);
  std::vector<Symbol> got;
  size_t block = 1;
  while (got.size() < 1000) {
    std::vector<Symbol> buf(std::min(block, 1000 - got.size()));
    cursor.fill(buf);
    got.insert(got.end(), buf.begin(), buf.end());
    block = block * 3 % 17 + 1;
  }
  EXPECT_EQ(got, whole.symbols);
}

TEST(Preimage, Examples) {
  EXPECT_EQ(preimage(make_doubling_map(), IntervalSet(r(0), r(1, 2))),
            IntervalSet({{r(0), r(1, 4)}, {r(1, 2), r(3, 4)}}));
  EXPECT_EQ(preimage(make_bridge_map(), IntervalSet(r(0), r(1, 2))), IntervalSet(r(0), r(1, 2)));
  const auto rot = make_rotation();
  const Rational& a = *rot.rotation_angle();
  EXPECT_EQ(preimage(rot, IntervalSet(r(1, 10), r(3, 10))),
            IntervalSet(r(1, 10), r(3, 10)).translate_mod1(-a));
}

TEST(Preimage, PreservesLebesgueMeasure) {
  CounterRng rng(SeedSpec{31, 0});
  for (const auto& map : builtin_maps())
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Interval> parts;
      for (int i = 0; i < 3; ++i) {
        Rational a = r(static_cast<long>(rng.below(1000)), 1000), b = r(static_cast<long>(rng.below(1001)), 1000);
        if (b < a) std::swap(a, b);
        parts.push_back({a, b});
      }
      const IntervalSet s(parts);
      const IntervalSet pre = preimage(map, s);
      ASSERT_EQ(pre.measure(), s.measure()) << map.name();
      // pointwise: x in T^-1 s iff T x in s
      for (int k = 0; k < 20; ++k) {
        const Rational x = r(static_cast<long>(rng.below(99991)), 99991);
        ASSERT_EQ(pre.contains(x), s.contains(map(x)));
      }
    }
}

TEST(Refine, Examples) {
  const RefinementTable t = refine(make_doubling_map(), Partition::binary(), 1);
  ASSERT_EQ(t.cylinders.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(t.cylinders[i].support, IntervalSet(r(static_cast<long>(i), 4), r(static_cast<long>(i + 1), 4)));
    EXPECT_EQ(t.cylinders[i].measure, r(1, 4));
  }
  EXPECT_EQ(t.cylinders[1].word, (std::vector<Symbol>{0, 1}));
  for (const auto& map : builtin_maps()) {
    const RefinementTable z = refine(map, ternary(), 0);
    ASSERT_EQ(z.cylinders.size(), 3u);
    for (Symbol j = 0; j < 3; ++j) {
      EXPECT_EQ(z.cylinders[j].word, std::vector<Symbol>{j});
      EXPECT_EQ(z.cylinders[j].support, IntervalSet(ternary().element(j).lo, ternary().element(j).hi));
    }
  }
  EXPECT_EQ(refine(make_doubling_map(), Partition::binary(), 5).total_measure(), 1);
  EXPECT_THROW(refine(make_doubling_map(), Partition::binary(), 21), ResourceError);
  EXPECT_NO_THROW(refine(make_bridge_map(), Partition::binary(), 2, 2));
}

TEST(Refine, PartitionPropertyForBuiltins) {
  for (const auto& map : builtin_maps())
    for (const Partition& p : {Partition::binary(), ternary()})
      for (size_t n = 0; n <= 10; ++n) expect_partition_of_unity(refine(map, p, n));
}

TEST(Refine, TelescopesIntoCommonRefinement) {
  for (const auto& map : builtin_maps())
    for (const Partition& p : {Partition::binary(), ternary(), Partition::bridge(2)}) {
      RefinementTable cur = refine(map, p, 0);
      for (size_t n = 0; n < 6; ++n) {
        const RefinementTable next = common_refinement(map, cur);
        const RefinementTable direct = refine(map, p, n + 1);
        ASSERT_EQ(next.cylinders.size(), direct.cylinders.size()) << map.name() << " n=" << n;
        for (size_t i = 0; i < next.cylinders.size(); ++i) {
          ASSERT_EQ(next.cylinders[i].word, direct.cylinders[i].word);
          ASSERT_EQ(next.cylinders[i].support, direct.cylinders[i].support);
        }
        cur = next;
      }
    }
}

TEST(Refine, DoublingCylinderMeasures) {
  const auto map = make_doubling_map();
  for (size_t n = 0; n < 10; ++n) {
    const RefinementTable t = refine(map, Partition::binary(), n);
    // every binary word of length n+1 is admissible with measure 2^-(n+1)
    ASSERT_EQ(t.cylinders.size(), size_t{1} << (n + 1));
    for (const auto& c : t.cylinders) ASSERT_EQ(c.measure, pow2(-static_cast<long>(n + 1)));
  }
}

TEST(Refine, CylindersAreCodeClasses) {
  const std::vector<Rational> cuts{r(1, 4), r(3, 4)};
  const std::vector<std::pair<IntervalMap, std::function<Rational(const Rational&)>>> cases{
      {make_doubling_map(), oracle::doubling}, {make_bridge_map(), oracle::bridge}};
  for (const auto& [map, formula] : cases)
    for (size_t n = 0; n <= 10; n += 2) {
      const RefinementTable t = refine(map, ternary(), n);
      for (std::uint64_t i = 0; i < 200; ++i) {
        const Rational x = sample_initial(SeedSpec{55, i}, 90);
        const Rational y = i % 2 ? sample_initial(SeedSpec{56, i}, 90)
                                 : frac(x + pow2(-static_cast<long>(CounterRng(SeedSpec{57, i}).below(16))));
        const auto cx = oracle::code(formula, x, cuts, n + 1);
        const auto cy = oracle::code(formula, y, cuts, n + 1);
        const size_t ix = t.locate(x), iy = t.locate(y);
        ASSERT_EQ(std::vector<Symbol>(cx.begin(), cx.end()), t.cylinders[ix].word);
        ASSERT_EQ(ix == iy, cx == cy);
      }
    }
}

TEST(Refine, BridgeFixedPointNeighbourhood) {
  const unsigned k = 2;
  const auto map = make_bridge_map();
  for (size_t n = 0; n <= 8; ++n) {
    const RefinementTable t = refine(map, Partition::bridge(k), n);
    const Rational w = pow2(-static_cast<long>(k + n));
    const Interval nbhd{r(1, 2) - w, r(1, 2) + w};
    bool found = false;
    for (const auto& c : t.cylinders) found = found || c.support.contains(nbhd);
    EXPECT_TRUE(found) << "n=" << n;
  }
}
