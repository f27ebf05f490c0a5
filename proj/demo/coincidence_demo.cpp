// Hitting times of coinciding code windows for the doubling map, compared
// with the run-waiting oracle, for a few (N, L).
#include <cstdio>

#include "rawcode/rawcode.hpp"

using namespace rawcode;

int main() {
  std::printf("%3s %3s %10s %12s %12s\n", "N", "L", "samples", "mean t_end", "oracle");
  for (auto [n, L, samples] : {std::tuple{2u, 2u, 20000u}, {2u, 4u, 20000u}, {2u, 8u, 5000u}, {3u, 4u, 5000u}}) {
    CoincidenceQuery q{make_doubling_map(), Partition::binary(), n, L, 1000000, samples, 7, Sampler::independent, {}};
    const HittingStats s = hitting_experiment(q);
    const Rational oracle = run_waiting_mean_chain(coincidence_rate(BernoulliSpec::uniform(2), n), L);
    std::printf("%3u %3u %10u %12.2f %12s\n", n, L, samples, to_double(*s.mean_t_end()), to_string(oracle).c_str());
  }

  // The bridge map keeps both halves invariant, yet pairs from opposite
  // halves still meet inside the straddling partition element.
  const BridgeScenarioResult b = bridge_scenario(2, 4, 500, 20000, 7);
  std::printf("\nbridge:2, L=4, cross-half pairs: success %.3f, mean t_end %.1f, quadrant violations %zu\n",
              b.stats.success_rate(), to_double(*b.stats.mean_t_end()), b.quadrant_violations);
}
