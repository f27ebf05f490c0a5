// Longest common code run of two orbits as the horizon grows: bounded for
// a rotation at fixed offset, logarithmic growth for the doubling map.
#include <cstdio>

#include "rawcode/rawcode.hpp"

using namespace rawcode;

namespace {

size_t longest_run(const CoincidenceQuery& q) {
  ScanOptions opt;
  opt.stop_at_first_window = false;
  size_t best = 0;
  for (const auto& o : run_samples(q, opt)) best = std::max(best, o.max_run);
  return best;
}

} // namespace

int main() {
  const IntervalMap rot = make_rotation();
  const Rational d = make_rational(2, 5);
  const auto bound = rotation_run_bound(rot, Partition::binary(), d);
  std::printf("rotation by the golden mean, offset 2/5, binary partition: run bound %zu\n\n", *bound);
  std::printf("%10s %10s %10s\n", "horizon", "rotation", "doubling");
  for (size_t h = 1 << 8; h <= (1 << 18); h <<= 2) {
    CoincidenceQuery r{rot, Partition::binary(), 2, 64, h, 10, 3, Sampler::offset, d};
    CoincidenceQuery w{make_doubling_map(), Partition::binary(), 2, 64, h, 10, 3, Sampler::independent, {}};
    std::printf("%10zu %10zu %10zu\n", h, longest_run(r), longest_run(w));
  }
}
