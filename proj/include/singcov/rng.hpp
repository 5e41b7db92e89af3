#pragma once

#include <cstdint>
#include <cmath>

namespace singcov {

// Counter-based generator built on the splitmix64 mixer. Each (key, counter)
// pair maps to an output independent of call order, so per-path substreams
// derived from (master_seed, path_index) are reproducible under any worker
// scheduling.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static CounterRng substream(std::uint64_t master_seed, std::uint64_t index) {
    return CounterRng(mix(master_seed ^ mix(0x9e3779b97f4a7c15ULL * (index + 1))));
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  // uniform on (0,1]; never returns 0 so log() below is safe
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Box-Muller, one normal per call (two uniforms consumed; no state carried
  // between calls so stream consumption stays predictable)
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace singcov
