#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "zzsim/kernel.hpp"

namespace zzsim {

// Mixes a scenario seed with a stream name so every stochastic component
// draws from its own generator.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view name) {
  std::uint64_t x = detail::fnv1a(detail::kFnvOffset, name.data(), name.size()) ^ seed;
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view name) : engine_(derive_stream_seed(seed, name)) {}

  std::uint64_t next() { return engine_(); }

  // 53-bit uniform in [0, 1); platform independent unlike std::uniform_real_distribution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double probability) { return uniform() < probability; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace zzsim
