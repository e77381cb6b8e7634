#ifndef RESIDKIT_RNG_HPP
#define RESIDKIT_RNG_HPP

#include <cstdint>
#include <random>

namespace residkit {

// Deterministic random stream. mt19937_64 output is fixed by the standard,
// so a given seed gives the same draw sequence on every platform; workers
// never share a stream, they derive private ones from (master seed, index).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  // Substream derivation via splitmix64-style mixing.
  static std::uint64_t mix(std::uint64_t z);
  static RngStream derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();
  double exponential() ;                 // rate 1
  double gamma(double shape);            // scale 1, Marsaglia-Tsang
  double beta(double a, double b);

 private:
  std::mt19937_64 gen_;
};

}  // namespace residkit

#endif
