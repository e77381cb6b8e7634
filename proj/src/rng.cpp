#include "residkit/rng.hpp"

#include <cmath>

#include "residkit/stdnormal.hpp"

namespace residkit {

std::uint64_t RngStream::mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream RngStream::derive(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return RngStream(mix(mix(mix(master) ^ a) ^ b));
}

double RngStream::normal() {
  // Inverse-CDF sampling keeps the stream consumption one draw per variate.
  return norm_quantile(uniform());
}

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::gamma(double shape) {
  if (shape < 1.0) {
    double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::beta(double a, double b) {
  double x = gamma(a);
  double y = gamma(b);
  return x / (x + y);
}

}  // namespace residkit
