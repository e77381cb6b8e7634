#include "residkit/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "residkit/errors.hpp"
#include "residkit/special.hpp"
#include "residkit/stdnormal.hpp"

namespace residkit {

double canonical_round12(double x) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", x);
  return std::strtod(buf, nullptr);
}

namespace {

using namespace dist;

bool finite(double x) { return std::isfinite(x); }

// Safeguarded Newton on a monotone CDF: keeps a bracket [xlo, xhi] with
// cdf(xlo) < u < cdf(xhi), falls back to bisection whenever the Newton step
// leaves the bracket. Terminates on |cdf(x) - u| < utol; the tolerance
// tightens proportionally in the tails so tail quantiles keep relative
// accuracy (an absolute 1e-10 band is meaningless when u itself is 1e-14).
template <typename Cdf, typename Pdf>
double invert_cdf(const Cdf& cdf, const Pdf& pdf, double xlo, double xhi, double u) {
  double utol = std::min(1e-10, 1e-8 * std::min(u, 1.0 - u));
  utol = std::max(utol, u <= 0.5 ? 1e-15 * u : 2.5e-16);
  double x = 0.5 * (xlo + xhi);
  for (int it = 0; it < 200; ++it) {
    double c = cdf(x);
    double err = c - u;
    if (std::fabs(err) < utol) return x;
    if (err > 0.0)
      xhi = x;
    else
      xlo = x;
    double dens = pdf(x);
    double step = (dens > 0.0) ? err / dens : 0.0;
    double xn = x - step;
    if (!(xn > xlo && xn < xhi)) xn = 0.5 * (xlo + xhi);
    if (xn == x) return x;
    x = xn;
  }
  return x;
}

double binomial_pmf(int n, double p, int k) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  double lg = log_gamma_fn(n + 1.0) - log_gamma_fn(k + 1.0) - log_gamma_fn(n - k + 1.0) +
              k * std::log(p) + (n - k) * std::log1p(-p);
  return std::exp(lg);
}

double poisson_pmf(double lambda, int k) {
  if (k < 0) return 0.0;
  return std::exp(-lambda + k * std::log(lambda) - log_gamma_fn(k + 1.0));
}

}  // namespace

PredictiveDistribution PredictiveDistribution::normal(double mu, double sigma) {
  return PredictiveDistribution(dist::Normal{mu, sigma});
}
PredictiveDistribution PredictiveDistribution::log_normal(double mu_log, double sigma_log) {
  return PredictiveDistribution(dist::LogNormal{mu_log, sigma_log});
}
PredictiveDistribution PredictiveDistribution::beta(double a, double b) {
  return PredictiveDistribution(dist::Beta{a, b});
}
PredictiveDistribution PredictiveDistribution::gamma(double shape, double rate) {
  return PredictiveDistribution(dist::Gamma{shape, rate});
}
PredictiveDistribution PredictiveDistribution::exponential(double rate) {
  return PredictiveDistribution(dist::Exponential{rate});
}
PredictiveDistribution PredictiveDistribution::uniform(double lo, double hi) {
  return PredictiveDistribution(dist::Uniform{lo, hi});
}
PredictiveDistribution PredictiveDistribution::bernoulli(double p) {
  return PredictiveDistribution(dist::Bernoulli{p});
}
PredictiveDistribution PredictiveDistribution::binomial(int n, double p) {
  return PredictiveDistribution(dist::Binomial{n, p});
}
PredictiveDistribution PredictiveDistribution::poisson(double lambda) {
  return PredictiveDistribution(dist::Poisson{lambda});
}
PredictiveDistribution PredictiveDistribution::point_mass_at(double c) {
  return PredictiveDistribution(dist::PointMass{c});
}
PredictiveDistribution PredictiveDistribution::empirical(std::vector<double> draws) {
  return PredictiveDistribution(dist::Empirical{std::move(draws)});
}

PredictiveDistribution::PredictiveDistribution(DistParams params) : params_(std::move(params)) {
  if (auto* e = std::get_if<Empirical>(&params_)) {
    for (double& v : e->draws) v = canonical_round12(v);
    std::sort(e->draws.begin(), e->draws.end());
  }
  validate();
}

void PredictiveDistribution::validate() const {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          if (!finite(p.mu) || !(p.sigma > 0.0)) throw DomainError("Normal: sigma must be > 0");
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          if (!finite(p.mu_log) || !(p.sigma_log > 0.0))
            throw DomainError("LogNormal: sigma_log must be > 0");
        } else if constexpr (std::is_same_v<T, Beta>) {
          if (!(p.a > 0.0) || !(p.b > 0.0)) throw DomainError("Beta: a, b must be > 0");
        } else if constexpr (std::is_same_v<T, Gamma>) {
          if (!(p.shape > 0.0) || !(p.rate > 0.0))
            throw DomainError("Gamma: shape, rate must be > 0");
        } else if constexpr (std::is_same_v<T, Exponential>) {
          if (!(p.rate > 0.0)) throw DomainError("Exponential: rate must be > 0");
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (!finite(p.lo) || !finite(p.hi) || !(p.lo < p.hi))
            throw DomainError("Uniform: need lo < hi");
        } else if constexpr (std::is_same_v<T, Bernoulli>) {
          if (!(p.p >= 0.0 && p.p <= 1.0)) throw DomainError("Bernoulli: p must lie in [0,1]");
        } else if constexpr (std::is_same_v<T, Binomial>) {
          if (p.n < 1 || !(p.p >= 0.0 && p.p <= 1.0))
            throw DomainError("Binomial: need n >= 1 and p in [0,1]");
        } else if constexpr (std::is_same_v<T, Poisson>) {
          if (!(p.lambda > 0.0)) throw DomainError("Poisson: lambda must be > 0");
        } else if constexpr (std::is_same_v<T, PointMass>) {
          if (!finite(p.c)) throw DomainError("PointMass: c must be finite");
        } else if constexpr (std::is_same_v<T, Empirical>) {
          if (p.draws.size() < 2) throw DomainError("Empirical: need at least 2 draws");
          for (double v : p.draws)
            if (!finite(v)) throw DomainError("Empirical: draws must be finite");
        }
      },
      params_);
}

std::string PredictiveDistribution::kind_name() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) return "Normal";
        if constexpr (std::is_same_v<T, LogNormal>) return "LogNormal";
        if constexpr (std::is_same_v<T, Beta>) return "Beta";
        if constexpr (std::is_same_v<T, Gamma>) return "Gamma";
        if constexpr (std::is_same_v<T, Exponential>) return "Exponential";
        if constexpr (std::is_same_v<T, Uniform>) return "Uniform";
        if constexpr (std::is_same_v<T, Bernoulli>) return "Bernoulli";
        if constexpr (std::is_same_v<T, Binomial>) return "Binomial";
        if constexpr (std::is_same_v<T, Poisson>) return "Poisson";
        if constexpr (std::is_same_v<T, PointMass>) return "PointMass";
        if constexpr (std::is_same_v<T, Empirical>) return "Empirical";
      },
      params_);
}

bool PredictiveDistribution::is_discrete() const {
  return std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        return std::is_same_v<T, Bernoulli> || std::is_same_v<T, Binomial> ||
               std::is_same_v<T, Poisson> || std::is_same_v<T, PointMass> ||
               std::is_same_v<T, Empirical>;
      },
      params_);
}

double PredictiveDistribution::cdf(double y) const {
  if (!std::isfinite(y)) throw DomainError("cdf: y must be finite");
  return std::visit(
      [y](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return norm_cdf(y, p.mu, p.sigma);
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          if (y <= 0.0) return 0.0;
          return norm_cdf(std::log(y), p.mu_log, p.sigma_log);
        } else if constexpr (std::is_same_v<T, Beta>) {
          return reg_inc_beta(p.a, p.b, y);
        } else if constexpr (std::is_same_v<T, Gamma>) {
          if (y <= 0.0) return 0.0;
          return reg_inc_gamma_lower(p.shape, p.rate * y);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          if (y <= 0.0) return 0.0;
          return -std::expm1(-p.rate * y);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (y <= p.lo) return 0.0;
          if (y >= p.hi) return 1.0;
          return (y - p.lo) / (p.hi - p.lo);
        } else if constexpr (std::is_same_v<T, Bernoulli>) {
          if (y < 0.0) return 0.0;
          if (y < 1.0) return 1.0 - p.p;
          return 1.0;
        } else if constexpr (std::is_same_v<T, Binomial>) {
          double k = std::floor(y);
          if (k < 0.0) return 0.0;
          if (k >= p.n) return 1.0;
          // P(X <= k) through the incomplete beta identity.
          if (p.p <= 0.0) return 1.0;
          if (p.p >= 1.0) return 0.0;
          return reg_inc_beta(p.n - k, k + 1.0, 1.0 - p.p);
        } else if constexpr (std::is_same_v<T, Poisson>) {
          double k = std::floor(y);
          if (k < 0.0) return 0.0;
          return reg_inc_gamma_upper(k + 1.0, p.lambda);
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return y >= p.c ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, Empirical>) {
          double yc = canonical_round12(y);
          auto it = std::upper_bound(p.draws.begin(), p.draws.end(), yc);
          return static_cast<double>(it - p.draws.begin()) / p.draws.size();
        }
      },
      params_);
}

double PredictiveDistribution::inv_cdf(double u) const {
  bool continuous = is_continuous();
  if (continuous && !(u > 0.0 && u < 1.0))
    throw DomainError("inv_cdf: u must lie in (0,1) for continuous kinds");
  if (!continuous && !(u >= 0.0 && u <= 1.0))
    throw DomainError("inv_cdf: u must lie in [0,1]");
  return std::visit(
      [u, this](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return norm_quantile(u, p.mu, p.sigma);
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          return std::exp(norm_quantile(u, p.mu_log, p.sigma_log));
        } else if constexpr (std::is_same_v<T, Beta>) {
          auto c = [&p](double x) { return reg_inc_beta(p.a, p.b, x); };
          auto d = [this](double x) { return density(x); };
          return invert_cdf(c, d, 0.0, 1.0, u);
        } else if constexpr (std::is_same_v<T, Gamma>) {
          auto c = [&p](double x) { return reg_inc_gamma_lower(p.shape, p.rate * x); };
          auto d = [this](double x) { return density(x); };
          double hi = (p.shape + 10.0 * std::sqrt(p.shape) + 10.0) / p.rate;
          while (c(hi) < u) hi *= 2.0;
          return invert_cdf(c, d, 0.0, hi, u);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return -std::log1p(-u) / p.rate;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return p.lo + u * (p.hi - p.lo);
        } else if constexpr (std::is_same_v<T, Bernoulli>) {
          return u <= 1.0 - p.p ? 0.0 : 1.0;
        } else if constexpr (std::is_same_v<T, Binomial>) {
          double cum = 0.0;
          for (int k = 0; k < p.n; ++k) {
            cum += binomial_pmf(p.n, p.p, k);
            if (cum >= u) return k;
          }
          return p.n;
        } else if constexpr (std::is_same_v<T, Poisson>) {
          double cum = 0.0;
          int cap = static_cast<int>(p.lambda + 20.0 * std::sqrt(p.lambda) + 200.0);
          for (int k = 0; k < cap; ++k) {
            cum += poisson_pmf(p.lambda, k);
            if (cum >= u) return k;
          }
          return cap;
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return p.c;
        } else if constexpr (std::is_same_v<T, Empirical>) {
          // inf{y : cdf(y) >= u}, searched with the same (i+1)/n arithmetic
          // the cdf uses so the two stay consistent at step boundaries.
          std::size_t n = p.draws.size();
          std::size_t lo = 0, hi = n - 1;
          while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (static_cast<double>(mid + 1) / static_cast<double>(n) >= u)
              hi = mid;
            else
              lo = mid + 1;
          }
          return p.draws[lo];
        }
      },
      params_);
}

double PredictiveDistribution::point_mass(double y) const {
  return std::visit(
      [y](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Bernoulli>) {
          if (y == 0.0) return 1.0 - p.p;
          if (y == 1.0) return p.p;
          return 0.0;
        } else if constexpr (std::is_same_v<T, Binomial>) {
          if (y != std::floor(y)) return 0.0;
          return binomial_pmf(p.n, p.p, static_cast<int>(y));
        } else if constexpr (std::is_same_v<T, Poisson>) {
          if (y != std::floor(y) || y < 0.0) return 0.0;
          return poisson_pmf(p.lambda, static_cast<int>(y));
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return canonical_round12(y) == canonical_round12(p.c) ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, Empirical>) {
          double yc = canonical_round12(y);
          auto range = std::equal_range(p.draws.begin(), p.draws.end(), yc);
          return static_cast<double>(range.second - range.first) / p.draws.size();
        } else {
          return 0.0;
        }
      },
      params_);
}

PredictiveDistribution::Moments PredictiveDistribution::mean_sd() const {
  return std::visit(
      [](const auto& p) -> Moments {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return {p.mu, p.sigma};
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          // Data-scale moments of exp(N(mu_log, sigma_log^2)).
          double s2 = p.sigma_log * p.sigma_log;
          double m = std::exp(p.mu_log + 0.5 * s2);
          return {m, m * std::sqrt(std::expm1(s2))};
        } else if constexpr (std::is_same_v<T, Beta>) {
          double s = p.a + p.b;
          return {p.a / s, std::sqrt(p.a * p.b / (s * s * (s + 1.0)))};
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return {p.shape / p.rate, std::sqrt(p.shape) / p.rate};
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return {1.0 / p.rate, 1.0 / p.rate};
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return {0.5 * (p.lo + p.hi), (p.hi - p.lo) / std::sqrt(12.0)};
        } else if constexpr (std::is_same_v<T, Bernoulli>) {
          return {p.p, std::sqrt(p.p * (1.0 - p.p))};
        } else if constexpr (std::is_same_v<T, Binomial>) {
          return {p.n * p.p, std::sqrt(p.n * p.p * (1.0 - p.p))};
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return {p.lambda, std::sqrt(p.lambda)};
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return {p.c, 0.0};
        } else if constexpr (std::is_same_v<T, Empirical>) {
          double n = static_cast<double>(p.draws.size());
          double mean = 0.0;
          for (double v : p.draws) mean += v;
          mean /= n;
          double ss = 0.0;
          for (double v : p.draws) ss += (v - mean) * (v - mean);
          return {mean, std::sqrt(ss / (n - 1.0))};
        }
      },
      params_);
}

double PredictiveDistribution::density(double y) const {
  return std::visit(
      [y](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return norm_pdf((y - p.mu) / p.sigma) / p.sigma;
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          if (y <= 0.0) return 0.0;
          return norm_pdf((std::log(y) - p.mu_log) / p.sigma_log) / (p.sigma_log * y);
        } else if constexpr (std::is_same_v<T, Beta>) {
          if (y <= 0.0 || y >= 1.0) return 0.0;
          return std::exp((p.a - 1.0) * std::log(y) + (p.b - 1.0) * std::log1p(-y) -
                          log_beta_fn(p.a, p.b));
        } else if constexpr (std::is_same_v<T, Gamma>) {
          if (y <= 0.0) return 0.0;
          return std::exp(p.shape * std::log(p.rate) + (p.shape - 1.0) * std::log(y) -
                          p.rate * y - log_gamma_fn(p.shape));
        } else if constexpr (std::is_same_v<T, Exponential>) {
          if (y < 0.0) return 0.0;
          return p.rate * std::exp(-p.rate * y);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (y < p.lo || y > p.hi) return 0.0;
          return 1.0 / (p.hi - p.lo);
        } else {
          throw DomainError("density: undefined for discrete kinds");
        }
      },
      params_);
}

double PredictiveDistribution::sample(RngStream& rng) const {
  return std::visit(
      [&rng, this](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return p.mu + p.sigma * rng.normal();
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          return std::exp(p.mu_log + p.sigma_log * rng.normal());
        } else if constexpr (std::is_same_v<T, Beta>) {
          return rng.beta(p.a, p.b);
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return rng.gamma(p.shape) / p.rate;
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return rng.exponential() / p.rate;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return p.lo + (p.hi - p.lo) * rng.uniform();
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return p.c;
        } else if constexpr (std::is_same_v<T, Empirical>) {
          std::size_t n = p.draws.size();
          auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
          if (idx >= n) idx = n - 1;
          return p.draws[idx];
        } else {
          // Discrete parametric kinds sample by generalized inverse.
          return inv_cdf(rng.uniform());
        }
      },
      params_);
}

}  // namespace residkit
