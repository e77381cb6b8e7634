#ifndef RESIDKIT_DISTRIBUTION_HPP
#define RESIDKIT_DISTRIBUTION_HPP

#include <string>
#include <variant>
#include <vector>

#include "residkit/rng.hpp"

namespace residkit {

// Rounds to 12 significant decimal digits. Empirical draw sets and point
// masses compare values through this, so draws serialized through text
// round-trip to the same atoms.
double canonical_round12(double x);

namespace dist {

struct Normal {
  double mu, sigma;
};
struct LogNormal {
  double mu_log, sigma_log;
};
struct Beta {
  double a, b;
};
struct Gamma {
  double shape, rate;
};
struct Exponential {
  double rate;
};
struct Uniform {
  double lo, hi;
};
struct Bernoulli {
  double p;
};
struct Binomial {
  int n;
  double p;
};
struct Poisson {
  double lambda;
};
struct PointMass {
  double c;
};
struct Empirical {
  std::vector<double> draws;  // canonically rounded, sorted
};

}  // namespace dist

using DistParams =
    std::variant<dist::Normal, dist::LogNormal, dist::Beta, dist::Gamma, dist::Exponential,
                 dist::Uniform, dist::Bernoulli, dist::Binomial, dist::Poisson, dist::PointMass,
                 dist::Empirical>;

// A unit's working predictive law: a parametric continuous or discrete
// family, or an empirical draw set (e.g. MCMC predictive samples).
// Immutable after construction; safe to share across threads.
class PredictiveDistribution {
 public:
  static PredictiveDistribution normal(double mu, double sigma);
  static PredictiveDistribution log_normal(double mu_log, double sigma_log);
  static PredictiveDistribution beta(double a, double b);
  static PredictiveDistribution gamma(double shape, double rate);
  static PredictiveDistribution exponential(double rate);
  static PredictiveDistribution uniform(double lo, double hi);
  static PredictiveDistribution bernoulli(double p);
  static PredictiveDistribution binomial(int n, double p);
  static PredictiveDistribution poisson(double lambda);
  static PredictiveDistribution point_mass_at(double c);
  static PredictiveDistribution empirical(std::vector<double> draws);

  explicit PredictiveDistribution(DistParams params);

  const DistParams& params() const { return params_; }
  std::string kind_name() const;
  bool is_discrete() const;  // atom-bearing: Bernoulli, Binomial, Poisson, PointMass, Empirical
  bool is_continuous() const { return !is_discrete(); }

  // CDF; tails saturate at 0 and 1.
  double cdf(double y) const;

  // Quantile. Exact inverse for continuous kinds (bisection + Newton for
  // Beta/Gamma, tolerance 1e-10 in u-space); generalized inverse
  // inf{y : cdf(y) >= u} for discrete and Empirical kinds.
  double inv_cdf(double u) const;

  // pr(Y = y). Zero for continuous kinds; tie counting for Empirical uses
  // canonical rounding.
  double point_mass(double y) const;

  struct Moments {
    double mean;
    double sd;
  };
  // Closed-form moments for parametric kinds; sample mean and sd
  // (divisor n-1) for Empirical.
  Moments mean_sd() const;

  // Density, continuous kinds only. Throws DomainError for discrete kinds.
  double density(double y) const;

  double sample(RngStream& rng) const;

 private:
  void validate() const;
  DistParams params_;
};

}  // namespace residkit

#endif
