#include "residkit/calibration.hpp"

#include <cmath>
#include <stdexcept>

#include "residkit/errors.hpp"
#include "residkit/stdnormal.hpp"

namespace residkit {

namespace {

const double kClassifyTol = 1e-9;

void require_analytic(const PredictiveDistribution& d, const char* op) {
  if (std::holds_alternative<dist::PointMass>(d.params()))
    throw DegenerateError(std::string(op) + ": predictive sd is zero for PointMass");
  if (d.is_discrete())
    throw DomainError(std::string(op) + ": analytic calibration requires a continuous kind");
}

struct GaussMoments {
  double mu, sd;
};

GaussMoments moments(const PredictiveDistribution& d, const char* op) {
  auto [mu, sd] = d.mean_sd();
  if (!(sd > 0.0)) throw DegenerateError(std::string(op) + ": predictive sd is zero");
  return {mu, sd};
}

// Bisection for a monotone function on [1e-12, 1-1e-12]; stops at
// |f| < 1e-10 with a 200 iteration cap.
template <typename F>
double bisect_root(const F& f, const char* op) {
  double lo = 1e-12, hi = 1.0 - 1e-12;
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw RootNotBracketed(std::string(op) + ": no sign change on (0,1)");
  double x = 0.5;
  for (int it = 0; it < 200; ++it) {
    x = 0.5 * (lo + hi);
    double fx = f(x);
    if (std::fabs(fx) < 1e-10) return x;
    if ((fx > 0.0) == (fhi > 0.0)) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
  }
  return x;
}

// Nominal level x -> actual two-sided rejection probability under d.
double two_sided_actual(const PredictiveDistribution& d, const GaussMoments& m, double x) {
  double upper = m.mu + m.sd * norm_quantile(1.0 - 0.5 * x);
  double lower = m.mu + m.sd * norm_quantile(0.5 * x);
  return 1.0 - d.cdf(upper) + d.cdf(lower);
}

}  // namespace

void validate(const TestSpec& spec) {
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw DomainError("TestSpec: alpha must lie in (0,1)");
  if (spec.side == TestSide::TwoSided && spec.alpha > 0.5)
    throw DomainError("TestSpec: two-sided alpha must lie in (0, 0.5]");
}

std::string to_string(TestSide side) {
  switch (side) {
    case TestSide::Right: return "right";
    case TestSide::Left: return "left";
    default: return "two";
  }
}

std::string to_string(SizeClass c) {
  switch (c) {
    case SizeClass::Inflated: return "Inflated";
    case SizeClass::Exact: return "Exact";
    default: return "Conservative";
  }
}

double type1_error_standard(const PredictiveDistribution& d, const TestSpec& spec) {
  validate(spec);
  require_analytic(d, "type1_error_standard");
  GaussMoments m = moments(d, "type1_error_standard");
  switch (spec.side) {
    case TestSide::Right:
      return 1.0 - d.cdf(m.mu + m.sd * norm_quantile(1.0 - spec.alpha));
    case TestSide::Left:
      return d.cdf(m.mu + m.sd * norm_quantile(spec.alpha));
    default:
      return bisect_root(
          [&](double x) { return two_sided_actual(d, m, x) - spec.alpha; },
          "type1_error_standard");
  }
}

SizeClass classify_standard(const PredictiveDistribution& d, const TestSpec& spec) {
  validate(spec);
  require_analytic(d, "classify_standard");
  GaussMoments m = moments(d, "classify_standard");
  switch (spec.side) {
    case TestSide::Right: {
      double t_gauss = m.mu + m.sd * norm_quantile(1.0 - spec.alpha);
      double t_true = d.inv_cdf(1.0 - spec.alpha);
      if (t_gauss < t_true - kClassifyTol) return SizeClass::Inflated;
      if (t_gauss > t_true + kClassifyTol) return SizeClass::Conservative;
      return SizeClass::Exact;
    }
    case TestSide::Left: {
      double t_gauss = m.mu + m.sd * norm_quantile(spec.alpha);
      double t_true = d.inv_cdf(spec.alpha);
      if (t_gauss > t_true + kClassifyTol) return SizeClass::Inflated;
      if (t_gauss < t_true - kClassifyTol) return SizeClass::Conservative;
      return SizeClass::Exact;
    }
    default: {
      // The two-sided root lives on the calibration scale: a root above
      // alpha means the naive test under-rejects.
      double root = type1_error_standard(d, spec);
      if (root < spec.alpha - kClassifyTol) return SizeClass::Inflated;
      if (root > spec.alpha + kClassifyTol) return SizeClass::Conservative;
      return SizeClass::Exact;
    }
  }
}

double power_standard(const PredictiveDistribution& f, const PredictiveDistribution& d,
                      const TestSpec& spec) {
  validate(spec);
  require_analytic(d, "power_standard");
  GaussMoments m = moments(d, "power_standard");
  switch (spec.side) {
    case TestSide::Right:
      return 1.0 - f.cdf(m.mu + m.sd * norm_quantile(1.0 - spec.alpha));
    case TestSide::Left:
      return f.cdf(m.mu + m.sd * norm_quantile(spec.alpha));
    default:
      return 1.0 - f.cdf(m.mu + m.sd * norm_quantile(1.0 - 0.5 * spec.alpha)) +
             f.cdf(m.mu + m.sd * norm_quantile(0.5 * spec.alpha));
  }
}

double power_percentile(const PredictiveDistribution& f, const PredictiveDistribution& d,
                        const TestSpec& spec) {
  validate(spec);
  require_analytic(d, "power_percentile");
  switch (spec.side) {
    case TestSide::Right:
      return 1.0 - f.cdf(d.inv_cdf(1.0 - spec.alpha));
    case TestSide::Left:
      return f.cdf(d.inv_cdf(spec.alpha));
    default:
      return 1.0 - f.cdf(d.inv_cdf(1.0 - 0.5 * spec.alpha)) + f.cdf(d.inv_cdf(0.5 * spec.alpha));
  }
}

double calibrated_alpha(const PredictiveDistribution& d, const TestSpec& spec) {
  validate(spec);
  require_analytic(d, "calibrated_alpha");
  GaussMoments m = moments(d, "calibrated_alpha");
  switch (spec.side) {
    case TestSide::Right:
      return 1.0 - norm_cdf(d.inv_cdf(1.0 - spec.alpha), m.mu, m.sd);
    case TestSide::Left:
      return norm_cdf(d.inv_cdf(spec.alpha), m.mu, m.sd);
    default:
      return bisect_root(
          [&](double x) { return two_sided_actual(d, m, x) - spec.alpha; }, "calibrated_alpha");
  }
}

RddagLaw rddag_law(const PredictiveDistribution& f, const PredictiveDistribution& d, double r) {
  if (!std::isfinite(r)) throw DomainError("rddag_law: r must be finite");
  require_analytic(d, "rddag_law");
  if (f.is_discrete()) throw DomainError("rddag_law: f must be continuous");
  double u = norm_cdf(r);
  if (!(u > 0.0 && u < 1.0)) throw DomainError("rddag_law: Phi(r) underflows to 0 or 1");
  double q = d.inv_cdf(u);
  double dd = d.density(q);
  if (!(dd > 0.0)) throw DensityZero("rddag_law: d has zero density at the evaluation point");
  return {f.cdf(q), norm_pdf(r) * f.density(q) / dd};
}

CalibrationReport full_report(const PredictiveDistribution& f, const PredictiveDistribution& d,
                              const TestSpec& spec) {
  validate(spec);
  require_analytic(d, "full_report");
  CalibrationReport rep;
  rep.effective_alpha = type1_error_standard(d, spec);
  rep.classification = classify_standard(d, spec);
  rep.calibrated_alpha = calibrated_alpha(d, spec);
  rep.pow_star_raw = power_standard(f, d, spec);
  rep.pow_star_calibrated = power_standard(f, d, TestSpec{spec.side, rep.calibrated_alpha});
  rep.pow_ddag = power_percentile(f, d, spec);

  if (spec.side != TestSide::TwoSided) {
    if (std::fabs(rep.pow_star_calibrated - rep.pow_ddag) > 1e-9)
      throw std::logic_error("full_report: calibrated R* power and R# power disagree");
    // Size-power ordering (weak: F may be flat between the two thresholds).
    if (rep.classification == SizeClass::Inflated &&
        rep.pow_star_raw < rep.pow_ddag - 1e-9)
      throw std::logic_error("full_report: inflated size but lower raw power");
    if (rep.classification == SizeClass::Conservative &&
        rep.pow_star_raw > rep.pow_ddag + 1e-9)
      throw std::logic_error("full_report: conservative size but higher raw power");
    if (rep.classification == SizeClass::Exact &&
        std::fabs(rep.pow_star_raw - rep.pow_ddag) > 1e-6)
      throw std::logic_error("full_report: exact size but unequal powers");
  }
  return rep;
}

}  // namespace residkit
