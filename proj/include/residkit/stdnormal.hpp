#ifndef RESIDKIT_STDNORMAL_HPP
#define RESIDKIT_STDNORMAL_HPP

namespace residkit {

// Standard normal density phi(x).
double norm_pdf(double x);

// Standard normal CDF Phi(x), accurate to double precision in both tails.
double norm_cdf(double x);

// N(mu, sigma^2) CDF.
double norm_cdf(double x, double mu, double sigma);

// Inverse of Phi. Rational first pass (Acklam) followed by Halley
// refinement against norm_cdf; absolute error well below 1e-9 on
// u in [1e-12, 1 - 1e-12]. Throws DomainError for u outside (0,1).
double norm_quantile(double u);

// Inverse of the N(mu, sigma^2) CDF.
double norm_quantile(double u, double mu, double sigma);

}  // namespace residkit

#endif
