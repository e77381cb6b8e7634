#ifndef RESIDKIT_SPECIAL_HPP
#define RESIDKIT_SPECIAL_HPP

namespace residkit {

double log_gamma_fn(double x);
double log_beta_fn(double a, double b);

// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double a, double b, double x);

// Regularized incomplete gamma: lower P(a, x) and upper Q(a, x) = 1 - P(a, x).
double reg_inc_gamma_lower(double a, double x);
double reg_inc_gamma_upper(double a, double x);

// Kolmogorov asymptotic survival function Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_sf(double lambda);

// Upper tail of a chi-square with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

}  // namespace residkit

#endif
