#ifndef RESIDKIT_RESIDUALS_HPP
#define RESIDKIT_RESIDUALS_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "residkit/distribution.hpp"

namespace residkit {

constexpr double kDefaultTruncBound = 5.0;

struct ResidualRecord {
  std::string unit_id;
  double y = 0.0;
  double percentile = 0.0;  // half-corrected location of y in D
  double r_star = 0.0;
  double r_ddag = 0.0;
  bool r_star_truncated = false;
  bool r_ddag_truncated = false;
};

// (y - mean) / sd under d, untruncated. Throws DegenerateError when sd = 0.
double standard_residual(double y, const PredictiveDistribution& d);

struct PercentileResidual {
  double percentile;
  double r_ddag;
  bool truncated;
};

// Gaussian quantile of the percentile location of y in d. Continuous kinds
// use cdf(y); atom-bearing kinds subtract half the point mass at y first.
// Locations of 0 or 1 map to -/+ trunc_bound with the truncated flag set.
PercentileResidual percentile_residual(double y, const PredictiveDistribution& d,
                                       double trunc_bound = kDefaultTruncBound);

struct BatchError {
  std::string unit_id;
  std::string message;
};

struct BatchResult {
  std::vector<ResidualRecord> records;  // input order, failed units omitted
  std::vector<BatchError> errors;
};

// Per-unit residuals; per-unit failures (missing distribution, degenerate
// scale) are collected rather than aborting the batch.
BatchResult batch_residuals(const std::vector<std::pair<std::string, double>>& observations,
                            const std::map<std::string, PredictiveDistribution>& dists,
                            double trunc_bound = kDefaultTruncBound);

}  // namespace residkit

#endif
