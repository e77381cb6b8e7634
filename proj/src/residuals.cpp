#include "residkit/residuals.hpp"

#include <cmath>

#include "residkit/errors.hpp"
#include "residkit/stdnormal.hpp"

namespace residkit {

double standard_residual(double y, const PredictiveDistribution& d) {
  if (!std::isfinite(y)) throw DomainError("standard_residual: y must be finite");
  auto [mu, sd] = d.mean_sd();
  if (sd <= 0.0) throw DegenerateError("standard_residual: predictive sd is zero");
  return (y - mu) / sd;
}

PercentileResidual percentile_residual(double y, const PredictiveDistribution& d,
                                       double trunc_bound) {
  if (!std::isfinite(y)) throw DomainError("percentile_residual: y must be finite");
  if (!(trunc_bound > 0.0)) throw DomainError("percentile_residual: trunc_bound must be > 0");
  double u = d.cdf(y);
  if (d.is_discrete()) u -= 0.5 * d.point_mass(y);
  if (u < 0.0) u = 0.0;
  if (u > 1.0) u = 1.0;
  if (u <= 0.0) return {u, -trunc_bound, true};
  if (u >= 1.0) return {u, trunc_bound, true};
  double r = norm_quantile(u);
  if (r > trunc_bound) return {u, trunc_bound, true};
  if (r < -trunc_bound) return {u, -trunc_bound, true};
  return {u, r, false};
}

BatchResult batch_residuals(const std::vector<std::pair<std::string, double>>& observations,
                            const std::map<std::string, PredictiveDistribution>& dists,
                            double trunc_bound) {
  if (!(trunc_bound > 0.0)) throw DomainError("batch_residuals: trunc_bound must be > 0");
  BatchResult out;
  out.records.reserve(observations.size());
  for (const auto& [unit_id, y] : observations) {
    auto it = dists.find(unit_id);
    if (it == dists.end()) {
      out.errors.push_back({unit_id, MissingDistribution(unit_id).what()});
      continue;
    }
    const PredictiveDistribution& d = it->second;
    try {
      ResidualRecord rec;
      rec.unit_id = unit_id;
      rec.y = y;
      double rs = standard_residual(y, d);
      if (rs > trunc_bound) {
        rec.r_star = trunc_bound;
        rec.r_star_truncated = true;
      } else if (rs < -trunc_bound) {
        rec.r_star = -trunc_bound;
        rec.r_star_truncated = true;
      } else {
        rec.r_star = rs;
      }
      PercentileResidual pr = percentile_residual(y, d, trunc_bound);
      rec.percentile = pr.percentile;
      rec.r_ddag = pr.r_ddag;
      rec.r_ddag_truncated = pr.truncated;
      out.records.push_back(std::move(rec));
    } catch (const Error& e) {
      out.errors.push_back({unit_id, e.what()});
    }
  }
  return out;
}

}  // namespace residkit
