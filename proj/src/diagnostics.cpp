#include "residkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "residkit/errors.hpp"
#include "residkit/special.hpp"
#include "residkit/stdnormal.hpp"

namespace residkit {

namespace {

double pick(const ResidualRecord& rec, WhichResidual which) {
  return which == WhichResidual::Star ? rec.r_star : rec.r_ddag;
}

// Linear-interpolation sample quantile (the common "type 7" rule).
double sample_quantile(const std::vector<double>& sorted, double p) {
  std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double h = (static_cast<double>(n) - 1.0) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo >= n - 1) return sorted[n - 1];
  double w = h - static_cast<double>(lo);
  return sorted[lo] * (1.0 - w) + sorted[lo + 1] * w;
}

double raw_pvalue(double r, const TestSpec& spec) {
  switch (spec.side) {
    case TestSide::Right: return 1.0 - norm_cdf(r);
    case TestSide::Left: return norm_cdf(r);
    default: return 2.0 * (1.0 - norm_cdf(std::fabs(r)));
  }
}

}  // namespace

std::string to_string(Correction c) {
  switch (c) {
    case Correction::None: return "none";
    case Correction::Bonferroni: return "bonferroni";
    default: return "bh";
  }
}

std::string to_string(WhichResidual w) { return w == WhichResidual::Star ? "star" : "ddag"; }

std::vector<OutlierResult> outlier_test(const std::vector<ResidualRecord>& records,
                                        WhichResidual which, const TestSpec& spec,
                                        Correction correction) {
  validate(spec);
  if (records.empty()) throw EmptyInput("outlier_test: no residual records");
  const std::size_t m = records.size();
  std::vector<OutlierResult> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double r = pick(records[i], which);
    out[i] = {records[i].unit_id, r, raw_pvalue(r, spec), 0.0, false};
  }
  switch (correction) {
    case Correction::None:
      for (auto& o : out) {
        o.adjusted_pvalue = o.raw_pvalue;
        o.rejected = o.raw_pvalue <= spec.alpha;
      }
      break;
    case Correction::Bonferroni:
      for (auto& o : out) {
        o.adjusted_pvalue = std::min(1.0, o.raw_pvalue * static_cast<double>(m));
        o.rejected = o.adjusted_pvalue <= spec.alpha;
      }
      break;
    case Correction::BH: {
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return out[a].raw_pvalue < out[b].raw_pvalue;
      });
      // Step-up adjustment: adj_(i) = min_{j >= i} min(1, m p_(j) / j).
      double running = 1.0;
      for (std::size_t k = m; k-- > 0;) {
        double adj = out[order[k]].raw_pvalue * static_cast<double>(m) /
                     static_cast<double>(k + 1);
        running = std::min(running, std::min(1.0, adj));
        out[order[k]].adjusted_pvalue = running;
      }
      for (auto& o : out) o.rejected = o.adjusted_pvalue <= spec.alpha;
      break;
    }
  }
  return out;
}

KsResult ks_test_vs_std_normal(const std::vector<double>& residuals) {
  const std::size_t n = residuals.size();
  if (n < 8) throw TooFewPoints("ks_test_vs_std_normal: need at least 8 points");
  std::vector<double> xs(residuals);
  std::sort(xs.begin(), xs.end());
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double u = norm_cdf(xs[i]);
    double above = static_cast<double>(i + 1) / static_cast<double>(n) - u;
    double below = u - static_cast<double>(i) / static_cast<double>(n);
    dmax = std::max({dmax, above, below});
  }
  return {dmax, kolmogorov_sf(std::sqrt(static_cast<double>(n)) * dmax)};
}

double silverman_bandwidth(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<double> sorted(xs);
  std::sort(sorted.begin(), sorted.end());
  double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  double sd = n > 1 ? std::sqrt(ss / (static_cast<double>(n) - 1.0)) : 0.0;
  double iqr = sample_quantile(sorted, 0.75) - sample_quantile(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(1.0, std::fabs(sorted[0])) * 1e-3;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

PanelData panel_data(const std::vector<ResidualRecord>& records, WhichResidual which) {
  const std::size_t n = records.size();
  if (n < 2) throw TooFewPoints("panel_data: need at least 2 records");
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = pick(records[i], which);
  std::sort(xs.begin(), xs.end());

  PanelData p;
  p.qq.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pos = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    p.qq.push_back({norm_quantile(pos), xs[i]});
  }

  double bw = silverman_bandwidth(xs);
  const int grid_n = 512;
  double lo = xs.front() - 3.0 * bw;
  double hi = xs.back() + 3.0 * bw;
  double step = (hi - lo) / (grid_n - 1);
  p.density.reserve(grid_n);
  for (int g = 0; g < grid_n; ++g) {
    double x = lo + step * g;
    double kde = 0.0;
    for (double v : xs) kde += norm_pdf((x - v) / bw);
    kde /= static_cast<double>(n) * bw;
    p.density.push_back({x, kde, norm_pdf(x)});
  }

  p.ecdf.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double e = static_cast<double>(i + 1) / static_cast<double>(n);
    p.ecdf.push_back({xs[i], e, norm_cdf(xs[i])});
  }
  return p;
}

DiagnosticsReport diagnose(const std::vector<ResidualRecord>& records, WhichResidual which,
                           const TestSpec& spec, Correction correction) {
  if (records.empty()) throw EmptyInput("diagnose: no residual records");
  DiagnosticsReport rep;
  rep.n_units = records.size();
  for (const auto& r : records) {
    bool trunc = which == WhichResidual::Star ? r.r_star_truncated : r.r_ddag_truncated;
    if (trunc) ++rep.n_truncated;
  }
  std::vector<double> xs(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) xs[i] = pick(records[i], which);
  auto ks = ks_test_vs_std_normal(xs);
  rep.ks_statistic = ks.statistic;
  rep.ks_pvalue = ks.pvalue;
  rep.outliers = outlier_test(records, which, spec, correction);
  rep.correction = correction;
  rep.panels = panel_data(records, which);
  return rep;
}

}  // namespace residkit
