#ifndef RESIDKIT_DIAGNOSTICS_HPP
#define RESIDKIT_DIAGNOSTICS_HPP

#include <array>
#include <string>
#include <vector>

#include "residkit/calibration.hpp"
#include "residkit/residuals.hpp"

namespace residkit {

enum class Correction { None, Bonferroni, BH };
enum class WhichResidual { Star, Ddag };

std::string to_string(Correction c);
std::string to_string(WhichResidual w);

struct OutlierResult {
  std::string unit_id;
  double residual;
  double raw_pvalue;
  double adjusted_pvalue;
  bool rejected;
};

// Per-unit outlier decisions from the N(0,1) reference, with the chosen
// multiple-testing correction applied across units. Right: 1 - Phi(r);
// Left: Phi(r); TwoSided: 2(1 - Phi(|r|)).
std::vector<OutlierResult> outlier_test(const std::vector<ResidualRecord>& records,
                                        WhichResidual which, const TestSpec& spec,
                                        Correction correction);

struct KsResult {
  double statistic;
  double pvalue;
};

// One-sample Kolmogorov-Smirnov test against N(0,1); asymptotic p-value.
// Requires n >= 8.
KsResult ks_test_vs_std_normal(const std::vector<double>& residuals);

// Figure-panel data: Q-Q pairs with (i-0.5)/n plotting positions, Gaussian
// KDE on a 512-point grid (Silverman bandwidth), ECDF step points. Each
// density/ecdf row carries the N(0,1) reference value alongside.
struct PanelData {
  std::vector<std::array<double, 2>> qq;       // theoretical, sample
  std::vector<std::array<double, 3>> density;  // x, kde, phi(x)
  std::vector<std::array<double, 3>> ecdf;     // x, ecdf, Phi(x)
};

PanelData panel_data(const std::vector<ResidualRecord>& records, WhichResidual which);

struct DiagnosticsReport {
  std::size_t n_units = 0;
  std::size_t n_truncated = 0;  // truncated residuals stay in; this flags them
  double ks_statistic = 0.0;
  double ks_pvalue = 0.0;
  std::vector<OutlierResult> outliers;
  Correction correction = Correction::None;
  PanelData panels;
};

DiagnosticsReport diagnose(const std::vector<ResidualRecord>& records, WhichResidual which,
                           const TestSpec& spec, Correction correction);

// Silverman bandwidth 0.9 min(sd, IQR/1.34) n^{-1/5}, with fallbacks for
// degenerate spread.
double silverman_bandwidth(const std::vector<double>& xs);

}  // namespace residkit

#endif
