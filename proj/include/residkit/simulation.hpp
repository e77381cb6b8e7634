#ifndef RESIDKIT_SIMULATION_HPP
#define RESIDKIT_SIMULATION_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "residkit/distribution.hpp"
#include "residkit/residuals.hpp"

namespace residkit {

// Beta-regression study setup. Data: Y_k ~ Beta(a_k, b_true) with
// log a_k = beta0 + beta1 x1 + beta2 x2, x1 ~ N(0,1), x2 ~ Bernoulli(0.5).
// The null hypothesis sets beta2 = 0; the alternative uses `beta2`. The
// working model fitted to the data always omits x2.
struct SimConfig {
  int K = 1000;  // units in the single-replication illustration
  double beta0 = 0.0;
  double beta1 = 1.0;
  double beta2 = -5.0;  // used under the alternative only
  double b_true = 3.0;
  int n_iter = 2000;
  int n_burnin = 1000;
  int n_chains = 2;
  int n_replications = 200;
  double alpha_nominal = 0.05;
  std::uint64_t master_seed = 20250811;
  int sample_size_N = 200;  // units generated and fitted per replication

  void validate() const;
};

enum class Hypothesis { Null, Alternative };
std::string to_string(Hypothesis h);

struct DataRow {
  std::string unit_id;
  double x1 = 0.0;
  double x2 = 0.0;  // 0 or 1
  double y = 0.0;
};

std::vector<DataRow> generate_dataset(const SimConfig& cfg, Hypothesis hyp,
                                      std::uint64_t rep_seed);

struct McmcOutput {
  std::map<std::string, PredictiveDistribution> predictive_draws;
  // posterior_draws[chain][iteration] = {beta0, beta1, b}, post burn-in.
  std::vector<std::vector<std::array<double, 3>>> posterior_draws;
  std::array<double, 3> rhat{1.0, 1.0, 1.0};
  std::array<double, 3> acceptance_rates{0.0, 0.0, 0.0};
  bool converged = true;  // all rhat <= 1.1; non-convergent runs are kept, flagged
};

// Bayesian fit of the working model log a_k = beta0 + beta1 x1 by
// Metropolis-within-Gibbs: Gaussian random-walk blocks for beta0, beta1, b
// with step sizes adapted during burn-in (target acceptance 0.2-0.5) and
// frozen afterwards. Priors: beta0, beta1 ~ N(0, 100); b ~ Uniform(0, 5).
// Per-unit predictive draws come from chain 0, one Beta(a_k, b) draw per
// retained iteration.
McmcOutput fit_working_model(const std::vector<DataRow>& data, const SimConfig& cfg,
                             std::uint64_t rep_seed);

// Potential scale reduction factor sqrt(((n-1)/n W + B/n) / W) over >= 2
// equal-length chains (n >= 10). Throws ZeroVariance when W = 0.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

struct StudyCell {
  Hypothesis hypothesis = Hypothesis::Null;
  int sample_size = 0;
  double rate_star = 0.0, se_star = 0.0;
  double rate_star_calibrated = 0.0, se_star_calibrated = 0.0;
  double rate_ddag = 0.0, se_ddag = 0.0;
  double mean_calibrated_alpha = 0.0, se_calibrated_alpha = 0.0;
  int n_replications = 0;  // effective (failed ones excluded)
  int n_failed = 0;
  int n_flagged = 0;  // kept despite rhat > 1.1
};

struct StudyReport {
  std::vector<StudyCell> cells;  // Null cell then Alternative cell
};

// Replicated study: per replication, generate sample_size_N units, fit the
// working model, and test the first unit's observation right-sided at
// alpha_nominal with R*, calibrated R* (per-replication alpha* from the
// Empirical plug-in), and the percentile residual. Replications run in
// parallel (RESIDKIT_THREADS caps workers); results are identical for any
// worker count.
StudyReport run_study(const SimConfig& cfg);

// One replication at cfg.K units under the given hypothesis: fits the
// working model and returns every unit's residual record against its own
// predictive draw set. Feeds the figure-panel outputs.
std::vector<ResidualRecord> run_figure_replication(const SimConfig& cfg, Hypothesis hyp);

// Eq.-(12)-style plug-in level for an empirical predictive law: Gaussian
// moments from the draw sample, quantile by generalized inverse.
double empirical_calibrated_alpha(const PredictiveDistribution& d, double alpha);

// Worker cap: RESIDKIT_THREADS if set, else hardware concurrency.
int worker_count(int n_jobs);

}  // namespace residkit

#endif
