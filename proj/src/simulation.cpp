#include "residkit/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "residkit/errors.hpp"
#include "residkit/special.hpp"
#include "residkit/stdnormal.hpp"

namespace residkit {

namespace {

constexpr double kPriorVar = 100.0;  // beta0, beta1 ~ N(0, 100)
constexpr double kBUpper = 5.0;      // b ~ Uniform(0, 5)
constexpr double kTargetAccept = 0.35;
constexpr double kRhatLimit = 1.1;

struct WorkingData {
  std::vector<double> x1;
  std::vector<double> log_y;
  double log1m_sum = 0.0;
};

// Beta log likelihood of the working model for fixed shapes a_k and b,
// dropping nothing: sum_k [lgamma(a_k+b) - lgamma(a_k)] - N lgamma(b)
// + sum_k (a_k - 1) log y_k + (b - 1) sum_k log(1 - y_k).
double log_lik(const std::vector<double>& a, const WorkingData& w, double b) {
  double s = 0.0;
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k)
    s += log_gamma_fn(a[k] + b) - log_gamma_fn(a[k]) + (a[k] - 1.0) * w.log_y[k];
  s -= static_cast<double>(n) * log_gamma_fn(b);
  s += (b - 1.0) * w.log1m_sum;
  return s;
}

double log_prior_beta(double b0, double b1) {
  return -(b0 * b0 + b1 * b1) / (2.0 * kPriorVar);
}

void fill_shapes(std::vector<double>& a, const WorkingData& w, double b0, double b1) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::exp(b0 + b1 * w.x1[k]);
}

struct RepOutcome {
  bool ok = false;
  bool flagged = false;
  bool rej_star = false;
  bool rej_cal = false;
  bool rej_ddag = false;
  double alpha_star = 0.0;
};

RepOutcome run_one_replication(const SimConfig& cfg, Hypothesis hyp, std::uint64_t rep_seed) {
  RepOutcome out;
  try {
    SimConfig rep_cfg = cfg;
    rep_cfg.K = cfg.sample_size_N;
    auto data = generate_dataset(rep_cfg, hyp, rep_seed);
    auto mcmc = fit_working_model(data, cfg, RngStream::mix(rep_seed ^ 0x5u));
    out.flagged = !mcmc.converged;

    const DataRow& unit = data.front();
    const PredictiveDistribution& d = mcmc.predictive_draws.at(unit.unit_id);
    double z_nominal = norm_quantile(1.0 - cfg.alpha_nominal);

    double r_star = standard_residual(unit.y, d);
    double r_ddag = percentile_residual(unit.y, d).r_ddag;
    out.alpha_star = empirical_calibrated_alpha(d, cfg.alpha_nominal);

    out.rej_star = r_star > z_nominal;
    out.rej_cal = r_star > norm_quantile(1.0 - out.alpha_star);
    out.rej_ddag = r_ddag > z_nominal;
    out.ok = true;
  } catch (const std::exception&) {
    out.ok = false;
  }
  return out;
}

StudyCell reduce_cell(Hypothesis hyp, const SimConfig& cfg,
                      const std::vector<RepOutcome>& reps) {
  StudyCell cell;
  cell.hypothesis = hyp;
  cell.sample_size = cfg.sample_size_N;
  double n = 0.0, s_star = 0.0, s_cal = 0.0, s_ddag = 0.0, s_alpha = 0.0;
  for (const auto& r : reps) {
    if (!r.ok) {
      ++cell.n_failed;
      continue;
    }
    if (r.flagged) ++cell.n_flagged;
    n += 1.0;
    s_star += r.rej_star ? 1.0 : 0.0;
    s_cal += r.rej_cal ? 1.0 : 0.0;
    s_ddag += r.rej_ddag ? 1.0 : 0.0;
    s_alpha += r.alpha_star;
  }
  cell.n_replications = static_cast<int>(n);
  if (n == 0.0) return cell;
  auto rate_se = [n](double s, double& rate, double& se) {
    rate = s / n;
    se = std::sqrt(rate * (1.0 - rate) / n);
  };
  rate_se(s_star, cell.rate_star, cell.se_star);
  rate_se(s_cal, cell.rate_star_calibrated, cell.se_star_calibrated);
  rate_se(s_ddag, cell.rate_ddag, cell.se_ddag);
  cell.mean_calibrated_alpha = s_alpha / n;
  double ss = 0.0;
  for (const auto& r : reps)
    if (r.ok) ss += (r.alpha_star - cell.mean_calibrated_alpha) *
                    (r.alpha_star - cell.mean_calibrated_alpha);
  cell.se_calibrated_alpha = n > 1.0 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return cell;
}

}  // namespace

void SimConfig::validate() const {
  if (K < 1) throw DomainError("SimConfig: K must be >= 1");
  if (!(b_true > 0.0)) throw DomainError("SimConfig: b_true must be > 0");
  if (n_iter <= n_burnin) throw DomainError("SimConfig: n_iter must exceed n_burnin");
  if (n_burnin < 0) throw DomainError("SimConfig: n_burnin must be >= 0");
  if (n_chains < 1) throw DomainError("SimConfig: n_chains must be >= 1");
  if (n_replications < 0) throw DomainError("SimConfig: n_replications must be >= 0");
  if (!(alpha_nominal > 0.0 && alpha_nominal < 1.0))
    throw DomainError("SimConfig: alpha_nominal must lie in (0,1)");
  if (sample_size_N < 1) throw DomainError("SimConfig: sample_size_N must be >= 1");
}

std::string to_string(Hypothesis h) { return h == Hypothesis::Null ? "null" : "alternative"; }

std::vector<DataRow> generate_dataset(const SimConfig& cfg, Hypothesis hyp,
                                      std::uint64_t rep_seed) {
  cfg.validate();
  double beta2 = hyp == Hypothesis::Alternative ? cfg.beta2 : 0.0;
  RngStream rng = RngStream::derive(rep_seed, 1);
  std::vector<DataRow> rows;
  rows.reserve(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    DataRow row;
    row.unit_id = std::to_string(k + 1);
    row.x1 = rng.normal();
    row.x2 = rng.uniform() < 0.5 ? 1.0 : 0.0;
    double a = std::exp(cfg.beta0 + cfg.beta1 * row.x1 + beta2 * row.x2);
    double y = rng.beta(a, cfg.b_true);
    if (y <= 0.0) y = 1e-300;
    if (y >= 1.0) y = 1.0 - 1.1e-16;
    row.y = y;
    rows.push_back(std::move(row));
  }
  return rows;
}

McmcOutput fit_working_model(const std::vector<DataRow>& data, const SimConfig& cfg,
                             std::uint64_t rep_seed) {
  cfg.validate();
  if (data.empty()) throw EmptyInput("fit_working_model: no data");
  const std::size_t n_units = data.size();
  WorkingData w;
  w.x1.resize(n_units);
  w.log_y.resize(n_units);
  for (std::size_t k = 0; k < n_units; ++k) {
    if (!(data[k].y > 0.0 && data[k].y < 1.0))
      throw DomainError("fit_working_model: y must lie in (0,1)");
    w.x1[k] = data[k].x1;
    w.log_y[k] = std::log(data[k].y);
    w.log1m_sum += std::log1p(-data[k].y);
  }

  const int n_keep = cfg.n_iter - cfg.n_burnin;
  McmcOutput out;
  out.posterior_draws.assign(cfg.n_chains, {});

  for (int c = 0; c < cfg.n_chains; ++c) {
    RngStream rng = RngStream::derive(rep_seed, 100 + static_cast<std::uint64_t>(c));
    double theta[3] = {rng.normal(), rng.normal(), 0.5 + 4.0 * rng.uniform()};
    double log_step[3] = {std::log(0.2), std::log(0.2), std::log(0.5)};
    long accepted[3] = {0, 0, 0};

    std::vector<double> a(n_units);
    fill_shapes(a, w, theta[0], theta[1]);
    double lp = log_lik(a, w, theta[2]) + log_prior_beta(theta[0], theta[1]);

    std::vector<double> a_prop(n_units);
    auto& chain = out.posterior_draws[c];
    chain.reserve(n_keep);

    for (int t = 1; t <= cfg.n_iter; ++t) {
      bool burnin = t <= cfg.n_burnin;
      for (int j = 0; j < 3; ++j) {
        double prop = theta[j] + std::exp(log_step[j]) * rng.normal();
        double lp_prop = -std::numeric_limits<double>::infinity();
        bool in_support = true;
        if (j == 2) {
          if (prop <= 0.0 || prop >= kBUpper) in_support = false;
          if (in_support) lp_prop = log_lik(a, w, prop) + log_prior_beta(theta[0], theta[1]);
        } else {
          double b0 = j == 0 ? prop : theta[0];
          double b1 = j == 1 ? prop : theta[1];
          fill_shapes(a_prop, w, b0, b1);
          lp_prop = log_lik(a_prop, w, theta[2]) + log_prior_beta(b0, b1);
        }
        bool accept = in_support && std::isfinite(lp_prop) &&
                      std::log(rng.uniform()) < lp_prop - lp;
        if (accept) {
          theta[j] = prop;
          lp = lp_prop;
          if (j != 2) std::swap(a, a_prop);
          if (!burnin) ++accepted[j];
        }
        if (burnin) {
          // Robbins-Monro on the log step, frozen after burn-in.
          double gain = 1.0 / std::pow(static_cast<double>(t), 0.6);
          log_step[j] += gain * ((accept ? 1.0 : 0.0) - kTargetAccept);
        }
      }
      if (!burnin) chain.push_back({theta[0], theta[1], theta[2]});
    }
    for (int j = 0; j < 3; ++j)
      if (c == 0)
        out.acceptance_rates[j] = static_cast<double>(accepted[j]) / n_keep;
  }

  if (cfg.n_chains >= 2) {
    for (int j = 0; j < 3; ++j) {
      std::vector<std::vector<double>> traces(cfg.n_chains);
      for (int c = 0; c < cfg.n_chains; ++c) {
        traces[c].resize(n_keep);
        for (int t = 0; t < n_keep; ++t) traces[c][t] = out.posterior_draws[c][t][j];
      }
      out.rhat[j] = gelman_rubin(traces);
    }
  }
  out.converged = std::isfinite(out.rhat[0]) && std::isfinite(out.rhat[1]) &&
                  std::isfinite(out.rhat[2]) && out.rhat[0] <= kRhatLimit &&
                  out.rhat[1] <= kRhatLimit && out.rhat[2] <= kRhatLimit;

  // Predictive draws from chain 0, one per retained iteration, unit-major.
  RngStream pred_rng = RngStream::derive(rep_seed, 300);
  const auto& chain0 = out.posterior_draws[0];
  for (std::size_t k = 0; k < n_units; ++k) {
    std::vector<double> draws(n_keep);
    for (int t = 0; t < n_keep; ++t) {
      double a_k = std::exp(chain0[t][0] + chain0[t][1] * w.x1[k]);
      double y = pred_rng.beta(a_k, chain0[t][2]);
      if (y <= 0.0) y = 1e-300;
      if (y >= 1.0) y = 1.0 - 1.1e-16;
      draws[t] = y;
    }
    out.predictive_draws.emplace(data[k].unit_id,
                                 PredictiveDistribution::empirical(std::move(draws)));
  }
  return out;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw DomainError("gelman_rubin: need at least 2 chains");
  const std::size_t n = chains[0].size();
  if (n < 10) throw DomainError("gelman_rubin: need chain length >= 10");
  for (const auto& c : chains)
    if (c.size() != n) throw DomainError("gelman_rubin: chains must have equal length");

  std::vector<double> means(m);
  double w_sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double mean = 0.0;
    for (double v : chains[j]) mean += v;
    mean /= static_cast<double>(n);
    means[j] = mean;
    double ss = 0.0;
    for (double v : chains[j]) ss += (v - mean) * (v - mean);
    w_sum += ss / (static_cast<double>(n) - 1.0);
  }
  double w = w_sum / static_cast<double>(m);
  if (w <= 0.0) throw ZeroVariance("gelman_rubin: within-chain variance is zero");
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= static_cast<double>(m);
  double b_over_n = 0.0;
  for (double v : means) b_over_n += (v - grand) * (v - grand);
  b_over_n /= static_cast<double>(m) - 1.0;
  double nn = static_cast<double>(n);
  return std::sqrt(((nn - 1.0) / nn * w + b_over_n) / w);
}

double empirical_calibrated_alpha(const PredictiveDistribution& d, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("empirical_calibrated_alpha: alpha must lie in (0,1)");
  auto [mu, sd] = d.mean_sd();
  if (!(sd > 0.0)) throw DegenerateError("empirical_calibrated_alpha: sd is zero");
  return 1.0 - norm_cdf(d.inv_cdf(1.0 - alpha), mu, sd);
}

int worker_count(int n_jobs) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (const char* env = std::getenv("RESIDKIT_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) workers = cap;
  }
  return std::min(workers, std::max(1, n_jobs));
}

StudyReport run_study(const SimConfig& cfg) {
  cfg.validate();
  StudyReport report;
  if (cfg.n_replications == 0) return report;

  const int reps = cfg.n_replications;
  std::vector<RepOutcome> null_out(reps), alt_out(reps);
  const int n_jobs = 2 * reps;
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (;;) {
      int job = next.fetch_add(1);
      if (job >= n_jobs) return;
      Hypothesis hyp = job < reps ? Hypothesis::Null : Hypothesis::Alternative;
      int r = job % reps;
      std::uint64_t rep_seed =
          RngStream::mix(RngStream::mix(cfg.master_seed ^ (hyp == Hypothesis::Null ? 0x11u : 0x22u)) +
                         static_cast<std::uint64_t>(r));
      (hyp == Hypothesis::Null ? null_out[r] : alt_out[r]) =
          run_one_replication(cfg, hyp, rep_seed);
    }
  };

  int workers = worker_count(n_jobs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  report.cells.push_back(reduce_cell(Hypothesis::Null, cfg, null_out));
  report.cells.push_back(reduce_cell(Hypothesis::Alternative, cfg, alt_out));
  return report;
}

std::vector<ResidualRecord> run_figure_replication(const SimConfig& cfg, Hypothesis hyp) {
  cfg.validate();
  std::uint64_t rep_seed = RngStream::mix(
      cfg.master_seed ^ (hyp == Hypothesis::Null ? 0x99990001u : 0x99990002u));
  auto data = generate_dataset(cfg, hyp, rep_seed);
  auto mcmc = fit_working_model(data, cfg, RngStream::mix(rep_seed ^ 0x5u));
  std::vector<std::pair<std::string, double>> obs;
  obs.reserve(data.size());
  for (const auto& row : data) obs.emplace_back(row.unit_id, row.y);
  auto batch = batch_residuals(obs, mcmc.predictive_draws);
  if (!batch.errors.empty())
    throw Error("run_figure_replication: residual computation failed for " +
                batch.errors.front().unit_id);
  return std::move(batch.records);
}

}  // namespace residkit
