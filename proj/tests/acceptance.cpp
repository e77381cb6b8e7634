// Acceptance suite: one check per shipped guarantee, one PASS/FAIL line
// each. Returns the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "oracles.hpp"
#include "residkit/calibration.hpp"
#include "residkit/diagnostics.hpp"
#include "residkit/io.hpp"
#include "residkit/residuals.hpp"
#include "residkit/rng.hpp"
#include "residkit/simulation.hpp"
#include "residkit/special.hpp"
#include "residkit/stdnormal.hpp"

using namespace residkit;
using PD = PredictiveDistribution;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool pass = true;
  std::string details;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      details += (details.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) {
    details += (details.empty() ? "" : "; ") + what;
  }
};

std::string fmt(double x) { return fmt10(x); }

// --- criterion 1: exact calibration of R# under the truth ------------------

Check criterion1() {
  Check c;
  const int n = 100000;
  const double z95 = norm_quantile(0.95);
  const double crit = 1.63 / std::sqrt(static_cast<double>(n));
  int stream = 0;
  for (const PD& d : {PD::normal(2, 3), PD::beta(2, 5), PD::gamma(3, 2), PD::exponential(1),
                      PD::log_normal(0, 0.5)}) {
    RngStream rng = RngStream::derive(1001, ++stream);
    std::vector<double> residuals(n);
    int rejects = 0;
    for (int i = 0; i < n; ++i) {
      residuals[i] = percentile_residual(d.sample(rng), d).r_ddag;
      rejects += residuals[i] > z95;
    }
    double rate = rejects / static_cast<double>(n);
    c.require(std::fabs(rate - 0.05) < 0.005,
              d.kind_name() + " rejection rate " + fmt(rate) + " outside 0.05 +- 0.005");
    auto ks = ks_test_vs_std_normal(residuals);
    c.require(ks.statistic < crit, d.kind_name() + " KS " + fmt(ks.statistic) +
                                       " fails the 1% critical value " + fmt(crit));
  }
  return c;
}

// --- criterion 2: theorem-1 effective type-I error vs Monte Carlo ----------

Check criterion2() {
  Check c;
  const int n = 1000000;
  int stream = 0;
  for (const PD& d : {PD::exponential(1), PD::uniform(0, 1), PD::beta(2, 5)}) {
    auto [mu, sd] = d.mean_sd();
    RngStream rng = RngStream::derive(2002, ++stream);
    std::vector<double> ys(n);
    for (auto& y : ys) y = d.sample(rng);
    for (double alpha : {0.01, 0.05, 0.1}) {
      double want = type1_error_standard(d, {TestSide::Right, alpha});
      double threshold = mu + sd * norm_quantile(1.0 - alpha);
      int rejects = 0;
      for (double y : ys) rejects += y > threshold;
      double got = rejects / static_cast<double>(n);
      c.require(std::fabs(got - want) <= 3.0 * oracles::binom_se(want, n),
                d.kind_name() + " alpha=" + fmt(alpha) + ": MC " + fmt(got) +
                    " vs analytic " + fmt(want));
    }
  }
  double exp05 = type1_error_standard(PD::exponential(1), {TestSide::Right, 0.05});
  c.require(std::fabs(exp05 - 0.0710157477704) < 1e-9,
            "Exponential(1)/0.05 expected ~0.0710, got " + fmt(exp05));
  c.note("Exponential(1)/alpha=0.05 effective error " + fmt(exp05));
  return c;
}

// --- criterion 3: the calibrated level restores 5% -------------------------

Check criterion3() {
  Check c;
  const int n = 1000000;
  int stream = 0;
  for (const PD& d : {PD::exponential(1), PD::uniform(0, 1), PD::beta(2, 5)}) {
    double astar = calibrated_alpha(d, {TestSide::Right, 0.05});
    auto [mu, sd] = d.mean_sd();
    double threshold = mu + sd * norm_quantile(1.0 - astar);
    RngStream rng = RngStream::derive(3003, ++stream);
    int rejects = 0;
    for (int i = 0; i < n; ++i) rejects += d.sample(rng) > threshold;
    double rate = rejects / static_cast<double>(n);
    c.require(std::fabs(rate - 0.05) < 0.005,
              d.kind_name() + " calibrated rate " + fmt(rate) + " outside 0.05 +- 0.005");
  }
  return c;
}

// --- criterion 4: theorem-5 power equivalence, analytic --------------------

PD random_continuous(RngStream& rng) {
  switch (rng.next_u64() % 6) {
    case 0: return PD::normal(2.0 * rng.normal(), 0.3 + 2.0 * rng.uniform());
    case 1: return PD::log_normal(rng.normal(), 0.2 + 0.8 * rng.uniform());
    case 2: return PD::beta(0.5 + 4.0 * rng.uniform(), 0.5 + 4.0 * rng.uniform());
    case 3: return PD::gamma(0.5 + 4.0 * rng.uniform(), 0.3 + 2.0 * rng.uniform());
    case 4: return PD::exponential(0.3 + 2.0 * rng.uniform());
    default: {
      double lo = -rng.uniform();
      return PD::uniform(lo, lo + 0.5 + 2.0 * rng.uniform());
    }
  }
}

Check criterion4() {
  Check c;
  RngStream rng(4004);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    PD f = random_continuous(rng);
    PD d = random_continuous(rng);
    for (TestSide side : {TestSide::Right, TestSide::Left}) {
      TestSpec spec{side, 0.05};
      double astar = calibrated_alpha(d, spec);
      double pow_cal = power_standard(f, d, TestSpec{side, astar});
      double pow_ddag = power_percentile(f, d, spec);
      double diff = std::fabs(pow_cal - pow_ddag);
      worst = std::max(worst, diff);
      c.require(diff <= 1e-12, "pair " + std::to_string(i) + " (" + f.kind_name() + "," +
                                   d.kind_name() + "," + to_string(side) + ") differs by " +
                                   fmt(diff));
    }
  }
  c.note("max |pow_cal - pow_ddag| = " + fmt(worst));
  return c;
}

// --- criterion 5: theorem-3 law of R# ---------------------------------------

std::vector<std::pair<PD, PD>> support_compatible_pairs(RngStream& rng) {
  std::vector<std::pair<PD, PD>> pairs;
  auto u = [&rng]() { return rng.uniform(); };
  pairs.emplace_back(PD::normal(1, 1), PD::normal(0, 1));
  pairs.emplace_back(PD::normal(0.5 * u(), 0.8 + u()), PD::normal(-0.5 * u(), 0.8 + u()));
  pairs.emplace_back(PD::exponential(2), PD::exponential(1));
  pairs.emplace_back(PD::gamma(2.0 + 2.0 * u(), 1.0 + u()), PD::exponential(0.5 + u()));
  pairs.emplace_back(PD::log_normal(0.3 * u(), 0.4 + 0.4 * u()),
                     PD::log_normal(-0.3 * u(), 0.4 + 0.4 * u()));
  pairs.emplace_back(PD::gamma(1.5 + u(), 1.0), PD::gamma(2.5 + u(), 1.2));
  pairs.emplace_back(PD::beta(2.0 + 2.0 * u(), 3.0 + u()), PD::beta(1.0 + u(), 2.0 + u()));
  pairs.emplace_back(PD::beta(2, 5), PD::uniform(0, 1));
  pairs.emplace_back(PD::uniform(0.1, 0.9), PD::beta(1.5 + u(), 1.5 + u()));
  pairs.emplace_back(PD::exponential(0.8), PD::gamma(1.3, 1.0));
  return pairs;
}

Check criterion5() {
  Check c;
  RngStream seed_rng(5005);
  auto pairs = support_compatible_pairs(seed_rng);
  int idx = 0;
  for (const auto& [f, d] : pairs) {
    ++idx;
    std::string tag = "pair " + std::to_string(idx) + " (" + f.kind_name() + " vs " +
                      d.kind_name() + ")";
    // Integration bounds from f's extreme quantiles so the missed mass is
    // below 1e-9 on each side.
    auto r_of_y = [&](double y) {
      double u = d.cdf(y);
      if (u <= 0.0) return -38.0;
      if (u >= 1.0) return 38.0;
      u = std::min(std::max(u, 1e-250), 1.0 - 1e-16);
      return std::min(std::max(norm_quantile(u), -38.0), 38.0);
    };
    double r_lo = r_of_y(f.inv_cdf(1e-10));
    double r_hi = r_of_y(f.inv_cdf(1.0 - 1e-10));
    auto g = [&](double r) { return rddag_law(f, d, r).density; };
    double integral = oracles::integrate(g, r_lo, r_hi, 1e-9);
    c.require(std::fabs(integral - 1.0) < 1e-6,
              tag + ": integral of the density = " + fmt(integral));

    // Chi-square: simulate R# under f, compare bin counts against the
    // analytic G# probabilities.
    const int n = 100000;
    std::vector<double> edges;
    for (double r = -4.0; r <= 4.0 + 1e-12; r += 0.2) edges.push_back(r);
    std::vector<double> probs;
    double prev = 0.0;
    for (double e : edges) {
      double gq = rddag_law(f, d, e).cdf;
      probs.push_back(gq - prev);
      prev = gq;
    }
    probs.push_back(1.0 - prev);

    RngStream rng = RngStream::derive(5050, idx);
    std::vector<int> counts(probs.size(), 0);
    for (int i = 0; i < n; ++i) {
      double r = r_of_y(f.sample(rng));
      std::size_t bin = probs.size() - 1;
      for (std::size_t j = 0; j < edges.size(); ++j)
        if (r <= edges[j]) {
          bin = j;
          break;
        }
      counts[bin]++;
    }
    // Merge sparse bins left to right so every expected count is >= 5.
    std::vector<double> exp_m;
    std::vector<int> obs_m;
    double acc_p = 0.0;
    int acc_o = 0;
    for (std::size_t j = 0; j < probs.size(); ++j) {
      acc_p += probs[j];
      acc_o += counts[j];
      if (acc_p * n >= 5.0) {
        exp_m.push_back(acc_p * n);
        obs_m.push_back(acc_o);
        acc_p = 0.0;
        acc_o = 0;
      }
    }
    if (acc_p > 0.0 && !exp_m.empty()) {
      exp_m.back() += acc_p * n;
      obs_m.back() += acc_o;
    }
    double chi2 = 0.0;
    for (std::size_t j = 0; j < exp_m.size(); ++j) {
      double delta = obs_m[j] - exp_m[j];
      chi2 += delta * delta / exp_m[j];
    }
    double dof = static_cast<double>(exp_m.size()) - 1.0;
    double p = chi_square_sf(chi2, dof);
    c.require(p > 0.001, tag + ": chi-square p = " + fmt(p));
  }
  return c;
}

// --- criterion 6: table-1 desk-scale reproduction ---------------------------

Check criterion6() {
  Check c;
  SimConfig cfg;  // defaults: N=200, 200 replications, 2000/1000 iterations
  StudyReport report = run_study(cfg);
  if (report.cells.size() != 2) {
    c.require(false, "expected 2 cells");
    return c;
  }
  const StudyCell& null_cell = report.cells[0];
  const StudyCell& alt_cell = report.cells[1];

  auto in = [&c](double x, double center, double tol, const std::string& what) {
    c.require(std::fabs(x - center) < tol,
              what + " = " + fmt(x) + " outside " + fmt(center) + " +- " + fmt(tol));
  };
  in(null_cell.rate_star, 0.074, 0.02, "null R* rate");
  in(null_cell.rate_star_calibrated, 0.05, 0.02, "null calibrated R* rate");
  in(null_cell.rate_ddag, 0.05, 0.02, "null R# rate");
  in(null_cell.mean_calibrated_alpha, 0.026, 0.01, "null mean alpha*");
  in(alt_cell.rate_star, 0.102, 0.025, "alt R* rate");
  in(alt_cell.rate_star_calibrated, 0.32, 0.05, "alt calibrated R* rate");
  in(alt_cell.rate_ddag, 0.32, 0.05, "alt R# rate");
  in(alt_cell.mean_calibrated_alpha, 0.43, 0.05, "alt mean alpha*");

  // Module invariants at desk scale: calibrated R* and R# agree within 2
  // combined SEs, and the naive R* rate is visibly inflated under the null.
  for (const StudyCell& cell : report.cells) {
    double comb = std::sqrt(cell.se_star_calibrated * cell.se_star_calibrated +
                            cell.se_ddag * cell.se_ddag);
    c.require(std::fabs(cell.rate_star_calibrated - cell.rate_ddag) <=
                  std::max(2.0 * comb, 1e-12),
              to_string(cell.hypothesis) + ": calibrated/ddag rates split by more than 2 SE");
    c.require(cell.n_failed == 0, to_string(cell.hypothesis) + ": replications failed");
  }
  c.require(null_cell.rate_star - 0.05 >= 2.0 * null_cell.se_star,
            "null R* rate not visibly inflated");
  c.note("null: star " + fmt(null_cell.rate_star) + " cal " +
         fmt(null_cell.rate_star_calibrated) + " ddag " + fmt(null_cell.rate_ddag) +
         " alpha* " + fmt(null_cell.mean_calibrated_alpha));
  c.note("alt: star " + fmt(alt_cell.rate_star) + " cal " +
         fmt(alt_cell.rate_star_calibrated) + " ddag " + fmt(alt_cell.rate_ddag) +
         " alpha* " + fmt(alt_cell.mean_calibrated_alpha));
  return c;
}

// --- criterion 7: figure-1 single replication at K = 1000 -------------------

Check criterion7() {
  Check c;
  SimConfig cfg;
  cfg.K = 1000;
  const double z95 = norm_quantile(0.95);

  auto null_records = run_figure_replication(cfg, Hypothesis::Null);
  std::vector<double> ddag, star;
  for (const auto& r : null_records) {
    ddag.push_back(r.r_ddag);
    star.push_back(r.r_star);
  }
  double p_ddag = ks_test_vs_std_normal(ddag).pvalue;
  double p_star = ks_test_vs_std_normal(star).pvalue;
  c.require(p_ddag > 0.01, "null: R# KS p = " + fmt(p_ddag) + " <= 0.01");
  c.require(p_star < 0.01, "null: R* KS p = " + fmt(p_star) + " >= 0.01");
  c.note("null KS p: ddag " + fmt(p_ddag) + ", star " + fmt(p_star));

  auto alt_records = run_figure_replication(cfg, Hypothesis::Alternative);
  double frac_ddag = 0.0, frac_star = 0.0;
  for (const auto& r : alt_records) {
    frac_ddag += r.r_ddag > z95;
    frac_star += r.r_star > z95;
  }
  frac_ddag /= static_cast<double>(alt_records.size());
  frac_star /= static_cast<double>(alt_records.size());
  c.require(frac_ddag > frac_star, "alt: right-tail fraction ddag " + fmt(frac_ddag) +
                                       " not above star " + fmt(frac_star));
  c.note("alt right-tail fractions: ddag " + fmt(frac_ddag) + ", star " + fmt(frac_star));
  return c;
}

// --- criterion 8: discrete half-correction ----------------------------------

Check criterion8() {
  Check c;
  auto pm = percentile_residual(3.0, PD::point_mass_at(3.0));
  c.require(pm.r_ddag == 0.0, "point-mass residual not exactly 0");
  double want = norm_quantile(0.75);
  auto b1 = percentile_residual(1.0, PD::bernoulli(0.5));
  auto b0 = percentile_residual(0.0, PD::bernoulli(0.5));
  c.require(std::fabs(b1.r_ddag - want) < 1e-9,
            "Bernoulli y=1 residual " + fmt(b1.r_ddag));
  c.require(std::fabs(b0.r_ddag + want) < 1e-9,
            "Bernoulli y=0 residual " + fmt(b0.r_ddag));
  return c;
}

// --- criterion 9: byte-identical simulate across runs and worker counts -----

Check criterion9() {
  Check c;
  fs::path tmp = fs::temp_directory_path() / ("residkit_accept_" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  write_file((tmp / "config.json").string(),
             R"({"K": 60, "n_iter": 400, "n_burnin": 200, "n_chains": 2,
                 "n_replications": 6, "sample_size_N": 40, "master_seed": 777})");

  auto run_one = [&](const std::string& label, int threads) -> bool {
    std::string cmd = "cd " + tmp.string() + " && RESIDKIT_THREADS=" +
                      std::to_string(threads) + " " + RESIDKIT_BIN + " simulate config.json" +
                      " --out-dir " + label + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  c.require(run_one("t1a", 1), "run with 1 worker failed");
  c.require(run_one("t1b", 1), "repeat run with 1 worker failed");
  c.require(run_one("t2", 2), "run with 2 workers failed");
  c.require(run_one("t4", 4), "run with 4 workers failed");
  if (!c.pass) return c;

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(tmp / "t1a"))
    files.push_back(entry.path().filename().string());
  c.require(!files.empty(), "no outputs written");
  for (const std::string& other : {std::string("t1b"), std::string("t2"), std::string("t4")})
    for (const std::string& f : files) {
      std::string a = read_file((tmp / "t1a" / f).string());
      std::string b = read_file((tmp / other / f).string());
      c.require(a == b, f + " differs between t1a and " + other);
    }
  c.note(std::to_string(files.size()) + " files byte-identical across 4 runs");
  fs::remove_all(tmp);
  return c;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Check()> fn;
  };
  std::vector<Entry> entries = {
      {1, "null calibration of R# across five families", criterion1},
      {2, "theorem-1 type-I error vs Monte Carlo", criterion2},
      {3, "calibrated level restores 5%", criterion3},
      {4, "theorem-5 power equivalence (right/left)", criterion4},
      {5, "theorem-3 law of R#: integral and chi-square", criterion5},
      {6, "table-1 desk-scale reproduction", criterion6},
      {7, "figure-1 single-replication contrast", criterion7},
      {8, "discrete half-correction", criterion8},
      {9, "simulate determinism across runs and workers", criterion9},
  };
  int failures = 0;
  for (auto& e : entries) {
    auto start = std::chrono::steady_clock::now();
    Check c;
    try {
      c = e.fn();
    } catch (const std::exception& ex) {
      c.pass = false;
      c.details = std::string("exception: ") + ex.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s - %s (%.1fs)%s%s\n", e.id, c.pass ? "PASS" : "FAIL", e.name,
                secs, c.details.empty() ? "" : " - ", c.details.c_str());
    std::fflush(stdout);
    if (!c.pass) ++failures;
  }
  return failures;
}
