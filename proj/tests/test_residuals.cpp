#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "residkit/errors.hpp"
#include "residkit/residuals.hpp"
#include "residkit/rng.hpp"

using namespace residkit;
using PD = PredictiveDistribution;

TEST_CASE("standard residual") {
  CHECK(standard_residual(0.4, PD::beta(2, 3)) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(standard_residual(2.0, PD::normal(0, 1)) == doctest::Approx(2.0).epsilon(1e-14));
  // Exp(1) has mean = sd = 1.
  CHECK(standard_residual(1.0, PD::exponential(1)) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(standard_residual(1.0, PD::point_mass_at(1.0)), DegenerateError);
}

TEST_CASE("percentile residual: half correction") {
  auto pm = percentile_residual(3.0, PD::point_mass_at(3.0));
  CHECK(pm.percentile == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pm.r_ddag == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(pm.truncated);

  auto b1 = percentile_residual(1.0, PD::bernoulli(0.5));
  CHECK(b1.percentile == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(b1.r_ddag == doctest::Approx(0.6744897501960817).epsilon(1e-10));

  auto b0 = percentile_residual(0.0, PD::bernoulli(0.5));
  CHECK(b0.r_ddag == doctest::Approx(-b1.r_ddag).epsilon(1e-14));
}

TEST_CASE("percentile residual: empirical tie rule vs exhaustive count") {
  std::vector<double> draws;
  for (int i = 1; i <= 100; ++i) draws.push_back(i);
  PD e = PD::empirical(draws);
  auto r = percentile_residual(50.0, e);
  // (#below + half ties)/n = (49 + 0.5)/100, counted by hand.
  int below = 0, ties = 0;
  for (double v : draws) {
    if (v < 50.0) ++below;
    if (v == 50.0) ++ties;
  }
  double want = (below + 0.5 * ties) / 100.0;
  CHECK(want == doctest::Approx(0.495).epsilon(1e-15));
  CHECK(r.percentile == doctest::Approx(want).epsilon(1e-15));
  CHECK(r.r_ddag == doctest::Approx(-0.012533469508069276).epsilon(1e-9));
}

TEST_CASE("truncation policy") {
  // Out-of-support observation maps to the negative bound.
  auto below = percentile_residual(-2.0, PD::gamma(3, 2));
  CHECK(below.percentile == 0.0);
  CHECK(below.r_ddag == -5.0);
  CHECK(below.truncated);

  // Far tail that underflows the percentile to 1.
  auto above = percentile_residual(15.0, PD::normal(0, 1));
  CHECK(above.r_ddag == 5.0);
  CHECK(above.truncated);

  // Configurable bound: z = 6 fits inside +-8.
  auto wide = percentile_residual(6.0, PD::normal(0, 1), 8.0);
  CHECK_FALSE(wide.truncated);
  CHECK(wide.r_ddag == doctest::Approx(6.0).epsilon(1e-7));
  auto narrow = percentile_residual(6.0, PD::normal(0, 1), 5.0);
  CHECK(narrow.truncated);
  CHECK(narrow.r_ddag == 5.0);
}

TEST_CASE("gaussian coincidence of the two residuals") {
  RngStream rng(31);
  for (int i = 0; i < 1000; ++i) {
    double mu = 4.0 * rng.normal();
    double sigma = 0.2 + 3.0 * rng.uniform();
    // Keep z inside the truncation bound; the identity is exact there.
    double y = mu + sigma * 4.8 * (2.0 * rng.uniform() - 1.0);
    PD d = PD::normal(mu, sigma);
    double rs = standard_residual(y, d);
    double rd = percentile_residual(y, d).r_ddag;
    CHECK(std::fabs(rs - rd) < 1e-8);
  }
}

TEST_CASE("r_ddag nondecreasing in y") {
  for (const PD& d : {PD::gamma(2, 1), PD::beta(2, 5), PD::poisson(4.0),
                      PD::empirical({0.1, 0.4, 0.4, 0.9, 1.7})}) {
    double prev = -1e300;
    for (double y = -1.0; y <= 8.0; y += 0.01) {
      double r = percentile_residual(y, d).r_ddag;
      CHECK(r >= prev);
      prev = r;
    }
  }
}

TEST_CASE("uniformity and normality under the truth") {
  const int n = 100000;
  const double crit = 1.63 / std::sqrt(static_cast<double>(n));
  int stream = 0;
  for (const PD& d : {PD::normal(2, 3), PD::beta(2, 5), PD::gamma(3, 2), PD::exponential(1),
                      PD::log_normal(0, 0.5)}) {
    RngStream rng = RngStream::derive(777, ++stream);
    std::vector<double> percentiles(n), residuals(n);
    for (int i = 0; i < n; ++i) {
      auto pr = percentile_residual(d.sample(rng), d);
      percentiles[i] = pr.percentile;
      residuals[i] = pr.r_ddag;
    }
    CAPTURE(d.kind_name());
    double du = oracles::ks_distance(percentiles, [](double x) {
      return x < 0 ? 0.0 : (x > 1 ? 1.0 : x);
    });
    CHECK(du < crit);
    double dn = oracles::ks_distance(residuals, oracles::phi_oracle);
    CHECK(dn < crit);
  }
}

TEST_CASE("batch residuals") {
  std::map<std::string, PD> dists;
  dists.emplace("a", PD::normal(0, 1));
  dists.emplace("b", PD::normal(0, 1));
  dists.emplace("c", PD::normal(0, 1));

  SUBCASE("empty input gives empty output") {
    auto out = batch_residuals({}, dists);
    CHECK(out.records.empty());
    CHECK(out.errors.empty());
  }

  SUBCASE("identity chain for standard normal units") {
    auto out = batch_residuals({{"a", 0.0}, {"b", 1.96}, {"c", -1.96}}, dists);
    REQUIRE(out.records.size() == 3);
    CHECK(out.records[0].r_ddag == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(out.records[1].r_ddag == doctest::Approx(1.96).epsilon(1e-9));
    CHECK(out.records[2].r_ddag == doctest::Approx(-1.96).epsilon(1e-9));
    CHECK(out.records[1].r_star == doctest::Approx(1.96).epsilon(1e-12));
    CHECK(out.errors.empty());
    // Input order preserved.
    CHECK(out.records[0].unit_id == "a");
    CHECK(out.records[2].unit_id == "c");
  }

  SUBCASE("missing distribution is a per-unit error") {
    auto out = batch_residuals({{"a", 0.5}, {"zzz", 0.5}}, dists);
    CHECK(out.records.size() == 1);
    REQUIRE(out.errors.size() == 1);
    CHECK(out.errors[0].unit_id == "zzz");
  }

  SUBCASE("r_star is truncated with its own flag") {
    auto out = batch_residuals({{"a", 12.0}}, dists);
    REQUIRE(out.records.size() == 1);
    CHECK(out.records[0].r_star == 5.0);
    CHECK(out.records[0].r_star_truncated);
    CHECK(out.records[0].r_ddag == 5.0);
    CHECK(out.records[0].r_ddag_truncated);
  }
}
