#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latentgraph/dispersion.hpp"

using namespace latentgraph;

namespace {

MarginSpec margin(ResponseFamily f, Link l, double beta0, double dispersion = 1.0,
                  long trials = 1) {
  MarginSpec m;
  m.family = f;
  m.link = l;
  m.beta = Eigen::VectorXd::Constant(1, beta0);
  m.dispersion = dispersion;
  m.trials = trials;
  return m;
}

MglmmSpec two_margin_spec(int q, int replicates) {
  MglmmSpec spec;
  spec.margins.push_back(margin(ResponseFamily::Gamma, Link::Log, 0.6, 0.5));
  spec.margins.push_back(margin(ResponseFamily::Poisson, Link::Log, 0.6));
  spec.q = q;
  spec.replicates = replicates;
  spec.random_components.family = EllipticalFamily::Gaussian;
  Eigen::MatrixXd sigma(2, 2);
  sigma << 0.8166, 0.0, 0.0, 0.91302;
  spec.random_components.scatter = sigma;
  return spec;
}

}  // namespace

TEST_CASE("unit deviance values") {
  CHECK(unit_deviance(ResponseFamily::Poisson, 3.0, 3.0) == 0.0);
  CHECK(unit_deviance(ResponseFamily::Gaussian, 2.0, 0.0) == 4.0);
  CHECK(unit_deviance(ResponseFamily::Gamma, 1.0, 2.0) ==
        doctest::Approx(2.0 * (std::log(2.0) - 0.5)).epsilon(1e-12));
  CHECK(unit_deviance(ResponseFamily::Poisson, 0.0, 2.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(unit_deviance(ResponseFamily::Gamma, 1.0, -1.0),
                  std::invalid_argument);
}

TEST_CASE("deviance is zero only at the mean") {
  const double ys[] = {0.5, 1.0, 2.0, 3.5};
  const double mus[] = {0.5, 1.0, 2.0, 3.5};
  for (double y : ys)
    for (double mu : mus) {
      const double d = unit_deviance(ResponseFamily::Gamma, y, mu);
      if (y == mu)
        CHECK(d == 0.0);
      else
        CHECK(d > 0.0);
    }
}

TEST_CASE("variance function") {
  CHECK(variance_function(ResponseFamily::Poisson, 3.0) == 3.0);
  CHECK(variance_function(ResponseFamily::Gaussian, -5.0) == 1.0);
  CHECK(variance_function(ResponseFamily::Gamma, 2.0) == 4.0);
  CHECK(variance_function(ResponseFamily::Binomial, 2.0, 10) ==
        doctest::Approx(2.0 * 0.8));

  // V = 2 / d''(mu, mu) by finite differences
  const double mu = 2.0, h = 1e-4;
  const double d2 = (unit_deviance(ResponseFamily::Gamma, mu + h, mu) -
                     2.0 * unit_deviance(ResponseFamily::Gamma, mu, mu) +
                     unit_deviance(ResponseFamily::Gamma, mu - h, mu)) /
                    (h * h);
  CHECK(2.0 / d2 == doctest::Approx(4.0).epsilon(1e-5));
}

TEST_CASE("conditional density equals the classical forms") {
  CHECK(conditional_density(margin(ResponseFamily::Poisson, Link::Log, 0.0), 0.0,
                            2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(conditional_density(margin(ResponseFamily::Gaussian, Link::Identity, 0.0),
                            0.0, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
  CHECK(conditional_density(margin(ResponseFamily::Gamma, Link::Log, 0.0, 0.5),
                            1.0, 1.0) ==
        doctest::Approx(4.0 * std::exp(-2.0)).epsilon(1e-12));

  // deviance form a(y) exp(-d/(2 lambda)) against the evaluated density
  const double y = 1.7, mu = 2.3, lambda = 0.5;
  const double dens =
      conditional_density(margin(ResponseFamily::Gamma, Link::Log, 0.0, lambda), y, mu);
  const double sat =
      conditional_density(margin(ResponseFamily::Gamma, Link::Log, 0.0, lambda), y, y);
  const double dev = unit_deviance(ResponseFamily::Gamma, y, mu);
  CHECK(dens == doctest::Approx(sat * std::exp(-dev / (2.0 * lambda))).epsilon(1e-10));
}

TEST_CASE("dispersion is fixed to one for Poisson and Binomial") {
  MarginSpec bad = margin(ResponseFamily::Poisson, Link::Log, 0.0, 2.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  MarginSpec bad2 = margin(ResponseFamily::Binomial, Link::Identity, 0.0, 1.0, 5);
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
}

TEST_CASE("link functions") {
  CHECK(apply_inverse_link(Link::Log, 0.0) == 1.0);
  CHECK(apply_inverse_link(Link::Logit, 0.0) == 0.5);
  CHECK(apply_inverse_link(Link::Log, 0.6) ==
        doctest::Approx(std::exp(0.6)).epsilon(1e-12));
  CHECK(apply_link(Link::Log, std::exp(0.6)) == doctest::Approx(0.6));
  CHECK(inverse_link_derivative(Link::Identity, 3.0) == 1.0);
}

TEST_CASE("simulation row counts") {
  const SimulationResult big = simulate_mglmm(two_margin_spec(800, 40), 1);
  CHECK(big.data.rows.size() == 64000);
  CHECK(big.true_b.rows() == 800);

  const SimulationResult tiny = simulate_mglmm(two_margin_spec(2, 1), 1);
  CHECK(tiny.data.rows.size() == 4);
}

TEST_CASE("simulation is deterministic") {
  const SimulationResult a = simulate_mglmm(two_margin_spec(20, 3), 99);
  const SimulationResult b = simulate_mglmm(two_margin_spec(20, 3), 99);
  REQUIRE(a.data.rows.size() == b.data.rows.size());
  for (std::size_t i = 0; i < a.data.rows.size(); ++i)
    CHECK(a.data.rows[i].y == b.data.rows[i].y);
  CHECK(a.true_b == b.true_b);
}

TEST_CASE("degenerate gaussian noise recovers the latent values") {
  MglmmSpec spec;
  spec.margins.push_back(
      margin(ResponseFamily::Gaussian, Link::Identity, 0.0, 1e-12));
  spec.q = 10;
  spec.replicates = 1;
  spec.random_components.family = EllipticalFamily::Gaussian;
  spec.random_components.scatter = Eigen::MatrixXd::Identity(1, 1);
  const SimulationResult sim = simulate_mglmm(spec, 5);
  for (const auto& row : sim.data.rows)
    CHECK(row.y == doctest::Approx(sim.true_b(row.cluster - 1, 0)).epsilon(1e-4));
}

TEST_CASE("conditional mean of simulated responses") {
  // large replicate count: per-cluster mean approaches exp(0.6 + b)
  MglmmSpec spec = two_margin_spec(20, 2000);
  const SimulationResult sim = simulate_mglmm(spec, 11);
  std::vector<double> sum(2 * 20, 0.0);
  std::vector<int> count(2 * 20, 0);
  for (const auto& row : sim.data.rows) {
    sum[(row.margin - 1) * 20 + (row.cluster - 1)] += row.y;
    ++count[(row.margin - 1) * 20 + (row.cluster - 1)];
  }
  for (int j = 0; j < 2; ++j)
    for (int c = 0; c < 20; ++c) {
      const double mu = std::exp(0.6 + sim.true_b(c, j));
      const double mean = sum[j * 20 + c] / count[j * 20 + c];
      // Gamma: var = 0.5 mu^2; Poisson: var = mu; allow 4 standard errors
      const double var = j == 0 ? 0.5 * mu * mu : mu;
      CHECK(std::abs(mean - mu) < 4.0 * std::sqrt(var / 2000.0) + 1e-9);
    }
}
