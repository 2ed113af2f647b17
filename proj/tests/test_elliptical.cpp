#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latentgraph/elliptical.hpp"

using namespace latentgraph;

namespace {

EllipticalSpec gaussian_spec(const Eigen::MatrixXd& scatter) {
  EllipticalSpec s;
  s.family = EllipticalFamily::Gaussian;
  s.scatter = scatter;
  return s;
}

EllipticalSpec t_spec(double nu, const Eigen::MatrixXd& scatter) {
  EllipticalSpec s;
  s.family = EllipticalFamily::StudentT;
  s.nu = nu;
  s.scatter = scatter;
  return s;
}

}  // namespace

TEST_CASE("validation rejects bad specs") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(gaussian_spec(bad).validate(), std::invalid_argument);

  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.3, 0.2, 1.0;
  CHECK_THROWS_AS(gaussian_spec(asym).validate(), std::invalid_argument);

  CHECK_THROWS_AS(t_spec(4.0, Eigen::MatrixXd::Identity(2, 2)).validate(),
                  std::invalid_argument);
  CHECK_NOTHROW(t_spec(5.0, Eigen::MatrixXd::Identity(2, 2)).validate());
}

TEST_CASE("density at the mode") {
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);

  EllipticalSpec s1 = gaussian_spec(Eigen::MatrixXd::Identity(1, 1));
  Eigen::VectorXd zero1 = Eigen::VectorXd::Zero(1);
  CHECK(density_elliptical(s1, zero1) == doctest::Approx(inv_sqrt_2pi).epsilon(1e-12));

  EllipticalSpec s4 = gaussian_spec(4.0 * Eigen::MatrixXd::Identity(1, 1));
  CHECK(density_elliptical(s4, zero1) ==
        doctest::Approx(0.5 * inv_sqrt_2pi).epsilon(1e-12));

  Eigen::VectorXd wrong = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(density_elliptical(s1, wrong), std::invalid_argument);
}

TEST_CASE("t density integrates to one on the plane") {
  EllipticalSpec s = t_spec(5.0, Eigen::MatrixXd::Identity(2, 2));
  const double lo = -30.0, hi = 30.0, h = 0.05;
  const int n = static_cast<int>((hi - lo) / h);
  // trapezoid in 2-D; interior weights 1, edges handled by half-cell shifts
  double sum = 0.0;
  Eigen::VectorXd p(2);
  for (int i = 0; i < n; ++i) {
    p[0] = lo + (i + 0.5) * h;
    for (int j = 0; j < n; ++j) {
      p[1] = lo + (j + 0.5) * h;
      sum += density_elliptical(s, p);
    }
  }
  CHECK(sum * h * h == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("gaussian sampling matches the scatter") {
  EllipticalSpec s = gaussian_spec(Eigen::MatrixXd::Identity(2, 2));
  const int q = 1000000;
  const Eigen::MatrixXd rows = sample_elliptical(s, q, 1);
  REQUIRE(rows.rows() == q);
  REQUIRE(rows.cols() == 2);
  const Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / (q - 1.0);
  CHECK((cov - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("t sampling has covariance nu/(nu-2) of the scatter") {
  EllipticalSpec s = t_spec(5.0, Eigen::MatrixXd::Identity(2, 2));
  const int q = 1000000;
  const Eigen::MatrixXd rows = sample_elliptical(s, q, 7);
  const Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / (q - 1.0);
  CHECK((cov - (5.0 / 3.0) * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        0.05);
}

TEST_CASE("sampling is deterministic for a fixed seed") {
  EllipticalSpec s = t_spec(6.0, Eigen::MatrixXd::Identity(3, 3));
  const Eigen::MatrixXd a = sample_elliptical(s, 50, 42);
  const Eigen::MatrixXd b = sample_elliptical(s, 50, 42);
  CHECK(a == b);
  const Eigen::MatrixXd c = sample_elliptical(s, 50, 43);
  CHECK(a != c);
}

TEST_CASE("kurtosis parameter") {
  CHECK(theoretical_kappa(gaussian_spec(Eigen::MatrixXd::Identity(3, 3))) == 0.0);
  CHECK(theoretical_kappa(t_spec(7.0, Eigen::MatrixXd::Identity(2, 2))) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(theoretical_kappa(t_spec(11.0, Eigen::MatrixXd::Identity(2, 2))) ==
        doctest::Approx(2.0 / 7.0).epsilon(1e-14));
}

TEST_CASE("covariance role rescales the t scatter") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.3, 0.3, 2.0;
  EllipticalSpec s = t_spec(5.0, sigma);
  s.role = MatrixRole::Covariance;
  CHECK((s.covariance() - sigma).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.shape_matrix() - (3.0 / 5.0) * sigma).cwiseAbs().maxCoeff() < 1e-12);

  // scatter role: matrix taken as-is, covariance scaled up
  EllipticalSpec r = t_spec(5.0, sigma);
  CHECK((r.shape_matrix() - sigma).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.covariance() - (5.0 / 3.0) * sigma).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("family names round-trip") {
  CHECK(family_from_name("gaussian") == EllipticalFamily::Gaussian);
  CHECK(family_from_name("t") == EllipticalFamily::StudentT);
  CHECK_THROWS_AS(family_from_name("cauchy"), std::invalid_argument);
}
