#include "latentgraph/elliptical.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

#include "latentgraph/rng.hpp"

namespace latentgraph {

namespace {

Eigen::LLT<Eigen::MatrixXd> cholesky_or_throw(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("scatter not positive definite");
  return llt;
}

}  // namespace

void EllipticalSpec::validate() const {
  if (scatter.rows() == 0 || scatter.rows() != scatter.cols())
    throw std::invalid_argument("scatter must be a nonempty square matrix");
  if ((scatter - scatter.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("scatter not symmetric");
  cholesky_or_throw(scatter);
  if (family == EllipticalFamily::StudentT && !(nu > 4.0))
    throw std::invalid_argument("StudentT degrees of freedom must exceed 4");
}

Eigen::MatrixXd EllipticalSpec::shape_matrix() const {
  if (family == EllipticalFamily::StudentT && role == MatrixRole::Covariance)
    return scatter * ((nu - 2.0) / nu);
  return scatter;
}

Eigen::MatrixXd EllipticalSpec::covariance() const {
  if (family == EllipticalFamily::StudentT)
    return shape_matrix() * (nu / (nu - 2.0));
  return scatter;
}

Eigen::MatrixXd sample_elliptical(const EllipticalSpec& spec, int q,
                                  std::uint64_t seed, std::uint64_t stream) {
  spec.validate();
  if (q < 1) throw std::invalid_argument("sample count must be >= 1");
  const int d = spec.dim();
  const Eigen::MatrixXd shape = spec.shape_matrix();
  const Eigen::MatrixXd chol = cholesky_or_throw(shape).matrixL();

  Rng rng(seed, stream);
  Eigen::MatrixXd out(q, d);
  Eigen::VectorXd z(d);
  for (int r = 0; r < q; ++r) {
    for (int c = 0; c < d; ++c) z(c) = rng.normal();
    Eigen::VectorXd row = chol * z;
    if (spec.family == EllipticalFamily::StudentT)
      row /= std::sqrt(rng.chi_squared(spec.nu) / spec.nu);
    out.row(r) = row.transpose();
  }
  return out;
}

double density_elliptical(const EllipticalSpec& spec, const Eigen::VectorXd& point) {
  spec.validate();
  const int d = spec.dim();
  if (point.size() != d) throw std::invalid_argument("point dimension mismatch");
  const Eigen::MatrixXd shape = spec.shape_matrix();
  auto llt = cholesky_or_throw(shape);
  const double logdet =
      2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  const double quad = point.dot(llt.solve(point));

  double logh;
  if (spec.family == EllipticalFamily::Gaussian) {
    logh = -0.5 * d * std::log(2.0 * M_PI) - 0.5 * quad;
  } else {
    const double nu = spec.nu;
    logh = std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
           0.5 * d * std::log(nu * M_PI) -
           0.5 * (nu + d) * std::log1p(quad / nu);
  }
  return std::exp(-0.5 * logdet + logh);
}

double theoretical_kappa(const EllipticalSpec& spec) {
  if (spec.family == EllipticalFamily::Gaussian) return 0.0;
  if (!(spec.nu > 4.0))
    throw std::invalid_argument("kurtosis undefined for nu <= 4");
  return 2.0 / (spec.nu - 4.0);
}

std::string family_name(EllipticalFamily f) {
  return f == EllipticalFamily::Gaussian ? "gaussian" : "t";
}

EllipticalFamily family_from_name(const std::string& name) {
  if (name == "gaussian" || name == "normal") return EllipticalFamily::Gaussian;
  if (name == "t" || name == "student-t" || name == "studentt")
    return EllipticalFamily::StudentT;
  throw std::invalid_argument("unknown elliptical family: " + name);
}

}  // namespace latentgraph
