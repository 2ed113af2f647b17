#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace latentgraph {

enum class EllipticalFamily { Gaussian, StudentT };

// Which role the stored matrix plays. "Scatter" uses the matrix directly as
// the shape matrix of the density; "Covariance" rescales for the t family so
// that the sampled vectors have the given covariance.
enum class MatrixRole { Scatter, Covariance };

// Elliptically contoured law of a cluster's random-component vector:
// density |L|^{-1/2} h(b' L^{-1} b) with zero location.
struct EllipticalSpec {
  EllipticalFamily family = EllipticalFamily::Gaussian;
  double nu = 0.0;  // StudentT degrees of freedom, must exceed 4
  Eigen::MatrixXd scatter;
  MatrixRole role = MatrixRole::Scatter;

  int dim() const { return static_cast<int>(scatter.rows()); }

  // throws std::invalid_argument on violated invariants
  void validate() const;

  // shape matrix of the density (after applying the role convention)
  Eigen::MatrixXd shape_matrix() const;

  // covariance of a sampled vector (nu/(nu-2) * shape for StudentT)
  Eigen::MatrixXd covariance() const;
};

// q independent rows; deterministic given (seed, stream).
Eigen::MatrixXd sample_elliptical(const EllipticalSpec& spec, int q,
                                  std::uint64_t seed, std::uint64_t stream = 0);

double density_elliptical(const EllipticalSpec& spec, const Eigen::VectorXd& point);

// Gaussian -> 0; StudentT(nu) -> 2/(nu-4).
double theoretical_kappa(const EllipticalSpec& spec);

std::string family_name(EllipticalFamily f);
EllipticalFamily family_from_name(const std::string& name);

}  // namespace latentgraph
