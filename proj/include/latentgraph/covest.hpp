#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "latentgraph/dispersion.hpp"
#include "latentgraph/elliptical.hpp"

namespace latentgraph {

enum class Divisor { QMinus1, Q };

// Ordered block sizes (d_1,...,d_{k-1}) of the tested part plus the size of
// the trailing conditioning block.
struct BlockPartition {
  std::vector<int> sizes;
  int cond_size = 0;

  int tested_dim() const;
  int total_dim() const { return tested_dim() + cond_size; }
  void validate() const;
};

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data, Divisor divisor);

// Schur complement of the conditioning block (identity when cond_size = 0).
Eigen::MatrixXd conditional_scatter(const Eigen::MatrixXd& scatter,
                                    const BlockPartition& part);

// Reorder coordinates so the tested indices come first, conditioning last.
// Indices are 0-based.
Eigen::MatrixXd arrange_matrix(const Eigen::MatrixXd& m,
                               const std::vector<int>& tested,
                               const std::vector<int>& cond);
Eigen::MatrixXd arrange_columns(const Eigen::MatrixXd& data,
                                const std::vector<int>& tested,
                                const std::vector<int>& cond);

// Predicted random components b-hat (q x d) with per-cluster Laplace
// curvature variances (q x d).
struct PredictionSet {
  Eigen::MatrixXd bhat;
  Eigen::MatrixXd cond_var;
  int q() const { return static_cast<int>(bhat.rows()); }
  int dim() const { return static_cast<int>(bhat.cols()); }
};

// Margin description used for prediction: coefficients/dispersion/prior
// variance may be fixed externally or estimated from the data.
struct PredictMarginSpec {
  ResponseFamily family = ResponseFamily::Gaussian;
  Link link = Link::Identity;
  long trials = 1;
  std::optional<Eigen::VectorXd> fixed_beta;
  std::optional<double> fixed_dispersion;
  std::optional<double> fixed_sigma2;  // prior variance of the random component
};

PredictionSet predict_random_components(const LongDataset& data,
                                        const std::vector<PredictMarginSpec>& margins);

Eigen::MatrixXd covariance_from_predictions(const PredictionSet& preds);

// Physicists' Hermite rule (weight e^{-x^2}), Golub-Welsch.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
QuadratureRule gauss_hermite_rule(int node_count);

struct MlEstimate {
  Eigen::MatrixXd sigma;
  double loglik = 0.0;
  int evaluations = 0;
};

// Approximate ML for the latent covariance, Gaussian case: closed-form
// cluster integrand, simplex search over Cholesky factors.
MlEstimate gaussian_approx_ml(const PredictionSet& preds,
                              const Eigen::MatrixXd& init);

// General elliptical case via a tensor Gauss-Hermite grid of l^d points.
MlEstimate elliptical_approx_ml(const PredictionSet& preds,
                                EllipticalFamily family, double nu,
                                int node_count, const Eigen::MatrixXd& init);

// Log-likelihood evaluators (exposed for cross-checks).
double gaussian_approx_loglik(const PredictionSet& preds,
                              const Eigen::MatrixXd& sigma);
double elliptical_approx_loglik(const PredictionSet& preds,
                                EllipticalFamily family, double nu,
                                int node_count, const Eigen::MatrixXd& sigma);

// Derivative-free Nelder-Mead with one restart; returns argmin.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            Eigen::VectorXd x0, double tol = 1e-10,
                            int max_evals = 20000);

}  // namespace latentgraph
