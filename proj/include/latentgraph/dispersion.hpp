#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "latentgraph/elliptical.hpp"
#include "latentgraph/rng.hpp"

namespace latentgraph {

enum class ResponseFamily { Poisson, Gamma, Binomial, Gaussian };
enum class Link { Log, Logit, Identity };

// One marginal model: conditional family, link, fixed effects and dispersion.
struct MarginSpec {
  ResponseFamily family = ResponseFamily::Gaussian;
  Link link = Link::Identity;
  Eigen::VectorXd beta;      // p_j coefficients, first entry intercept
  double dispersion = 1.0;   // lambda_j; fixed to 1 for Poisson/Binomial
  long trials = 1;           // Binomial only

  void validate() const;
};

struct MglmmSpec {
  std::vector<MarginSpec> margins;
  int q = 0;           // cluster count
  int replicates = 1;  // observations per (margin, cluster)
  EllipticalSpec random_components;

  int dim() const { return static_cast<int>(margins.size()); }
  void validate() const;
};

struct LongRow {
  int margin = 0;   // 1-based
  int cluster = 0;  // 1-based
  double y = 0.0;
  std::vector<double> x;  // covariates, first entry the constant 1
};

struct LongDataset {
  std::vector<LongRow> rows;
  int margin_count() const;
  int cluster_count() const;
};

// d(y, mu): Poisson 2[y log(y/mu) - y + mu], Gamma 2[(y-mu)/mu - log(y/mu)],
// Gaussian (y-mu)^2, Binomial(m) 2[y log(y/mu) + (m-y) log((m-y)/(m-mu))].
double unit_deviance(ResponseFamily family, double y, double mu, long trials = 1);

// a(y;lambda) exp[-d(y;mu)/(2 lambda)]; coincides with the classical density
double conditional_density(const MarginSpec& margin, double y, double mu);

// V(mu) = 2 / d''(mu, mu)
double variance_function(ResponseFamily family, double mu, long trials = 1);

double apply_inverse_link(Link link, double eta);
double apply_link(Link link, double mu);
// d mu / d eta at the given linear predictor
double inverse_link_derivative(Link link, double eta);

// draw one response with conditional mean mu
double sample_response(Rng& rng, const MarginSpec& margin, double mu);

struct SimulationResult {
  LongDataset data;
  Eigen::MatrixXd true_b;  // q x d latent truth
};

SimulationResult simulate_mglmm(const MglmmSpec& spec, std::uint64_t seed);

std::string family_name(ResponseFamily f);
ResponseFamily response_family_from_name(const std::string& name);
std::string link_name(Link l);
Link link_from_name(const std::string& name);

}  // namespace latentgraph
