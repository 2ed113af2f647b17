#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "latentgraph/covest.hpp"

namespace latentgraph {

enum class TestMethod { GaussianExact, EllipticalAsymptotic };
enum class PvalueEngine { MonteCarlo, Series };
enum class Correction { None, Holm, Bonferroni };

constexpr std::uint64_t kDefaultNullSeed = 0x5EED;
constexpr int kDefaultNullDraws = 200000;

// Beta(alpha, beta) factors of the null law of V, in flattened block order.
struct BetaProductParams {
  std::vector<std::pair<double, double>> pairs;
  int q = 0;
};

struct TestResult {
  double statistic = 0.0;  // V for the exact test, -q sum log V_i otherwise
  double pvalue = 1.0;
  TestMethod method = TestMethod::GaussianExact;
  PvalueEngine engine = PvalueEngine::MonteCarlo;
  std::optional<BetaProductParams> null_params;
  int f = 0;            // chi-square degrees of freedom (elliptical method)
  double kappa = 0.0;   // kurtosis estimate used (elliptical method)
  std::string diagnostics;
};

// det(A) / prod det(A_ii) over the tested blocks; 1 iff cross blocks vanish.
double v_statistic(const Eigen::MatrixXd& a_cond, const BlockPartition& part);

BetaProductParams beta_product_params(int q, const BlockPartition& part);

// Series density of the Beta product. The recursion coefficient is the
// rising factorial (c(j)-b(j-1))_s / s!; the plain-ratio form
// (c(j)-b(j-1))/s! does not normalise for more than one factor (checked
// against quadrature and Monte Carlo oracles).
double v_density_series(double v, const BetaProductParams& params,
                      double tol = 1e-12, int max_terms = 400);

// P(V <= v_obs) under the product-Beta null.
double v_pvalue_exact(double v_obs, const BetaProductParams& params,
                      PvalueEngine engine, int mc_draws = kDefaultNullDraws,
                      std::uint64_t mc_seed = kDefaultNullSeed);

// Full exact pipeline: condition, compute V, evaluate the null law.
TestResult gaussian_exact_test(const Eigen::MatrixXd& sigma_hat,
                               const BlockPartition& part, int q,
                               PvalueEngine engine = PvalueEngine::MonteCarlo,
                               int mc_draws = kDefaultNullDraws,
                               std::uint64_t mc_seed = kDefaultNullSeed);

// Plug-in kurtosis estimate from rows of the tested subvector and its
// (conditional) covariance estimate.
double estimate_kappa(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& a_cond);

// Residual rows of the tested part after regressing out the conditioning
// columns (input columns already arranged tested-first).
Eigen::MatrixXd conditional_residual_rows(const Eigen::MatrixXd& data,
                                          const BlockPartition& part);

TestResult elliptical_test(const Eigen::MatrixXd& a_cond,
                           const BlockPartition& part, int q, double kappa_hat);

struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};
KsResult ks_uniform_test(const std::vector<double>& pvalues);

// Holm / Bonferroni adjustment, order preserved.
std::vector<double> adjust_pvalues(const std::vector<double>& raw, Correction c);

struct PairwiseResult {
  Eigen::MatrixXd raw_pvalues;       // symmetric, diagonal 1
  Eigen::MatrixXd adjusted_pvalues;  // after the chosen correction
  Eigen::MatrixXi adjacency;         // adjusted p < alpha
};

// Every pair (i, j) tested with sizes=(1,1) conditioning on the remaining
// coordinates. kappa_hat is required for the elliptical method.
PairwiseResult pairwise_edge_tests(const Eigen::MatrixXd& sigma_hat, int q,
                                   TestMethod method, double alpha,
                                   Correction correction,
                                   std::optional<double> kappa_hat = {},
                                   PvalueEngine engine = PvalueEngine::Series);

std::string method_name(TestMethod m);
TestMethod method_from_name(const std::string& name);
std::string correction_name(Correction c);
Correction correction_from_name(const std::string& name);
std::string engine_name(PvalueEngine e);
PvalueEngine engine_from_name(const std::string& name);

}  // namespace latentgraph
