#include "latentgraph/latentgraph.h"

#include <Eigen/Dense>
#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

#include "latentgraph/commands.hpp"
#include "latentgraph/covest.hpp"
#include "latentgraph/gtests.hpp"

namespace {

thread_local std::string g_last_error;

std::string s(const char* p) { return p ? std::string(p) : std::string(); }

int run(int code, const std::string& err) {
  g_last_error = code == 0 ? "" : err;
  return code;
}

int fail(const std::exception& e) {
  g_last_error = e.what();
  return dynamic_cast<const std::invalid_argument*>(&e) ? 2 : 3;
}

latentgraph::BlockPartition make_partition(const int* block_sizes,
                                           int n_blocks, int cond_size) {
  if (!block_sizes || n_blocks < 1)
    throw std::invalid_argument("block sizes required");
  latentgraph::BlockPartition part;
  part.sizes.assign(block_sizes, block_sizes + n_blocks);
  part.cond_size = cond_size;
  part.validate();
  return part;
}

}  // namespace

extern "C" {

const char* lg_last_error(void) { return g_last_error.c_str(); }

const char* lg_version(void) { return "1.0.0"; }

int lg_simulate(const char* spec_json, uint64_t seed, const char* out_csv,
                const char* truth_csv) {
  std::string err;
  return run(latentgraph::cmd_simulate(s(spec_json), seed, s(out_csv),
                                       s(truth_csv), err),
             err);
}

int lg_predict(const char* data_csv, const char* spec_json,
               const char* out_csv) {
  std::string err;
  return run(latentgraph::cmd_predict(s(data_csv), s(spec_json), s(out_csv),
                                      err),
             err);
}

int lg_estimate_cov(const char* pred_csv, const char* method,
                    const char* family, double nu, int nodes,
                    const char* divisor, const char* out_json) {
  std::string err;
  return run(latentgraph::cmd_estimate_cov(s(pred_csv), s(method), s(family),
                                           nu, nodes, s(divisor), s(out_json),
                                           err),
             err);
}

int lg_test(const char* cov_json, const char* blocks, const char* coords,
            const char* condition, const char* method, const char* engine,
            double kappa, int have_kappa, const char* kappa_data_csv,
            const char* out_json) {
  std::string err;
  return run(latentgraph::cmd_test(s(cov_json), s(blocks), s(coords),
                                   s(condition), s(method), s(engine), kappa,
                                   have_kappa != 0, s(kappa_data_csv),
                                   s(out_json), err),
             err);
}

int lg_graph(const char* cov_json, double alpha, const char* correction,
             const char* method, double kappa, int have_kappa, int moral,
             const char* dot_out, const char* json_out) {
  std::string err;
  return run(latentgraph::cmd_graph(s(cov_json), alpha, s(correction),
                                    s(method), kappa, have_kappa != 0,
                                    moral != 0, s(dot_out), s(json_out), err),
             err);
}

int lg_power_study(const char* config_json, const char* out_csv,
                   const char* out_svg, int threads) {
  std::string err;
  return run(latentgraph::cmd_power_study(s(config_json), s(out_csv),
                                          s(out_svg), threads, err),
             err);
}

int lg_uniformity(const char* pvalues_csv, const char* out_json,
                  const char* out_svg) {
  std::string err;
  return run(latentgraph::cmd_uniformity(s(pvalues_csv), s(out_json),
                                         s(out_svg), err),
             err);
}

int lg_ks_uniform(const double* pvalues, size_t n, double* statistic,
                  double* pvalue) {
  try {
    if (!pvalues || !statistic || !pvalue)
      throw std::invalid_argument("null pointer argument");
    const std::vector<double> values(pvalues, pvalues + n);
    const latentgraph::KsResult ks = latentgraph::ks_uniform_test(values);
    *statistic = ks.statistic;
    *pvalue = ks.pvalue;
    return run(0, "");
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int lg_gaussian_exact_test(const double* cov, int dim, const int* block_sizes,
                           int n_blocks, int cond_size, int q,
                           const char* engine, double* statistic,
                           double* pvalue) {
  try {
    if (!cov || !statistic || !pvalue)
      throw std::invalid_argument("null pointer argument");
    const latentgraph::BlockPartition part =
        make_partition(block_sizes, n_blocks, cond_size);
    if (part.total_dim() != dim)
      throw std::invalid_argument("blocks do not cover the matrix dimension");
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                         Eigen::Dynamic, Eigen::RowMajor>>
        m(cov, dim, dim);
    const latentgraph::TestResult res = latentgraph::gaussian_exact_test(
        Eigen::MatrixXd(m), part, q, latentgraph::engine_from_name(s(engine)));
    *statistic = res.statistic;
    *pvalue = res.pvalue;
    return run(0, "");
  } catch (const std::exception& e) {
    return fail(e);
  }
}

int lg_elliptical_test(const double* a_cond, int dim, const int* block_sizes,
                       int n_blocks, int q, double kappa_hat,
                       double* statistic, double* pvalue) {
  try {
    if (!a_cond || !statistic || !pvalue)
      throw std::invalid_argument("null pointer argument");
    const latentgraph::BlockPartition part =
        make_partition(block_sizes, n_blocks, 0);
    if (part.tested_dim() != dim)
      throw std::invalid_argument("blocks do not cover the matrix dimension");
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                         Eigen::Dynamic, Eigen::RowMajor>>
        m(a_cond, dim, dim);
    const latentgraph::TestResult res = latentgraph::elliptical_test(
        Eigen::MatrixXd(m), part, q, kappa_hat);
    *statistic = res.statistic;
    *pvalue = res.pvalue;
    return run(0, "");
  } catch (const std::exception& e) {
    return fail(e);
  }
}

}  // extern "C"
