// Command-line front end; all real work goes through the C API.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "latentgraph/latentgraph.h"

namespace {

// --seed beats LATENTGRAPH_SEED beats 0
std::uint64_t resolve_seed(bool seed_given, std::uint64_t seed) {
  if (seed_given) return seed;
  if (const char* env = std::getenv("LATENTGRAPH_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: LATENTGRAPH_SEED is not an integer\n");
      std::exit(2);
    }
  }
  return 0;
}

int report(int code) {
  if (code != 0) std::fprintf(stderr, "error: %s\n", lg_last_error());
  return code;
}

const char* opt(const std::string& v) { return v.empty() ? nullptr : v.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent covariance structure of multivariate mixed models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", []() { return std::string(lg_version()); });

  std::uint64_t seed = 0;
  bool seed_given = false;

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "draw a dataset from a model");
  std::string sim_spec, sim_out, sim_truth;
  sim->add_option("--spec", sim_spec, "model JSON file")->required();
  sim->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
    seed_given = true;
  });
  sim->add_option("--out", sim_out, "output CSV")->required();
  sim->add_option("--truth", sim_truth, "latent-component CSV");

  // ---- predict ----
  auto* pred = app.add_subcommand("predict", "predict cluster random components");
  std::string pred_data, pred_spec, pred_out;
  pred->add_option("--data", pred_data, "long-format CSV")->required();
  pred->add_option("--spec", pred_spec, "model JSON (families/links)");
  pred->add_option("--out", pred_out, "predictions CSV")->required();

  // ---- estimate-cov ----
  auto* est = app.add_subcommand("estimate-cov", "estimate the latent covariance");
  std::string est_pred, est_method = "sample", est_family = "gaussian";
  std::string est_divisor = "q-1", est_out;
  double est_nu = 0.0;
  int est_nodes = 10;
  est->add_option("--predictions", est_pred, "predictions CSV")->required();
  est->add_option("--estimator", est_method,
                  "sample | ml-gaussian | ml-elliptical");
  est->add_option("--family", est_family, "gaussian | student-t");
  est->add_option("--nu", est_nu, "t degrees of freedom");
  est->add_option("--nodes", est_nodes, "quadrature nodes per axis");
  est->add_option("--divisor", est_divisor, "q-1 | q");
  est->add_option("--out", est_out, "covariance JSON")->required();

  // ---- test ----
  auto* tst = app.add_subcommand("test", "test a block-diagonal hypothesis");
  std::string tst_cov, tst_blocks = "1,1", tst_coords, tst_cond = "rest";
  std::string tst_method = "gaussian", tst_engine = "mc", tst_kdata, tst_out;
  double tst_kappa = 0.0;
  bool tst_have_kappa = false;
  tst->add_option("--cov", tst_cov, "covariance JSON")->required();
  tst->add_option("--blocks", tst_blocks, "tested block sizes, e.g. 1,1");
  tst->add_option("--coords", tst_coords, "1-based tested coordinates");
  tst->add_option("--condition", tst_cond, "rest | none | 1-based indices");
  tst->add_option("--method", tst_method, "gaussian | elliptical");
  tst->add_option("--engine", tst_engine, "mc | series");
  tst->add_option("--kappa", tst_kappa, "kurtosis estimate")
      ->each([&](const std::string&) { tst_have_kappa = true; });
  tst->add_option("--kappa-data", tst_kdata, "component-row CSV for kappa");
  tst->add_option("--out", tst_out, "result JSON")->required();

  // ---- graph ----
  auto* grf = app.add_subcommand("graph", "induce the latent concentration graph");
  std::string grf_cov, grf_corr = "holm", grf_method = "gaussian";
  std::string grf_dot, grf_json;
  double grf_alpha = 0.05, grf_kappa = 0.0;
  bool grf_have_kappa = false, grf_moral = false;
  grf->add_option("--cov", grf_cov, "covariance JSON")->required();
  grf->add_option("--alpha", grf_alpha, "significance level");
  grf->add_option("--correction", grf_corr, "none | holm | bonferroni");
  grf->add_option("--method", grf_method, "gaussian | elliptical");
  grf->add_option("--kappa", grf_kappa, "kurtosis estimate")
      ->each([&](const std::string&) { grf_have_kappa = true; });
  grf->add_flag("--moral", grf_moral, "moralize the result");
  grf->add_option("--dot", grf_dot, "DOT output path");
  grf->add_option("--out", grf_json, "JSON output path");

  // ---- power-study ----
  auto* pow = app.add_subcommand("power-study", "rejection-rate sweep");
  std::string pow_config, pow_out, pow_svg;
  int pow_threads = 0;
  pow->add_option("--config", pow_config, "study JSON file")->required();
  pow->add_option("--out", pow_out, "power CSV")->required();
  pow->add_option("--svg", pow_svg, "power curve SVG");
  pow->add_option("--threads", pow_threads, "worker threads (0 = auto)");

  // ---- uniformity ----
  auto* uni = app.add_subcommand("uniformity", "KS uniformity check of p-values");
  std::string uni_pv, uni_out, uni_svg;
  uni->add_option("--pvalues", uni_pv, "p-value CSV")->required();
  uni->add_option("--out", uni_out, "KS result JSON")->required();
  uni->add_option("--svg", uni_svg, "QQ plot SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (sim->parsed())
    return report(lg_simulate(sim_spec.c_str(), resolve_seed(seed_given, seed),
                              sim_out.c_str(), opt(sim_truth)));
  if (pred->parsed())
    return report(lg_predict(pred_data.c_str(), opt(pred_spec),
                             pred_out.c_str()));
  if (est->parsed())
    return report(lg_estimate_cov(est_pred.c_str(), est_method.c_str(),
                                  est_family.c_str(), est_nu, est_nodes,
                                  est_divisor.c_str(), est_out.c_str()));
  if (tst->parsed())
    return report(lg_test(tst_cov.c_str(), tst_blocks.c_str(),
                          opt(tst_coords), tst_cond.c_str(),
                          tst_method.c_str(), tst_engine.c_str(), tst_kappa,
                          tst_have_kappa ? 1 : 0, opt(tst_kdata),
                          tst_out.c_str()));
  if (grf->parsed())
    return report(lg_graph(grf_cov.c_str(), grf_alpha, grf_corr.c_str(),
                           grf_method.c_str(), grf_kappa,
                           grf_have_kappa ? 1 : 0, grf_moral ? 1 : 0,
                           opt(grf_dot), opt(grf_json)));
  if (pow->parsed())
    return report(lg_power_study(pow_config.c_str(), pow_out.c_str(),
                                 opt(pow_svg), pow_threads));
  if (uni->parsed())
    return report(lg_uniformity(uni_pv.c_str(), uni_out.c_str(),
                                opt(uni_svg)));
  return 2;
}
