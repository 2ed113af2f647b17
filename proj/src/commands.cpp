#include "latentgraph/commands.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <exception>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "latentgraph/covest.hpp"
#include "latentgraph/dispersion.hpp"
#include "latentgraph/graphs.hpp"
#include "latentgraph/gtests.hpp"
#include "latentgraph/io.hpp"
#include "latentgraph/study.hpp"

namespace latentgraph {

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kNumeric = 3;

// invalid_argument -> usage/config error, anything else -> numeric failure
int classify(const std::exception& e, std::string& err) {
  err = e.what();
  return dynamic_cast<const std::invalid_argument*>(&e) ? kUsage : kNumeric;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("invalid ") + what + " entry '" +
                                  tok + "'");
    }
  }
  if (out.empty())
    throw std::invalid_argument(std::string(what) + " list is empty");
  return out;
}

// condition: "rest" | "none" | 1-based comma list; returns 0-based coords
std::vector<int> resolve_condition(const std::string& condition,
                                   const std::vector<int>& tested, int dim) {
  std::vector<int> cond;
  if (condition == "none") return cond;
  if (condition == "rest") {
    for (int c = 0; c < dim; ++c)
      if (std::find(tested.begin(), tested.end(), c) == tested.end())
        cond.push_back(c);
    return cond;
  }
  for (int c : parse_int_list(condition, "condition")) {
    if (c < 1 || c > dim)
      throw std::invalid_argument("condition index out of range");
    cond.push_back(c - 1);
  }
  return cond;
}

}  // namespace

int cmd_simulate(const std::string& spec_json, std::uint64_t seed,
                 const std::string& out_csv, const std::string& truth_csv,
                 std::string& err) {
  try {
    const MglmmSpec spec = read_mglmm_spec_json(spec_json);
    const SimulationResult sim = simulate_mglmm(spec, seed);
    write_long_csv(sim.data, out_csv);
    if (!truth_csv.empty()) write_truth_csv(sim.true_b, truth_csv);
    return kOk;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

int cmd_predict(const std::string& data_csv, const std::string& spec_json,
                const std::string& out_csv, std::string& err) {
  try {
    const LongDataset data = read_long_csv(data_csv);
    std::vector<PredictMarginSpec> margins;
    if (!spec_json.empty()) {
      const MglmmSpec spec = read_mglmm_spec_json(spec_json);
      for (const auto& m : spec.margins)
        margins.push_back({m.family, m.link, m.trials, {}, {}, {}});
    } else {
      // without a model description every margin is treated as Gaussian
      for (int j = 0; j < data.margin_count(); ++j)
        margins.push_back(PredictMarginSpec{});
    }
    const PredictionSet preds = predict_random_components(data, margins);
    write_predictions_csv(preds, out_csv);
    return kOk;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

int cmd_estimate_cov(const std::string& pred_csv, const std::string& method,
                     const std::string& family, double nu, int nodes,
                     const std::string& divisor, const std::string& out_json,
                     std::string& err) {
  try {
    const PredictionSet preds = read_predictions_csv(pred_csv);
    CovarianceFile out;
    out.q = preds.q();
    if (divisor == "q-1")
      out.divisor = Divisor::QMinus1;
    else if (divisor == "q")
      out.divisor = Divisor::Q;
    else
      throw std::invalid_argument("divisor must be 'q-1' or 'q'");

    if (method == "sample") {
      out.matrix = sample_covariance(preds.bhat, out.divisor);
    } else if (method == "ml-gaussian" || method == "ml-elliptical") {
      const Eigen::MatrixXd init =
          sample_covariance(preds.bhat, Divisor::QMinus1);
      MlEstimate est;
      if (method == "ml-gaussian") {
        est = gaussian_approx_ml(preds, init);
      } else {
        est = elliptical_approx_ml(preds, family_from_name(family), nu, nodes,
                                   init);
      }
      out.matrix = est.sigma;
      out.divisor = Divisor::QMinus1;
    } else {
      throw std::invalid_argument(
          "method must be 'sample', 'ml-gaussian' or 'ml-elliptical'");
    }
    for (int j = 0; j < out.matrix.rows(); ++j)
      out.labels.push_back("b" + std::to_string(j + 1));
    write_covariance_json(out, out_json);
    return kOk;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

int cmd_test(const std::string& cov_json, const std::string& blocks,
             const std::string& coords, const std::string& condition,
             const std::string& method, const std::string& engine,
             double kappa, bool have_kappa, const std::string& kappa_data_csv,
             const std::string& out_json, std::string& err) {
  try {
    const CovarianceFile cov = read_covariance_json(cov_json);
    const int dim = static_cast<int>(cov.matrix.rows());

    BlockPartition part;
    part.sizes = parse_int_list(blocks, "blocks");
    std::vector<int> tested;
    if (coords.empty()) {
      for (int c = 0; c < part.tested_dim(); ++c) tested.push_back(c);
    } else {
      for (int c : parse_int_list(coords, "coords")) {
        if (c < 1 || c > dim)
          throw std::invalid_argument("tested index out of range");
        tested.push_back(c - 1);
      }
    }
    if (static_cast<int>(tested.size()) != part.tested_dim())
      throw std::invalid_argument("tested coordinates must match block sizes");
    const std::vector<int> cond = resolve_condition(condition, tested, dim);
    part.cond_size = static_cast<int>(cond.size());
    part.validate();
    if (part.total_dim() != dim)
      throw std::invalid_argument(
          "blocks plus conditioning must cover the covariance dimension");

    const Eigen::MatrixXd arranged = arrange_matrix(cov.matrix, tested, cond);
    const TestMethod tm = method_from_name(method);

    TestResult res;
    if (tm == TestMethod::GaussianExact) {
      res = gaussian_exact_test(arranged, part, cov.q, engine_from_name(engine));
    } else {
      double kappa_hat;
      if (have_kappa) {
        kappa_hat = kappa;
      } else if (!kappa_data_csv.empty()) {
        const Eigen::MatrixXd rows_raw = read_matrix_csv(kappa_data_csv);
        const Eigen::MatrixXd rows = arrange_columns(rows_raw, tested, cond);
        const Eigen::MatrixXd a_cond = conditional_scatter(
            sample_covariance(rows, Divisor::QMinus1), part);
        kappa_hat = estimate_kappa(conditional_residual_rows(rows, part), a_cond);
      } else {
        throw std::invalid_argument(
            "elliptical method needs --kappa or --kappa-data");
      }
      const Eigen::MatrixXd a_cond = conditional_scatter(arranged, part);
      res = elliptical_test(a_cond, part, cov.q, kappa_hat);
    }
    write_text_file(out_json, test_result_to_json(res, part));
    return kOk;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

int cmd_graph(const std::string& cov_json, double alpha,
              const std::string& correction, const std::string& method,
              double kappa, bool have_kappa, bool moral,
              const std::string& dot_out, const std::string& json_out,
              std::string& err) {
  try {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("alpha must lie in (0, 1)");
    const CovarianceFile cov = read_covariance_json(cov_json);
    const TestMethod tm = method_from_name(method);
    std::optional<double> kappa_hat;
    if (have_kappa) kappa_hat = kappa;
    if (tm == TestMethod::EllipticalAsymptotic && !kappa_hat)
      throw std::invalid_argument("elliptical method needs --kappa");

    const PairwiseResult edges =
        pairwise_edge_tests(cov.matrix, cov.q, tm, alpha,
                            correction_from_name(correction), kappa_hat);
    MixedGraph g =
        build_ug(edges.adjusted_pvalues, alpha, Correction::None);
    if (moral) g = moralize(g);
    if (!dot_out.empty()) write_text_file(dot_out, export_dot(g));
    if (!json_out.empty()) write_text_file(json_out, graph_to_json(g));
    return kOk;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

int cmd_power_study(const std::string& config_json, const std::string& out_csv,
                    const std::string& out_svg, int threads, std::string& err) {
  try {
    const StudyConfig config = read_study_config_json(config_json);
    if (threads <= 0)
      threads = std::max(1u, std::thread::hardware_concurrency());
    const std::vector<PowerPoint> points = run_power_study(config, threads);
    write_power_csv(points, out_csv);
    if (!out_svg.empty()) write_text_file(out_svg, render_power_svg(points));
    return kOk;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

int cmd_uniformity(const std::string& pvalues_csv, const std::string& out_json,
                   const std::string& out_svg, std::string& err) {
  try {
    const std::vector<double> pvalues = read_pvalues_csv(pvalues_csv);
    const KsResult ks = ks_uniform_test(pvalues);
    std::ostringstream out;
    char buf[64];
    out << "{\n";
    std::snprintf(buf, sizeof(buf), "%.17g", ks.statistic);
    out << "  \"statistic\": " << buf << ",\n";
    std::snprintf(buf, sizeof(buf), "%.17g", ks.pvalue);
    out << "  \"pvalue\": " << buf << ",\n";
    out << "  \"n\": " << pvalues.size() << "\n}\n";
    write_text_file(out_json, out.str());
    if (!out_svg.empty()) write_text_file(out_svg, render_qq_plot(pvalues));
    return kOk;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

}  // namespace latentgraph
