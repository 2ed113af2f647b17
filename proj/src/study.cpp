#include "latentgraph/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "latentgraph/io.hpp"
#include "latentgraph/rng.hpp"

namespace latentgraph {

namespace {

using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t point,
                          std::uint64_t replicate) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s) ^ (point * 0x9e3779b97f4a7c15ULL);
  std::uint64_t b = splitmix64(a) ^ (replicate * 0xd1342543de82ef95ULL);
  return splitmix64(b);
}

// covariance/scatter with the first tested pair entry replaced
Eigen::MatrixXd substituted_matrix(const Eigen::MatrixXd& base,
                                   const std::vector<int>& tested, double value) {
  if (tested.size() < 2)
    throw std::invalid_argument("grid substitution needs two tested coordinates");
  Eigen::MatrixXd m = base;
  m(tested[0], tested[1]) = value;
  m(tested[1], tested[0]) = value;
  return m;
}

std::vector<PredictMarginSpec> predict_margins(const MglmmSpec& spec) {
  std::vector<PredictMarginSpec> out;
  for (const auto& m : spec.margins)
    out.push_back({m.family, m.link, m.trials, {}, {}, {}});
  return out;
}

}  // namespace

std::vector<double> run_study_replicate(const StudyConfig& config,
                                        double grid_value, int q,
                                        std::uint64_t replicate_seed) {
  Eigen::MatrixXd sigma_hat;
  Eigen::MatrixXd component_rows;

  if (std::holds_alternative<EllipticalSpec>(config.model)) {
    EllipticalSpec spec = std::get<EllipticalSpec>(config.model);
    spec.scatter = substituted_matrix(spec.scatter, config.tested_coords, grid_value);
    spec.validate();
    component_rows = sample_elliptical(spec, q, replicate_seed);
    // the convergence-rate design estimates with the 1/q divisor
    sigma_hat = sample_covariance(component_rows, Divisor::Q);
  } else {
    MglmmSpec spec = std::get<MglmmSpec>(config.model);
    spec.random_components.scatter = substituted_matrix(
        spec.random_components.scatter, config.tested_coords, grid_value);
    spec.q = q;
    spec.validate();
    const SimulationResult sim = simulate_mglmm(spec, replicate_seed);
    const PredictionSet preds =
        predict_random_components(sim.data, predict_margins(spec));
    component_rows = preds.bhat;
    sigma_hat = covariance_from_predictions(preds);
  }

  const Eigen::MatrixXd arranged =
      arrange_matrix(sigma_hat, config.tested_coords, config.cond_coords);
  const Eigen::MatrixXd arranged_rows =
      arrange_columns(component_rows, config.tested_coords, config.cond_coords);

  std::vector<double> pvalues;
  for (TestMethod method : config.methods) {
    if (method == TestMethod::GaussianExact) {
      pvalues.push_back(
          gaussian_exact_test(arranged, config.hypothesis, q, config.engine).pvalue);
    } else {
      const Eigen::MatrixXd cov_rows =
          sample_covariance(arranged_rows, Divisor::QMinus1);
      const Eigen::MatrixXd a_cond = conditional_scatter(cov_rows, config.hypothesis);
      const Eigen::MatrixXd resid =
          conditional_residual_rows(arranged_rows, config.hypothesis);
      const double kappa = estimate_kappa(resid, a_cond);
      BlockPartition tested_part{config.hypothesis.sizes, 0};
      pvalues.push_back(elliptical_test(a_cond, tested_part, q, kappa).pvalue);
    }
  }
  return pvalues;
}

std::vector<PowerPoint> run_power_study(const StudyConfig& config, int threads) {
  if (config.n_sims < 1) throw std::invalid_argument("n_sims must be >= 1");
  if (config.grid.empty() || config.q_schedule.empty())
    throw std::invalid_argument("grid and q schedule must be nonempty");
  if (config.methods.empty())
    throw std::invalid_argument("at least one test method required");

  // reject non-PD grid points up front
  const Eigen::MatrixXd base =
      std::holds_alternative<EllipticalSpec>(config.model)
          ? std::get<EllipticalSpec>(config.model).scatter
          : std::get<MglmmSpec>(config.model).random_components.scatter;
  for (double g : config.grid) {
    const Eigen::MatrixXd m = substituted_matrix(base, config.tested_coords, g);
    if (Eigen::LLT<Eigen::MatrixXd>(m).info() != Eigen::Success)
      throw std::invalid_argument("grid value " + std::to_string(g) +
                                  " makes the covariance indefinite");
  }

  const int n_methods = static_cast<int>(config.methods.size());
  std::vector<PowerPoint> points;
  int point_id = 0;
  for (int q : config.q_schedule) {
    for (double g : config.grid) {
      std::vector<std::vector<double>> sim_pvalues(config.n_sims);
      const int n_threads = std::max(1, threads);
      std::vector<std::thread> pool;
      std::atomic<int> failures{0};
      std::string first_error;
      std::mutex err_mutex;
      for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t]() {
          for (int r = t; r < config.n_sims; r += n_threads) {
            try {
              sim_pvalues[r] = run_study_replicate(
                  config, g, q, derive_seed(config.seed, point_id, r));
            } catch (const std::exception& e) {
              ++failures;
              std::lock_guard<std::mutex> lock(err_mutex);
              if (first_error.empty()) first_error = e.what();
            }
          }
        });
      }
      for (auto& th : pool) th.join();
      if (failures > 0)
        throw std::runtime_error("replicate failed: " + first_error);

      for (int m = 0; m < n_methods; ++m) {
        PowerPoint p;
        p.grid_value = g;
        p.q = q;
        p.method = config.methods[m];
        p.n_sims = config.n_sims;
        for (int r = 0; r < config.n_sims; ++r) {
          p.pvalues.push_back(sim_pvalues[r][m]);
          if (sim_pvalues[r][m] < config.alpha) ++p.rejections;
        }
        p.rate = static_cast<double>(p.rejections) / config.n_sims;
        points.push_back(std::move(p));
      }
      ++point_id;
    }
  }

  if (!config.dump_pvalues_prefix.empty()) {
    for (const auto& p : points) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "_%s_q%d_g%g.csv",
                    method_name(p.method).c_str(), p.q, p.grid_value);
      write_pvalues_csv(p.pvalues, config.dump_pvalues_prefix + buf);
    }
  }
  return points;
}

void write_power_csv(const std::vector<PowerPoint>& points, const std::string& path) {
  std::ostringstream out;
  out << "grid_value,q,method,n_sims,rejections,rate\n";
  for (const auto& p : points) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", p.grid_value);
    out << buf << "," << p.q << "," << method_name(p.method) << "," << p.n_sims
        << "," << p.rejections << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", p.rate);
    out << buf << "\n";
  }
  write_text_file(path, out.str());
}

std::string render_power_svg(const std::vector<PowerPoint>& points) {
  std::map<std::string, SvgSeries> by_series;
  for (const auto& p : points) {
    const std::string key =
        method_name(p.method) + " (q=" + std::to_string(p.q) + ")";
    auto& s = by_series[key];
    s.name = key;
    s.x.push_back(p.grid_value);
    s.y.push_back(p.rate);
  }
  std::vector<SvgSeries> series;
  for (auto& [k, s] : by_series) series.push_back(std::move(s));
  return render_line_chart(series, "off-diagonal covariance", "rejection rate");
}

StudyConfig read_study_config_json(const std::string& path) {
  json j;
  {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw std::invalid_argument("invalid study config: " + std::string(e.what()));
    }
  }

  StudyConfig config;
  try {
  const json& model = j.at("model");
  if (model.contains("mglmm"))
    config.model = mglmm_spec_from_json_text(model["mglmm"].dump());
  else if (model.contains("elliptical"))
    config.model = elliptical_spec_from_json_text(model["elliptical"].dump());
  else
    throw std::invalid_argument("model must hold 'mglmm' or 'elliptical'");

  const int dim = std::holds_alternative<EllipticalSpec>(config.model)
                      ? std::get<EllipticalSpec>(config.model).dim()
                      : std::get<MglmmSpec>(config.model).dim();

  const json& hyp = j.at("hypothesis");
  config.hypothesis.sizes = hyp.at("blocks").get<std::vector<int>>();
  for (int c : hyp.at("tested").get<std::vector<int>>())
    config.tested_coords.push_back(c - 1);
  if (static_cast<int>(config.tested_coords.size()) !=
      config.hypothesis.tested_dim())
    throw std::invalid_argument("tested coordinates must match block sizes");

  const json& cond = hyp.contains("condition") ? hyp["condition"] : json("rest");
  if (cond.is_string() && cond.get<std::string>() == "rest") {
    for (int c = 0; c < dim; ++c)
      if (std::find(config.tested_coords.begin(), config.tested_coords.end(), c) ==
          config.tested_coords.end())
        config.cond_coords.push_back(c);
  } else if (cond.is_string() && cond.get<std::string>() == "none") {
    // direct test
  } else if (cond.is_array()) {
    for (int c : cond.get<std::vector<int>>()) config.cond_coords.push_back(c - 1);
  } else {
    throw std::invalid_argument("condition must be 'rest', 'none' or an index list");
  }
  config.hypothesis.cond_size = static_cast<int>(config.cond_coords.size());

  config.grid = j.at("grid").get<std::vector<double>>();
  config.q_schedule = j.value("q_schedule", std::vector<int>{});
  if (config.q_schedule.empty()) {
    if (std::holds_alternative<MglmmSpec>(config.model))
      config.q_schedule.push_back(std::get<MglmmSpec>(config.model).q);
    else
      throw std::invalid_argument("q_schedule required for an elliptical model");
  }
  config.n_sims = j.value("n_sims", 200);
  config.alpha = j.value("alpha", 0.05);
  config.seed = j.value("seed", 0ULL);
  for (const auto& m : j.value("methods", std::vector<std::string>{"gaussian"}))
    config.methods.push_back(method_from_name(m));
  config.engine = engine_from_name(j.value("engine", "series"));
  config.dump_pvalues_prefix = j.value("dump_pvalues", "");
  } catch (const json::exception& e) {
    throw std::invalid_argument("invalid study config: " + std::string(e.what()));
  }
  return config;
}

}  // namespace latentgraph
