#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "latentgraph/dispersion.hpp"
#include "latentgraph/gtests.hpp"

namespace latentgraph {

// Simulation study configuration: sweep the tested off-diagonal entry over a
// grid, estimate rejection rates per (grid point, cluster count, method).
struct StudyConfig {
  std::variant<MglmmSpec, EllipticalSpec> model;
  BlockPartition hypothesis;          // sizes of tested blocks + conditioning
  std::vector<int> tested_coords;     // 0-based coordinates, tested order
  std::vector<int> cond_coords;       // 0-based conditioning coordinates
  std::vector<double> grid;           // values for the first tested pair
  std::vector<int> q_schedule;
  int n_sims = 200;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::vector<TestMethod> methods;
  PvalueEngine engine = PvalueEngine::Series;
  std::string dump_pvalues_prefix;    // optional: write per-point p-value CSVs
};

StudyConfig read_study_config_json(const std::string& path);

struct PowerPoint {
  double grid_value = 0.0;
  int q = 0;
  TestMethod method = TestMethod::GaussianExact;
  int n_sims = 0;
  int rejections = 0;
  double rate = 0.0;
  std::vector<double> pvalues;
};

std::vector<PowerPoint> run_power_study(const StudyConfig& config, int threads);

void write_power_csv(const std::vector<PowerPoint>& points, const std::string& path);
std::string render_power_svg(const std::vector<PowerPoint>& points);

// One full pipeline replicate: simulate under the given model (with the grid
// value substituted), estimate, test. Returns one p-value per method.
std::vector<double> run_study_replicate(const StudyConfig& config,
                                        double grid_value, int q,
                                        std::uint64_t replicate_seed);

}  // namespace latentgraph
