#pragma once

#include <cstdint>
#include <string>

namespace latentgraph {

// Subcommand entry points shared by the C API and the CLI. Each returns an
// exit code (0 ok, 2 usage/config error, 3 numeric failure) and fills `err`
// on failure.

int cmd_simulate(const std::string& spec_json, std::uint64_t seed,
                 const std::string& out_csv, const std::string& truth_csv,
                 std::string& err);

int cmd_predict(const std::string& data_csv, const std::string& spec_json,
                const std::string& out_csv, std::string& err);

// method: "sample" | "ml-gaussian" | "ml-elliptical"
int cmd_estimate_cov(const std::string& pred_csv, const std::string& method,
                     const std::string& family, double nu, int nodes,
                     const std::string& divisor, const std::string& out_json,
                     std::string& err);

// blocks: comma sizes, e.g. "1,1"; coords: 1-based tested coordinates,
// e.g. "1,3"; condition: "rest" | "none" | 1-based comma list.
int cmd_test(const std::string& cov_json, const std::string& blocks,
             const std::string& coords, const std::string& condition,
             const std::string& method, const std::string& engine,
             double kappa, bool have_kappa, const std::string& kappa_data_csv,
             const std::string& out_json, std::string& err);

int cmd_graph(const std::string& cov_json, double alpha,
              const std::string& correction, const std::string& method,
              double kappa, bool have_kappa, bool moral,
              const std::string& dot_out, const std::string& json_out,
              std::string& err);

int cmd_power_study(const std::string& config_json, const std::string& out_csv,
                    const std::string& out_svg, int threads, std::string& err);

int cmd_uniformity(const std::string& pvalues_csv, const std::string& out_json,
                   const std::string& out_svg, std::string& err);

}  // namespace latentgraph
