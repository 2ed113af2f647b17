#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "latentgraph/covest.hpp"
#include "latentgraph/dispersion.hpp"
#include "latentgraph/gtests.hpp"

namespace latentgraph {

// ----- long-format dataset: header margin,cluster,y,x1,...,xp -----
void write_long_csv(const LongDataset& data, const std::string& path);
LongDataset read_long_csv(const std::string& path);

// ----- latent truth / predictions -----
void write_truth_csv(const Eigen::MatrixXd& b, const std::string& path);
Eigen::MatrixXd read_matrix_csv(const std::string& path);  // skips a header row

// predictions: cluster,b1,...,bd,v1,...,vd
void write_predictions_csv(const PredictionSet& preds, const std::string& path);
PredictionSet read_predictions_csv(const std::string& path);

// ----- covariance JSON -----
struct CovarianceFile {
  Eigen::MatrixXd matrix;
  int q = 0;
  Divisor divisor = Divisor::QMinus1;
  std::vector<std::string> labels;
};
void write_covariance_json(const CovarianceFile& cov, const std::string& path);
CovarianceFile read_covariance_json(const std::string& path);

std::string test_result_to_json(const TestResult& res, const BlockPartition& part);

// ----- model / study specs (JSON) -----
MglmmSpec read_mglmm_spec_json(const std::string& path);
MglmmSpec mglmm_spec_from_json_text(const std::string& text);
EllipticalSpec elliptical_spec_from_json_text(const std::string& text);

// ----- p-value lists -----
std::vector<double> read_pvalues_csv(const std::string& path);
void write_pvalues_csv(const std::vector<double>& pvalues, const std::string& path);

// ----- minimal self-contained SVG polyline chart -----
struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};
std::string render_line_chart(const std::vector<SvgSeries>& series,
                              const std::string& x_label,
                              const std::string& y_label);
std::string render_qq_plot(const std::vector<double>& pvalues);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace latentgraph
