#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "latentgraph/io.hpp"
#include "latentgraph/latentgraph.h"

using namespace latentgraph;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("latentgraph-test-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const char* name) const { return (path / name).string(); }
};

const char* kModelJson = R"({
  "margins": [
    {"family": "gamma", "link": "log", "beta": [0.6], "dispersion": 0.5},
    {"family": "poisson", "link": "log", "beta": [0.6]}
  ],
  "q": 30,
  "replicates": 5,
  "random_components": {
    "family": "gaussian",
    "scatter": [[0.8166, 0.0], [0.0, 0.91302]]
  }
})";

}  // namespace

TEST_CASE("long csv round trip") {
  TempDir tmp;
  LongDataset data;
  for (int i = 0; i < 4; ++i) {
    LongRow row;
    row.margin = 1 + i % 2;
    row.cluster = 1 + i / 2;
    row.y = 0.25 * i + 0.1;
    row.x = {1.0};
    data.rows.push_back(row);
  }
  write_long_csv(data, tmp.file("data.csv"));
  const LongDataset back = read_long_csv(tmp.file("data.csv"));
  REQUIRE(back.rows.size() == data.rows.size());
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    CHECK(back.rows[i].margin == data.rows[i].margin);
    CHECK(back.rows[i].y == data.rows[i].y);
  }
  CHECK_THROWS_AS(read_long_csv(tmp.file("missing.csv")), std::invalid_argument);
}

TEST_CASE("predictions csv round trip") {
  TempDir tmp;
  PredictionSet preds;
  preds.bhat.resize(3, 2);
  preds.bhat << 0.1, -0.2, 0.3, 0.4, -0.5, 0.6;
  preds.cond_var = Eigen::MatrixXd::Constant(3, 2, 0.25);
  write_predictions_csv(preds, tmp.file("preds.csv"));
  const PredictionSet back = read_predictions_csv(tmp.file("preds.csv"));
  CHECK((back.bhat - preds.bhat).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.cond_var - preds.cond_var).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("covariance json round trip") {
  TempDir tmp;
  CovarianceFile cov;
  cov.matrix.resize(2, 2);
  cov.matrix << 1.0, 0.25, 0.25, 2.0;
  cov.q = 37;
  cov.divisor = Divisor::Q;
  cov.labels = {"b1", "b2"};
  write_covariance_json(cov, tmp.file("cov.json"));
  const CovarianceFile back = read_covariance_json(tmp.file("cov.json"));
  CHECK(back.q == 37);
  CHECK(back.divisor == Divisor::Q);
  CHECK((back.matrix - cov.matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.labels == cov.labels);
}

TEST_CASE("model spec json parsing") {
  const MglmmSpec spec = mglmm_spec_from_json_text(kModelJson);
  CHECK(spec.margins.size() == 2);
  CHECK(spec.margins[0].family == ResponseFamily::Gamma);
  CHECK(spec.margins[0].dispersion == 0.5);
  CHECK(spec.q == 30);
  CHECK(spec.random_components.scatter(1, 1) == 0.91302);

  CHECK_THROWS_AS(mglmm_spec_from_json_text("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(mglmm_spec_from_json_text("{}"), std::invalid_argument);
}

TEST_CASE("pvalue csv round trip") {
  TempDir tmp;
  const std::vector<double> ps{0.5, 0.01, 0.999};
  write_pvalues_csv(ps, tmp.file("p.csv"));
  CHECK(read_pvalues_csv(tmp.file("p.csv")) == ps);
}

TEST_CASE("svg renderers produce stable markup") {
  SvgSeries s;
  s.name = "level";
  s.x = {0.0, 0.5, 1.0};
  s.y = {0.05, 0.2, 0.9};
  const std::string chart = render_line_chart({s}, "effect", "rate");
  CHECK(chart.find("<svg") != std::string::npos);
  CHECK(chart.find("polyline") != std::string::npos);
  CHECK(chart == render_line_chart({s}, "effect", "rate"));

  const std::string qq = render_qq_plot({0.1, 0.5, 0.9});
  CHECK(qq.find("circle") != std::string::npos);
}

TEST_CASE("c api error reporting") {
  CHECK(std::strlen(lg_version()) > 0);
  CHECK(lg_simulate("/no/such/spec.json", 1, "/tmp/out.csv", nullptr) == 2);
  CHECK(std::strlen(lg_last_error()) > 0);
  CHECK(lg_ks_uniform(nullptr, 0, nullptr, nullptr) == 2);
}

TEST_CASE("c api direct tests") {
  const double pvals[] = {0.11, 0.32, 0.51, 0.72, 0.93, 0.27, 0.64};
  double d = 0.0, p = 0.0;
  REQUIRE(lg_ks_uniform(pvals, 7, &d, &p) == 0);
  CHECK(d > 0.0);
  CHECK(p > 0.05);

  // block-diagonal: V = 1, p = 1
  const double cov[] = {1.0, 0.0, 0.0, 2.0};
  const int blocks[] = {1, 1};
  double stat = 0.0, pv = 0.0;
  REQUIRE(lg_gaussian_exact_test(cov, 2, blocks, 2, 0, 60, "series", &stat, &pv) == 0);
  CHECK(stat == doctest::Approx(1.0));
  CHECK(pv == doctest::Approx(1.0));

  REQUIRE(lg_elliptical_test(cov, 2, blocks, 2, 60, 0.0, &stat, &pv) == 0);
  CHECK(stat == doctest::Approx(0.0));
  CHECK(pv == doctest::Approx(1.0));

  // impossible partition -> usage error
  CHECK(lg_gaussian_exact_test(cov, 2, blocks, 2, 3, 60, "series", &stat, &pv) == 2);
}

TEST_CASE("c api pipeline on files") {
  TempDir tmp;
  write_text_file(tmp.file("model.json"), kModelJson);

  REQUIRE(lg_simulate(tmp.file("model.json").c_str(), 7,
                      tmp.file("data.csv").c_str(),
                      tmp.file("truth.csv").c_str()) == 0);
  REQUIRE(lg_predict(tmp.file("data.csv").c_str(), tmp.file("model.json").c_str(),
                     tmp.file("preds.csv").c_str()) == 0);
  REQUIRE(lg_estimate_cov(tmp.file("preds.csv").c_str(), "sample", "gaussian",
                          0.0, 10, "q-1", tmp.file("cov.json").c_str()) == 0);
  REQUIRE(lg_test(tmp.file("cov.json").c_str(), "1,1", "", "none", "gaussian",
                  "series", 0.0, 0, nullptr, tmp.file("test.json").c_str()) == 0);
  REQUIRE(lg_graph(tmp.file("cov.json").c_str(), 0.05, "holm", "gaussian", 0.0,
                   0, 0, tmp.file("graph.dot").c_str(),
                   tmp.file("graph.json").c_str()) == 0);

  const std::string dot = read_text_file(tmp.file("graph.dot"));
  CHECK(dot.find("digraph") != std::string::npos);
  const std::string result = read_text_file(tmp.file("test.json"));
  CHECK(result.find("\"pvalue\"") != std::string::npos);

  // elliptical test without a kurtosis source is a usage error
  CHECK(lg_test(tmp.file("cov.json").c_str(), "1,1", "", "none", "elliptical",
                "series", 0.0, 0, nullptr, tmp.file("t2.json").c_str()) == 2);

  // perfect predictions reproduce the truth covariance through the cli path
  const Eigen::MatrixXd truth = read_matrix_csv(tmp.file("truth.csv"));
  PredictionSet perfect;
  perfect.bhat = truth;
  perfect.cond_var = Eigen::MatrixXd::Constant(truth.rows(), truth.cols(), 1e-9);
  write_predictions_csv(perfect, tmp.file("perfect.csv"));
  REQUIRE(lg_estimate_cov(tmp.file("perfect.csv").c_str(), "sample", "gaussian",
                          0.0, 10, "q-1", tmp.file("cov2.json").c_str()) == 0);
  const CovarianceFile cov2 = read_covariance_json(tmp.file("cov2.json"));
  const Eigen::MatrixXd direct = sample_covariance(truth, Divisor::QMinus1);
  CHECK((cov2.matrix - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("uniformity command writes ks json and qq svg") {
  TempDir tmp;
  std::vector<double> ps;
  for (int i = 0; i < 50; ++i) ps.push_back((i + 0.5) / 50.0);
  write_pvalues_csv(ps, tmp.file("p.csv"));
  REQUIRE(lg_uniformity(tmp.file("p.csv").c_str(), tmp.file("ks.json").c_str(),
                        tmp.file("qq.svg").c_str()) == 0);
  const std::string ks = read_text_file(tmp.file("ks.json"));
  CHECK(ks.find("\"pvalue\"") != std::string::npos);
  CHECK(read_text_file(tmp.file("qq.svg")).find("<svg") != std::string::npos);

  // empty input is a usage error
  write_text_file(tmp.file("empty.csv"), "pvalue\n");
  CHECK(lg_uniformity(tmp.file("empty.csv").c_str(), tmp.file("ks2.json").c_str(),
                      nullptr) == 2);
}
