#include "latentgraph/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace latentgraph {

namespace {

using nlohmann::json;

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  if (rows == 0) throw std::invalid_argument("empty matrix in JSON");
  const int cols = static_cast<int>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw std::invalid_argument("ragged matrix in JSON");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json j = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_long_csv(const LongDataset& data, const std::string& path) {
  std::size_t p = 1;
  for (const auto& r : data.rows) p = std::max(p, r.x.size());
  std::ostringstream out;
  out << "margin,cluster,y";
  for (std::size_t i = 1; i <= p; ++i) out << ",x" << i;
  out << "\n";
  for (const auto& r : data.rows) {
    out << r.margin << "," << r.cluster << "," << fmt_full(r.y);
    for (std::size_t i = 0; i < p; ++i)
      out << "," << fmt_full(i < r.x.size() ? r.x[i] : 0.0);
    out << "\n";
  }
  write_text_file(path, out.str());
}

LongDataset read_long_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty dataset file " + path);
  LongDataset data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 3)
      throw std::invalid_argument("malformed dataset row: " + line);
    LongRow row;
    row.margin = std::stoi(fields[0]);
    row.cluster = std::stoi(fields[1]);
    row.y = std::stod(fields[2]);
    for (std::size_t i = 3; i < fields.size(); ++i)
      row.x.push_back(std::stod(fields[i]));
    if (row.x.empty()) row.x.push_back(1.0);
    data.rows.push_back(std::move(row));
  }
  return data;
}

void write_truth_csv(const Eigen::MatrixXd& b, const std::string& path) {
  std::ostringstream out;
  out << "cluster";
  for (int j = 0; j < b.cols(); ++j) out << ",b" << (j + 1);
  out << "\n";
  for (int c = 0; c < b.rows(); ++c) {
    out << (c + 1);
    for (int j = 0; j < b.cols(); ++j) out << "," << fmt_full(b(c, j));
    out << "\n";
  }
  write_text_file(path, out.str());
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty file " + path);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i)  // first column is an index
      row.push_back(std::stod(fields[i]));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("no data rows in " + path);
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

void write_predictions_csv(const PredictionSet& preds, const std::string& path) {
  std::ostringstream out;
  out << "cluster";
  for (int j = 0; j < preds.dim(); ++j) out << ",b" << (j + 1);
  for (int j = 0; j < preds.dim(); ++j) out << ",v" << (j + 1);
  out << "\n";
  for (int c = 0; c < preds.q(); ++c) {
    out << (c + 1);
    for (int j = 0; j < preds.dim(); ++j) out << "," << fmt_full(preds.bhat(c, j));
    for (int j = 0; j < preds.dim(); ++j)
      out << "," << fmt_full(preds.cond_var(c, j));
    out << "\n";
  }
  write_text_file(path, out.str());
}

PredictionSet read_predictions_csv(const std::string& path) {
  const Eigen::MatrixXd m = read_matrix_csv(path);
  if (m.cols() % 2 != 0)
    throw std::invalid_argument("predictions file must hold b and v columns");
  const int d = static_cast<int>(m.cols()) / 2;
  PredictionSet preds;
  preds.bhat = m.leftCols(d);
  preds.cond_var = m.rightCols(d);
  return preds;
}

void write_covariance_json(const CovarianceFile& cov, const std::string& path) {
  json j;
  j["dim"] = cov.matrix.rows();
  j["q"] = cov.q;
  j["labels"] = cov.labels;
  j["matrix"] = matrix_to_json(cov.matrix);
  j["divisor"] = cov.divisor == Divisor::QMinus1 ? "q-1" : "q";
  write_text_file(path, j.dump(2) + "\n");
}

CovarianceFile read_covariance_json(const std::string& path) {
  const json j = load_json(path);
  CovarianceFile cov;
  cov.matrix = matrix_from_json(j.at("matrix"));
  cov.q = j.at("q").get<int>();
  if (j.contains("labels")) cov.labels = j["labels"].get<std::vector<std::string>>();
  const std::string div = j.value("divisor", "q-1");
  if (div == "q-1")
    cov.divisor = Divisor::QMinus1;
  else if (div == "q")
    cov.divisor = Divisor::Q;
  else
    throw std::invalid_argument("unknown divisor tag: " + div);
  return cov;
}

std::string test_result_to_json(const TestResult& res, const BlockPartition& part) {
  json j;
  j["method"] = method_name(res.method);
  j["statistic"] = res.statistic;
  j["pvalue"] = res.pvalue;
  j["partition"]["blocks"] = part.sizes;
  j["partition"]["condition"] = part.cond_size;
  if (res.method == TestMethod::EllipticalAsymptotic) {
    j["f"] = res.f;
    j["kappa"] = res.kappa;
  } else {
    j["engine"] = engine_name(res.engine);
    if (res.null_params) {
      json pairs = json::array();
      for (const auto& [a, b] : res.null_params->pairs)
        pairs.push_back({{"alpha", a}, {"beta", b}});
      j["null"] = pairs;
    }
  }
  if (!res.diagnostics.empty()) j["diagnostics"] = res.diagnostics;
  return j.dump(2) + "\n";
}

EllipticalSpec elliptical_spec_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid elliptical spec: ") + e.what());
  }
  EllipticalSpec spec;
  try {
    spec.family = family_from_name(j.at("family").get<std::string>());
    if (spec.family == EllipticalFamily::StudentT)
      spec.nu = j.at("nu").get<double>();
    spec.scatter = matrix_from_json(j.at("scatter"));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid elliptical spec: ") + e.what());
  }
  const std::string role = j.value("matrix_role", "scatter");
  if (role == "scatter")
    spec.role = MatrixRole::Scatter;
  else if (role == "covariance")
    spec.role = MatrixRole::Covariance;
  else
    throw std::invalid_argument("unknown matrix_role: " + role);
  spec.validate();
  return spec;
}

MglmmSpec read_mglmm_spec_json(const std::string& path) {
  return mglmm_spec_from_json_text(read_text_file(path));
}

MglmmSpec mglmm_spec_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid model spec: ") + e.what());
  }
  MglmmSpec spec;
  try {
    for (const auto& mj : j.at("margins")) {
      MarginSpec m;
      m.family = response_family_from_name(mj.at("family").get<std::string>());
      m.link = link_from_name(mj.at("link").get<std::string>());
      const auto beta = mj.at("beta").get<std::vector<double>>();
      m.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
      m.dispersion = mj.value("dispersion", 1.0);
      m.trials = mj.value("trials", 1);
      spec.margins.push_back(std::move(m));
    }
    spec.q = j.at("q").get<int>();
    spec.replicates = j.value("replicates", 1);
    spec.random_components =
        elliptical_spec_from_json_text(j.at("random_components").dump());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid model spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::vector<double> read_pvalues_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string& last = fields.back();
    try {
      values.push_back(std::stod(last));
    } catch (const std::exception&) {
      // header line
      if (!values.empty())
        throw std::invalid_argument("malformed p-value row: " + line);
    }
  }
  if (values.empty()) throw std::invalid_argument("no p-values in " + path);
  return values;
}

void write_pvalues_csv(const std::vector<double>& pvalues, const std::string& path) {
  std::ostringstream out;
  out << "pvalue\n";
  for (double p : pvalues) out << fmt_full(p) << "\n";
  write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

namespace {

constexpr int kWidth = 640, kHeight = 480;
constexpr int kMarginL = 70, kMarginR = 30, kMarginT = 30, kMarginB = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

struct Scale {
  double lo, hi;
  double map(double v, double pix_lo, double pix_hi) const {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    return pix_lo + t * (pix_hi - pix_lo);
  }
};

void render_axes(std::ostringstream& out, const Scale& sx, const Scale& sy,
                 const std::string& x_label, const std::string& y_label) {
  out << "<rect x='" << kMarginL << "' y='" << kMarginT << "' width='"
      << (kWidth - kMarginL - kMarginR) << "' height='"
      << (kHeight - kMarginT - kMarginB)
      << "' fill='none' stroke='black'/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = sx.lo + i * (sx.hi - sx.lo) / 4.0;
    const double px = sx.map(fx, kMarginL, kWidth - kMarginR);
    out << "<line x1='" << fmt_short(px) << "' y1='" << (kHeight - kMarginB)
        << "' x2='" << fmt_short(px) << "' y2='" << (kHeight - kMarginB + 5)
        << "' stroke='black'/>\n";
    out << "<text x='" << fmt_short(px) << "' y='" << (kHeight - kMarginB + 20)
        << "' font-size='12' text-anchor='middle'>" << fmt_short(fx)
        << "</text>\n";
    const double fy = sy.lo + i * (sy.hi - sy.lo) / 4.0;
    const double py = sy.map(fy, kHeight - kMarginB, kMarginT);
    out << "<line x1='" << (kMarginL - 5) << "' y1='" << fmt_short(py) << "' x2='"
        << kMarginL << "' y2='" << fmt_short(py) << "' stroke='black'/>\n";
    out << "<text x='" << (kMarginL - 10) << "' y='" << fmt_short(py + 4)
        << "' font-size='12' text-anchor='end'>" << fmt_short(fy) << "</text>\n";
  }
  out << "<text x='" << (kWidth / 2) << "' y='" << (kHeight - 15)
      << "' font-size='14' text-anchor='middle'>" << x_label << "</text>\n";
  out << "<text x='18' y='" << (kHeight / 2)
      << "' font-size='14' text-anchor='middle' transform='rotate(-90 18 "
      << (kHeight / 2) << ")'>" << y_label << "</text>\n";
}

}  // namespace

std::string render_line_chart(const std::vector<SvgSeries>& series,
                              const std::string& x_label,
                              const std::string& y_label) {
  double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xlo = xhi = s.x[i];
        ylo = yhi = s.y[i];
        first = false;
      }
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  if (xhi == xlo) xhi = xlo + 1.0;
  if (yhi == ylo) yhi = ylo + 1.0;
  const Scale sx{xlo, xhi}, sy{ylo, yhi};

  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
      << "' height='" << kHeight << "'>\n";
  render_axes(out, sx, sy, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % 6];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      out << fmt_short(sx.map(series[k].x[i], kMarginL, kWidth - kMarginR)) << ","
          << fmt_short(sy.map(series[k].y[i], kHeight - kMarginB, kMarginT)) << " ";
    }
    out << "'/>\n";
    out << "<text x='" << (kWidth - kMarginR - 10) << "' y='"
        << (kMarginT + 20 + 18 * static_cast<int>(k))
        << "' font-size='12' text-anchor='end' fill='" << color << "'>"
        << series[k].name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_qq_plot(const std::vector<double>& pvalues) {
  std::vector<double> sorted = pvalues;
  std::sort(sorted.begin(), sorted.end());
  const int n = static_cast<int>(sorted.size());
  const Scale s01{0.0, 1.0};

  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
      << "' height='" << kHeight << "'>\n";
  render_axes(out, s01, s01, "uniform quantiles", "observed p-value quantiles");
  out << "<line x1='" << kMarginL << "' y1='" << (kHeight - kMarginB) << "' x2='"
      << (kWidth - kMarginR) << "' y2='" << kMarginT
      << "' stroke='#888888' stroke-dasharray='4 3'/>\n";
  for (int i = 0; i < n; ++i) {
    const double tx = (i + 0.5) / n;
    out << "<circle cx='"
        << fmt_short(s01.map(tx, kMarginL, kWidth - kMarginR)) << "' cy='"
        << fmt_short(s01.map(sorted[i], kHeight - kMarginB, kMarginT))
        << "' r='2' fill='#1f77b4'/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace latentgraph
