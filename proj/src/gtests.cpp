#include "latentgraph/gtests.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "latentgraph/rng.hpp"

namespace latentgraph {

namespace {

double logdet_pd(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw std::runtime_error(what);
  return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

}  // namespace

double v_statistic(const Eigen::MatrixXd& a_cond, const BlockPartition& part) {
  part.validate();
  if (part.sizes.size() < 2)
    throw std::invalid_argument("need at least two tested blocks");
  if (a_cond.rows() != part.tested_dim())
    throw std::invalid_argument("matrix does not match the tested dimension");

  double log_v = logdet_pd(a_cond, "test matrix not positive definite");
  int offset = 0;
  for (int s : part.sizes) {
    log_v -= logdet_pd(a_cond.block(offset, offset, s, s),
                       "diagonal block not positive definite");
    offset += s;
  }
  return std::exp(log_v);
}

BetaProductParams beta_product_params(int q, const BlockPartition& part) {
  part.validate();
  if (part.sizes.size() < 2)
    throw std::invalid_argument("need at least two tested blocks");
  BetaProductParams params;
  params.q = q;
  int dbar = part.sizes[0];
  for (std::size_t i = 1; i < part.sizes.size(); ++i) {
    for (int j = 1; j <= part.sizes[i]; ++j) {
      const double alpha = 0.5 * (q - dbar - j);
      const double beta = 0.5 * dbar;
      if (!(alpha > 0.0))
        throw std::invalid_argument("insufficient clusters for exact null");
      params.pairs.emplace_back(alpha, beta);
    }
    dbar += part.sizes[i];
  }
  return params;
}

namespace {

// Series coefficients for the density of a product of independent Betas.
// Factor j is Beta(b_j, c_j - b_j). The recursion weight uses the rising
// factorial (c_j - b_{j-1})_s / s!; see the note in the header.
class BetaProductSeries {
 public:
  BetaProductSeries(const BetaProductParams& params, int max_terms)
      : max_terms_(max_terms) {
    const int d = static_cast<int>(params.pairs.size());
    if (d == 0) throw std::invalid_argument("empty beta product");
    std::vector<double> b(d), c(d), h(d);
    double hsum = 0.0;
    log_k_ = 0.0;
    for (int j = 0; j < d; ++j) {
      b[j] = params.pairs[j].first;
      c[j] = params.pairs[j].first + params.pairs[j].second;
      hsum += c[j] - b[j];
      h[j] = hsum;
      log_k_ += std::lgamma(c[j]) - std::lgamma(b[j]);
    }
    b_last_ = b[d - 1];
    h_last_ = h[d - 1];

    std::vector<double> sigma(max_terms + 1, 0.0);
    sigma[0] = std::exp(-std::lgamma(h[0]));
    for (int j = 1; j < d; ++j) {
      const double a = c[j] - b[j - 1];
      std::vector<double> coef(max_terms + 1);
      coef[0] = 1.0;
      for (int s = 1; s <= max_terms; ++s)
        coef[s] = coef[s - 1] * (a + s - 1) / s;
      std::vector<double> next(max_terms + 1, 0.0);
      for (int r = 0; r <= max_terms; ++r) {
        double acc = 0.0;
        for (int s = 0; s <= r; ++s) acc += coef[s] * sigma[r - s];
        next[r] = std::exp(std::lgamma(h[j - 1] + r) - std::lgamma(h[j] + r)) * acc;
      }
      sigma.swap(next);
    }
    sigma_ = std::move(sigma);
  }

  double density(double v, double tol) const {
    if (!(v > 0.0 && v < 1.0))
      throw std::invalid_argument("density argument must lie in (0,1)");
    const double u = 1.0 - v;
    const double prefactor = std::exp(log_k_ + (b_last_ - 1.0) * std::log(v) +
                                      (h_last_ - 1.0) * std::log(u));
    double sum = 0.0, power = 1.0, term = 0.0;
    int quiet = 0;
    int r = 0;
    for (; r <= max_terms_; ++r) {
      term = sigma_[r] * power;
      sum += term;
      power *= u;
      if (std::abs(term) < tol * std::max(std::abs(sum), 1e-300)) {
        if (++quiet >= 2) break;
      } else {
        quiet = 0;
      }
    }
    const double value = prefactor * sum;
    // Deep in the lower tail the expansion in (1 - v) stalls, but the
    // algebraic prefactor already pins the density (and the truncation
    // error) far below any useful resolution; only a genuinely unresolved
    // value is an error.
    if (r > max_terms_ && std::abs(term) * prefactor > 1e-12)
      throw std::runtime_error("beta-product series not converged; partial value " +
                               std::to_string(value));
    return value;
  }

 private:
  int max_terms_;
  double log_k_ = 0.0, b_last_ = 0.0, h_last_ = 0.0;
  std::vector<double> sigma_;
};

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 40);
}

}  // namespace

double v_density_series(double v, const BetaProductParams& params, double tol,
                      int max_terms) {
  BetaProductSeries series(params, max_terms);
  return series.density(v, tol);
}

double v_pvalue_exact(double v_obs, const BetaProductParams& params,
                      PvalueEngine engine, int mc_draws, std::uint64_t mc_seed) {
  if (!(v_obs > 0.0 && v_obs <= 1.0))
    throw std::invalid_argument("observed V must lie in (0, 1]");
  if (v_obs >= 1.0) return 1.0;

  if (engine == PvalueEngine::Series) {
    if (params.pairs.size() == 1) {
      const auto& [a, b] = params.pairs.front();
      return boost::math::ibeta(a, b, v_obs);
    }
    BetaProductSeries series(params, 400);
    const double p = integrate(
        [&](double v) { return v > 0.0 && v < 1.0 ? series.density(v, 1e-12) : 0.0; },
        0.0, v_obs, 1e-9);
    return std::clamp(p, 0.0, 1.0);
  }

  Rng rng(mc_seed, 0);
  int count = 0;
  for (int i = 0; i < mc_draws; ++i) {
    double v = 1.0;
    for (const auto& [a, b] : params.pairs) v *= rng.beta(a, b);
    if (v <= v_obs) ++count;
  }
  return static_cast<double>(count) / mc_draws;
}

TestResult gaussian_exact_test(const Eigen::MatrixXd& sigma_hat,
                               const BlockPartition& part, int q,
                               PvalueEngine engine, int mc_draws,
                               std::uint64_t mc_seed) {
  const Eigen::MatrixXd a_cond = conditional_scatter(sigma_hat, part);
  BlockPartition tested{part.sizes, 0};
  TestResult res;
  res.method = TestMethod::GaussianExact;
  res.engine = engine;
  res.statistic = v_statistic(a_cond, tested);
  res.null_params = beta_product_params(q, part);
  res.pvalue =
      v_pvalue_exact(std::min(res.statistic, 1.0), *res.null_params, engine,
                     mc_draws, mc_seed);
  return res;
}

double estimate_kappa(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& a_cond) {
  const int q = static_cast<int>(rows.rows());
  const int dbar = static_cast<int>(rows.cols());
  if (a_cond.rows() != dbar)
    throw std::invalid_argument("covariance does not match row dimension");
  Eigen::LLT<Eigen::MatrixXd> llt(a_cond);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("singular covariance in kurtosis estimate");

  const Eigen::RowVectorXd mean = rows.colwise().mean();
  double acc = 0.0;
  for (int i = 0; i < q; ++i) {
    const Eigen::VectorXd x = (rows.row(i) - mean).transpose();
    const double quad = x.dot(llt.solve(x));
    acc += quad * quad;
  }
  return acc / (q * dbar * (dbar + 2.0)) - 1.0;
}

Eigen::MatrixXd conditional_residual_rows(const Eigen::MatrixXd& data,
                                          const BlockPartition& part) {
  part.validate();
  const int t = part.tested_dim();
  if (data.cols() != part.total_dim())
    throw std::invalid_argument("partition does not match column count");
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  if (part.cond_size == 0) return centered.leftCols(t);

  const Eigen::MatrixXd cov = sample_covariance(data, Divisor::QMinus1);
  const Eigen::MatrixXd cross = cov.topRightCorner(t, part.cond_size);
  const Eigen::MatrixXd cond = cov.bottomRightCorner(part.cond_size, part.cond_size);
  Eigen::LLT<Eigen::MatrixXd> llt(cond);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("singular conditioning block");
  const Eigen::MatrixXd coef = llt.solve(cross.transpose());  // cond_size x t
  return centered.leftCols(t) - centered.rightCols(part.cond_size) * coef;
}

TestResult elliptical_test(const Eigen::MatrixXd& a_cond,
                           const BlockPartition& part, int q, double kappa_hat) {
  part.validate();
  if (part.sizes.size() < 2)
    throw std::invalid_argument("need at least two tested blocks");
  if (a_cond.rows() != part.tested_dim())
    throw std::invalid_argument("matrix does not match the tested dimension");
  if (!(kappa_hat > -1.0))
    throw std::invalid_argument("kurtosis estimate must exceed -1");

  const double scale = q - 1.0;
  double stat = 0.0;
  int f = 0;
  int dbar = part.sizes[0];
  for (std::size_t i = 1; i < part.sizes.size(); ++i) {
    const int di = part.sizes[i];
    const Eigen::MatrixXd prev = a_cond.topLeftCorner(dbar, dbar);
    const Eigen::MatrixXd cross = a_cond.block(dbar, 0, di, dbar);
    const Eigen::MatrixXd diag = a_cond.block(dbar, dbar, di, di);
    Eigen::LLT<Eigen::MatrixXd> llt(prev);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("degenerate regression block");
    const Eigen::MatrixXd h = scale * cross * llt.solve(cross.transpose());
    const Eigen::MatrixXd g = scale * diag - h;
    Eigen::LLT<Eigen::MatrixXd> llt_g(g);
    if (llt_g.info() != Eigen::Success)
      throw std::runtime_error("degenerate regression block");
    const double log_vi =
        2.0 * Eigen::MatrixXd(llt_g.matrixL()).diagonal().array().log().sum() -
        logdet_pd(g + h, "degenerate regression block");
    stat += -static_cast<double>(q) * log_vi;
    f += dbar * di;
    dbar += di;
  }

  TestResult res;
  res.method = TestMethod::EllipticalAsymptotic;
  res.statistic = stat;
  res.f = f;
  res.kappa = kappa_hat;
  boost::math::chi_squared chi(f);
  res.pvalue = boost::math::cdf(boost::math::complement(chi, stat / (1.0 + kappa_hat)));
  return res;
}

KsResult ks_uniform_test(const std::vector<double>& pvalues) {
  const int n = static_cast<int>(pvalues.size());
  if (n < 5) throw std::invalid_argument("need at least 5 values");
  std::vector<double> sorted = pvalues;
  for (double p : sorted)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("values must lie in [0, 1]");
  std::sort(sorted.begin(), sorted.end());

  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    d = std::max(d, (i + 1.0) / n - sorted[i]);
    d = std::max(d, sorted[i] - static_cast<double>(i) / n);
  }

  const double t = d * (std::sqrt(static_cast<double>(n)) + 0.12 +
                        0.11 / std::sqrt(static_cast<double>(n)));
  double p = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * t * t);
    p += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  p = std::clamp(2.0 * p, 0.0, 1.0);
  return {d, p};
}

std::vector<double> adjust_pvalues(const std::vector<double>& raw, Correction c) {
  const int m = static_cast<int>(raw.size());
  std::vector<double> out(m);
  switch (c) {
    case Correction::None:
      return raw;
    case Correction::Bonferroni:
      for (int i = 0; i < m; ++i) out[i] = std::min(1.0, raw[i] * m);
      return out;
    case Correction::Holm: {
      std::vector<int> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return raw[a] < raw[b]; });
      double running = 0.0;
      for (int i = 0; i < m; ++i) {
        running = std::max(running, std::min(1.0, raw[order[i]] * (m - i)));
        out[order[i]] = running;
      }
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

PairwiseResult pairwise_edge_tests(const Eigen::MatrixXd& sigma_hat, int q,
                                   TestMethod method, double alpha,
                                   Correction correction,
                                   std::optional<double> kappa_hat,
                                   PvalueEngine engine) {
  const int d = static_cast<int>(sigma_hat.rows());
  if (d < 2) throw std::invalid_argument("need at least two coordinates");
  if (method == TestMethod::EllipticalAsymptotic && !kappa_hat)
    throw std::invalid_argument("elliptical method requires a kurtosis estimate");

  std::vector<std::pair<int, int>> pairs;
  std::vector<double> raw;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      std::vector<int> tested{i, j}, cond;
      for (int r = 0; r < d; ++r)
        if (r != i && r != j) cond.push_back(r);
      const Eigen::MatrixXd arranged = arrange_matrix(sigma_hat, tested, cond);
      BlockPartition part{{1, 1}, d - 2};
      double p;
      if (method == TestMethod::GaussianExact) {
        p = gaussian_exact_test(arranged, part, q, engine).pvalue;
      } else {
        const Eigen::MatrixXd a_cond = conditional_scatter(arranged, part);
        BlockPartition tested_part{{1, 1}, 0};
        p = elliptical_test(a_cond, tested_part, q, *kappa_hat).pvalue;
      }
      pairs.emplace_back(i, j);
      raw.push_back(p);
    }
  }

  const std::vector<double> adjusted = adjust_pvalues(raw, correction);
  PairwiseResult res;
  res.raw_pvalues = Eigen::MatrixXd::Ones(d, d);
  res.adjusted_pvalues = Eigen::MatrixXd::Ones(d, d);
  res.adjacency = Eigen::MatrixXi::Zero(d, d);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    res.raw_pvalues(i, j) = res.raw_pvalues(j, i) = raw[k];
    res.adjusted_pvalues(i, j) = res.adjusted_pvalues(j, i) = adjusted[k];
    const int edge = adjusted[k] < alpha ? 1 : 0;
    res.adjacency(i, j) = res.adjacency(j, i) = edge;
  }
  return res;
}

std::string method_name(TestMethod m) {
  return m == TestMethod::GaussianExact ? "exact-gaussian" : "asymptotic-elliptical";
}

TestMethod method_from_name(const std::string& name) {
  if (name == "gaussian" || name == "exact-gaussian") return TestMethod::GaussianExact;
  if (name == "elliptical" || name == "asymptotic-elliptical")
    return TestMethod::EllipticalAsymptotic;
  throw std::invalid_argument("unknown test method: " + name);
}

std::string correction_name(Correction c) {
  switch (c) {
    case Correction::None:
      return "none";
    case Correction::Holm:
      return "holm";
    case Correction::Bonferroni:
      return "bonferroni";
  }
  throw std::logic_error("unreachable");
}

Correction correction_from_name(const std::string& name) {
  if (name == "none") return Correction::None;
  if (name == "holm") return Correction::Holm;
  if (name == "bonferroni") return Correction::Bonferroni;
  throw std::invalid_argument("unknown correction: " + name);
}

std::string engine_name(PvalueEngine e) {
  return e == PvalueEngine::MonteCarlo ? "mc" : "series";
}

PvalueEngine engine_from_name(const std::string& name) {
  if (name == "mc" || name == "montecarlo") return PvalueEngine::MonteCarlo;
  if (name == "series") return PvalueEngine::Series;
  throw std::invalid_argument("unknown p-value engine: " + name);
}

}  // namespace latentgraph
