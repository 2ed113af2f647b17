#include "latentgraph/covest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace latentgraph {

int BlockPartition::tested_dim() const {
  return std::accumulate(sizes.begin(), sizes.end(), 0);
}

void BlockPartition::validate() const {
  if (sizes.empty()) throw std::invalid_argument("partition has no blocks");
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("block sizes must be positive");
  if (cond_size < 0)
    throw std::invalid_argument("conditioning size must be >= 0");
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data, Divisor divisor) {
  const int q = static_cast<int>(data.rows());
  if (q < 2) throw std::invalid_argument("need at least 2 rows for a covariance");
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  const double div = divisor == Divisor::QMinus1 ? q - 1.0 : static_cast<double>(q);
  return (centered.transpose() * centered) / div;
}

Eigen::MatrixXd conditional_scatter(const Eigen::MatrixXd& scatter,
                                    const BlockPartition& part) {
  part.validate();
  if (scatter.rows() != part.total_dim())
    throw std::invalid_argument("partition does not match matrix dimension");
  if (part.cond_size == 0) return scatter;

  const int t = part.tested_dim();
  const int k = part.cond_size;
  const Eigen::MatrixXd top = scatter.topLeftCorner(t, t);
  const Eigen::MatrixXd cross = scatter.topRightCorner(t, k);
  const Eigen::MatrixXd cond = scatter.bottomRightCorner(k, k);
  Eigen::LLT<Eigen::MatrixXd> llt(cond);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("singular conditioning block");
  return top - cross * llt.solve(cross.transpose());
}

namespace {

std::vector<int> concat_indices(const std::vector<int>& tested,
                                const std::vector<int>& cond) {
  std::vector<int> order = tested;
  order.insert(order.end(), cond.begin(), cond.end());
  return order;
}

}  // namespace

Eigen::MatrixXd arrange_matrix(const Eigen::MatrixXd& m,
                               const std::vector<int>& tested,
                               const std::vector<int>& cond) {
  const auto order = concat_indices(tested, cond);
  const int n = static_cast<int>(order.size());
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = m(order[i], order[j]);
  return out;
}

Eigen::MatrixXd arrange_columns(const Eigen::MatrixXd& data,
                                const std::vector<int>& tested,
                                const std::vector<int>& cond) {
  const auto order = concat_indices(tested, cond);
  Eigen::MatrixXd out(data.rows(), order.size());
  for (std::size_t j = 0; j < order.size(); ++j)
    out.col(j) = data.col(order[j]);
  return out;
}

// ---------------------------------------------------------------------------
// Random-component prediction
// ---------------------------------------------------------------------------

namespace {

struct Obs {
  double y;
  Eigen::VectorXd x;
};

// mean on the response scale plus d(mu)/d(eta), handling the binomial count scale
void mean_and_slope(const PredictMarginSpec& m, double eta, double& mu,
                    double& dmu) {
  mu = apply_inverse_link(m.link, eta);
  dmu = inverse_link_derivative(m.link, eta);
  if (m.family == ResponseFamily::Binomial) {
    mu *= static_cast<double>(m.trials);
    dmu *= static_cast<double>(m.trials);
  }
}

Eigen::VectorXd fit_glm_irls(const PredictMarginSpec& m,
                             const std::vector<Obs>& obs, int p) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  // start from the link of the overall mean
  double ybar = 0.0;
  for (const auto& o : obs) ybar += o.y;
  ybar /= obs.size();
  if (m.family == ResponseFamily::Binomial)
    ybar = std::clamp(ybar / m.trials, 1e-6, 1.0 - 1e-6);
  else if (m.link == Link::Log)
    ybar = std::max(ybar, 1e-6);
  beta(0) = apply_link(m.link, ybar);

  for (int iter = 0; iter < 50; ++iter) {
    Eigen::MatrixXd xtwx = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd xtwz = Eigen::VectorXd::Zero(p);
    for (const auto& o : obs) {
      const double eta = beta.dot(o.x);
      double mu, dmu;
      mean_and_slope(m, eta, mu, dmu);
      const double v = variance_function(m.family, mu, m.trials);
      const double w = dmu * dmu / v;
      const double z = eta + (o.y - mu) / dmu;
      xtwx.noalias() += w * o.x * o.x.transpose();
      xtwz.noalias() += w * z * o.x;
    }
    const Eigen::VectorXd next = xtwx.ldlt().solve(xtwz);
    const double delta = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (delta < 1e-10) break;
  }
  return beta;
}

double estimate_dispersion(const PredictMarginSpec& m,
                           const std::vector<Obs>& obs,
                           const Eigen::VectorXd& beta) {
  if (m.family == ResponseFamily::Poisson || m.family == ResponseFamily::Binomial)
    return 1.0;
  double pearson = 0.0;
  for (const auto& o : obs) {
    double mu, dmu;
    mean_and_slope(m, beta.dot(o.x), mu, dmu);
    const double v = variance_function(m.family, mu, m.trials);
    pearson += (o.y - mu) * (o.y - mu) / v;
  }
  const int df = static_cast<int>(obs.size()) - static_cast<int>(beta.size());
  return std::max(pearson / std::max(df, 1), 1e-12);
}

// Penalised mode of the cluster log-likelihood, expected-information Newton
// with step halving. Returns (bhat, curvature variance).
std::pair<double, double> cluster_mode(const PredictMarginSpec& m,
                                       const std::vector<Obs>& obs,
                                       const Eigen::VectorXd& beta,
                                       double lambda, double sigma2,
                                       int margin_1based, int cluster_1based) {
  auto objective = [&](double b) {
    double val = -0.5 * b * b / sigma2;
    for (const auto& o : obs) {
      double mu, dmu;
      mean_and_slope(m, beta.dot(o.x) + b, mu, dmu);
      val -= unit_deviance(m.family, o.y, mu, m.trials) / (2.0 * lambda);
    }
    return val;
  };

  double b = 0.0;
  double info = 1.0 / sigma2;
  // expected information can undershoot the true curvature; damp the step
  // (stickily) whenever the score changes sign to stop overshoot cycles
  double damping = 1.0, prev_score = 0.0;
  bool have_prev = false;
  for (int iter = 0; iter < 100; ++iter) {
    double score = -b / sigma2;
    info = 1.0 / sigma2;
    for (const auto& o : obs) {
      double mu, dmu;
      mean_and_slope(m, beta.dot(o.x) + b, mu, dmu);
      const double v = variance_function(m.family, mu, m.trials);
      score += (o.y - mu) * dmu / (lambda * v);
      info += dmu * dmu / (lambda * v);
    }
    if (have_prev && score * prev_score < 0.0)
      damping = std::max(0.5 * damping, 1.0 / 64.0);
    prev_score = score;
    have_prev = true;
    double step = damping * score / info;
    if (std::abs(score) < 1e-9 * info * (1.0 + std::abs(b)) ||
        std::abs(step) < 1e-9 * (1.0 + std::abs(b)))
      return {b, 1.0 / info};
    // safeguard: halve until the objective does not decrease beyond
    // floating-point noise
    const double f0 = objective(b);
    const double noise = 1e-9 * (1.0 + std::abs(f0));
    double scale = 1.0;
    while (scale > 1e-8 && objective(b + scale * step) < f0 - noise) scale *= 0.5;
    if (scale <= 1e-8) return {b, 1.0 / info};  // numerically at the mode
    b += scale * step;
    if (iter == 99)
      throw std::runtime_error("prediction Newton failed to converge (margin " +
                               std::to_string(margin_1based) + ", cluster " +
                               std::to_string(cluster_1based) + ")");
  }
  return {b, 1.0 / info};
}

}  // namespace

PredictionSet predict_random_components(
    const LongDataset& data, const std::vector<PredictMarginSpec>& margins) {
  const int d = static_cast<int>(margins.size());
  const int q = data.cluster_count();
  if (d == 0 || q == 0) throw std::invalid_argument("empty data or margin list");

  // bucket observations by (margin, cluster)
  std::vector<std::vector<std::vector<Obs>>> buckets(
      d, std::vector<std::vector<Obs>>(q));
  int p = 0;
  for (const auto& r : data.rows) {
    if (r.margin < 1 || r.margin > d)
      throw std::invalid_argument("row margin index out of range");
    if (r.cluster < 1 || r.cluster > q)
      throw std::invalid_argument("row cluster index out of range");
    Obs o{r.y, Eigen::Map<const Eigen::VectorXd>(r.x.data(), r.x.size())};
    p = std::max(p, static_cast<int>(r.x.size()));
    buckets[r.margin - 1][r.cluster - 1].push_back(std::move(o));
  }
  for (int j = 0; j < d; ++j)
    for (int c = 0; c < q; ++c)
      if (buckets[j][c].empty())
        throw std::invalid_argument("cluster " + std::to_string(c + 1) +
                                    " missing from margin " + std::to_string(j + 1));

  PredictionSet preds;
  preds.bhat.resize(q, d);
  preds.cond_var.resize(q, d);

  for (int j = 0; j < d; ++j) {
    const PredictMarginSpec& m = margins[j];
    std::vector<Obs> all;
    for (int c = 0; c < q; ++c)
      all.insert(all.end(), buckets[j][c].begin(), buckets[j][c].end());

    const Eigen::VectorXd beta =
        m.fixed_beta ? *m.fixed_beta : fit_glm_irls(m, all, p);
    const double lambda =
        m.fixed_dispersion ? *m.fixed_dispersion : estimate_dispersion(m, all, beta);

    double sigma2;
    if (m.fixed_sigma2) {
      sigma2 = *m.fixed_sigma2;
    } else {
      // moment start: spread of cluster-level link-scale residuals
      double mean_r = 0.0, ss = 0.0;
      std::vector<double> crude(q);
      for (int c = 0; c < q; ++c) {
        double ybar = 0.0, eta0 = 0.0;
        for (const auto& o : buckets[j][c]) {
          ybar += o.y;
          eta0 += beta.dot(o.x);
        }
        ybar /= buckets[j][c].size();
        eta0 /= buckets[j][c].size();
        if (m.family == ResponseFamily::Binomial)
          ybar = std::clamp(ybar / m.trials, 1e-6, 1.0 - 1e-6);
        else if (m.link == Link::Log)
          ybar = std::max(ybar, 1e-6);
        crude[c] = apply_link(m.link, ybar) - eta0;
        mean_r += crude[c];
      }
      mean_r /= q;
      for (int c = 0; c < q; ++c) ss += (crude[c] - mean_r) * (crude[c] - mean_r);
      sigma2 = std::max(ss / std::max(q - 1, 1), 1e-6);

      // two moment refinements through the Laplace predictor
      for (int round = 0; round < 2; ++round) {
        double acc = 0.0;
        for (int c = 0; c < q; ++c) {
          auto [b, v] = cluster_mode(m, buckets[j][c], beta, lambda, sigma2,
                                     j + 1, c + 1);
          acc += b * b + v;
        }
        sigma2 = std::max(acc / q, 1e-6);
      }
    }

    for (int c = 0; c < q; ++c) {
      auto [b, v] =
          cluster_mode(m, buckets[j][c], beta, lambda, sigma2, j + 1, c + 1);
      preds.bhat(c, j) = b;
      preds.cond_var(c, j) = v;
    }
  }
  return preds;
}

Eigen::MatrixXd covariance_from_predictions(const PredictionSet& preds) {
  return sample_covariance(preds.bhat, Divisor::QMinus1);
}

// ---------------------------------------------------------------------------
// Gauss-Hermite rule and approximate maximum likelihood
// ---------------------------------------------------------------------------

QuadratureRule gauss_hermite_rule(int node_count) {
  if (node_count < 1 || node_count > 100)
    throw std::invalid_argument("Hermite node count must lie in [1, 100]");
  QuadratureRule rule;
  if (node_count == 1) {
    rule.nodes = Eigen::VectorXd::Zero(1);
    rule.weights = Eigen::VectorXd::Constant(1, std::sqrt(M_PI));
    return rule;
  }
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(node_count, node_count);
  for (int k = 1; k < node_count; ++k) {
    const double off = std::sqrt(k / 2.0);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  rule.nodes = es.eigenvalues();
  rule.weights.resize(node_count);
  for (int k = 0; k < node_count; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    rule.weights(k) = std::sqrt(M_PI) * v0 * v0;
  }
  return rule;
}

namespace {

// pack/unpack a PD matrix through its lower Cholesky factor, log diagonal
Eigen::VectorXd pack_chol(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("initial matrix not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  const int d = static_cast<int>(sigma.rows());
  Eigen::VectorXd theta(d * (d + 1) / 2);
  int t = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      theta(t++) = (i == j) ? std::log(l(i, i)) : l(i, j);
  return theta;
}

Eigen::MatrixXd unpack_chol(const Eigen::VectorXd& theta, int d) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  int t = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      l(i, j) = (i == j) ? std::exp(theta(t++)) : theta(t++);
  return l * l.transpose();
}

void check_predictions(const PredictionSet& preds) {
  if (preds.q() < 2) throw std::invalid_argument("need at least 2 clusters");
  if ((preds.cond_var.array() <= 0.0).any())
    throw std::invalid_argument("conditional variances must be positive");
  if (preds.bhat.cwiseAbs().maxCoeff() == 0.0)
    throw std::runtime_error("likelihood unbounded toward singular Sigma");
}

MlEstimate maximise_over_pd(const std::function<double(const Eigen::MatrixXd&)>& loglik,
                            const Eigen::MatrixXd& init, int d) {
  int evals = 0;
  auto neg = [&](const Eigen::VectorXd& theta) {
    ++evals;
    const Eigen::MatrixXd sigma = unpack_chol(theta, d);
    const double ll = loglik(sigma);
    if (!std::isfinite(ll)) return 1e100;
    return -ll;
  };
  const Eigen::VectorXd theta0 = pack_chol(init);
  const Eigen::VectorXd best = nelder_mead(neg, theta0);
  MlEstimate est;
  est.sigma = unpack_chol(best, d);
  est.loglik = loglik(est.sigma);
  est.evaluations = evals;
  const double at_init = loglik(init);
  if (std::isfinite(at_init) && est.loglik < at_init - 1e-9)
    throw std::runtime_error("optimizer stagnation: best log-likelihood " +
                             std::to_string(est.loglik) + " below start " +
                             std::to_string(at_init));
  return est;
}

}  // namespace

double gaussian_approx_loglik(const PredictionSet& preds,
                              const Eigen::MatrixXd& sigma) {
  const int d = preds.dim();
  if (Eigen::LLT<Eigen::MatrixXd>(sigma).info() != Eigen::Success)
    return -std::numeric_limits<double>::infinity();

  // marginally b-hat_j ~ N(0, Sigma + V_j)
  double ll = 0.0;
  for (int j = 0; j < preds.q(); ++j) {
    const Eigen::VectorXd b = preds.bhat.row(j);
    Eigen::MatrixXd m = sigma;
    m.diagonal() += preds.cond_var.row(j).transpose();
    Eigen::LLT<Eigen::MatrixXd> llt_m(m);
    if (llt_m.info() != Eigen::Success)
      return -std::numeric_limits<double>::infinity();
    const double logdet =
        2.0 * Eigen::MatrixXd(llt_m.matrixL()).diagonal().array().log().sum();
    ll += -0.5 * d * std::log(2.0 * M_PI) - 0.5 * logdet -
          0.5 * b.dot(llt_m.solve(b));
  }
  return ll;
}

MlEstimate gaussian_approx_ml(const PredictionSet& preds,
                              const Eigen::MatrixXd& init) {
  check_predictions(preds);
  const int d = preds.dim();
  return maximise_over_pd(
      [&](const Eigen::MatrixXd& s) { return gaussian_approx_loglik(preds, s); },
      init, d);
}

double elliptical_approx_loglik(const PredictionSet& preds,
                                EllipticalFamily family, double nu,
                                int node_count, const Eigen::MatrixXd& sigma) {
  const int d = preds.dim();
  double grid_points = std::pow(static_cast<double>(node_count), d);
  if (d > 4 || grid_points > 1e6)
    throw std::invalid_argument("tensor quadrature grid too large");

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    return -std::numeric_limits<double>::infinity();
  const double logdet =
      2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  auto log_density = [&](const Eigen::VectorXd& b) {
    const double quad = b.dot(llt.solve(b));
    if (family == EllipticalFamily::Gaussian)
      return -0.5 * logdet - 0.5 * d * std::log(2.0 * M_PI) - 0.5 * quad;
    return -0.5 * logdet + std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
           0.5 * d * std::log(nu * M_PI) - 0.5 * (nu + d) * std::log1p(quad / nu);
  };

  const QuadratureRule rule = gauss_hermite_rule(node_count);
  const int total = static_cast<int>(std::llround(grid_points));

  double ll = 0.0;
  std::vector<int> idx(d, 0);
  Eigen::VectorXd point(d);
  for (int j = 0; j < preds.q(); ++j) {
    const Eigen::VectorXd b = preds.bhat.row(j);
    const Eigen::VectorXd sqrt_v = preds.cond_var.row(j).cwiseSqrt();
    std::fill(idx.begin(), idx.end(), 0);
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> log_terms(total);
    for (int g = 0; g < total; ++g) {
      double logw = 0.0;
      for (int c = 0; c < d; ++c) {
        logw += std::log(rule.weights(idx[c]));
        point(c) = std::sqrt(2.0) * sqrt_v(c) * rule.nodes(idx[c]) + b(c);
      }
      log_terms[g] = logw + log_density(point);
      max_term = std::max(max_term, log_terms[g]);
      // odometer over the tensor grid
      for (int c = 0; c < d; ++c) {
        if (++idx[c] < node_count) break;
        idx[c] = 0;
      }
    }
    double sum = 0.0;
    for (double lt : log_terms) sum += std::exp(lt - max_term);
    ll += -0.5 * d * std::log(M_PI) + max_term + std::log(sum);
  }
  return ll;
}

MlEstimate elliptical_approx_ml(const PredictionSet& preds,
                                EllipticalFamily family, double nu,
                                int node_count, const Eigen::MatrixXd& init) {
  check_predictions(preds);
  if (node_count < 5)
    throw std::invalid_argument("need at least 5 quadrature nodes");
  const int d = preds.dim();
  return maximise_over_pd(
      [&](const Eigen::MatrixXd& s) {
        return elliptical_approx_loglik(preds, family, nu, node_count, s);
      },
      init, d);
}

// ---------------------------------------------------------------------------
// Nelder-Mead
// ---------------------------------------------------------------------------

Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            Eigen::VectorXd x0, double tol, int max_evals) {
  const int n = static_cast<int>(x0.size());
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };

  Eigen::VectorXd best_x = x0;
  double best_f = eval(x0);

  for (int round = 0; round < 2; ++round) {  // one restart from the best point
    std::vector<Eigen::VectorXd> pts(n + 1, best_x);
    std::vector<double> vals(n + 1);
    vals[0] = best_f;
    for (int i = 0; i < n; ++i) {
      const double h = std::abs(best_x(i)) > 1e-8 ? 0.05 * std::abs(best_x(i)) : 0.05;
      pts[i + 1](i) += h;
      vals[i + 1] = eval(pts[i + 1]);
    }

    while (evals < max_evals) {
      std::vector<int> order(n + 1);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return vals[a] < vals[b]; });
      {
        std::vector<Eigen::VectorXd> p2(n + 1);
        std::vector<double> v2(n + 1);
        for (int i = 0; i <= n; ++i) {
          p2[i] = pts[order[i]];
          v2[i] = vals[order[i]];
        }
        pts.swap(p2);
        vals.swap(v2);
      }
      if (vals[n] - vals[0] < tol) break;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < n; ++i) centroid += pts[i];
      centroid /= n;

      const Eigen::VectorXd refl = centroid + (centroid - pts[n]);
      const double f_refl = eval(refl);
      if (f_refl < vals[0]) {
        const Eigen::VectorXd exp_pt = centroid + 2.0 * (centroid - pts[n]);
        const double f_exp = eval(exp_pt);
        if (f_exp < f_refl) {
          pts[n] = exp_pt;
          vals[n] = f_exp;
        } else {
          pts[n] = refl;
          vals[n] = f_refl;
        }
      } else if (f_refl < vals[n - 1]) {
        pts[n] = refl;
        vals[n] = f_refl;
      } else {
        const Eigen::VectorXd contr = centroid + 0.5 * (pts[n] - centroid);
        const double f_contr = eval(contr);
        if (f_contr < vals[n]) {
          pts[n] = contr;
          vals[n] = f_contr;
        } else {
          for (int i = 1; i <= n; ++i) {
            pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
            vals[i] = eval(pts[i]);
          }
        }
      }
    }

    for (int i = 0; i <= n; ++i) {
      if (vals[i] < best_f) {
        best_f = vals[i];
        best_x = pts[i];
      }
    }
  }
  return best_x;
}

}  // namespace latentgraph
