#include "latentgraph/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace latentgraph {

namespace {

double xlogx_over(double y, double mu) {
  // y log(y/mu) with the y=0 limit taken by continuity
  if (y == 0.0) return 0.0;
  return y * std::log(y / mu);
}

void check_mean_domain(ResponseFamily family, double mu, long trials) {
  switch (family) {
    case ResponseFamily::Poisson:
    case ResponseFamily::Gamma:
      if (!(mu > 0.0)) throw std::invalid_argument("mean must be positive");
      break;
    case ResponseFamily::Binomial:
      if (!(mu > 0.0 && mu < static_cast<double>(trials)))
        throw std::invalid_argument("binomial mean must lie in (0, trials)");
      break;
    case ResponseFamily::Gaussian:
      break;
  }
}

}  // namespace

void MarginSpec::validate() const {
  if (!(dispersion > 0.0))
    throw std::invalid_argument("dispersion must be positive");
  if ((family == ResponseFamily::Poisson || family == ResponseFamily::Binomial) &&
      dispersion != 1.0)
    throw std::invalid_argument("dispersion must be 1 for Poisson/Binomial");
  if (family == ResponseFamily::Binomial) {
    if (trials < 1) throw std::invalid_argument("binomial trials must be >= 1");
    if (link == Link::Identity)
      throw std::invalid_argument("binomial requires logit or log link");
  }
  if ((family == ResponseFamily::Poisson || family == ResponseFamily::Gamma) &&
      link == Link::Logit)
    throw std::invalid_argument("logit link requires a binomial margin");
  if (beta.size() == 0) throw std::invalid_argument("beta must be nonempty");
}

void MglmmSpec::validate() const {
  if (margins.empty()) throw std::invalid_argument("at least one margin required");
  for (const auto& m : margins) m.validate();
  random_components.validate();
  if (random_components.dim() != dim())
    throw std::invalid_argument("random component dimension must match margin count");
  if (q < 2) throw std::invalid_argument("cluster count must be >= 2");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
}

int LongDataset::margin_count() const {
  int m = 0;
  for (const auto& r : rows) m = std::max(m, r.margin);
  return m;
}

int LongDataset::cluster_count() const {
  int c = 0;
  for (const auto& r : rows) c = std::max(c, r.cluster);
  return c;
}

double unit_deviance(ResponseFamily family, double y, double mu, long trials) {
  check_mean_domain(family, mu, trials);
  switch (family) {
    case ResponseFamily::Poisson:
      if (y < 0.0) throw std::invalid_argument("poisson response must be >= 0");
      return 2.0 * (xlogx_over(y, mu) - y + mu);
    case ResponseFamily::Gamma:
      if (!(y > 0.0)) throw std::invalid_argument("gamma response must be positive");
      return 2.0 * ((y - mu) / mu - std::log(y / mu));
    case ResponseFamily::Gaussian:
      return (y - mu) * (y - mu);
    case ResponseFamily::Binomial: {
      const double m = static_cast<double>(trials);
      if (y < 0.0 || y > m)
        throw std::invalid_argument("binomial response outside [0, trials]");
      return 2.0 * (xlogx_over(y, mu) + xlogx_over(m - y, m - mu));
    }
  }
  throw std::logic_error("unreachable");
}

double conditional_density(const MarginSpec& margin, double y, double mu) {
  margin.validate();
  const double lambda = margin.dispersion;
  switch (margin.family) {
    case ResponseFamily::Poisson: {
      const long k = static_cast<long>(std::llround(y));
      return std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0));
    }
    case ResponseFamily::Gamma: {
      // shape 1/lambda, rate 1/(lambda mu): mean mu, variance lambda mu^2
      const double shape = 1.0 / lambda;
      const double rate = 1.0 / (lambda * mu);
      return std::exp(shape * std::log(rate) - std::lgamma(shape) +
                      (shape - 1.0) * std::log(y) - rate * y);
    }
    case ResponseFamily::Gaussian:
      return std::exp(-0.5 * (y - mu) * (y - mu) / lambda) /
             std::sqrt(2.0 * M_PI * lambda);
    case ResponseFamily::Binomial: {
      const long k = static_cast<long>(std::llround(y));
      const double m = static_cast<double>(margin.trials);
      const double p = mu / m;
      return std::exp(std::lgamma(m + 1.0) - std::lgamma(k + 1.0) -
                      std::lgamma(m - k + 1.0) + k * std::log(p) +
                      (m - k) * std::log1p(-p));
    }
  }
  throw std::logic_error("unreachable");
}

double variance_function(ResponseFamily family, double mu, long trials) {
  check_mean_domain(family, mu, trials);
  switch (family) {
    case ResponseFamily::Poisson:
      return mu;
    case ResponseFamily::Gamma:
      return mu * mu;
    case ResponseFamily::Gaussian:
      return 1.0;
    case ResponseFamily::Binomial:
      return mu * (1.0 - mu / static_cast<double>(trials));
  }
  throw std::logic_error("unreachable");
}

double apply_inverse_link(Link link, double eta) {
  switch (link) {
    case Link::Log:
      return std::exp(eta);
    case Link::Logit:
      return 1.0 / (1.0 + std::exp(-eta));
    case Link::Identity:
      return eta;
  }
  throw std::logic_error("unreachable");
}

double apply_link(Link link, double mu) {
  switch (link) {
    case Link::Log:
      return std::log(mu);
    case Link::Logit:
      return std::log(mu / (1.0 - mu));
    case Link::Identity:
      return mu;
  }
  throw std::logic_error("unreachable");
}

double inverse_link_derivative(Link link, double eta) {
  switch (link) {
    case Link::Log:
      return std::exp(eta);
    case Link::Logit: {
      const double p = 1.0 / (1.0 + std::exp(-eta));
      return p * (1.0 - p);
    }
    case Link::Identity:
      return 1.0;
  }
  throw std::logic_error("unreachable");
}

double sample_response(Rng& rng, const MarginSpec& margin, double mu) {
  switch (margin.family) {
    case ResponseFamily::Poisson:
      return static_cast<double>(rng.poisson(mu));
    case ResponseFamily::Gamma: {
      const double shape = 1.0 / margin.dispersion;
      return rng.gamma(shape) * margin.dispersion * mu;
    }
    case ResponseFamily::Gaussian:
      return mu + std::sqrt(margin.dispersion) * rng.normal();
    case ResponseFamily::Binomial:
      return static_cast<double>(
          rng.binomial(margin.trials, mu / static_cast<double>(margin.trials)));
  }
  throw std::logic_error("unreachable");
}

SimulationResult simulate_mglmm(const MglmmSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int d = spec.dim();

  SimulationResult result;
  result.true_b = sample_elliptical(spec.random_components, spec.q, seed, 0);
  result.data.rows.reserve(static_cast<std::size_t>(d) * spec.q * spec.replicates);

  for (int j = 0; j < d; ++j) {
    const MarginSpec& margin = spec.margins[j];
    const double intercept = margin.beta(0);
    for (int c = 0; c < spec.q; ++c) {
      // one stream per (margin, cluster) so the draw order is thread-agnostic
      Rng rng(seed, stream_index(j + 1, c + 1));
      const double eta = intercept + result.true_b(c, j);
      double mu = apply_inverse_link(margin.link, eta);
      if (margin.family == ResponseFamily::Binomial)
        mu *= static_cast<double>(margin.trials);
      for (int r = 0; r < spec.replicates; ++r) {
        LongRow row;
        row.margin = j + 1;
        row.cluster = c + 1;
        row.y = sample_response(rng, margin, mu);
        row.x = {1.0};
        result.data.rows.push_back(std::move(row));
      }
    }
  }
  return result;
}

std::string family_name(ResponseFamily f) {
  switch (f) {
    case ResponseFamily::Poisson:
      return "poisson";
    case ResponseFamily::Gamma:
      return "gamma";
    case ResponseFamily::Binomial:
      return "binomial";
    case ResponseFamily::Gaussian:
      return "gaussian";
  }
  throw std::logic_error("unreachable");
}

ResponseFamily response_family_from_name(const std::string& name) {
  if (name == "poisson") return ResponseFamily::Poisson;
  if (name == "gamma") return ResponseFamily::Gamma;
  if (name == "binomial") return ResponseFamily::Binomial;
  if (name == "gaussian" || name == "normal") return ResponseFamily::Gaussian;
  throw std::invalid_argument("unknown response family: " + name);
}

std::string link_name(Link l) {
  switch (l) {
    case Link::Log:
      return "log";
    case Link::Logit:
      return "logit";
    case Link::Identity:
      return "identity";
  }
  throw std::logic_error("unreachable");
}

Link link_from_name(const std::string& name) {
  if (name == "log") return Link::Log;
  if (name == "logit") return Link::Logit;
  if (name == "identity") return Link::Identity;
  throw std::invalid_argument("unknown link: " + name);
}

}  // namespace latentgraph
