#include "mlab/hyperparams.hpp"

#include <cmath>

#include "mlab/errors.hpp"

namespace mlab {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("momentum alpha must lie in (0, 1)");
}

void check_s(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("learning rate s must be positive");
}

}  // namespace

double Hyperparams::friction() const { return 2.0 * std::sqrt(mu); }
double Hyperparams::noise() const { return std::sqrt(std::sqrt(s)); }

Hyperparams derive(double s, double alpha) {
  check_s(s);
  check_alpha(alpha);
  const double r = (1.0 - alpha) / (1.0 + alpha);
  Hyperparams hp;
  hp.s = s;
  hp.alpha = alpha;
  hp.mu = r * r / s;
  hp.beta = s * beta_multiplier(alpha);
  return hp;
}

double alpha_from_mu(double mu, double s) {
  check_s(s);
  if (!(mu > 0.0) || !(mu * s < 1.0)) throw DomainError("mu must satisfy 0 < mu < 1/s");
  const double q = std::sqrt(mu * s);
  return (1.0 - q) / (1.0 + q);
}

Hyperparams from_mu(double mu, double s) {
  Hyperparams hp = derive(s, alpha_from_mu(mu, s));
  hp.mu = mu;
  return hp;
}

double beta_multiplier(double alpha) {
  check_alpha(alpha);
  return (1.0 + alpha) / (2.0 * (1.0 - alpha));
}

RateRatios rate_ratios(double s, double alpha, double barrier, double s1, double s2) {
  check_s(s);
  check_alpha(alpha);
  if (!(barrier > 0.0) || !(s1 > 0.0) || !(s2 > 0.0)) throw DomainError("rate_ratios inputs must be positive");
  RateRatios r;
  const double lead = (1.0 + alpha) / (1.0 - alpha) * 2.0 * std::sqrt(s);
  r.sgdm_over_sgd = lead * std::exp((2.0 * barrier / s) * (3.0 * alpha - 1.0) / (1.0 + alpha));
  r.robustness_exponent = 2.0 * (1.0 - alpha) / (1.0 + alpha);
  return r;
}

}  // namespace mlab
