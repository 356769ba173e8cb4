#pragma once

namespace mlab {

/// Learning rate s and momentum α together with the derived friction
/// parameter μ and effective temperature β.
struct Hyperparams {
  double s = 0.0;
  double alpha = 0.0;
  double mu = 0.0;
  double beta = 0.0;

  double friction() const;  // 2√μ
  double noise() const;     // s^{1/4}
};

Hyperparams derive(double s, double alpha);
/// Hyperparams with μ held at `mu`; α follows from (μ, s).
Hyperparams from_mu(double mu, double s);
double alpha_from_mu(double mu, double s);
double beta_multiplier(double alpha);

struct RateRatios {
  double sgdm_over_sgd = 0.0;
  double robustness_exponent = 0.0;
};

/// Asymptotic momentum/plain decay ratio and the robustness exponent. s1, s2
/// are carried for symmetry with the experiment tables; the exponent does not
/// depend on them.
RateRatios rate_ratios(double s, double alpha, double barrier, double s1, double s2);

}  // namespace mlab
