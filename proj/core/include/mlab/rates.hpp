#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlab/hyperparams.hpp"
#include "mlab/morse.hpp"

namespace mlab {

enum class Regime { underdamped_hp, overdamped_lr, nag_sc, nag_c };

std::string to_string(Regime r);
Regime parse_regime(const std::string& name);

struct RatePrediction {
  double lambda = 0.0;
  double prefactor = 0.0;
  double exponent_arg = 0.0;
  Regime regime = Regime::underdamped_hp;
  double eta_d = 0.0;
  double gamma_prefactor = 0.0;
  double final_gap_bound = 0.0;  // filled when a gap constant is supplied
  double barrier = 0.0;
  double zeta = 0.0;   // = lambda
  double delta = 0.0;  // β·ζ
};

struct RateLadder {
  RatePrediction leading;             // ℓ = 1
  std::vector<RatePrediction> ladder;  // ℓ = 1 … n−1
};

/// Unique negative eigenvalue of [[0, I], [−H, γ I]].
double eta_d(const Eigen::MatrixXd& hess_saddle, double gamma_friction);
/// Closed form for 1D: −v/(√μ + √(μ+v)).
double eta_d_closed_form(double mu, double v);

double gamma_prefactor(const Eigen::MatrixXd& hess_min, const Eigen::MatrixXd& hess_saddle);

RateLadder kramers_rate(const MorsePairing& pairing, const Hyperparams& hp, Regime regime);
/// Single-pair prediction from explicit ingredients.
RatePrediction pair_rate(const CriticalPoint& saddle, const CriticalPoint& minimum, const Hyperparams& hp,
                         Regime regime);

struct NagAsymptotics {
  double eta_abs_nag_sc = 0.0;
  double eta_abs_plain = 0.0;
  // Exponent of the accelerated-gradient escape factor at iteration k.
  std::function<double(double k)> nag_c_exponent;
};

NagAsymptotics nag_asymptotics(double mu, double v, double s, double barrier = 0.0);

struct FinalGap {
  double gap_bound = 0.0;
  double s_max = 0.0;
  double t_min = 0.0;
};

FinalGap final_gap_and_iteration(const Hyperparams& hp, double A, double epsilon, double S,
                                 double C_norm_product, double lambda);

double idealized_risk(double t, double s, double alpha);
/// Smallest k whose transient/(100−β) ≤ threshold with t = k·s.
double stabilization_k(double s, double alpha, double ratio_threshold = 1e-3);

}  // namespace mlab
