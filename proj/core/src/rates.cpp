#include "mlab/rates.hpp"

#include <cmath>
#include <numbers>

#include "mlab/errors.hpp"

namespace mlab {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::underdamped_hp:
      return "underdamped_hp";
    case Regime::overdamped_lr:
      return "overdamped_lr";
    case Regime::nag_sc:
      return "nag_sc";
    case Regime::nag_c:
      return "nag_c";
  }
  return "unknown";
}

Regime parse_regime(const std::string& name) {
  if (name == "underdamped_hp") return Regime::underdamped_hp;
  if (name == "overdamped_lr") return Regime::overdamped_lr;
  if (name == "nag_sc") return Regime::nag_sc;
  if (name == "nag_c") return Regime::nag_c;
  throw ValidationError("unknown regime '" + name + "'");
}

double eta_d(const Eigen::MatrixXd& hess_saddle, double gamma_friction) {
  if (!(gamma_friction > 0.0)) throw DomainError("friction must be positive");
  const Eigen::Index d = hess_saddle.rows();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  B.topRightCorner(d, d).setIdentity();
  B.bottomLeftCorner(d, d) = -hess_saddle;
  B.bottomRightCorner(d, d) = gamma_friction * Eigen::MatrixXd::Identity(d, d);
  Eigen::EigenSolver<Eigen::MatrixXd> es(B, false);
  const auto& ev = es.eigenvalues();
  int negatives = 0;
  double found = 0.0;
  double found_imag = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i].real() < 0.0) {
      ++negatives;
      found = ev[i].real();
      found_imag = ev[i].imag();
    }
  }
  if (negatives != 1) {
    throw NotIndexOneError("block matrix has " + std::to_string(negatives) +
                           " eigenvalues with negative real part; not an index-1 saddle");
  }
  if (std::abs(found_imag) > 1e-10 * std::max(1.0, std::abs(found))) {
    throw NotIndexOneError("negative block eigenvalue is not real");
  }
  return found;
}

double eta_d_closed_form(double mu, double v) { return -v / (std::sqrt(mu) + std::sqrt(mu + v)); }

double gamma_prefactor(const Eigen::MatrixXd& hess_min, const Eigen::MatrixXd& hess_saddle) {
  const double dm = hess_min.determinant();
  const double ds = hess_saddle.determinant();
  if (!(dm > 0.0)) throw ClassificationError("minimum Hessian determinant must be positive");
  if (!(ds < 0.0)) throw ClassificationError("saddle Hessian determinant must be negative");
  return std::sqrt(dm / -ds) / std::numbers::pi;
}

RatePrediction pair_rate(const CriticalPoint& saddle, const CriticalPoint& minimum, const Hyperparams& hp,
                         Regime regime) {
  RatePrediction r;
  r.regime = regime;
  r.barrier = saddle.value - minimum.value;
  r.gamma_prefactor = gamma_prefactor(minimum.hessian, saddle.hessian);
  const double v = -saddle.hess_eigs[saddle.hess_eigs.size() - 1];
  switch (regime) {
    case Regime::underdamped_hp:
      r.eta_d = eta_d(saddle.hessian, hp.friction());
      r.prefactor = std::abs(r.eta_d) * r.gamma_prefactor;
      r.exponent_arg = 2.0 * r.barrier / hp.beta;
      break;
    case Regime::overdamped_lr:
      r.eta_d = -v;
      r.prefactor = v * r.gamma_prefactor;
      r.exponent_arg = 2.0 * r.barrier / hp.s;
      break;
    case Regime::nag_sc: {
      const auto nag = nag_asymptotics(hp.mu, v, hp.s, r.barrier);
      r.eta_d = -nag.eta_abs_nag_sc;
      r.prefactor = nag.eta_abs_nag_sc * r.gamma_prefactor;
      r.exponent_arg = 2.0 * r.barrier / hp.beta;
      break;
    }
    case Regime::nag_c:
      throw UsageError("the NAG-C factor depends on the iteration index; use nag_asymptotics");
  }
  r.lambda = r.prefactor * std::exp(-r.exponent_arg);
  r.zeta = r.lambda;
  r.delta = hp.beta * r.lambda;
  return r;
}

RateLadder kramers_rate(const MorsePairing& pairing, const Hyperparams& hp, Regime regime) {
  if (pairing.pairs.size() < 2) throw NoMetastabilityError("single well: no finite saddle/minimum pair");
  RateLadder out;
  for (std::size_t l = 1; l < pairing.pairs.size(); ++l) {
    const auto& p = pairing.pairs[l];
    out.ladder.push_back(pair_rate(p.saddle, p.minimum, hp, regime));
  }
  out.leading = out.ladder.front();
  return out;
}

NagAsymptotics nag_asymptotics(double mu, double v, double s, double barrier) {
  if (!(mu > 0.0) || !(v > 0.0) || !(s >= 0.0)) throw DomainError("nag_asymptotics needs mu, v > 0 and s >= 0");
  NagAsymptotics out;
  const double rs = std::sqrt(s);
  out.eta_abs_nag_sc = std::sqrt(mu + s * v * v / 4.0 + v) - std::sqrt(mu) - rs * v / 2.0;
  out.eta_abs_plain = std::sqrt(mu + v) - std::sqrt(mu);
  out.nag_c_exponent = [barrier, s](double k) {
    if (!(k > 0.0)) throw DomainError("iteration index must be positive");
    if (!(s > 0.0)) throw DomainError("NAG-C exponent needs s > 0");
    return -(1.0 / k) * (1.0 + 3.0 / (2.0 * k)) * 6.0 * barrier / s;
  };
  return out;
}

FinalGap final_gap_and_iteration(const Hyperparams& hp, double A, double epsilon, double S,
                                 double C_norm_product, double lambda) {
  if (!(A > 0.0) || !(epsilon > 0.0) || !(S > 0.0) || !(C_norm_product > 0.0)) {
    throw DomainError("final_gap_and_iteration inputs must be positive");
  }
  if (hp.s > S) throw DomainError("learning rate exceeds the admissible bound S");
  if (!(lambda > 0.0)) throw NumericalError("decay constant is zero; time to accuracy is unbounded");
  FinalGap g;
  g.gap_bound = A * hp.beta;
  g.s_max = std::min(epsilon / A * (1.0 - hp.alpha) / (1.0 + hp.alpha), S);
  g.t_min = std::log(2.0 * C_norm_product / epsilon) / lambda;
  return g;
}

namespace {

double idealized_rate(const Hyperparams& hp) { return std::exp(-0.1 / hp.beta) / (2.0 * std::sqrt(hp.mu)); }

}  // namespace

double idealized_risk(double t, double s, double alpha) {
  if (!(t >= 0.0)) throw DomainError("time must be non-negative");
  const Hyperparams hp = derive(s, alpha);
  return (100.0 - hp.beta) * std::exp(-idealized_rate(hp) * t) + hp.beta;
}

double stabilization_k(double s, double alpha, double ratio_threshold) {
  if (!(ratio_threshold > 0.0 && ratio_threshold < 1.0)) throw DomainError("threshold must lie in (0, 1)");
  const Hyperparams hp = derive(s, alpha);
  const double t = std::log(1.0 / ratio_threshold) / idealized_rate(hp);
  return std::ceil(t / s);
}

}  // namespace mlab
