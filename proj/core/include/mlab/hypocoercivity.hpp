#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlab/potentials.hpp"
#include "mlab/spectral.hpp"

namespace mlab {

struct KappaConstants {
  double kappa1 = 0.0, kappa2 = 0.0, kappa3 = 0.0;
};

/// Relative-bound constants from the Villani constant C, dimension d,
/// temperature β and step size s.
KappaConstants kappa_constants(double C, int d, double beta, double s);

struct PoincareEstimate {
  double chi = 0.0;
  double witten_gap = 0.0;
  std::vector<double> eigenvalues;
  bool cluster_warning = false;  // near-degenerate eigenvalue beyond the kernel
  std::string warning;
};

/// Poincaré constant of exp(−2H/β), H = f + v²/2, from the gap of the phase
/// space Witten operator at temperature β: χ = 2·gap/β.
PoincareEstimate poincare_estimate(const Potential& p, double beta, const PhaseGrid& grid);

struct NormConstants {
  double C1 = 0.0, C2 = 0.0;
};

/// Bounds of the Gram matrix [[a, b], [b, c]] clipped against the identity block.
NormConstants norm_equivalence(double a, double b, double c);

/// M from the six-term minimum.
double certificate_M(double a, double b, double c);

bool admissible(double a, double b, double c);

struct PositivityReport {
  Eigen::Matrix4d K1, K2, L;
  // |l_ij| ≤ √(l_ii l_jj)/4 and √(l_ii l_jj)/4 ≤ (l_ii + l_jj)/8 for the
  // off-diagonal pairs (1,3), (1,4), (2,3), (3,4); positive = satisfied.
  std::array<double, 8> margins{};
  std::array<std::string, 8> labels;
  double min_margin = 0.0;
  bool entries_ok = false;
  double L_min_eigenvalue = 0.0;
  double K1_min_eigenvalue = 0.0;
  double K2_min_eigenvalue = 0.0;
  bool K1_psd = false;
  bool K2_psd = false;
};

PositivityReport matrix_positivity_check(double a, double b, double c, double M, double kappa3, double mu);

struct Certificate {
  double a = 0.0, b = 0.0, c = 0.0;
  double M = 0.0;
  double kappa1 = 0.0, kappa2 = 0.0, kappa3 = 0.0;
  double mu = 0.0;
  double chi = 0.0;
  double C1 = 0.0, C2 = 0.0;
  double lambda_lower = 0.0;
  bool feasible = false;
  double best_margin = 0.0;
  // max{1, √μ, √κ₃}: the level M would need to reach for the K₂ domination step.
  double M_required = 0.0;
  bool M_dominates = false;
  PositivityReport positivity;
  std::size_t candidates = 0;
};

/// (1/8)·min{1/2, 2b}·min{1, χ}·C1.
double lambda_lower_bound(const Certificate& cert);

struct SearchOptions {
  int points_per_axis = 20;
  double ab_min = 1e-3, ab_max = 1.0;
  double c_min = 1e-4, c_max = 0.5;
  // slack for rounding in the margins (tight constraints sit at exactly zero)
  double margin_tol = 1e-12;
};

Certificate certificate_search(const KappaConstants& kappa, double mu, double chi, const SearchOptions& opt = {});

struct NormPair {
  double inner = 0.0;  // ‖g‖² + a‖Ag‖² + 2b⟨Ag, Cg⟩ + c‖Cg‖²
  double h1 = 0.0;     // ‖g‖² + ‖Ag‖² + ‖Cg‖²
};

NormPair hypocoercive_norms(double a, double b, double c, const Eigen::VectorXd& g, const Eigen::VectorXd& Ag,
                            const Eigen::VectorXd& Cg);

}  // namespace mlab
