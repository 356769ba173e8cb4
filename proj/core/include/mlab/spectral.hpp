#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mlab/hyperparams.hpp"
#include "mlab/potentials.hpp"

namespace mlab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// Uniform tensor grid on x_range × v_range, endpoints included. Node (i, j)
/// is stored at i·nv + j.
struct PhaseGrid {
  Interval x_range, v_range;
  int nx = 0, nv = 0;

  PhaseGrid() = default;
  PhaseGrid(Interval x, Interval v, int nx_, int nv_);

  double hx() const { return x_range.width() / (nx - 1); }
  double hv() const { return v_range.width() / (nv - 1); }
  double x(int i) const { return x_range.lo + i * hx(); }
  double v(int j) const { return v_range.lo + j * hv(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(nv); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nv + j; }
};

/// Smallest box on which the square root of the Gibbs density at temperature β
/// has decayed below exp(−depth) relative to its peak (depth 16 by default).
PhaseGrid gibbs_phase_grid(const Potential& p, double beta, int nx, int nv, double depth = 16.0);

struct PositionGrid {
  std::vector<Interval> axes;
  std::vector<int> n;

  std::size_t dim() const { return axes.size(); }
  std::size_t size() const;
  double h(std::size_t a) const { return axes[a].width() / (n[a] - 1); }
};

enum class Transport {
  upwind1,  // first-order one-sided differences
  upwind2,  // second-order one-sided (three-point) differences
};

struct OperatorMatrix {
  SparseMatrix A;
  bool symmetric = false;
  double beta = 0.0, mu = 0.0, s = 0.0;
  std::string potential;
  // Expected kernel sampled on the grid (√Gibbs), ℓ²-normalized.
  Eigen::VectorXd kernel;
  std::optional<PhaseGrid> phase;
  std::optional<PositionGrid> position;

  std::size_t n() const { return static_cast<std::size_t>(A.rows()); }
  OperatorMatrix scaled(double factor) const;
};

struct GibbsDistribution {
  std::shared_ptr<const Potential> potential;
  double beta = 0.0;
  double Z = 0.0;
  PhaseGrid grid;
  Eigen::VectorXd values;  // normalized density on grid nodes
  double mean_x = 0.0, second_x = 0.0, second_v = 0.0, mean_f = 0.0;
  double boundary_fraction = 0.0;
  // Position-marginal normalization ∫ exp(−2(f − f_ref)/β) dx over the box.
  double zx = 0.0;
  double f_ref = 0.0;

  double var_x() const { return second_x - mean_x * mean_x; }
  /// ∫_{x in [a,b]} exp(−2f/β) dx / Zx, by composite Simpson.
  double x_mass(double a, double b) const;
  /// Gaussian velocity marginal mass on [a, b].
  double v_mass(double a, double b) const;
};

/// Gibbs density ∝ exp(−(2f + v²)/β) on a 1D phase grid, normalized by 2D
/// trapezoid quadrature. Throws BoxTooSmallError when more than
/// `max_boundary_fraction` of the unnormalized mass sits on the boundary ring.
GibbsDistribution gibbs_density(const Potential& p, double beta, const PhaseGrid& grid,
                                double max_boundary_fraction = 1e-6);

/// E_Gibbs[f] − f* for the position marginal exp(−2f/β), by quadrature on
/// the potential's box.
double gibbs_excess_risk(const Potential& p, double beta, double f_star, int nodes = 4001);

OperatorMatrix assemble_kramers(const Potential& p, const Hyperparams& hp, const PhaseGrid& grid,
                                Transport transport = Transport::upwind2);

OperatorMatrix assemble_overdamped_witten(const Potential& p, double s, const PositionGrid& grid);

struct SpectralResult {
  std::vector<std::complex<double>> eigenvalues;  // ascending real part
  std::vector<double> residuals;
  Eigen::MatrixXcd eigenvectors;  // columns, unit ℓ² norm
  int which = 0;
  int iterations = 0;
  // Index of the eigenvalue identified with the kernel, −1 if none.
  int kernel_index = -1;
  double kernel_overlap = 0.0;
};

struct EigenOptions {
  double tol = 1e-9;
  double shift = -1e-3;
  int krylov = 0;  // 0: automatic
  int max_restarts = 50;
};

SpectralResult smallest_eigenvalues(const OperatorMatrix& op, int k, const EigenOptions& opt = {});
SpectralResult smallest_eigenvalues(const OperatorMatrix& op, int k, double tol);

/// Dense reference solve for small grids.
SpectralResult dense_eigenvalues(const OperatorMatrix& op, int k);

/// First nonzero eigenvalue (real part) after skipping the kernel.
double spectral_gap(const SpectralResult& r);

struct DecayCurve {
  std::vector<double> t;
  std::vector<double> norm;
  double rate = 0.0;
  double r_squared = 0.0;
  bool multi_mode_warning = false;
};

/// Implicit Euler for ∂ψ/∂t = −Aψ; fits the decay of the component of ψ
/// orthogonal to the kernel over the second half of [0, T].
DecayCurve semigroup_decay(const OperatorMatrix& op, const Eigen::VectorXd& psi0, double T, double dt);

struct CommutatorReport {
  double aa_star = 0.0;      // ‖[A, A*] − 2√μ I‖
  double ac = 0.0;           // ‖[A, C]‖
  double at_minus_c = 0.0;   // ‖[A, T] − C‖
  double ct_plus_hess = 0.0; // ‖[C, T] + f''A‖ operator max-norm
  double ct_plus_hess_smooth = 0.0;  // same, applied to a smooth test function
};

/// Discrete commutator identities on interior rows.
CommutatorReport commutator_residuals(const Potential& p, const Hyperparams& hp, const PhaseGrid& grid);

/// Coordinate text format: one "row col value" triple per line.
void write_coo(const SparseMatrix& A, const std::string& path);

}  // namespace mlab
