#include "mlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "mlab/errors.hpp"

namespace mlab {

PhaseGrid::PhaseGrid(Interval x, Interval v, int nx_, int nv_) : x_range(x), v_range(v), nx(nx_), nv(nv_) {
  if (nx < 32 || nv < 32) throw DomainError("phase grid needs at least 32 points per axis");
  if (!(x.hi > x.lo) || !(v.hi > v.lo)) throw DomainError("phase grid ranges must be non-empty");
}

std::size_t PositionGrid::size() const {
  std::size_t t = 1;
  for (int k : n) t *= static_cast<std::size_t>(k);
  return t;
}

OperatorMatrix OperatorMatrix::scaled(double factor) const {
  OperatorMatrix out = *this;
  out.A *= factor;
  return out;
}

namespace {

double box_minimum_1d(const Potential& p, int n, double* argmin = nullptr) {
  const double lo = p.box().lower[0], hi = p.box().upper[0];
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * i / (n - 1);
    const double f = p.value1(x);
    if (f < best) {
      best = f;
      if (argmin) *argmin = x;
    }
  }
  return best;
}

// Composite Simpson on [a, b] with an even number of panels.
template <class F>
double simpson(F&& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

void require_1d(const Potential& p, const char* what) {
  if (p.dim() != 1) throw DomainError(std::string(what) + " needs a 1D position space");
}

}  // namespace

PhaseGrid gibbs_phase_grid(const Potential& p, double beta, int nx, int nv, double depth) {
  require_1d(p, "gibbs_phase_grid");
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  constexpr int scan = 20001;
  const double lo = p.box().lower[0], hi = p.box().upper[0];
  const double fmin = box_minimum_1d(p, scan);
  const double cut = fmin + depth * beta;
  double first = hi, last = lo;
  const double h = (hi - lo) / (scan - 1);
  for (int i = 0; i < scan; ++i) {
    const double x = lo + i * h;
    if (p.value1(x) < cut) {
      first = std::min(first, x);
      last = std::max(last, x);
    }
  }
  first = std::max(lo, first - h);
  last = std::min(hi, last + h);
  const double vmax = std::sqrt(2.0 * depth * beta);
  return PhaseGrid({first, last}, {-vmax, vmax}, nx, nv);
}

double GibbsDistribution::x_mass(double a, double b) const {
  const double lo = std::max(a, potential->box().lower[0]);
  const double hi = std::min(b, potential->box().upper[0]);
  if (!(hi > lo)) return 0.0;
  const auto& p = *potential;
  const double bt = beta, fr = f_ref;
  return simpson([&](double x) { return std::exp(-2.0 * (p.value1(x) - fr) / bt); }, lo, hi, 128) / zx;
}

double GibbsDistribution::v_mass(double a, double b) const {
  const double r = std::sqrt(beta);
  return 0.5 * (std::erf(b / r) - std::erf(a / r));
}

GibbsDistribution gibbs_density(const Potential& p, double beta, const PhaseGrid& grid, double max_boundary_fraction) {
  require_1d(p, "gibbs_density");
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  GibbsDistribution g;
  g.potential = std::make_shared<const Potential>(p);
  g.beta = beta;
  g.grid = grid;
  const int nx = grid.nx, nv = grid.nv;
  std::vector<double> fx(nx);
  double fref = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nx; ++i) {
    fx[i] = p.value1(grid.x(i));
    fref = std::min(fref, fx[i]);
  }
  g.f_ref = fref;
  g.values.resize(static_cast<Eigen::Index>(grid.size()));
  const double hx = grid.hx(), hv = grid.hv();
  double total = 0.0, ring = 0.0, mx = 0.0, mxx = 0.0, mvv = 0.0, mf = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double wi = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
    for (int j = 0; j < nv; ++j) {
      const double wj = (j == 0 || j == nv - 1) ? 0.5 : 1.0;
      const double v = grid.v(j);
      const double val = std::exp(-(2.0 * (fx[i] - fref) + v * v) / beta);
      g.values[static_cast<Eigen::Index>(grid.index(i, j))] = val;
      const double w = wi * wj * hx * hv * val;
      total += w;
      if (i == 0 || i == nx - 1 || j == 0 || j == nv - 1) ring += hx * hv * val;
      const double x = grid.x(i);
      mx += w * x;
      mxx += w * x * x;
      mvv += w * v * v;
      mf += w * fx[i];
    }
  }
  g.boundary_fraction = ring / total;
  if (g.boundary_fraction > max_boundary_fraction) {
    throw BoxTooSmallError("Gibbs mass on the grid boundary is " + std::to_string(g.boundary_fraction) +
                           " of the total; enlarge the phase box");
  }
  g.values /= total;
  g.Z = total * std::exp(-2.0 * fref / beta);
  g.mean_x = mx / total;
  g.second_x = mxx / total;
  g.second_v = mvv / total;
  g.mean_f = mf / total;
  const double bt = beta;
  g.zx = simpson([&](double x) { return std::exp(-2.0 * (p.value1(x) - fref) / bt); }, p.box().lower[0],
                 p.box().upper[0], 8000);
  return g;
}

double gibbs_excess_risk(const Potential& p, double beta, double f_star, int nodes) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (p.dim() == 1) {
    const double lo = p.box().lower[0], hi = p.box().upper[0];
    const double num = simpson(
        [&](double x) {
          const double e = p.value1(x) - f_star;
          return e * std::exp(-2.0 * e / beta);
        },
        lo, hi, nodes);
    const double den = simpson([&](double x) { return std::exp(-2.0 * (p.value1(x) - f_star) / beta); }, lo, hi, nodes);
    return num / den;
  }
  if (p.dim() == 2) {
    const int n = std::min(nodes, 801);
    const double ax = p.box().lower[0], bx = p.box().upper[0], ay = p.box().lower[1], by = p.box().upper[1];
    auto inner = [&](double x, bool weighted) {
      return simpson(
          [&](double y) {
            const double pt[2] = {x, y};
            const double e = p.value(std::span<const double>(pt, 2)) - f_star;
            return (weighted ? e : 1.0) * std::exp(-2.0 * e / beta);
          },
          ay, by, n);
    };
    const double num = simpson([&](double x) { return inner(x, true); }, ax, bx, n);
    const double den = simpson([&](double x) { return inner(x, false); }, ax, bx, n);
    return num / den;
  }
  throw DomainError("gibbs_excess_risk supports d <= 2");
}

OperatorMatrix assemble_kramers(const Potential& p, const Hyperparams& hp, const PhaseGrid& grid, Transport transport) {
  require_1d(p, "assemble_kramers");
  if (!(hp.beta > 0.0) || !(hp.s > 0.0)) throw DomainError("invalid hyperparameters");
  const int nx = grid.nx, nv = grid.nv;
  const double hx = grid.hx(), hv = grid.hv();
  const double D = 0.5 * std::sqrt(hp.s);
  const double beta = hp.beta;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(grid.size() * 7);

  // a·∂ along one axis with one-sided differences taken from upstream.
  auto upwind = [&](std::size_t row, double a, int pos, int n, double h, std::size_t stride, double& diag) {
    if (a == 0.0) return;
    const int dir = a > 0.0 ? -1 : 1;  // upstream neighbour offset
    const double mag = std::abs(a) / h;
    if (transport == Transport::upwind1) {
      diag += mag;
      const int q = pos + dir;
      if (q >= 0 && q < n) trip.emplace_back(row, row + dir * static_cast<std::ptrdiff_t>(stride), -mag);
    } else {
      diag += 1.5 * mag;
      const int q1 = pos + dir, q2 = pos + 2 * dir;
      if (q1 >= 0 && q1 < n) trip.emplace_back(row, row + dir * static_cast<std::ptrdiff_t>(stride), -2.0 * mag);
      if (q2 >= 0 && q2 < n) trip.emplace_back(row, row + 2 * dir * static_cast<std::ptrdiff_t>(stride), 0.5 * mag);
    }
  };

  std::vector<double> fp(nx), f(nx);
  for (int i = 0; i < nx; ++i) {
    fp[i] = p.slope1(grid.x(i));
    f[i] = p.value1(grid.x(i));
  }
  const double fref = *std::min_element(f.begin(), f.end());
  Eigen::VectorXd kernel(static_cast<Eigen::Index>(grid.size()));
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nv; ++j) {
      const std::size_t row = grid.index(i, j);
      const double v = grid.v(j);
      double diag = 0.0;
      upwind(row, v, i, nx, hx, static_cast<std::size_t>(nv), diag);
      upwind(row, -fp[i], j, nv, hv, 1, diag);
      diag += 2.0 * D / (hv * hv) - D * (1.0 / beta - v * v / (beta * beta));
      if (j > 0) trip.emplace_back(row, row - 1, -D / (hv * hv));
      if (j + 1 < nv) trip.emplace_back(row, row + 1, -D / (hv * hv));
      trip.emplace_back(row, row, diag);
      kernel[static_cast<Eigen::Index>(row)] = std::exp(-(2.0 * (f[i] - fref) + v * v) / (2.0 * beta));
    }
  }
  OperatorMatrix op;
  op.A.resize(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(grid.size()));
  op.A.setFromTriplets(trip.begin(), trip.end());
  op.A.makeCompressed();
  op.symmetric = false;
  op.beta = hp.beta;
  op.mu = hp.mu;
  op.s = hp.s;
  op.potential = p.name();
  op.kernel = kernel / kernel.norm();
  op.phase = grid;
  return op;
}

OperatorMatrix assemble_overdamped_witten(const Potential& p, double s, const PositionGrid& grid) {
  const std::size_t d = grid.dim();
  if (d != p.dim()) throw DomainError("grid dimension does not match the potential");
  if (d < 1 || d > 2) throw DomainError("Witten assembly supports 1D and 2D position grids");
  if (!(s > 0.0)) throw DomainError("s must be positive");
  for (std::size_t a = 0; a < d; ++a) {
    if (grid.n[a] < 3) throw DomainError("position grid needs at least 3 points per axis");
  }
  const std::size_t N = grid.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(N * (2 * d + 1));
  std::vector<double> fvals(N);
  Eigen::VectorXd x(d), g(d);
  Eigen::MatrixXd H(d, d);
  for (std::size_t k = 0; k < N; ++k) {
    std::size_t rem = k;
    std::vector<int> idx(d);
    for (std::size_t a = d; a-- > 0;) {
      idx[a] = static_cast<int>(rem % static_cast<std::size_t>(grid.n[a]));
      rem /= static_cast<std::size_t>(grid.n[a]);
    }
    for (std::size_t a = 0; a < d; ++a) x[a] = grid.axes[a].lo + idx[a] * grid.h(a);
    std::span<const double> xs(x.data(), d);
    p.gradient(xs, std::span<double>(g.data(), d));
    p.hessian(xs, H);
    fvals[k] = p.value(xs);
    double diag = g.squaredNorm() / (2.0 * s) - 0.5 * H.trace();
    std::size_t stride = 1;
    for (std::size_t a = d; a-- > 0;) {
      const double c = 0.5 * s / (grid.h(a) * grid.h(a));
      diag += 2.0 * c;
      if (idx[a] > 0) trip.emplace_back(k, k - stride, -c);
      if (idx[a] + 1 < grid.n[a]) trip.emplace_back(k, k + stride, -c);
      stride *= static_cast<std::size_t>(grid.n[a]);
    }
    trip.emplace_back(k, k, diag);
  }
  OperatorMatrix op;
  op.A.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  op.A.setFromTriplets(trip.begin(), trip.end());
  op.A.makeCompressed();
  op.symmetric = true;
  op.s = s;
  op.beta = s;
  op.potential = p.name();
  const double fref = *std::min_element(fvals.begin(), fvals.end());
  Eigen::VectorXd ker(static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < N; ++k) ker[static_cast<Eigen::Index>(k)] = std::exp(-(fvals[k] - fref) / s);
  op.kernel = ker / ker.norm();
  op.position = grid;
  return op;
}

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// Applies (A − σI)⁻¹ with a factorization chosen by symmetry.
class ShiftInvert {
 public:
  ShiftInvert(const OperatorMatrix& op, double sigma) : symmetric_(op.symmetric) {
    ColMatrix M = op.A;
    ColMatrix I(M.rows(), M.cols());
    I.setIdentity();
    M = M - sigma * I;
    M.makeCompressed();
    if (symmetric_) {
      ldlt_.compute(M);
      if (ldlt_.info() != Eigen::Success) throw SolverError("sparse LDLT factorization failed", {});
    } else {
      lu_.analyzePattern(M);
      lu_.factorize(M);
      if (lu_.info() != Eigen::Success) throw SolverError("sparse LU factorization failed: " + lu_.lastErrorMessage(), {});
    }
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) {
    return symmetric_ ? Eigen::VectorXd(ldlt_.solve(b)) : Eigen::VectorXd(lu_.solve(b));
  }

 private:
  bool symmetric_;
  Eigen::SimplicialLDLT<ColMatrix> ldlt_;
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

double residual(const SparseMatrix& A, std::complex<double> lambda, const Eigen::VectorXcd& phi) {
  const Eigen::VectorXd re = phi.real(), im = phi.imag();
  const Eigen::VectorXd Are = A * re, Aim = A * im;
  Eigen::VectorXcd r(phi.size());
  r.real() = Are;
  r.imag() = Aim;
  r -= lambda * phi;
  return r.norm() / phi.norm();
}

void identify_kernel(const OperatorMatrix& op, SpectralResult& out) {
  if (op.kernel.size() != static_cast<Eigen::Index>(op.n())) return;
  const Eigen::VectorXcd k = op.kernel.cast<std::complex<double>>();
  for (int i = 0; i < static_cast<int>(out.eigenvalues.size()); ++i) {
    const double ov = std::abs(out.eigenvectors.col(i).dot(k)) / out.eigenvectors.col(i).norm();
    if (ov > out.kernel_overlap) {
      out.kernel_overlap = ov;
      out.kernel_index = i;
    }
  }
  if (out.kernel_overlap < 0.99) out.kernel_index = -1;
}

struct Ritz {
  std::complex<double> lambda;
  Eigen::VectorXcd vec;
  double res;
};

}  // namespace

SpectralResult smallest_eigenvalues(const OperatorMatrix& op, int k, double tol) {
  EigenOptions o;
  o.tol = tol;
  return smallest_eigenvalues(op, k, o);
}

SpectralResult smallest_eigenvalues(const OperatorMatrix& op, int k, const EigenOptions& opt) {
  if (k < 2) throw DomainError("smallest_eigenvalues needs k >= 2");
  if (!(opt.tol > 0.0)) throw DomainError("tolerance must be positive");
  const Eigen::Index n = static_cast<Eigen::Index>(op.n());
  if (k > n) throw DomainError("more eigenvalues requested than the matrix dimension");
  const int want = std::min<int>(static_cast<int>(n), k + 4);
  const int m = static_cast<int>(std::min<Eigen::Index>(n, opt.krylov > 0 ? opt.krylov : std::max(2 * want + 20, 48)));
  ShiftInvert solver(op, opt.shift);
  const double scale = std::max(1.0, op.A.cwiseAbs().sum() / static_cast<double>(n));

  Eigen::VectorXd start(n);
  for (Eigen::Index i = 0; i < n; ++i) start[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3);
  if (op.kernel.size() == n) start += op.kernel * std::sqrt(static_cast<double>(n));
  start.normalize();

  std::vector<Ritz> best;
  int restart = 0;
  for (; restart <= opt.max_restarts; ++restart) {
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    V.col(0) = start;
    int steps = m;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd w = solver.solve(V.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd hcol = V.leftCols(j + 1).transpose() * w;
        w -= V.leftCols(j + 1) * hcol;
        H.col(j).head(j + 1) += hcol;
      }
      const double beta = w.norm();
      H(j + 1, j) = beta;
      if (beta < 1e-14 * H.col(j).head(j + 1).norm()) {
        steps = j + 1;
        break;
      }
      V.col(j + 1) = w / beta;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(steps, steps));
    const Eigen::VectorXcd theta = es.eigenvalues();
    const Eigen::MatrixXcd Y = es.eigenvectors();
    std::vector<int> order(static_cast<std::size_t>(steps));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(theta[a]) > std::abs(theta[b]); });
    std::vector<Ritz> ritz;
    const Eigen::MatrixXcd Vc = V.leftCols(steps).cast<std::complex<double>>();
    for (int t = 0; t < std::min(want, steps); ++t) {
      const int i = order[static_cast<std::size_t>(t)];
      Ritz r;
      r.lambda = opt.shift + 1.0 / theta[i];
      r.vec = Vc * Y.col(i);
      r.vec /= r.vec.norm();
      r.res = residual(op.A, r.lambda, r.vec);
      ritz.push_back(std::move(r));
    }
    std::sort(ritz.begin(), ritz.end(), [](const Ritz& a, const Ritz& b) {
      if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
      return a.lambda.imag() < b.lambda.imag();
    });
    best = ritz;
    bool ok = static_cast<int>(ritz.size()) >= k;
    for (int t = 0; ok && t < k; ++t) ok = ritz[static_cast<std::size_t>(t)].res <= opt.tol * scale;
    if (ok) break;
    start.setZero();
    for (int t = 0; t < std::min<int>(k, static_cast<int>(ritz.size())); ++t) {
      start += ritz[static_cast<std::size_t>(t)].vec.real() + ritz[static_cast<std::size_t>(t)].vec.imag();
    }
    start.normalize();
  }
  if (restart > opt.max_restarts) {
    std::vector<double> res;
    for (const auto& r : best) res.push_back(r.res);
    throw SolverError("shift-invert Arnoldi did not converge", res);
  }
  SpectralResult out;
  out.which = k;
  out.iterations = restart + 1;
  out.eigenvectors.resize(n, k);
  for (int t = 0; t < k; ++t) {
    out.eigenvalues.push_back(best[static_cast<std::size_t>(t)].lambda);
    out.residuals.push_back(best[static_cast<std::size_t>(t)].res);
    out.eigenvectors.col(t) = best[static_cast<std::size_t>(t)].vec;
  }
  identify_kernel(op, out);
  return out;
}

SpectralResult dense_eigenvalues(const OperatorMatrix& op, int k) {
  const Eigen::MatrixXd A = Eigen::MatrixXd(op.A);
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  const Eigen::VectorXcd ev = es.eigenvalues();
  const Eigen::MatrixXcd vecs = es.eigenvectors();
  std::vector<int> order(static_cast<std::size_t>(ev.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (ev[a].real() != ev[b].real()) return ev[a].real() < ev[b].real();
    return ev[a].imag() < ev[b].imag();
  });
  SpectralResult out;
  out.which = k;
  out.eigenvectors.resize(A.rows(), k);
  for (int t = 0; t < k; ++t) {
    const int i = order[static_cast<std::size_t>(t)];
    Eigen::VectorXcd v = vecs.col(i);
    v /= v.norm();
    out.eigenvalues.push_back(ev[i]);
    out.residuals.push_back(residual(op.A, ev[i], v));
    out.eigenvectors.col(t) = v;
  }
  identify_kernel(op, out);
  return out;
}

double spectral_gap(const SpectralResult& r) {
  const int skip = r.kernel_index >= 0 ? r.kernel_index : 0;
  for (int i = 0; i < static_cast<int>(r.eigenvalues.size()); ++i) {
    if (i != skip) return r.eigenvalues[static_cast<std::size_t>(i)].real();
  }
  throw NumericalError("spectrum holds no eigenvalue beyond the kernel");
}

DecayCurve semigroup_decay(const OperatorMatrix& op, const Eigen::VectorXd& psi0, double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0) || dt > T) throw DomainError("semigroup_decay needs 0 < dt <= T");
  const Eigen::Index n = static_cast<Eigen::Index>(op.n());
  if (psi0.size() != n) throw DomainError("initial data size does not match the operator");
  ColMatrix M = op.A;
  M *= dt;
  for (Eigen::Index i = 0; i < n; ++i) M.coeffRef(i, i) += 1.0;
  M.makeCompressed();
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) throw SolverError("implicit Euler factorization failed", {});
  Eigen::VectorXd k = op.kernel.size() == n ? op.kernel : Eigen::VectorXd::Zero(n);
  if (k.size() && k.norm() > 0) {
    // sampled √Gibbs is only O(h²) close to the discrete null vector
    ColMatrix S = op.A;
    for (Eigen::Index i = 0; i < n; ++i) S.coeffRef(i, i) += 1e-3;
    S.makeCompressed();
    Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> inv;
    inv.compute(S);
    k.normalize();
    if (inv.info() == Eigen::Success) {
      for (int it = 0; it < 8; ++it) {
        Eigen::VectorXd next = inv.solve(k);
        if (!next.allFinite() || next.norm() == 0.0) break;
        next.normalize();
        if (next.dot(k) < 0) next = -next;
        const double moved = (next - k).norm();
        k = next;
        if (moved < 1e-14) break;
      }
    }
  }

  DecayCurve c;
  const std::size_t steps = static_cast<std::size_t>(std::llround(T / dt));
  Eigen::VectorXd psi = psi0;
  auto orth = [&](const Eigen::VectorXd& u) { return (u - u.dot(k) * k).norm(); };
  c.t.push_back(0.0);
  c.norm.push_back(orth(psi));
  for (std::size_t s = 1; s <= steps; ++s) {
    psi = lu.solve(psi);
    c.t.push_back(static_cast<double>(s) * dt);
    c.norm.push_back(orth(psi));
  }
  const std::size_t b = c.t.size() / 2;
  double st = 0, sy = 0, stt = 0, sty = 0, cnt = 0;
  for (std::size_t i = b; i < c.t.size(); ++i) {
    if (!(c.norm[i] > 0.0)) continue;
    const double y = std::log(c.norm[i]);
    st += c.t[i];
    sy += y;
    stt += c.t[i] * c.t[i];
    sty += c.t[i] * y;
    cnt += 1;
  }
  if (cnt < 3) {
    c.rate = 0.0;
    c.multi_mode_warning = true;
    return c;
  }
  const double slope = (cnt * sty - st * sy) / (cnt * stt - st * st);
  const double icpt = (sy - slope * st) / cnt;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = b; i < c.t.size(); ++i) {
    if (!(c.norm[i] > 0.0)) continue;
    const double y = std::log(c.norm[i]);
    ss_res += (y - icpt - slope * c.t[i]) * (y - icpt - slope * c.t[i]);
    ss_tot += (y - sy / cnt) * (y - sy / cnt);
  }
  c.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  // one implicit Euler step damps a mode λ by 1/(1 + λ dt)
  c.rate = (std::exp(-slope * dt) - 1.0) / dt;
  c.multi_mode_warning = c.r_squared < 0.9;
  return c;
}

namespace {

bool interior(const PhaseGrid& g, std::size_t row) {
  const int i = static_cast<int>(row / static_cast<std::size_t>(g.nv));
  const int j = static_cast<int>(row % static_cast<std::size_t>(g.nv));
  return i >= 2 && i < g.nx - 2 && j >= 2 && j < g.nv - 2;
}

double interior_row_norm(const SparseMatrix& M, const PhaseGrid& g) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < M.outerSize(); ++r) {
    if (!interior(g, static_cast<std::size_t>(r))) continue;
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(M, r); it; ++it) sum += std::abs(it.value());
    worst = std::max(worst, sum);
  }
  return worst;
}

}  // namespace

CommutatorReport commutator_residuals(const Potential& p, const Hyperparams& hp, const PhaseGrid& g) {
  require_1d(p, "commutator_residuals");
  const int nx = g.nx, nv = g.nv;
  const Eigen::Index N = static_cast<Eigen::Index>(g.size());
  const double hx = g.hx(), hv = g.hv();
  const double c = std::sqrt(std::sqrt(hp.s / 4.0));
  using T = Eigen::Triplet<double>;
  std::vector<T> dplus, dminus, sv, dx, fpd, fdd;
  for (int i = 0; i < nx; ++i) {
    const double x = g.x(i);
    for (int j = 0; j < nv; ++j) {
      const Eigen::Index r = static_cast<Eigen::Index>(g.index(i, j));
      dplus.emplace_back(r, r, -1.0 / hv);
      if (j + 1 < nv) dplus.emplace_back(r, r + 1, 1.0 / hv);
      dminus.emplace_back(r, r, 1.0 / hv);
      if (j > 0) {
        dminus.emplace_back(r, r - 1, -1.0 / hv);
        sv.emplace_back(r, r - 1, g.v(j - 1));
      }
      if (i + 1 < nx) dx.emplace_back(r, r + nv, 0.5 / hx);
      if (i > 0) dx.emplace_back(r, r - nv, -0.5 / hx);
      fpd.emplace_back(r, r, p.slope1(x));
      fdd.emplace_back(r, r, p.curvature1(x));
    }
  }
  auto build = [N](const std::vector<T>& t) {
    SparseMatrix M(N, N);
    M.setFromTriplets(t.begin(), t.end());
    return M;
  };
  const SparseMatrix Dp = build(dplus), Dm = build(dminus), SV = build(sv), Dx = build(dx), Fp = build(fpd),
                     Fpp = build(fdd);
  SparseMatrix I(N, N);
  I.setIdentity();
  const SparseMatrix A = c * Dp;
  const SparseMatrix As = c * (SparseMatrix(-Dm) + (2.0 / hp.beta) * SV);
  const SparseMatrix C = c * Dx;
  const SparseMatrix Tr = SparseMatrix(SV * Dx) - SparseMatrix(Fp * Dp);
  auto comm = [](const SparseMatrix& X, const SparseMatrix& Y) { return SparseMatrix(SparseMatrix(X * Y) - SparseMatrix(Y * X)); };

  CommutatorReport rep;
  const double target = 2.0 * std::sqrt(hp.mu);
  rep.aa_star = interior_row_norm(SparseMatrix(comm(A, As) - target * I), g);
  rep.ac = interior_row_norm(comm(A, C), g);
  rep.at_minus_c = interior_row_norm(SparseMatrix(comm(A, Tr) - C), g);
  const SparseMatrix R = SparseMatrix(comm(C, Tr) + SparseMatrix(Fpp * A));
  rep.ct_plus_hess = interior_row_norm(R, g);

  // smooth probe localized inside the box
  Eigen::VectorXd u(N);
  const double xc = 0.5 * (g.x_range.lo + g.x_range.hi), vc = 0.5 * (g.v_range.lo + g.v_range.hi);
  const double wx = g.x_range.width() / 8.0, wv = g.v_range.width() / 8.0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nv; ++j) {
      const double a = (g.x(i) - xc) / wx, b = (g.v(j) - vc) / wv;
      u[static_cast<Eigen::Index>(g.index(i, j))] = std::exp(-0.5 * (a * a + b * b));
    }
  }
  const Eigen::VectorXd Ru = R * u;
  double worst = 0.0;
  for (Eigen::Index r = 0; r < N; ++r) {
    if (interior(g, static_cast<std::size_t>(r))) worst = std::max(worst, std::abs(Ru[r]));
  }
  rep.ct_plus_hess_smooth = worst;
  return rep;
}

void write_coo(const SparseMatrix& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path);
  out.precision(17);
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  }
}

}  // namespace mlab
