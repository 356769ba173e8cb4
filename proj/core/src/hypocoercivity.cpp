#include "mlab/hypocoercivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlab/errors.hpp"

namespace mlab {

KappaConstants kappa_constants(double C, int d, double beta, double s) {
  if (C < 0.0 || d < 1 || !(beta > 0.0) || !(s > 0.0)) throw DomainError("kappa constants need C >= 0, d >= 1, beta > 0, s > 0");
  KappaConstants k;
  const double dd = static_cast<double>(d);
  k.kappa1 = std::max(2.0 * (dd * C * beta + dd * dd * C * C * beta * beta), 2.0 * beta * beta);
  k.kappa2 = 2.0 * C * C * (1.0 + k.kappa1);
  k.kappa3 = std::max(2.0 * k.kappa2 / std::sqrt(s), k.kappa2);
  return k;
}

PoincareEstimate poincare_estimate(const Potential& p, double beta, const PhaseGrid& grid) {
  if (p.dim() != 1) throw DomainError("poincare_estimate needs a 1D position space");
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  const double vmax = std::max(std::abs(grid.v_range.lo), std::abs(grid.v_range.hi));
  const Potential H = phase_space_lift(p, vmax);
  PositionGrid pg;
  pg.axes = {grid.x_range, grid.v_range};
  pg.n = {grid.nx, grid.nv};
  const OperatorMatrix W = assemble_overdamped_witten(H, beta, pg);
  const SpectralResult r = smallest_eigenvalues(W, 3);
  PoincareEstimate out;
  for (const auto& z : r.eigenvalues) out.eigenvalues.push_back(z.real());
  out.witten_gap = spectral_gap(r);
  out.chi = 2.0 * out.witten_gap / beta;
  const double next = out.eigenvalues.back();
  if (out.witten_gap < 1e-3 * next) {
    out.cluster_warning = true;
    out.warning = "eigenvalue cluster near zero beyond the kernel: sublevel sets of the Hamiltonian look disconnected";
  }
  return out;
}

NormConstants norm_equivalence(double a, double b, double c) {
  if (!(a * c - b * b > 0.0) || a <= 0.0) throw DomainError("Gram matrix [[a, b], [b, c]] is not positive definite");
  const double tr = a + c, det = a * c - b * b;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  NormConstants n;
  n.C1 = std::min(1.0, 0.5 * (tr - disc));
  n.C2 = std::max(1.0, 0.5 * (tr + disc));
  return n;
}

double certificate_M(double a, double b, double c) {
  double m = 1.0;
  if (a > 0) m = std::min(m, 1.0 / (4.0 * a));
  if (b > 0) {
    m = std::min({m, c / (32.0 * b * b), a * c / (64.0 * b * b)});
  }
  if (a > 0) m = std::min(m, b / (144.0 * a * a));
  if (c > 0) m = std::min(m, b / (2.0 * c));
  return std::sqrt(std::max(0.0, m));
}

bool admissible(double a, double b, double c) { return 1.0 >= a && a >= b && b >= 2.0 * c && c > 0.0 && b * b <= a * c; }

PositivityReport matrix_positivity_check(double a, double b, double c, double M, double kappa3, double mu) {
  PositivityReport r;
  const double sk = std::sqrt(kappa3), sm = std::sqrt(mu);
  const double k14 = -0.5 * (a + c * sk + 4.0 * b * sm);
  r.K1 << 1.0 + 2.0 * a * sm - 2.0 * b * sk, 0.0, -b * sk, k14,  //
      0.0, a, -2.0 * b, 0.0,                                      //
      -b * sk, -2.0 * b, c, -0.5 * c * sk,                        //
      k14, 0.0, -0.5 * c * sk, 2.0 * b;
  r.K2 << 1.0 - 2.0 * M * a, 0.0, -M * b, -3.0 * M * a,  //
      0.0, a, -2.0 * M * b, 0.0,                         //
      -M * b, -2.0 * M * b, c, -0.5 * M * c,             //
      -3.0 * M * a, 0.0, -0.5 * M * c, 2.0 * b;
  r.L = r.K2;
  r.L(0, 0) = 0.5;

  const std::array<std::pair<int, int>, 4> pairs{{{0, 2}, {0, 3}, {1, 2}, {2, 3}}};
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const double lii = r.L(i, i), ljj = r.L(j, j);
    const double geo = std::sqrt(std::max(0.0, lii * ljj)) / 4.0;
    r.margins[2 * k] = geo - std::abs(r.L(i, j));
    r.margins[2 * k + 1] = (lii + ljj) / 8.0 - geo;
    const std::string tag = "l" + std::to_string(i + 1) + std::to_string(j + 1);
    r.labels[2 * k] = tag + " entry";
    r.labels[2 * k + 1] = tag + " mean";
  }
  r.min_margin = *std::min_element(r.margins.begin(), r.margins.end());
  r.entries_ok = r.min_margin >= 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> e1(r.K1), e2(r.K2), el(r.L);
  r.K1_min_eigenvalue = e1.eigenvalues()[0];
  r.K2_min_eigenvalue = e2.eigenvalues()[0];
  r.L_min_eigenvalue = el.eigenvalues()[0];
  r.K1_psd = r.K1_min_eigenvalue >= 0.0;
  r.K2_psd = r.K2_min_eigenvalue >= 0.0;
  return r;
}

double lambda_lower_bound(const Certificate& cert) {
  if (cert.a <= 0.0 && cert.b <= 0.0 && cert.c <= 0.0) return 0.0;
  const double base = 0.125 * std::min(0.5, 2.0 * cert.b);
  return cert.C1 * std::min(base, base * cert.chi);
}

Certificate certificate_search(const KappaConstants& kappa, double mu, double chi, const SearchOptions& opt) {
  if (!(mu > 0.0) || !(chi > 0.0) || kappa.kappa3 < 0.0) throw DomainError("certificate search needs positive inputs");
  if (opt.points_per_axis < 2) throw DomainError("lattice needs at least 2 points per axis");
  auto lattice = [&](double lo, double hi) {
    std::vector<double> v(static_cast<std::size_t>(opt.points_per_axis));
    for (int i = 0; i < opt.points_per_axis; ++i) {
      v[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (opt.points_per_axis - 1));
    }
    return v;
  };
  const auto ab = lattice(opt.ab_min, opt.ab_max);
  const auto cs = lattice(opt.c_min, opt.c_max);

  Certificate best;
  best.kappa1 = kappa.kappa1;
  best.kappa2 = kappa.kappa2;
  best.kappa3 = kappa.kappa3;
  best.mu = mu;
  best.chi = chi;
  best.M_required = std::max({1.0, std::sqrt(mu), std::sqrt(kappa.kappa3)});
  best.best_margin = -std::numeric_limits<double>::infinity();
  bool found = false;
  Certificate fallback = best;
  for (double a : ab) {
    for (double b : ab) {
      for (double c : cs) {
        if (!admissible(a, b, c) || a * c - b * b <= 0.0) continue;
        ++best.candidates;
        Certificate cand = best;
        cand.a = a;
        cand.b = b;
        cand.c = c;
        cand.M = certificate_M(a, b, c);
        cand.positivity = matrix_positivity_check(a, b, c, cand.M, kappa.kappa3, mu);
        cand.best_margin = cand.positivity.min_margin;
        const bool ok = cand.positivity.min_margin >= -opt.margin_tol;
        if (!ok) {
          if (cand.best_margin > fallback.best_margin) fallback = cand;
          continue;
        }
        const NormConstants nc = norm_equivalence(a, b, c);
        cand.C1 = nc.C1;
        cand.C2 = nc.C2;
        cand.lambda_lower = lambda_lower_bound(cand);
        cand.feasible = true;
        // strict comparison keeps the lexicographically first maximizer
        if (!found || cand.lambda_lower > best.lambda_lower) {
          const std::size_t n = best.candidates;
          best = cand;
          best.candidates = n;
          found = true;
        }
      }
    }
  }
  if (!found) {
    const std::size_t n = best.candidates;
    best = fallback;
    best.candidates = n;
    best.feasible = false;
    best.lambda_lower = 0.0;
  }
  best.M_dominates = best.M >= best.M_required;
  return best;
}

NormPair hypocoercive_norms(double a, double b, double c, const Eigen::VectorXd& g, const Eigen::VectorXd& Ag,
                            const Eigen::VectorXd& Cg) {
  NormPair n;
  const double gg = g.squaredNorm(), aa = Ag.squaredNorm(), cc = Cg.squaredNorm();
  n.inner = gg + a * aa + 2.0 * b * Ag.dot(Cg) + c * cc;
  n.h1 = gg + aa + cc;
  return n;
}

}  // namespace mlab
