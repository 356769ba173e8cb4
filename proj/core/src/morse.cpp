#include "mlab/morse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mlab/errors.hpp"

namespace mlab {

namespace {

std::string describe(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os.precision(10);
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

CriticalPoint classify(const Potential& p, const Eigen::VectorXd& x, double degeneracy_tol) {
  CriticalPoint cp;
  cp.location = x;
  cp.value = p.value(x);
  cp.hessian = p.hessian(x);
  cp.grad_norm = p.gradient(x).norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cp.hessian);
  const Eigen::Index d = x.size();
  cp.hess_eigs.resize(d);
  cp.hess_vecs.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    cp.hess_eigs[i] = es.eigenvalues()[d - 1 - i];
    cp.hess_vecs.col(i) = es.eigenvectors().col(d - 1 - i);
  }
  if (cp.hess_eigs.cwiseAbs().minCoeff() <= degeneracy_tol) {
    throw NonMorseError("degenerate Hessian at critical point " + describe(x));
  }
  cp.index = static_cast<int>((cp.hess_eigs.array() < 0.0).count());
  return cp;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Uniform node lattice over the potential's box.
struct Raster {
  std::size_t d = 0;
  std::size_t n = 0;  // nodes per axis
  std::vector<double> lo, step;
  std::vector<double> f;

  std::size_t total() const { return f.size(); }

  Eigen::VectorXd node(std::size_t k) const {
    Eigen::VectorXd x(d);
    for (std::size_t a = 0; a < d; ++a) {
      x[a] = lo[a] + step[a] * static_cast<double>(k % n);
      k /= n;
    }
    return x;
  }

  bool nearest(const Eigen::VectorXd& x, std::size_t& out) const {
    std::size_t k = 0, stride = 1;
    for (std::size_t a = 0; a < d; ++a) {
      const double t = std::round((x[a] - lo[a]) / step[a]);
      if (t < 0 || t > static_cast<double>(n - 1)) return false;
      k += static_cast<std::size_t>(t) * stride;
      stride *= n;
    }
    out = k;
    return true;
  }
};

Raster rasterize(const Potential& p, int resolution) {
  Raster r;
  r.d = p.dim();
  r.n = static_cast<std::size_t>(resolution);
  std::size_t total = 1;
  for (std::size_t a = 0; a < r.d; ++a) {
    r.lo.push_back(p.box().lower[a]);
    r.step.push_back((p.box().upper[a] - p.box().lower[a]) / static_cast<double>(r.n - 1));
    total *= r.n;
  }
  r.f.resize(total);
  for (std::size_t k = 0; k < total; ++k) r.f[k] = p.value(r.node(k));
  return r;
}

// Component labels of {f < level}; nodes outside the set get SIZE_MAX.
std::vector<std::size_t> components(const Raster& r, double level) {
  const std::size_t total = r.total();
  UnionFind uf(total);
  for (std::size_t k = 0; k < total; ++k) {
    if (!(r.f[k] < level)) continue;
    std::size_t stride = 1, rem = k;
    for (std::size_t a = 0; a < r.d; ++a) {
      const std::size_t i = rem % r.n;
      rem /= r.n;
      if (i + 1 < r.n && r.f[k + stride] < level) uf.unite(k, k + stride);
      stride *= r.n;
    }
  }
  std::vector<std::size_t> label(total, SIZE_MAX);
  for (std::size_t k = 0; k < total; ++k) {
    if (r.f[k] < level) label[k] = uf.find(k);
  }
  return label;
}

// Follows normalized steepest descent from x until it sits on a node of the
// sublevel set; returns false if it leaves the box first.
bool descend_to_component(const Potential& p, const Raster& r, const std::vector<std::size_t>& label,
                          double level, Eigen::VectorXd x, std::size_t& comp) {
  const double h = 0.5 * *std::min_element(r.step.begin(), r.step.end());
  const std::size_t max_iter = 8 * r.n * r.d + 64;
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::size_t k;
    if (!r.nearest(x, k)) return false;
    if (label[k] != SIZE_MAX && p.value(x) < level) {
      comp = label[k];
      return true;
    }
    const Eigen::VectorXd g = p.gradient(x);
    const double gn = g.norm();
    if (!(gn > 0.0) || !std::isfinite(gn)) return false;
    x -= h * g / gn;
  }
  return false;
}

}  // namespace

std::vector<CriticalPoint> find_critical_points(const Potential& p, int seeds_per_axis, double newton_tol) {
  CriticalSearch opt;
  opt.seeds_per_axis = seeds_per_axis;
  opt.newton_tol = newton_tol;
  return find_critical_points(p, opt);
}

std::vector<CriticalPoint> find_critical_points(const Potential& p, const CriticalSearch& opt) {
  if (opt.seeds_per_axis < 4) throw DomainError("find_critical_points needs seeds_per_axis >= 4");
  if (!(opt.newton_tol > 0.0)) throw DomainError("find_critical_points needs newton_tol > 0");
  const std::size_t d = p.dim();
  const std::size_t n = static_cast<std::size_t>(opt.seeds_per_axis);
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) total *= n;
  const double diam = p.box().diameter();
  const double merge_radius = 1e-6 * diam;

  std::vector<Eigen::VectorXd> roots;
  Eigen::VectorXd x(d);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    for (std::size_t a = 0; a < d; ++a) {
      const double t = (static_cast<double>(rem % n) + 0.5) / static_cast<double>(n);
      rem /= n;
      x[a] = p.box().lower[a] + t * (p.box().upper[a] - p.box().lower[a]);
    }
    bool converged = false;
    for (int it = 0; it < opt.max_newton_steps; ++it) {
      const Eigen::VectorXd g = p.gradient(x);
      if (!g.allFinite()) break;
      if (g.norm() <= opt.newton_tol) {
        converged = true;
        break;
      }
      const Eigen::MatrixXd H = p.hessian(x);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
      if (!lu.isInvertible()) break;
      Eigen::VectorXd step = lu.solve(g);
      const double len = step.norm();
      if (!std::isfinite(len)) break;
      if (len > 0.5 * diam) step *= 0.5 * diam / len;
      x -= step;
    }
    if (!converged) continue;
    // polish: quadratic convergence stops at once, a degenerate root keeps creeping
    for (int it = 0; it < opt.max_newton_steps; ++it) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(p.hessian(x));
      if (!lu.isInvertible()) break;
      const Eigen::VectorXd step = lu.solve(p.gradient(x));
      if (!step.allFinite() || step.norm() > 1e-3 * diam) break;
      x -= step;
      if (step.norm() <= 1e-15 * diam) break;
    }
    if (!p.box().contains(std::span<const double>(x.data(), d))) continue;
    const bool seen = std::any_of(roots.begin(), roots.end(),
                                  [&](const Eigen::VectorXd& r) { return (r - x).norm() <= merge_radius; });
    if (!seen) roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end(), lex_less);
  std::vector<CriticalPoint> out;
  out.reserve(roots.size());
  for (const auto& r : roots) out.push_back(classify(p, r, opt.degeneracy_tol));
  return out;
}

SaddleScan separating_saddles(const Potential& p, const std::vector<CriticalPoint>& criticals,
                              int grid_resolution) {
  if (grid_resolution < 64) throw DomainError("separating_saddles needs grid_resolution >= 64");
  SaddleScan scan;
  for (const auto& c : criticals) {
    if (c.index == 0) scan.minima.push_back(c);
  }
  std::vector<const CriticalPoint*> saddles;
  for (const auto& c : criticals) {
    if (c.index == 1) saddles.push_back(&c);
  }
  if (saddles.empty()) return scan;

  const Raster r = rasterize(p, grid_resolution);
  const auto [fmin_it, fmax_it] = std::minmax_element(r.f.begin(), r.f.end());
  const double delta = 1e-3 * (*fmax_it - *fmin_it);
  const double hmax = *std::max_element(r.step.begin(), r.step.end());

  for (const CriticalPoint* sp : saddles) {
    SaddleAnnotation ann;
    ann.saddle = *sp;
    const double level = sp->value - delta;
    const auto label = components(r, level);

    const Eigen::Index d = sp->location.size();
    const double eta = sp->hess_eigs[d - 1];
    const Eigen::VectorXd dir = sp->hess_vecs.col(d - 1);
    const double eps = std::max(2.0 * std::sqrt(2.0 * delta / std::abs(eta)), 2.0 * hmax);

    std::size_t ca = 0, cb = 0;
    const bool okA = descend_to_component(p, r, label, level, sp->location + eps * dir, ca);
    const bool okB = descend_to_component(p, r, label, level, sp->location - eps * dir, cb);
    if (!okA || !okB) {
      ann.inconclusive = true;
      scan.saddles.push_back(std::move(ann));
      continue;
    }
    ann.separating = ca != cb;
    for (std::size_t m = 0; m < scan.minima.size(); ++m) {
      std::size_t k;
      if (!r.nearest(scan.minima[m].location, k) || label[k] == SIZE_MAX) continue;
      if (label[k] == ca) ann.side_a.push_back(m);
      if (label[k] == cb && cb != ca) ann.side_b.push_back(m);
    }
    scan.saddles.push_back(std::move(ann));
  }
  return scan;
}

double MorsePairing::barrier_max() const {
  if (pairs.size() < 2) throw NoMetastabilityError("single well: no finite saddle/minimum pair");
  return barriers[1];
}

MorsePairing label_pairs(const SaddleScan& scan) {
  constexpr double tie = 1e-9;
  MorsePairing out;
  out.minima = scan.minima;
  std::vector<const SaddleAnnotation*> sep;
  std::size_t inconclusive = 0;
  for (const auto& s : scan.saddles) {
    if (s.inconclusive) ++inconclusive;
    if (s.separating && !s.inconclusive) {
      sep.push_back(&s);
      out.separating_saddles.push_back(s.saddle);
    }
  }
  if (out.minima.empty()) throw TopologyError("no local minimum inside the box; enlarge the box");
  if (sep.size() + 1 != out.minima.size()) {
    std::ostringstream os;
    os << "count identity broken: " << sep.size() << " separating saddles for " << out.minima.size()
       << " minima";
    if (inconclusive) os << " (" << inconclusive << " inconclusive saddle probes)";
    os << "; try a larger box or a finer grid";
    throw TopologyError(os.str());
  }

  // Global minimum, with the tie check across the whole space.
  std::vector<std::size_t> order(out.minima.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return out.minima[a].value < out.minima[b].value; });
  if (order.size() > 1 && out.minima[order[1]].value - out.minima[order[0]].value <= tie) {
    throw GenericAssumptionError("global minimum is not unique: " + describe(out.minima[order[0]].location) +
                                 " ties with " + describe(out.minima[order[1]].location));
  }

  std::sort(sep.begin(), sep.end(), [](const SaddleAnnotation* a, const SaddleAnnotation* b) {
    if (a->saddle.value != b->saddle.value) return a->saddle.value > b->saddle.value;
    return lex_less(a->saddle.location, b->saddle.location);
  });
  for (std::size_t i = 1; i < sep.size(); ++i) {
    if (std::abs(sep[i - 1]->saddle.value - sep[i]->saddle.value) <= tie) {
      out.warnings.push_back("saddle values tie at " + describe(sep[i]->saddle.location) +
                             "; ordered lexicographically");
    }
  }

  auto lowest = [&](const std::vector<std::size_t>& side) -> std::size_t {
    if (side.empty()) throw TopologyError("a saddle component holds no minimum; refine the grid");
    std::vector<std::size_t> s = side;
    std::sort(s.begin(), s.end(),
              [&](std::size_t a, std::size_t b) { return out.minima[a].value < out.minima[b].value; });
    if (s.size() > 1 && out.minima[s[1]].value - out.minima[s[0]].value <= tie) {
      throw GenericAssumptionError("two minima tie inside one sublevel component near " +
                                   describe(out.minima[s[0]].location));
    }
    return s[0];
  };

  std::vector<char> paired(out.minima.size(), 0);
  paired[order[0]] = 1;
  MorsePair root;
  root.minimum = out.minima[order[0]];
  out.pairs.push_back(root);

  std::vector<MorsePair> finite;
  for (const SaddleAnnotation* s : sep) {
    const std::size_t a = lowest(s->side_a);
    const std::size_t b = lowest(s->side_b);
    if (std::abs(out.minima[a].value - out.minima[b].value) <= tie) {
      throw GenericAssumptionError("minima " + describe(out.minima[a].location) + " and " +
                                   describe(out.minima[b].location) + " tie across saddle " +
                                   describe(s->saddle.location));
    }
    const std::size_t loser = out.minima[a].value > out.minima[b].value ? a : b;
    if (paired[loser]) throw TopologyError("minimum paired twice; refine the grid");
    paired[loser] = 1;
    MorsePair mp;
    mp.has_saddle = true;
    mp.saddle = s->saddle;
    mp.minimum = out.minima[loser];
    mp.barrier = s->saddle.value - mp.minimum.value;
    finite.push_back(std::move(mp));
  }
  std::stable_sort(finite.begin(), finite.end(),
                   [](const MorsePair& x, const MorsePair& y) { return x.barrier > y.barrier; });
  for (auto& mp : finite) out.pairs.push_back(std::move(mp));
  for (const auto& mp : out.pairs) out.barriers.push_back(mp.barrier);
  return out;
}

MorsePairing analyze(const Potential& p, const CriticalSearch& opt, int grid_resolution) {
  const auto crit = find_critical_points(p, opt);
  return label_pairs(separating_saddles(p, crit, grid_resolution));
}

}  // namespace mlab
