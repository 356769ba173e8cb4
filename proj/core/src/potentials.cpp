// Copyright 2026 The momentum-lab Authors
// SPDX-License-Identifier: Apache-2.0
#include "mlab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "mlab/errors.hpp"

namespace mlab {

bool Box::contains(std::span<const double> x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  }
  return true;
}

double Box::diameter() const {
  double d2 = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) d2 += (upper[i] - lower[i]) * (upper[i] - lower[i]);
  return std::sqrt(d2);
}

std::vector<double> Box::center() const {
  std::vector<double> c(lower.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (lower[i] + upper[i]);
  return c;
}

Potential::Potential(std::string name, Box box, ValueFn value, GradFn grad, HessFn hess)
    : name_(std::move(name)),
      box_(std::move(box)),
      value_(std::move(value)),
      grad_(std::move(grad)),
      hess_(std::move(hess)) {
  if (box_.lower.empty() || box_.lower.size() != box_.upper.size()) {
    throw DomainError("potential box must have matching non-empty bounds");
  }
  for (std::size_t i = 0; i < box_.dim(); ++i) {
    if (!(box_.lower[i] < box_.upper[i])) throw DomainError("potential box has an empty axis");
  }
}

double Potential::value(const Eigen::VectorXd& x) const {
  return value_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

Eigen::VectorXd Potential::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(x.size());
  grad_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
        std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
  return g;
}

Eigen::MatrixXd Potential::hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd h(x.size(), x.size());
  hess_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), h);
  return h;
}

double Potential::slope1(double x) const {
  double g = 0.0;
  grad_(std::span<const double>(&x, 1), std::span<double>(&g, 1));
  return g;
}

double Potential::curvature1(double x) const {
  Eigen::MatrixXd h(1, 1);
  hess_(std::span<const double>(&x, 1), h);
  return h(0, 0);
}

Potential Potential::with_box(Box box) const {
  return Potential(name_, std::move(box), value_, grad_, hess_);
}

Evaluation evaluate(const Potential& p, const Eigen::VectorXd& x, Order order) {
  if (static_cast<std::size_t>(x.size()) != p.dim()) {
    throw DomainError("point dimension does not match potential " + p.name());
  }
  if (!p.box().contains(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())))) {
    std::ostringstream os;
    os << "point outside the domain box of " << p.name();
    throw DomainError(os.str());
  }
  switch (order) {
    case Order::value:
      return p.value(x);
    case Order::gradient:
      return p.gradient(x);
    case Order::hessian:
      return p.hessian(x);
  }
  throw UsageError("unsupported derivative order");
}

Order parse_order(const std::string& name) {
  if (name == "value") return Order::value;
  if (name == "gradient") return Order::gradient;
  if (name == "hessian") return Order::hessian;
  throw UsageError("unsupported derivative order '" + name + "'");
}

namespace {

Box cube(std::size_t d, double lo, double hi) {
  return Box{std::vector<double>(d, lo), std::vector<double>(d, hi)};
}

// 1D potentials only need three scalar lambdas.
template <class F, class G, class H>
Potential scalar_potential(std::string name, double lo, double hi, F f, G g, H h) {
  return Potential(
      std::move(name), cube(1, lo, hi), [f](std::span<const double> x) { return f(x[0]); },
      [g](std::span<const double> x, std::span<double> out) { out[0] = g(x[0]); },
      [h](std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> out) { out(0, 0) = h(x[0]); });
}

}  // namespace

Potential quadratic(double theta, double half_width) {
  if (!(theta > 0.0)) throw DomainError("quadratic curvature must be positive");
  return scalar_potential(
      "quadratic", -half_width, half_width, [theta](double x) { return 0.5 * theta * x * x; },
      [theta](double x) { return theta * x; }, [theta](double) { return theta; });
}

Potential quadratic_nd(const std::vector<double>& curvatures, double half_width) {
  if (curvatures.empty()) throw DomainError("quadratic needs at least one axis");
  for (double c : curvatures) {
    if (!(c > 0.0)) throw DomainError("quadratic curvature must be positive");
  }
  auto k = std::make_shared<const std::vector<double>>(curvatures);
  return Potential(
      "quadratic", cube(k->size(), -half_width, half_width),
      [k](std::span<const double> x) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) v += 0.5 * (*k)[i] * x[i] * x[i];
        return v;
      },
      [k](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = (*k)[i] * x[i];
      },
      [k](std::span<const double>, Eigen::Ref<Eigen::MatrixXd> h) {
        h.setZero();
        for (std::size_t i = 0; i < k->size(); ++i) h(i, i) = (*k)[i];
      });
}

Potential tilted_double_well(double tau, double lower, double upper) {
  return scalar_potential(
      "tilted_double_well", lower, upper,
      [tau](double x) {
        const double q = x * x - 1.0;
        return 0.25 * q * q + tau * x;
      },
      [tau](double x) { return x * x * x - x + tau; }, [](double x) { return 3.0 * x * x - 1.0; });
}

Potential triple_well(double scale, double tilt) {
  if (!(scale > 0.0)) throw DomainError("triple-well scale must be positive");
  return scalar_potential(
      "triple_well", -3.0, 3.0,
      [scale, tilt](double x) {
        const double x2 = x * x;
        return scale * (x2 * x2 * x2 / 6.0 - 1.25 * x2 * x2 + 2.0 * x2) + tilt * x;
      },
      [scale, tilt](double x) {
        const double x2 = x * x;
        return scale * x * (x2 - 1.0) * (x2 - 4.0) + tilt;
      },
      [scale](double x) {
        const double x2 = x * x;
        return scale * (5.0 * x2 * x2 - 15.0 * x2 + 4.0);
      });
}

Potential separable_double_well_2d(double tilt, double half_width) {
  return Potential(
      "separable_double_well_2d", cube(2, -half_width, half_width),
      [tilt](std::span<const double> p) {
        const double q = p[0] * p[0] - 1.0;
        return 0.25 * q * q + tilt * p[0] + 0.5 * p[1] * p[1];
      },
      [tilt](std::span<const double> p, std::span<double> g) {
        g[0] = p[0] * p[0] * p[0] - p[0] + tilt;
        g[1] = p[1];
      },
      [](std::span<const double> p, Eigen::Ref<Eigen::MatrixXd> h) {
        h(0, 0) = 3.0 * p[0] * p[0] - 1.0;
        h(0, 1) = h(1, 0) = 0.0;
        h(1, 1) = 1.0;
      });
}

Potential zero_potential(std::size_t dim, double half_width) {
  return Potential(
      "zero", cube(dim, -half_width, half_width), [](std::span<const double>) { return 0.0; },
      [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); },
      [](std::span<const double>, Eigen::Ref<Eigen::MatrixXd> h) { h.setZero(); });
}

Potential shifted(const Potential& p, double offset) {
  auto base = std::make_shared<const Potential>(p);
  return Potential(
      p.name(), p.box(), [base, offset](std::span<const double> x) { return base->value(x) + offset; },
      [base](std::span<const double> x, std::span<double> g) { base->gradient(x, g); },
      [base](std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> h) { base->hessian(x, h); });
}

Potential translated(const Potential& p, const std::vector<double>& shift) {
  if (shift.size() != p.dim()) throw DomainError("translation dimension mismatch");
  auto base = std::make_shared<const Potential>(p);
  auto sh = std::make_shared<const std::vector<double>>(shift);
  Box box = p.box();
  for (std::size_t i = 0; i < shift.size(); ++i) {
    box.lower[i] += shift[i];
    box.upper[i] += shift[i];
  }
  auto pull = [sh](std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= (*sh)[i];
    return y;
  };
  return Potential(
      p.name(), box, [base, pull](std::span<const double> x) { return base->value(pull(x)); },
      [base, pull](std::span<const double> x, std::span<double> g) { base->gradient(pull(x), g); },
      [base, pull](std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> h) {
        base->hessian(pull(x), h);
      });
}

Potential phase_space_lift(const Potential& p, double v_max) {
  auto base = std::make_shared<const Potential>(p);
  const std::size_t d = p.dim();
  Box box = p.box();
  for (std::size_t i = 0; i < d; ++i) {
    box.lower.push_back(-v_max);
    box.upper.push_back(v_max);
  }
  return Potential(
      p.name() + "_hamiltonian", box,
      [base, d](std::span<const double> z) {
        double kinetic = 0.0;
        for (std::size_t i = d; i < 2 * d; ++i) kinetic += 0.5 * z[i] * z[i];
        return base->value(z.first(d)) + kinetic;
      },
      [base, d](std::span<const double> z, std::span<double> g) {
        base->gradient(z.first(d), g.first(d));
        for (std::size_t i = d; i < 2 * d; ++i) g[i] = z[i];
      },
      [base, d](std::span<const double> z, Eigen::Ref<Eigen::MatrixXd> h) {
        h.setZero();
        Eigen::MatrixXd hx(d, d);
        base->hessian(z.first(d), hx);
        h.topLeftCorner(d, d) = hx;
        for (std::size_t i = d; i < 2 * d; ++i) h(i, i) = 1.0;
      });
}

namespace {

double take(std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = it->second;
  params.erase(it);
  return v;
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"quadratic", "tilted_double_well", "triple_well", "separable_double_well_2d", "zero"};
}

Potential make_potential(const std::string& name, const std::map<std::string, double>& params_in) {
  auto params = params_in;
  auto finish = [&](Potential p) {
    if (!params.empty()) {
      throw ValidationError("unknown parameter '" + params.begin()->first + "' for potential " + name);
    }
    return p;
  };
  if (name == "quadratic") {
    const double theta = take(params, "theta", 0.5);
    const double hw = take(params, "half_width", 4.0);
    return finish(quadratic(theta, hw));
  }
  if (name == "tilted_double_well") {
    const double tau = take(params, "tau", 0.1);
    const double lo = take(params, "lower", -3.0);
    const double hi = take(params, "upper", 3.0);
    return finish(tilted_double_well(tau, lo, hi));
  }
  if (name == "triple_well") {
    const double scale = take(params, "scale", 0.125);
    const double tilt = take(params, "tilt", 0.05);
    return finish(triple_well(scale, tilt));
  }
  if (name == "separable_double_well_2d") {
    const double tilt = take(params, "tilt", 0.0);
    const double hw = take(params, "half_width", 3.0);
    return finish(separable_double_well_2d(tilt, hw));
  }
  if (name == "zero") {
    const double dim = take(params, "dim", 1.0);
    const double hw = take(params, "half_width", 4.0);
    if (dim < 1.0 || dim != std::floor(dim)) throw ValidationError("zero potential dim must be a positive integer");
    return finish(zero_potential(static_cast<std::size_t>(dim), hw));
  }
  throw ValidationError("unknown potential '" + name + "'");
}

VillaniDiagnostics villani_diagnostics(const Potential& p, double s, int resolution) {
  if (!(s > 0.0)) throw DomainError("villani_diagnostics needs s > 0");
  if (resolution < 8) throw DomainError("villani_diagnostics needs resolution >= 8");
  const std::size_t d = p.dim();
  const std::size_t per_axis = static_cast<std::size_t>(resolution) + 1;
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= per_axis;

  VillaniDiagnostics out;
  out.grid.reserve(total);
  out.condition1_values.reserve(total);
  Eigen::MatrixXd h(d, d);
  Eigen::VectorXd x(d), g(d);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    bool on_shell = false;
    for (std::size_t a = 0; a < d; ++a) {
      idx[a] = rem % per_axis;
      rem /= per_axis;
      const double t = static_cast<double>(idx[a]) / static_cast<double>(resolution);
      x[a] = p.box().lower[a] + t * (p.box().upper[a] - p.box().lower[a]);
      if (idx[a] == 0 || idx[a] == per_axis - 1) on_shell = true;
    }
    std::span<const double> xs(x.data(), d);
    p.gradient(xs, std::span<double>(g.data(), d));
    p.hessian(xs, h);
    const double gn = g.norm();
    const double lap = h.trace();
    out.condition1_values.push_back(gn * gn / s - lap);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    const double op_norm = es.eigenvalues().cwiseAbs().maxCoeff();
    out.condition2_ratio_max = std::max(out.condition2_ratio_max, op_norm / (1.0 + gn));
    if (on_shell) out.shell.push_back(out.grid.size());
    out.grid.push_back(x);
  }
  out.estimated_C = out.condition2_ratio_max;
  return out;
}

bool villani_growth_surrogate(const VillaniDiagnostics& d) {
  std::vector<char> is_shell(d.grid.size(), 0);
  for (auto i : d.shell) is_shell[i] = 1;
  std::vector<double> interior;
  for (std::size_t i = 0; i < d.grid.size(); ++i) {
    if (!is_shell[i]) interior.push_back(d.condition1_values[i]);
  }
  if (interior.empty()) return false;
  auto mid = interior.begin() + static_cast<std::ptrdiff_t>(interior.size() / 2);
  std::nth_element(interior.begin(), mid, interior.end());
  const double median = *mid;
  for (auto i : d.shell) {
    if (!(d.condition1_values[i] > median)) return false;
  }
  return true;
}

SelfCheckReport derivative_selfcheck(const Potential& p, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("derivative_selfcheck needs samples >= 1");
  constexpr double h = 1e-5;
  const std::size_t d = p.dim();
  std::mt19937_64 rng(seed);
  SelfCheckReport rep;
  rep.worst_point = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd x(d), xp(d), xm(d);
  for (int n = 0; n < samples; ++n) {
    for (std::size_t a = 0; a < d; ++a) {
      // keep the stencil inside the box
      const double lo = p.box().lower[a] + 2 * h;
      const double hi = p.box().upper[a] - 2 * h;
      x[a] = std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    const Eigen::VectorXd g = p.gradient(x);
    const Eigen::MatrixXd H = p.hessian(x);
    for (std::size_t a = 0; a < d; ++a) {
      xp = x;
      xm = x;
      xp[a] += h;
      xm[a] -= h;
      const double fd = (p.value(xp) - p.value(xm)) / (2 * h);
      const double eg = std::abs(fd - g[a]) / std::max(1.0, std::abs(g[a]));
      if (eg > rep.max_gradient_error) {
        rep.max_gradient_error = eg;
        rep.worst_point = x;
      }
      const Eigen::VectorXd col = (p.gradient(xp) - p.gradient(xm)) / (2 * h);
      for (std::size_t b = 0; b < d; ++b) {
        const double eh = std::abs(col[b] - H(b, a)) / std::max(1.0, std::abs(H(b, a)));
        if (eh > rep.max_hessian_error) {
          rep.max_hessian_error = eh;
          rep.worst_point = x;
        }
      }
    }
  }
  return rep;
}

}  // namespace mlab
