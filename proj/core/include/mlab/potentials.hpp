// Copyright 2026 The momentum-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mlab {

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  bool contains(std::span<const double> x) const;
  double diameter() const;
  std::vector<double> center() const;
};

/// Smooth objective with closed-form first and second derivatives.
///
/// Instances are immutable after construction and cheap to copy (the
/// evaluators are shared), so they may be read from any number of threads.
class Potential {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradFn = std::function<void(std::span<const double>, std::span<double>)>;
  using HessFn = std::function<void(std::span<const double>, Eigen::Ref<Eigen::MatrixXd>)>;

  Potential(std::string name, Box box, ValueFn value, GradFn grad, HessFn hess);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return box_.dim(); }
  const Box& box() const { return box_; }

  // Unchecked evaluators for inner loops.
  double value(std::span<const double> x) const { return value_(x); }
  void gradient(std::span<const double> x, std::span<double> g) const { grad_(x, g); }
  void hessian(std::span<const double> x, Eigen::Ref<Eigen::MatrixXd> h) const { hess_(x, h); }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;
  double value(const Eigen::VectorXd& x) const;

  // 1D shorthands.
  double value1(double x) const { return value_(std::span<const double>(&x, 1)); }
  double slope1(double x) const;
  double curvature1(double x) const;

  /// Same objective on a different box.
  Potential with_box(Box box) const;

 private:
  std::string name_;
  Box box_;
  ValueFn value_;
  GradFn grad_;
  HessFn hess_;
};

enum class Order { value, gradient, hessian };

using Evaluation = std::variant<double, Eigen::VectorXd, Eigen::MatrixXd>;

/// Domain-checked evaluation. Throws DomainError outside the box and
/// UsageError for an order outside the enum.
Evaluation evaluate(const Potential& p, const Eigen::VectorXd& x, Order order);

Order parse_order(const std::string& name);

// Catalog ------------------------------------------------------------------

Potential quadratic(double theta, double half_width = 4.0);
/// Quadratic in d dimensions with per-axis curvatures.
Potential quadratic_nd(const std::vector<double>& curvatures, double half_width = 4.0);
Potential tilted_double_well(double tau = 0.1, double lower = -3.0, double upper = 3.0);
/// Sextic with three wells: f'(x) = c·x(x²−1)(x²−4) + tilt.
Potential triple_well(double scale = 0.125, double tilt = 0.05);
Potential separable_double_well_2d(double tilt = 0.0, double half_width = 3.0);
Potential zero_potential(std::size_t dim = 1, double half_width = 4.0);

/// f + c.
Potential shifted(const Potential& p, double offset);
/// x ↦ f(x − shift), with the box moved along.
Potential translated(const Potential& p, const std::vector<double>& shift);

/// H(x, v) = f(x) + |v|²/2 on box × [−v_max, v_max]^d.
Potential phase_space_lift(const Potential& p, double v_max);

/// Builds a catalog entry from a name and a parameter map (missing keys take
/// catalog defaults, unknown keys are rejected).
Potential make_potential(const std::string& name, const std::map<std::string, double>& params);
std::vector<std::string> catalog_names();

// Diagnostics --------------------------------------------------------------

struct VillaniDiagnostics {
  std::vector<Eigen::VectorXd> grid;
  std::vector<double> condition1_values;
  double condition2_ratio_max = 0.0;
  double estimated_C = 0.0;
  // Indices into `grid` of the outermost shell.
  std::vector<std::size_t> shell;
};

VillaniDiagnostics villani_diagnostics(const Potential& p, double s, int resolution);

/// True when every shell value of condition (I) exceeds the interior median.
bool villani_growth_surrogate(const VillaniDiagnostics& d);

struct SelfCheckReport {
  double max_gradient_error = 0.0;
  double max_hessian_error = 0.0;
  double max_error() const { return std::max(max_gradient_error, max_hessian_error); }
  Eigen::VectorXd worst_point;
};

SelfCheckReport derivative_selfcheck(const Potential& p, int samples, std::uint64_t seed);

}  // namespace mlab
