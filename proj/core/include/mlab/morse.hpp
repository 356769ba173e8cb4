#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlab/potentials.hpp"

namespace mlab {

struct CriticalPoint {
  Eigen::VectorXd location;
  double value = 0.0;
  Eigen::VectorXd hess_eigs;  // descending
  Eigen::MatrixXd hess_vecs;  // columns match hess_eigs
  Eigen::MatrixXd hessian;
  int index = 0;
  double grad_norm = 0.0;
};

struct CriticalSearch {
  int seeds_per_axis = 16;
  double newton_tol = 1e-10;
  int max_newton_steps = 100;
  double degeneracy_tol = 1e-8;
};

std::vector<CriticalPoint> find_critical_points(const Potential& p, const CriticalSearch& opt = {});
std::vector<CriticalPoint> find_critical_points(const Potential& p, int seeds_per_axis, double newton_tol);

struct SaddleAnnotation {
  CriticalPoint saddle;
  bool separating = false;
  bool inconclusive = false;
  // Minima (indices into the minima list given to separating_saddles) lying
  // in the two components reached by the downhill probes.
  std::vector<std::size_t> side_a;
  std::vector<std::size_t> side_b;
};

struct SaddleScan {
  std::vector<CriticalPoint> minima;
  std::vector<SaddleAnnotation> saddles;  // every index-1 point, flagged
};

SaddleScan separating_saddles(const Potential& p, const std::vector<CriticalPoint>& criticals,
                              int grid_resolution = 256);

struct MorsePair {
  // saddle == nullopt-equivalent for the global minimum: has_saddle false.
  bool has_saddle = false;
  CriticalPoint saddle;
  CriticalPoint minimum;
  double barrier = std::numeric_limits<double>::infinity();
};

struct MorsePairing {
  std::vector<CriticalPoint> minima;
  std::vector<CriticalPoint> separating_saddles;
  std::vector<MorsePair> pairs;  // pairs[0] is the global minimum
  std::vector<double> barriers;
  std::vector<std::string> warnings;

  double barrier_max() const;  // H_f; throws NoMetastabilityError on a single well
  const CriticalPoint& global_minimum() const { return pairs.front().minimum; }
};

MorsePairing label_pairs(const SaddleScan& scan);

/// Full pipeline with default settings.
MorsePairing analyze(const Potential& p, const CriticalSearch& opt = {}, int grid_resolution = 256);

}  // namespace mlab
