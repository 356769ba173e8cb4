#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlab/errors.hpp"
#include "mlab/hyperparams.hpp"
#include "mlab/potentials.hpp"

namespace mlab {

struct GibbsDistribution;

enum class Scheme { sgd, sgdm, nag_sc, nag_c, sde_underdamped, sde_overdamped };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);
bool is_discrete(Scheme s);

enum class InitialVelocity {
  fixed,  // v0 (SDE) or x_{-1} = x0 − v0 (discrete)
  gibbs,  // N(0, β/2) per coordinate
};

enum class InitialPosition {
  fixed,  // x0
  gibbs,  // sampled from exp(−2f/β) on the box (1D only)
};

struct RunConfig {
  explicit RunConfig(Potential p) : potential(std::move(p)) {}

  Potential potential;
  Hyperparams hp;
  Scheme scheme = Scheme::sgdm;
  std::size_t n_traj = 1;
  std::size_t n_steps = 0;
  double dt = 0.0;  // SDE schemes only
  std::vector<double> x0;
  std::vector<double> v0;
  InitialPosition position_init = InitialPosition::fixed;
  InitialVelocity velocity_init = InitialVelocity::fixed;
  std::uint64_t seed = 0;
  double noise = 1.0;  // multiplies every Gaussian increment; 0 switches noise off
  std::size_t record_every = 1;
  unsigned threads = 1;
};

/// Recorded ensemble. f values are stored record-major:
/// f[r * n_traj + j] is trajectory j at times[r].
struct Ensemble {
  std::size_t n_traj = 0;
  std::size_t dim = 0;
  std::vector<double> times;
  std::vector<double> f;
  std::vector<double> final_x;  // n_traj × dim
  std::vector<double> final_v;  // n_traj × dim (discrete: x_k − x_{k−1})

  double at(std::size_t record, std::size_t traj) const { return f[record * n_traj + traj]; }
};

Ensemble run_discrete(const RunConfig& config);
Ensemble run_sde(const RunConfig& config);
Ensemble run(const RunConfig& config);

/// Largest stable EM step per the curvature cap 0.1/√(max Hessian eigenvalue).
double max_stable_dt(const Potential& p, int samples_per_axis = 64);

struct TrajectoryStats {
  std::vector<double> times;
  std::vector<double> mean_f;  // excess risk E f − f*
  std::vector<double> var_f;
  std::vector<double> q10, q50, q90;
  std::vector<std::size_t> n_alive;
  double plateau = 0.0;
  double plateau_se = 0.0;
};

struct DecayFit {
  double lambda_hat = 0.0;
  double gap_hat = 0.0;
  double prefactor_hat = 0.0;
  double r_squared = 0.0;
  std::size_t window_begin = 0;
  std::size_t window_end = 0;  // exclusive
};

class FitUnreliableError : public NumericalError {
 public:
  FitUnreliableError(const std::string& what, TrajectoryStats stats)
      : NumericalError(what), stats_(std::move(stats)) {}
  const TrajectoryStats& stats() const noexcept { return stats_; }

 private:
  TrajectoryStats stats_;
};

TrajectoryStats trajectory_stats(const Ensemble& e, double f_star);

struct FitOptions {
  double t_min = 0.0;  // ignore grid points before t_min
  std::size_t min_window = 10;
};

DecayFit fit_decay(const TrajectoryStats& stats, const FitOptions& opt = {});

struct RiskFit {
  TrajectoryStats stats;
  DecayFit fit;
};

RiskFit excess_risk_and_fit(const Ensemble& e, double f_star, const FitOptions& opt = {});

struct MfptResult {
  double mean_first_passage = 0.0;
  double rate = 0.0;
  double ci95_low = 0.0;   // on the rate
  double ci95_high = 0.0;
  std::size_t censored = 0;
  std::size_t total = 0;
  std::vector<double> hitting_times;  // censored entries are +inf
};

/// First passage from `source` into the ball of radius `radius` around
/// `target`. A non-positive radius selects 0.2·|target − source|.
MfptResult mfpt(const RunConfig& config, const std::vector<double>& source, const std::vector<double>& target,
                double radius = -1.0, std::size_t bootstrap = 1000);

struct WeakErrorConfig {
  double mu = 1.0;   // held fixed while s is halved
  double s = 0.05;
  double T = 5.0;
  std::size_t n_traj = 100000;
  std::uint64_t seed = 1;
  std::vector<double> x0;  // empty: global minimizer supplied by the caller must be set
  double steps_per_s = 20.0;  // SDE step dt ≤ s / steps_per_s
  unsigned threads = 1;
};

struct WeakErrorLevel {
  double s = 0.0;
  double alpha = 0.0;
  double dt_fine = 0.0;
  double error = 0.0;
  double standard_error = 0.0;  // at the maximizing grid point
  double t_at_max = 0.0;
};

struct WeakErrorResult {
  WeakErrorLevel coarse;
  WeakErrorLevel fine;
  double ratio = 0.0;  // error(s) / error(s/2)
};

/// Discrete SGDM against the underdamped SDE on the common grid t = k√s,
/// with μ held fixed so the SDE family is the same one at both s.
WeakErrorLevel weak_error_level(const Potential& p, const WeakErrorConfig& cfg, double s);
WeakErrorResult weak_error(const Potential& p, const WeakErrorConfig& cfg);

struct HistogramReport {
  double histogram_distance = 0.0;
  double halved_distance = 0.0;
  std::size_t bins_x = 0, bins_v = 0;
  double samples_per_occupied_bin = 0.0;
  bool resolution_warning = false;
};

/// L1 distance between the (x, v) histogram of the final ensemble state and
/// the Gibbs bin masses. Bins tile the central ±3.5σ window of each marginal;
/// mass outside is one extra bin.
HistogramReport gibbs_convergence(const Ensemble& e, const GibbsDistribution& gibbs, std::size_t bins_per_axis = 6);

}  // namespace mlab
