#include "mlab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "mlab/rng.hpp"
#include "mlab/spectral.hpp"

namespace mlab {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::sgd:
      return "sgd";
    case Scheme::sgdm:
      return "sgdm";
    case Scheme::nag_sc:
      return "nag_sc";
    case Scheme::nag_c:
      return "nag_c";
    case Scheme::sde_underdamped:
      return "sde_underdamped";
    case Scheme::sde_overdamped:
      return "sde_overdamped";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::sgd, Scheme::sgdm, Scheme::nag_sc, Scheme::nag_c, Scheme::sde_underdamped,
                   Scheme::sde_overdamped}) {
    if (to_string(s) == name) return s;
  }
  throw ValidationError("unknown scheme '" + name + "'");
}

bool is_discrete(Scheme s) {
  return s == Scheme::sgd || s == Scheme::sgdm || s == Scheme::nag_sc || s == Scheme::nag_c;
}

namespace {

// Inverse-CDF sampler for exp(−2f/β) on a 1D box.
class PositionSampler {
 public:
  PositionSampler(const Potential& p, double beta) {
    constexpr int n = 20001;
    const double lo = p.box().lower[0], hi = p.box().upper[0];
    x_.resize(n);
    cdf_.resize(n);
    std::vector<double> f(n);
    double fmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      x_[i] = lo + (hi - lo) * i / (n - 1);
      f[i] = p.value1(x_[i]);
      fmin = std::min(fmin, f[i]);
    }
    cdf_[0] = 0.0;
    double prev = std::exp(-2.0 * (f[0] - fmin) / beta);
    for (int i = 1; i < n; ++i) {
      const double cur = std::exp(-2.0 * (f[i] - fmin) / beta);
      cdf_[i] = cdf_[i - 1] + 0.5 * (prev + cur) * (x_[i] - x_[i - 1]);
      prev = cur;
    }
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
  }

  double operator()(double u) const {
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return x_.front();
    if (it == cdf_.end()) return x_.back();
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    const double w = (u - cdf_[i - 1]) / std::max(cdf_[i] - cdf_[i - 1], 1e-300);
    return x_[i - 1] + w * (x_[i] - x_[i - 1]);
  }

 private:
  std::vector<double> x_, cdf_;
};

void validate(const RunConfig& c) {
  const std::size_t d = c.potential.dim();
  if (c.n_traj == 0) throw ValidationError("ensemble size must be positive");
  if (c.record_every == 0) throw ValidationError("record_every must be positive");
  if (c.position_init == InitialPosition::fixed && c.x0.size() != d) {
    throw ValidationError("x0 dimension does not match the potential");
  }
  if (c.position_init == InitialPosition::gibbs && d != 1) {
    throw ValidationError("Gibbs position sampling is implemented for 1D potentials");
  }
  if (!c.v0.empty() && c.v0.size() != d) throw ValidationError("v0 dimension does not match the potential");
  if (!(c.noise >= 0.0)) throw ValidationError("noise scale must be non-negative");
  if (!(c.hp.s > 0.0)) throw DomainError("learning rate s must be positive");
  if (is_discrete(c.scheme)) {
    if (!(c.hp.alpha >= 0.0 && c.hp.alpha < 1.0)) throw DomainError("momentum must lie in [0, 1)");
  } else {
    if (!(c.dt > 0.0)) throw ValidationError("SDE step dt must be positive");
    if (c.scheme == Scheme::sde_underdamped && !(c.hp.mu > 0.0)) throw DomainError("mu must be positive");
    if (!(c.hp.beta > 0.0) && c.scheme == Scheme::sde_overdamped) throw DomainError("beta must be positive");
    const double cap = max_stable_dt(c.potential);
    if (c.dt > cap * (1.0 + 1e-12)) {
      throw ValidationError("SDE step dt=" + std::to_string(c.dt) + " exceeds the stability cap " +
                            std::to_string(cap));
    }
  }
}

struct State {
  std::vector<double> x, v, prev, y, g;
  explicit State(std::size_t d) : x(d), v(d), prev(d), y(d), g(d) {}
};

// Integrates one trajectory; `observe(step, x, v)` runs after initialisation
// and after every step and returns false to stop early.
template <class Observe>
void integrate(const RunConfig& c, std::size_t traj, const PositionSampler* sampler, State& st, Observe&& observe) {
  const std::size_t d = c.potential.dim();
  auto rng = stream_for(c.seed, traj);
  std::normal_distribution<double> normal(0.0, 1.0);
  if (c.position_init == InitialPosition::gibbs) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    st.x[0] = (*sampler)(unif(rng));
  } else {
    std::copy(c.x0.begin(), c.x0.end(), st.x.begin());
  }
  if (c.velocity_init == InitialVelocity::gibbs) {
    const double sd = std::sqrt(c.hp.beta / 2.0);
    for (std::size_t a = 0; a < d; ++a) st.v[a] = sd * normal(rng);
  } else if (!c.v0.empty()) {
    std::copy(c.v0.begin(), c.v0.end(), st.v.begin());
  } else {
    std::fill(st.v.begin(), st.v.end(), 0.0);
  }
  for (std::size_t a = 0; a < d; ++a) {
    st.prev[a] = st.x[a] - st.v[a];
    st.y[a] = st.x[a];
  }
  if (!observe(std::size_t{0}, st.x, st.v)) return;

  const double s = c.hp.s;
  const double alpha = c.hp.alpha;
  const double gamma = 2.0 * std::sqrt(std::max(c.hp.mu, 0.0));
  const double sde_noise = c.noise * std::sqrt(std::sqrt(s)) * std::sqrt(c.dt);
  const double od_noise = c.noise * std::sqrt(c.hp.beta * c.dt);
  const double disc_noise = c.noise * s;
  std::span<const double> xs(st.x.data(), d);
  std::span<double> gs(st.g.data(), d);

  for (std::size_t k = 1; k <= c.n_steps; ++k) {
    c.potential.gradient(xs, gs);
    switch (c.scheme) {
      case Scheme::sgd:
        for (std::size_t a = 0; a < d; ++a) {
          st.prev[a] = st.x[a];
          st.x[a] += -s * st.g[a] + disc_noise * normal(rng);
        }
        break;
      case Scheme::sgdm:
        for (std::size_t a = 0; a < d; ++a) {
          const double next = st.x[a] - s * st.g[a] + disc_noise * normal(rng) + alpha * (st.x[a] - st.prev[a]);
          st.prev[a] = st.x[a];
          st.x[a] = next;
        }
        break;
      case Scheme::nag_sc:
      case Scheme::nag_c: {
        const double ak = c.scheme == Scheme::nag_sc
                              ? alpha
                              : static_cast<double>(k - 1) / static_cast<double>(k + 2);
        for (std::size_t a = 0; a < d; ++a) {
          const double ynew = st.x[a] - s * st.g[a] + disc_noise * normal(rng);
          st.prev[a] = st.x[a];
          st.x[a] = ynew + ak * (ynew - st.y[a]);
          st.y[a] = ynew;
        }
        break;
      }
      case Scheme::sde_underdamped:
        for (std::size_t a = 0; a < d; ++a) {
          const double vold = st.v[a];
          st.x[a] += vold * c.dt;
          st.v[a] += -(gamma * vold + st.g[a]) * c.dt + sde_noise * normal(rng);
        }
        break;
      case Scheme::sde_overdamped:
        for (std::size_t a = 0; a < d; ++a) st.x[a] += -st.g[a] * c.dt + od_noise * normal(rng);
        break;
    }
    for (std::size_t a = 0; a < d; ++a) {
      if (!std::isfinite(st.x[a])) {
        throw DivergenceError("non-finite iterate in trajectory " + std::to_string(traj) + " at step " +
                                  std::to_string(k),
                              k);
      }
    }
    if (is_discrete(c.scheme)) {
      for (std::size_t a = 0; a < d; ++a) st.v[a] = st.x[a] - st.prev[a];
    }
    if (!observe(k, st.x, st.v)) return;
  }
}

// Runs body(j) for every trajectory over `threads` workers with contiguous
// blocks; the exception of the lowest failing trajectory is rethrown.
template <class Body>
void parallel_trajectories(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads ? threads : 1, n));
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> failed_at(workers, std::numeric_limits<std::size_t>::max());
  auto work = [&](std::size_t w) {
    const std::size_t begin = n * w / workers, end = n * (w + 1) / workers;
    for (std::size_t j = begin; j < end; ++j) {
      try {
        body(j);
      } catch (...) {
        errors[w] = std::current_exception();
        failed_at[w] = j;
        return;
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  std::size_t best = workers;
  for (std::size_t w = 0; w < workers; ++w) {
    if (errors[w] && (best == workers || failed_at[w] < failed_at[best])) best = w;
  }
  if (best != workers) std::rethrow_exception(errors[best]);
}

Ensemble run_any(const RunConfig& c) {
  validate(c);
  const std::size_t d = c.potential.dim();
  const std::size_t records = c.n_steps / c.record_every + 1;
  Ensemble e;
  e.n_traj = c.n_traj;
  e.dim = d;
  e.times.resize(records);
  const double unit = is_discrete(c.scheme) ? c.hp.s : c.dt;
  for (std::size_t r = 0; r < records; ++r) e.times[r] = static_cast<double>(r * c.record_every) * unit;
  e.f.assign(records * c.n_traj, 0.0);
  e.final_x.assign(c.n_traj * d, 0.0);
  e.final_v.assign(c.n_traj * d, 0.0);

  std::unique_ptr<PositionSampler> sampler;
  if (c.position_init == InitialPosition::gibbs) sampler = std::make_unique<PositionSampler>(c.potential, c.hp.beta);

  parallel_trajectories(c.n_traj, c.threads, [&](std::size_t j) {
    State st(d);
    integrate(c, j, sampler.get(), st, [&](std::size_t k, const std::vector<double>& x, const std::vector<double>&) {
      if (k % c.record_every == 0) {
        e.f[(k / c.record_every) * c.n_traj + j] = c.potential.value(std::span<const double>(x.data(), d));
      }
      return true;
    });
    std::copy(st.x.begin(), st.x.end(), e.final_x.begin() + static_cast<std::ptrdiff_t>(j * d));
    std::copy(st.v.begin(), st.v.end(), e.final_v.begin() + static_cast<std::ptrdiff_t>(j * d));
  });
  return e;
}

}  // namespace

Ensemble run_discrete(const RunConfig& config) {
  if (!is_discrete(config.scheme)) throw UsageError("run_discrete needs a discrete scheme");
  return run_any(config);
}

Ensemble run_sde(const RunConfig& config) {
  if (is_discrete(config.scheme)) throw UsageError("run_sde needs an SDE scheme");
  return run_any(config);
}

Ensemble run(const RunConfig& config) { return run_any(config); }

double max_stable_dt(const Potential& p, int samples_per_axis) {
  const std::size_t d = p.dim();
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) total *= static_cast<std::size_t>(samples_per_axis);
  double lmax = 0.0;
  Eigen::VectorXd x(d);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    for (std::size_t a = 0; a < d; ++a) {
      const double t = static_cast<double>(rem % samples_per_axis) / (samples_per_axis - 1);
      rem /= samples_per_axis;
      x[a] = p.box().lower[a] + t * (p.box().upper[a] - p.box().lower[a]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.hessian(x), Eigen::EigenvaluesOnly);
    lmax = std::max(lmax, es.eigenvalues().maxCoeff());
  }
  if (!(lmax > 0.0)) return std::numeric_limits<double>::infinity();
  return 0.1 / std::sqrt(lmax);
}

TrajectoryStats trajectory_stats(const Ensemble& e, double f_star) {
  if (e.n_traj == 0 || e.times.empty()) throw ValidationError("empty ensemble");
  TrajectoryStats st;
  st.times = e.times;
  const std::size_t R = e.times.size(), n = e.n_traj;
  st.mean_f.resize(R);
  st.var_f.resize(R);
  st.q10.resize(R);
  st.q50.resize(R);
  st.q90.resize(R);
  st.n_alive.resize(R);
  std::vector<double> buf(n);
  for (std::size_t r = 0; r < R; ++r) {
    double sum = 0.0;
    std::size_t alive = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = e.at(r, j) - f_star;
      if (std::isfinite(v)) {
        buf[alive++] = v;
        sum += v;
      }
    }
    st.n_alive[r] = alive;
    if (alive == 0) throw NumericalError("no finite samples at record " + std::to_string(r));
    const double mean = sum / static_cast<double>(alive);
    double ss = 0.0;
    for (std::size_t j = 0; j < alive; ++j) ss += (buf[j] - mean) * (buf[j] - mean);
    st.mean_f[r] = mean;
    st.var_f[r] = alive > 1 ? ss / static_cast<double>(alive - 1) : 0.0;
    auto quantile = [&](double q) {
      const std::size_t idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(alive - 1)));
      std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(idx),
                       buf.begin() + static_cast<std::ptrdiff_t>(alive));
      return buf[idx];
    };
    st.q10[r] = quantile(0.1);
    st.q50[r] = quantile(0.5);
    st.q90[r] = quantile(0.9);
  }
  const std::size_t tail_begin = static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(R)));
  double tail = 0.0, tail_var = 0.0;
  const std::size_t m = R - std::min(tail_begin, R - 1);
  for (std::size_t r = R - m; r < R; ++r) {
    tail += st.mean_f[r];
    tail_var += st.var_f[r];
  }
  st.plateau = tail / static_cast<double>(m);
  st.plateau_se = std::sqrt(tail_var / static_cast<double>(m) / static_cast<double>(n));
  return st;
}

DecayFit fit_decay(const TrajectoryStats& st, const FitOptions& opt) {
  DecayFit fit;
  fit.gap_hat = std::max(st.plateau, 0.0);
  const std::size_t R = st.times.size();
  auto above = [&](std::size_t r) {
    const double n = static_cast<double>(std::max<std::size_t>(st.n_alive[r], 1));
    const double se = std::sqrt(st.var_f[r] / n);
    const double y = st.mean_f[r] - fit.gap_hat;
    return y > 2.0 * se && y > 0.0;
  };
  std::size_t b = 0;
  while (b < R && (st.times[b] < opt.t_min || !above(b))) ++b;
  std::size_t e = b;
  while (e < R && above(e)) ++e;
  fit.window_begin = b;
  fit.window_end = e;
  if (e - b < opt.min_window) {
    throw FitUnreliableError("decay window has " + std::to_string(e - b) + " grid points; need " +
                                 std::to_string(opt.min_window),
                             st);
  }
  double st_ = 0, sy = 0, stt = 0, sty = 0;
  const double n = static_cast<double>(e - b);
  for (std::size_t r = b; r < e; ++r) {
    const double t = st.times[r], y = std::log(st.mean_f[r] - fit.gap_hat);
    st_ += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double denom = n * stt - st_ * st_;
  const double slope = (n * sty - st_ * sy) / denom;
  const double icpt = (sy - slope * st_) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (std::size_t r = b; r < e; ++r) {
    const double y = std::log(st.mean_f[r] - fit.gap_hat);
    const double yh = icpt + slope * st.times[r];
    ss_res += (y - yh) * (y - yh);
    ss_tot += (y - ybar) * (y - ybar);
  }
  fit.lambda_hat = -slope;
  fit.prefactor_hat = std::exp(icpt);
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

RiskFit excess_risk_and_fit(const Ensemble& e, double f_star, const FitOptions& opt) {
  RiskFit out;
  out.stats = trajectory_stats(e, f_star);
  out.fit = fit_decay(out.stats, opt);
  return out;
}

MfptResult mfpt(const RunConfig& config, const std::vector<double>& source, const std::vector<double>& target,
                double radius, std::size_t bootstrap) {
  const std::size_t d = config.potential.dim();
  if (source.size() != d || target.size() != d) throw ValidationError("source/target dimension mismatch");
  double dist = 0.0;
  for (std::size_t a = 0; a < d; ++a) dist += (target[a] - source[a]) * (target[a] - source[a]);
  dist = std::sqrt(dist);
  const double r = radius > 0.0 ? radius : 0.2 * dist;
  RunConfig c = config;
  c.x0 = source;
  c.position_init = InitialPosition::fixed;
  validate(c);
  const double unit = is_discrete(c.scheme) ? c.hp.s : c.dt;

  MfptResult out;
  out.total = c.n_traj;
  out.hitting_times.assign(c.n_traj, std::numeric_limits<double>::infinity());
  parallel_trajectories(c.n_traj, c.threads, [&](std::size_t j) {
    State st(d);
    integrate(c, j, nullptr, st, [&](std::size_t k, const std::vector<double>& x, const std::vector<double>&) {
      double d2 = 0.0;
      for (std::size_t a = 0; a < d; ++a) d2 += (x[a] - target[a]) * (x[a] - target[a]);
      if (d2 <= r * r) {
        out.hitting_times[j] = static_cast<double>(k) * unit;
        return false;
      }
      return true;
    });
  });
  std::vector<double> hits;
  for (double t : out.hitting_times) {
    if (std::isfinite(t)) hits.push_back(t);
  }
  out.censored = out.total - hits.size();
  if (2 * out.censored > out.total) {
    throw HorizonError("first-passage horizon too short: " + std::to_string(out.censored) + " of " +
                           std::to_string(out.total) + " trajectories censored",
                       out.censored, out.total);
  }
  out.mean_first_passage = std::accumulate(hits.begin(), hits.end(), 0.0) / static_cast<double>(hits.size());
  out.rate = out.mean_first_passage > 0.0 ? 1.0 / out.mean_first_passage : std::numeric_limits<double>::infinity();

  auto rng = stream_for(c.seed ^ 0x5bd1e995ULL, 0xb0075742ULL);
  std::uniform_int_distribution<std::size_t> pick(0, out.total - 1);
  std::vector<double> rates;
  rates.reserve(bootstrap);
  for (std::size_t b = 0; b < bootstrap; ++b) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < out.total; ++i) {
      const double t = out.hitting_times[pick(rng)];
      if (std::isfinite(t)) {
        sum += t;
        ++cnt;
      }
    }
    if (cnt > 0 && sum > 0.0) rates.push_back(static_cast<double>(cnt) / sum);
  }
  if (!rates.empty()) {
    std::sort(rates.begin(), rates.end());
    auto q = [&](double p) { return rates[static_cast<std::size_t>(p * static_cast<double>(rates.size() - 1))]; };
    out.ci95_low = q(0.025);
    out.ci95_high = q(0.975);
  } else {
    out.ci95_low = out.ci95_high = out.rate;
  }
  return out;
}

WeakErrorLevel weak_error_level(const Potential& p, const WeakErrorConfig& cfg, double s) {
  if (cfg.x0.size() != p.dim()) throw ValidationError("weak_error needs x0 of the potential's dimension");
  if (!(cfg.T > 0.0) || cfg.n_traj < 2) throw ValidationError("weak_error needs T > 0 and n_traj >= 2");
  const Hyperparams hp = from_mu(cfg.mu, s);
  const double h = std::sqrt(s);
  const std::size_t K = static_cast<std::size_t>(std::floor(cfg.T / h + 1e-9));
  const std::size_t m = static_cast<std::size_t>(std::ceil(h * cfg.steps_per_s / s - 1e-9));

  RunConfig disc(p);
  disc.hp = hp;
  disc.scheme = Scheme::sgdm;
  disc.n_traj = cfg.n_traj;
  disc.n_steps = K;
  disc.x0 = cfg.x0;
  disc.seed = cfg.seed;
  disc.threads = cfg.threads;

  RunConfig cont = disc;
  cont.scheme = Scheme::sde_underdamped;
  cont.dt = h / static_cast<double>(m);
  cont.n_steps = K * m;
  cont.record_every = m;
  cont.seed = splitmix64(cfg.seed + 0x9e37ULL);

  const auto sd = trajectory_stats(run_discrete(disc), 0.0);
  const auto sc = trajectory_stats(run_sde(cont), 0.0);
  WeakErrorLevel out;
  out.s = s;
  out.alpha = hp.alpha;
  out.dt_fine = cont.dt;
  const double n = static_cast<double>(cfg.n_traj);
  for (std::size_t k = 0; k <= K; ++k) {
    const double diff = std::abs(sd.mean_f[k] - sc.mean_f[k]);
    if (diff > out.error) {
      out.error = diff;
      out.standard_error = std::sqrt(sd.var_f[k] / n + sc.var_f[k] / n);
      out.t_at_max = static_cast<double>(k) * h;
    }
  }
  if (out.standard_error > 0.5 * out.error) {
    throw InconclusiveError("weak error at s=" + std::to_string(s) +
                            " is within two Monte-Carlo standard errors; increase n_traj");
  }
  return out;
}

WeakErrorResult weak_error(const Potential& p, const WeakErrorConfig& cfg) {
  WeakErrorResult r;
  r.coarse = weak_error_level(p, cfg, cfg.s);
  r.fine = weak_error_level(p, cfg, cfg.s / 2.0);
  r.ratio = r.coarse.error / r.fine.error;
  return r;
}

namespace {

double histogram_l1(const Ensemble& e, const GibbsDistribution& g, std::size_t nb) {
  const double sx = std::sqrt(std::max(g.var_x(), 1e-300));
  const double sv = std::sqrt(g.beta / 2.0);
  const double x_lo = g.mean_x - 3.5 * sx, x_hi = g.mean_x + 3.5 * sx;
  const double v_lo = -3.5 * sv, v_hi = 3.5 * sv;
  const double wx = (x_hi - x_lo) / static_cast<double>(nb), wv = (v_hi - v_lo) / static_cast<double>(nb);
  std::vector<double> counts(nb * nb, 0.0);
  double outside = 0.0;
  for (std::size_t j = 0; j < e.n_traj; ++j) {
    const double x = e.final_x[j], v = e.final_v[j];
    const double ix = std::floor((x - x_lo) / wx), iv = std::floor((v - v_lo) / wv);
    if (ix < 0 || iv < 0 || ix >= static_cast<double>(nb) || iv >= static_cast<double>(nb)) {
      outside += 1.0;
    } else {
      counts[static_cast<std::size_t>(ix) * nb + static_cast<std::size_t>(iv)] += 1.0;
    }
  }
  const double n = static_cast<double>(e.n_traj);
  double l1 = 0.0, inside_mass = 0.0;
  for (std::size_t a = 0; a < nb; ++a) {
    const double px = g.x_mass(x_lo + wx * a, x_lo + wx * (a + 1));
    for (std::size_t b = 0; b < nb; ++b) {
      const double p = px * g.v_mass(v_lo + wv * b, v_lo + wv * (b + 1));
      inside_mass += p;
      l1 += std::abs(counts[a * nb + b] / n - p);
    }
  }
  l1 += std::abs(outside / n - std::max(0.0, 1.0 - inside_mass));
  return l1;
}

}  // namespace

HistogramReport gibbs_convergence(const Ensemble& e, const GibbsDistribution& gibbs, std::size_t bins_per_axis) {
  if (e.dim != 1) throw ValidationError("gibbs_convergence expects a 1D position ensemble");
  if (bins_per_axis < 2) throw ValidationError("need at least two bins per axis");
  HistogramReport rep;
  rep.bins_x = rep.bins_v = bins_per_axis;
  rep.histogram_distance = histogram_l1(e, gibbs, bins_per_axis);
  rep.halved_distance = histogram_l1(e, gibbs, std::max<std::size_t>(1, bins_per_axis / 2));
  // occupancy on the reporting grid
  const double sx = std::sqrt(std::max(gibbs.var_x(), 1e-300));
  const double sv = std::sqrt(gibbs.beta / 2.0);
  std::vector<char> occ(bins_per_axis * bins_per_axis, 0);
  const double wx = 7.0 * sx / static_cast<double>(bins_per_axis), wv = 7.0 * sv / static_cast<double>(bins_per_axis);
  for (std::size_t j = 0; j < e.n_traj; ++j) {
    const double ix = std::floor((e.final_x[j] - gibbs.mean_x + 3.5 * sx) / wx);
    const double iv = std::floor((e.final_v[j] + 3.5 * sv) / wv);
    if (ix >= 0 && iv >= 0 && ix < static_cast<double>(bins_per_axis) && iv < static_cast<double>(bins_per_axis)) {
      occ[static_cast<std::size_t>(ix) * bins_per_axis + static_cast<std::size_t>(iv)] = 1;
    }
  }
  const double occupied = static_cast<double>(std::count(occ.begin(), occ.end(), 1));
  rep.samples_per_occupied_bin = occupied > 0 ? static_cast<double>(e.n_traj) / occupied : 0.0;
  rep.resolution_warning = rep.samples_per_occupied_bin < 20.0;
  return rep;
}

}  // namespace mlab
