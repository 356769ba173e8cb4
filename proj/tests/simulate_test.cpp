#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mlab/errors.hpp"
#include "mlab/morse.hpp"
#include "mlab/rates.hpp"
#include "mlab/simulate.hpp"
#include "mlab/spectral.hpp"

using namespace mlab;

namespace {

Hyperparams plain_sgd(double s) {
  Hyperparams hp;
  hp.s = s;
  hp.alpha = 0.0;
  hp.mu = 1.0 / s;
  hp.beta = 0.5 * s;
  return hp;
}

double mean_sq(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m += a * a;
  return m / static_cast<double>(v.size());
}

}  // namespace

TEST(Discrete, NoiselessMomentumContracts) {
  RunConfig c(quadratic(0.5));
  c.hp = derive(0.1, 0.5);
  c.scheme = Scheme::sgdm;
  c.noise = 0.0;
  c.x0 = {1.0};
  c.n_steps = 200;
  const auto e = run(c);
  EXPECT_LE(std::abs(e.final_x[0]), 1e-6);
  // |x| envelope shrinks: f at the end of each 20-step block decreases
  for (std::size_t r = 40; r < e.times.size(); r += 20) EXPECT_LT(e.at(r, 0), e.at(r - 20, 0));
}

TEST(Discrete, SgdPlateauMatchesAutoregressiveVariance) {
  const double s = 0.1, theta = 0.5;
  RunConfig c(quadratic(theta));
  c.hp = plain_sgd(s);
  c.scheme = Scheme::sgd;
  c.x0 = {0.0};
  c.n_traj = 20000;
  c.n_steps = 400;
  c.record_every = 4;
  c.seed = 11;
  const auto st = trajectory_stats(run(c), 0.0);
  const double var = s * s / (1.0 - (1.0 - s * theta) * (1.0 - s * theta));
  EXPECT_NEAR(st.plateau / (0.5 * theta * var), 1.0, 0.05);
}

TEST(Discrete, ZeroMomentumReducesToSgd) {
  RunConfig a(tilted_double_well(0.1));
  a.hp = plain_sgd(0.05);
  a.scheme = Scheme::sgd;
  a.x0 = {0.9};
  a.n_traj = 16;
  a.n_steps = 300;
  a.seed = 5;
  RunConfig b = a;
  b.scheme = Scheme::sgdm;
  const auto ea = run(a), eb = run(b);
  ASSERT_EQ(ea.f.size(), eb.f.size());
  for (std::size_t i = 0; i < ea.f.size(); ++i) EXPECT_NEAR(ea.f[i], eb.f[i], 1e-12);
  for (std::size_t i = 0; i < ea.final_x.size(); ++i) EXPECT_NEAR(ea.final_x[i], eb.final_x[i], 1e-12);
}

TEST(Discrete, Deterministic) {
  RunConfig c(tilted_double_well(0.1));
  c.hp = derive(0.05, 0.9);
  c.scheme = Scheme::nag_sc;
  c.x0 = {0.9};
  c.n_traj = 64;
  c.n_steps = 200;
  c.seed = 99;
  c.threads = 3;
  const auto a = run(c);
  c.threads = 1;
  const auto b = run(c);
  EXPECT_EQ(a.f, b.f);
  EXPECT_EQ(a.final_x, b.final_x);
  c.seed = 100;
  EXPECT_NE(run(c).f, a.f);
}

TEST(Discrete, NagCRunsAndTimeUnitsAreSteps) {
  RunConfig c(quadratic(0.5));
  c.hp = derive(0.05, 0.9);
  c.scheme = Scheme::nag_c;
  c.x0 = {1.0};
  c.noise = 0.0;
  c.n_steps = 100;
  c.record_every = 10;
  const auto e = run(c);
  ASSERT_EQ(e.times.size(), 11u);
  EXPECT_NEAR(e.times.back(), 100 * 0.05, 1e-12);
  EXPECT_LT(e.at(10, 0), e.at(0, 0));
}

TEST(Discrete, DivergesOnUnstableStep) {
  RunConfig c(quadratic(0.5, 1e6));
  c.hp = plain_sgd(5.0);
  c.scheme = Scheme::sgd;
  c.noise = 0.0;
  c.x0 = {1.0};
  c.n_steps = 5000;
  try {
    run(c);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.step(), 0u);
  }
}

TEST(Config, Validation) {
  RunConfig c(quadratic(0.5));
  c.hp = derive(0.05, 0.9);
  c.x0 = {0.0};
  c.n_steps = 10;
  c.n_traj = 0;
  EXPECT_THROW(run(c), ValidationError);
  c.n_traj = 1;
  c.x0 = {0.0, 1.0};
  EXPECT_THROW(run(c), ValidationError);
  c.x0 = {0.0};
  c.scheme = Scheme::sde_underdamped;
  c.dt = 1.0;
  EXPECT_THROW(run(c), ValidationError);
  c.dt = 0.0;
  EXPECT_THROW(run(c), ValidationError);
}

TEST(Sde, StepCapFollowsCurvature) { EXPECT_NEAR(max_stable_dt(quadratic(0.5)), 0.1 / std::sqrt(0.5), 1e-12); }

TEST(Sde, NoiselessEnergyDissipates) {
  const double dt = 0.01;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= 3000; k += 50) {
    RunConfig c(quadratic(0.5));
    c.hp = derive(0.04, 2.0 / 3.0);
    c.scheme = Scheme::sde_underdamped;
    c.noise = 0.0;
    c.x0 = {1.5};
    c.v0 = {0.5};
    c.dt = dt;
    c.n_steps = k;
    const auto e = run(c);
    const double energy = 0.25 * e.final_x[0] * e.final_x[0] + 0.5 * e.final_v[0] * e.final_v[0];
    EXPECT_LE(energy, prev + 50 * dt * dt);
    prev = energy;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Sde, UnderdampedStationaryMoments) {
  RunConfig c(quadratic(0.5));
  c.hp = derive(0.04, 2.0 / 3.0);
  c.scheme = Scheme::sde_underdamped;
  c.x0 = {0.0};
  c.dt = 0.005;
  c.n_steps = 10000;  // t = 50
  c.record_every = 10000;
  c.n_traj = 10000;
  c.seed = 3;
  const auto e = run(c);
  EXPECT_NEAR(mean_sq(e.final_v) / (c.hp.beta / 2.0), 1.0, 0.05);
  EXPECT_NEAR(mean_sq(e.final_x) / (c.hp.beta / (2.0 * 0.5)), 1.0, 0.05);
}

TEST(Sde, OverdampedStationaryMoment) {
  RunConfig c(quadratic(0.5));
  c.hp = derive(0.04, 2.0 / 3.0);
  c.scheme = Scheme::sde_overdamped;
  c.x0 = {0.0};
  c.dt = 0.01;
  c.n_steps = 2000;
  c.record_every = 2000;
  c.n_traj = 10000;
  c.seed = 4;
  const auto e = run(c);
  EXPECT_NEAR(mean_sq(e.final_x) / (c.hp.beta / (2.0 * 0.5)), 1.0, 0.05);
}

TEST(Fit, QuadraticDecayMatchesSecondMomentRate) {
  // E f relaxes through the second-moment modes, at twice the gap 1 − √0.5
  RunConfig c(quadratic(0.5));
  c.hp = derive(0.04, 2.0 / 3.0);
  c.scheme = Scheme::sde_underdamped;
  c.x0 = {1.5};
  c.dt = 0.01;
  c.n_steps = 3000;
  c.record_every = 20;
  c.n_traj = 20000;
  c.seed = 8;
  const auto fit = excess_risk_and_fit(run(c), 0.0, FitOptions{2.0, 10}).fit;
  const double zeta = 1.0 - std::sqrt(0.5);
  EXPECT_NEAR(fit.lambda_hat / (2.0 * zeta), 1.0, 0.2);
  EXPECT_GT(fit.r_squared, 0.9);
}

TEST(Fit, NoiselessGapVanishes) {
  RunConfig c(quadratic(0.5));
  c.hp = derive(0.04, 2.0 / 3.0);
  c.scheme = Scheme::sgdm;
  c.noise = 0.0;
  c.x0 = {1.0};
  c.n_steps = 2500;
  c.record_every = 10;
  const auto r = excess_risk_and_fit(run(c), 0.0);
  EXPECT_LE(r.fit.gap_hat, 1e-10);
  EXPECT_GE(r.fit.gap_hat, 0.0);
}

TEST(Fit, ShortWindowIsUnreliable) {
  RunConfig c(quadratic(0.5));
  c.hp = derive(0.04, 2.0 / 3.0);
  c.x0 = {1.0};
  c.n_steps = 8;
  EXPECT_THROW(excess_risk_and_fit(run(c), 0.0), FitUnreliableError);
}

TEST(Mfpt, StartInsideTargetIsZero) {
  RunConfig c(quadratic(0.5));
  c.hp = derive(0.05, 0.9);
  c.scheme = Scheme::sde_underdamped;
  c.dt = 0.01;
  c.n_steps = 10;
  c.n_traj = 20;
  const auto r = mfpt(c, {0.0}, {0.0}, 0.1);
  EXPECT_EQ(r.mean_first_passage, 0.0);
  EXPECT_EQ(r.censored, 0u);
}

TEST(Mfpt, NoNoiseMeansCensoring) {
  RunConfig c(tilted_double_well(0.1));
  c.hp = derive(0.05, 0.9);
  c.scheme = Scheme::sde_underdamped;
  c.dt = 0.01;
  c.noise = 0.0;
  c.n_steps = 2000;
  c.n_traj = 20;
  try {
    mfpt(c, {0.9456}, {-1.0466});
    FAIL() << "expected a horizon error";
  } catch (const HorizonError& e) {
    EXPECT_EQ(e.censored(), 20u);
  }
}

TEST(Mfpt, EscapeRateNearPrediction) {
  const auto p = tilted_double_well(0.1);
  const auto pairing = analyze(p);
  const auto hp = derive(0.05, 0.9);
  const double lam = kramers_rate(pairing, hp, Regime::underdamped_hp).leading.lambda;
  RunConfig c(p);
  c.hp = hp;
  c.scheme = Scheme::sde_underdamped;
  c.dt = 0.01;
  c.n_steps = static_cast<std::size_t>(12.0 / lam / c.dt);
  c.n_traj = 400;
  c.velocity_init = InitialVelocity::gibbs;
  c.seed = 21;
  const auto r = mfpt(c, {0.945649}, {-1.04668});
  EXPECT_GT(r.rate / lam, 1.0 / 3.0);
  EXPECT_LT(r.rate / lam, 3.0);
  EXPECT_LE(r.ci95_low, r.rate);
  EXPECT_GE(r.ci95_high, r.rate);
}

TEST(Gibbs, ConvergedQuadraticEnsemble) {
  const auto q = quadratic(0.5);
  RunConfig c(q);
  c.hp = derive(0.04, 2.0 / 3.0);
  c.scheme = Scheme::sde_underdamped;
  c.x0 = {1.0};
  c.dt = 0.005;
  c.n_steps = 10000;
  c.record_every = 10000;
  c.n_traj = 10000;
  c.seed = 31;
  const auto g = gibbs_density(q, c.hp.beta, gibbs_phase_grid(q, c.hp.beta, 128, 128));
  const auto rep = gibbs_convergence(run(c), g);
  EXPECT_LE(rep.histogram_distance, 0.05);
  EXPECT_FALSE(rep.resolution_warning);
}

TEST(Gibbs, StationaryStartIsAlreadyClose) {
  const auto q = quadratic(0.5);
  RunConfig c(q);
  c.hp = derive(0.04, 2.0 / 3.0);
  c.scheme = Scheme::sde_underdamped;
  c.position_init = InitialPosition::gibbs;
  c.velocity_init = InitialVelocity::gibbs;
  c.dt = 0.005;
  c.n_steps = 1;
  c.n_traj = 10000;
  c.seed = 32;
  const auto g = gibbs_density(q, c.hp.beta, gibbs_phase_grid(q, c.hp.beta, 128, 128));
  EXPECT_LE(gibbs_convergence(run(c), g).histogram_distance, 0.05);
}

TEST(Gibbs, MetastableEnsembleIsFar) {
  const auto p = tilted_double_well(0.1);
  RunConfig c(p);
  c.hp = derive(0.02, 0.5);  // β = 0.03
  c.scheme = Scheme::sde_underdamped;
  c.x0 = {0.9456};
  c.dt = 0.01;
  c.n_steps = 1000;
  c.n_traj = 4000;
  c.seed = 33;
  const auto g = gibbs_density(p, c.hp.beta, gibbs_phase_grid(p, c.hp.beta, 128, 128));
  EXPECT_GT(gibbs_convergence(run(c), g).histogram_distance, 0.3);
}
