#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <numeric>

#include <Eigen/Core>
#include <json.hpp>

#include "mlab/errors.hpp"
#include "mlab/hyperparams.hpp"
#include "mlab/hypocoercivity.hpp"
#include "mlab/morse.hpp"
#include "mlab/potentials.hpp"
#include "mlab/rates.hpp"
#include "mlab/simulate.hpp"
#include "mlab/spectral.hpp"

namespace mlab::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

Potential potential_from(const Config& c, const std::string& fallback) {
  return make_potential(c.text("potential", fallback), c.prefixed("potential."));
}

std::string fmt_int(long long v) { return std::to_string(v); }

std::string pretty(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool same_point(const CriticalPoint& a, const CriticalPoint& b) {
  return a.location.size() == b.location.size() && (a.location - b.location).norm() < 1e-12;
}

std::vector<std::string> coords(const Eigen::VectorXd& x) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(fmt(x[i]));
  return out;
}

// Least squares y = a + b·x, returns {b, a, r²}.
std::array<double, 3> ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double b = sxy / sxx;
  return {b, my - b * mx, syy > 0 ? sxy * sxy / (sxx * syy) : 1.0};
}

}  // namespace

Report run_morse(const Context& ctx) {
  const auto& c = ctx.config;
  const Potential p = potential_from(c, "tilted_double_well");
  CriticalSearch opt;
  opt.seeds_per_axis = static_cast<int>(c.integer("seeds_per_axis", opt.seeds_per_axis));
  const int res = static_cast<int>(c.integer("resolution", 256));
  const auto crit = find_critical_points(p, opt);
  const SaddleScan scan = separating_saddles(p, crit, res);
  const MorsePairing pairing = label_pairs(scan);

  std::vector<std::string> header{"config_hash", "kind"};
  for (std::size_t i = 0; i < p.dim(); ++i) header.push_back("x" + std::to_string(i + 1));
  for (const char* h : {"value", "index", "separating", "pair", "barrier"}) header.emplace_back(h);
  CsvTable t(header);
  for (const auto& cp : crit) {
    std::string kind = cp.index == 0 ? "minimum" : cp.index == 1 ? "saddle" : "other";
    std::string separating = "";
    if (cp.index == 1) {
      for (const auto& s : scan.saddles) {
        if (same_point(s.saddle, cp)) separating = s.inconclusive ? "inconclusive" : (s.separating ? "1" : "0");
      }
    }
    long pair = -1;
    double barrier = std::nan("");
    for (std::size_t k = 0; k < pairing.pairs.size(); ++k) {
      const auto& pr = pairing.pairs[k];
      if (same_point(pr.minimum, cp) || (pr.has_saddle && same_point(pr.saddle, cp))) {
        pair = static_cast<long>(k);
        barrier = pr.barrier;
      }
    }
    std::vector<std::string> row{ctx.hash, kind};
    for (auto& x : coords(cp.location)) row.push_back(x);
    row.push_back(fmt(cp.value));
    row.push_back(fmt_int(cp.index));
    row.push_back(separating);
    row.push_back(fmt_int(pair));
    row.push_back(fmt(barrier));
    t.add(row);
  }
  Report r;
  r.tables.push_back({"morse.csv", t});
  r.warnings = pairing.warnings;
  r.summary.push_back(std::to_string(crit.size()) + " critical points, " + std::to_string(pairing.minima.size()) +
                      " minima, " + std::to_string(pairing.separating_saddles.size()) + " separating saddles");
  if (pairing.pairs.size() > 1) r.summary.push_back("barrier H_f = " + pretty(pairing.barrier_max()));
  return r;
}

Report run_rates(const Context& ctx) {
  const auto& c = ctx.config;
  const Potential p = potential_from(c, "tilted_double_well");
  const MorsePairing pairing = analyze(p);
  CsvTable t({"config_hash", "potential", "s", "alpha", "mu", "beta", "regime", "ell", "barrier", "eta_d",
              "gamma_prefactor", "prefactor", "lambda", "delta"});
  Report r;
  for (double s : c.reals("s", {0.05})) {
    for (double a : c.reals("alpha", {0.9})) {
      const Hyperparams hp = derive(s, a);
      for (const auto& name : c.texts("regime", {"underdamped_hp"})) {
        const Regime reg = parse_regime(name);
        const RateLadder lad = kramers_rate(pairing, hp, reg);
        for (std::size_t l = 0; l < lad.ladder.size(); ++l) {
          const auto& q = lad.ladder[l];
          t.add({ctx.hash, p.name(), fmt(s), fmt(a), fmt(hp.mu), fmt(hp.beta), to_string(reg), fmt_int(static_cast<long long>(l + 1)),
                 fmt(q.barrier), fmt(q.eta_d), fmt(q.gamma_prefactor), fmt(q.prefactor), fmt(q.lambda), fmt(q.delta)});
        }
        r.summary.push_back("s=" + pretty(s) + " alpha=" + pretty(a) + " " + name + ": lambda = " + pretty(lad.leading.lambda));
      }
    }
  }
  r.tables.push_back({"rates.csv", t});
  return r;
}

Report run_simulate(const Context& ctx) {
  const auto& c = ctx.config;
  const Potential p = potential_from(c, "tilted_double_well");
  const MorsePairing pairing = analyze(p);
  const double f_star = pairing.global_minimum().value;
  const auto gm = pairing.global_minimum().location;
  std::vector<double> x0 = c.reals("x0", std::vector<double>(gm.data(), gm.data() + gm.size()));
  const long n_traj = c.integer("n_traj", 1000);
  const long n_steps = c.integer("n_steps", 1000);
  const long every = c.integer("record_every", 10);
  if (n_traj <= 0) throw ValidationError("n_traj must be positive");
  if (n_steps <= 0) throw ValidationError("n_steps must be positive");
  if (every <= 0) throw ValidationError("record_every must be positive");

  CsvTable stats({"config_hash", "s", "alpha", "scheme", "t", "mean_excess", "var_excess", "q10", "q50", "q90", "n_alive"});
  CsvTable fits({"config_hash", "s", "alpha", "scheme", "lambda_hat", "gap_hat", "prefactor_hat", "r_squared", "plateau",
                 "plateau_se"});
  Report r;
  std::uint64_t stream = 0;
  for (double s : c.reals("s", {0.01})) {
    for (double a : c.reals("alpha", {0.9})) {
      for (const auto& name : c.texts("scheme", {"sgdm"})) {
        RunConfig rc(p);
        rc.scheme = parse_scheme(name);
        if (rc.scheme == Scheme::sgd) {
          rc.hp.s = s;
          rc.hp.alpha = 0.0;
          rc.hp.mu = 1.0 / s;
          rc.hp.beta = 0.5 * s;
        } else {
          rc.hp = derive(s, a);
        }
        rc.n_traj = static_cast<std::size_t>(n_traj);
        rc.n_steps = static_cast<std::size_t>(n_steps);
        rc.record_every = static_cast<std::size_t>(every);
        rc.x0 = x0;
        rc.v0 = c.reals("v0", {});
        rc.noise = c.real("noise", 1.0);
        const std::string pinit = c.text("position_init", "fixed"), vinit = c.text("velocity_init", "fixed");
        if (pinit != "fixed" && pinit != "gibbs") throw ValidationError("position_init must be fixed or gibbs");
        if (vinit != "fixed" && vinit != "gibbs") throw ValidationError("velocity_init must be fixed or gibbs");
        rc.position_init = pinit == "gibbs" ? InitialPosition::gibbs : InitialPosition::fixed;
        rc.velocity_init = vinit == "gibbs" ? InitialVelocity::gibbs : InitialVelocity::fixed;
        rc.seed = ctx.seed + 0x9e3779b97f4a7c15ull * ++stream;
        rc.threads = ctx.threads;
        if (!is_discrete(rc.scheme)) rc.dt = c.real("dt", std::min(max_stable_dt(p), std::sqrt(s) / 20.0));
        const Ensemble e = run(rc);
        const TrajectoryStats st = trajectory_stats(e, f_star);
        for (std::size_t k = 0; k < st.times.size(); ++k) {
          stats.add({ctx.hash, fmt(s), fmt(rc.hp.alpha), name, fmt(st.times[k]), fmt(st.mean_f[k]), fmt(st.var_f[k]),
                     fmt(st.q10[k]), fmt(st.q50[k]), fmt(st.q90[k]), fmt_int(static_cast<long long>(st.n_alive[k]))});
        }
        FitOptions fo;
        fo.t_min = c.real("t_min", 0.0);
        const double nan = std::nan("");
        try {
          const DecayFit f = fit_decay(st, fo);
          fits.add({ctx.hash, fmt(s), fmt(rc.hp.alpha), name, fmt(f.lambda_hat), fmt(f.gap_hat), fmt(f.prefactor_hat),
                    fmt(f.r_squared), fmt(st.plateau), fmt(st.plateau_se)});
          r.summary.push_back(name + " s=" + pretty(s) + " alpha=" + pretty(rc.hp.alpha) + ": lambda_hat = " + pretty(f.lambda_hat));
        } catch (const FitUnreliableError& err) {
          fits.add({ctx.hash, fmt(s), fmt(rc.hp.alpha), name, fmt(nan), fmt(nan), fmt(nan), fmt(nan), fmt(st.plateau),
                    fmt(st.plateau_se)});
          r.warnings.push_back(name + " s=" + fmt(s) + " alpha=" + fmt(rc.hp.alpha) + ": " + err.what());
        }
      }
    }
  }
  r.tables.push_back({"simulate_stats.csv", stats});
  r.tables.push_back({"simulate_fit.csv", fits});
  return r;
}

Report run_spectral(const Context& ctx) {
  const auto& c = ctx.config;
  const Potential p = potential_from(c, "quadratic");
  const int nx = static_cast<int>(c.integer("nx", 150)), nv = static_cast<int>(c.integer("nv", 150));
  const int k = static_cast<int>(c.integer("k", 6));
  const std::string tr = c.text("transport", "upwind2");
  if (tr != "upwind1" && tr != "upwind2") throw ValidationError("transport must be upwind1 or upwind2");
  EigenOptions eo;
  eo.tol = c.real("tol", eo.tol);
  CsvTable t({"config_hash", "s", "alpha", "mu", "beta", "n", "re", "im", "residual", "kernel"});
  std::vector<double> inv_beta, log_gap;
  Report r;
  for (double s : c.reals("s", {0.04})) {
    for (double a : c.reals("alpha", {2.0 / 3.0})) {
      const Hyperparams hp = derive(s, a);
      const PhaseGrid g = gibbs_phase_grid(p, hp.beta, nx, nv, c.real("depth", 16.0));
      const OperatorMatrix op = assemble_kramers(p, hp, g, tr == "upwind1" ? Transport::upwind1 : Transport::upwind2);
      if (c.integer("export_matrix", 0) != 0) {
        const auto path = ctx.out / ("kramers_s" + fmt(s) + "_a" + fmt(a) + ".coo");
        auto tmp = path;
        tmp += ".tmp";
        write_coo(op.A, tmp.string());
        std::filesystem::rename(tmp, path);
      }
      const SpectralResult res = smallest_eigenvalues(op, k, eo);
      for (int i = 0; i < k; ++i) {
        const auto z = res.eigenvalues[static_cast<std::size_t>(i)];
        t.add({ctx.hash, fmt(s), fmt(a), fmt(hp.mu), fmt(hp.beta), fmt_int(i), fmt(z.real()), fmt(z.imag()),
               fmt(res.residuals[static_cast<std::size_t>(i)]), i == res.kernel_index ? "1" : "0"});
      }
      if (res.kernel_index < 0) r.warnings.push_back("s=" + fmt(s) + " alpha=" + fmt(a) + ": kernel not identified");
      const double gap = spectral_gap(res);
      r.summary.push_back("s=" + pretty(s) + " alpha=" + pretty(a) + ": zeta_1 = " + pretty(gap));
      if (gap > 0) {
        inv_beta.push_back(1.0 / hp.beta);
        log_gap.push_back(std::log(gap));
      }
    }
  }
  r.tables.push_back({"spectral.csv", t});
  if (inv_beta.size() >= 2) {
    const auto [slope, icpt, r2] = ols(inv_beta, log_gap);
    CsvTable sl({"config_hash", "points", "slope", "intercept", "r_squared", "implied_barrier"});
    sl.add({ctx.hash, fmt_int(static_cast<long long>(inv_beta.size())), fmt(slope), fmt(icpt), fmt(r2), fmt(-slope / 2.0)});
    r.tables.push_back({"slope.csv", sl});
    r.summary.push_back("ln zeta_1 vs 1/beta slope = " + pretty(slope) + " (barrier " + pretty(-slope / 2.0) + ")");
  }
  return r;
}

Report run_certify(const Context& ctx) {
  const auto& c = ctx.config;
  const Potential p = potential_from(c, "quadratic");
  const Hyperparams hp = derive(c.real("s", 0.04), c.real("alpha", 2.0 / 3.0));
  const int nx = static_cast<int>(c.integer("nx", 150)), nv = static_cast<int>(c.integer("nv", 150));
  const PhaseGrid g = gibbs_phase_grid(p, hp.beta, nx, nv);
  const PoincareEstimate pe = poincare_estimate(p, hp.beta, g);
  const double C = c.has("villani_C") ? c.real("villani_C", 0.0) : villani_diagnostics(p, hp.s, 64).estimated_C;
  const KappaConstants kc = kappa_constants(C, 1, hp.beta, hp.s);
  SearchOptions so;
  so.points_per_axis = static_cast<int>(c.integer("lattice", so.points_per_axis));
  const Certificate cert = certificate_search(kc, hp.mu, pe.chi, so);

  Report r;
  if (pe.cluster_warning) r.warnings.push_back(pe.warning);
  CsvTable t({"config_hash", "quantity", "value"});
  auto put = [&](const std::string& k, double v) { t.add({ctx.hash, k, fmt(v)}); };
  put("s", hp.s);
  put("alpha", hp.alpha);
  put("mu", hp.mu);
  put("beta", hp.beta);
  put("villani_C", C);
  put("kappa1", cert.kappa1);
  put("kappa2", cert.kappa2);
  put("kappa3", cert.kappa3);
  put("chi", cert.chi);
  put("a", cert.a);
  put("b", cert.b);
  put("c", cert.c);
  put("M", cert.M);
  put("M_required", cert.M_required);
  put("C1", cert.C1);
  put("C2", cert.C2);
  put("lambda_lower", cert.lambda_lower);
  put("feasible", cert.feasible ? 1.0 : 0.0);
  put("K1_min_eigenvalue", cert.positivity.K1_min_eigenvalue);
  put("L_min_eigenvalue", cert.positivity.L_min_eigenvalue);
  double zeta = std::nan("");
  if (c.integer("compare_gap", 1) != 0) {
    zeta = spectral_gap(smallest_eigenvalues(assemble_kramers(p, hp, g), 4));
    put("zeta_1", zeta);
  }
  CsvTable m({"config_hash", "inequality", "margin"});
  for (std::size_t i = 0; i < cert.positivity.margins.size(); ++i) {
    m.add({ctx.hash, cert.positivity.labels[i], fmt(cert.positivity.margins[i])});
  }
  r.tables.push_back({"certificate.csv", t});
  r.tables.push_back({"margins.csv", m});
  if (!cert.feasible) r.warnings.push_back("no feasible (a, b, c) on the lattice; best margin " + fmt(cert.best_margin));
  if (!cert.M_dominates) {
    r.warnings.push_back("M = " + fmt(cert.M) + " is below max{1, sqrt(mu), sqrt(kappa3)} = " + fmt(cert.M_required));
  }
  r.summary.push_back("a=" + pretty(cert.a) + " b=" + pretty(cert.b) + " c=" + pretty(cert.c) + " M=" + pretty(cert.M));
  r.summary.push_back("chi = " + pretty(cert.chi) + ", lambda_lower = " + pretty(cert.lambda_lower));
  for (std::size_t i = 0; i < cert.positivity.margins.size(); ++i) {
    r.summary.push_back("  " + cert.positivity.labels[i] + " margin " + pretty(cert.positivity.margins[i]));
  }
  if (!std::isnan(zeta)) {
    r.summary.push_back("spectral zeta_1 = " + pretty(zeta) + (cert.lambda_lower <= zeta ? " (bound holds)" : " (BOUND VIOLATED)"));
  }
  return r;
}

Report run_reproduce(const Context& ctx) {
  const auto& c = ctx.config;
  Report r;
  if (ctx.target == "figure3") {
    CsvTable t({"config_hash", "alpha", "beta_multiplier"});
    for (double a : {0.5, 0.9, 0.99}) {
      t.add({ctx.hash, fmt(a), fmt(beta_multiplier(a))});
      r.summary.push_back("alpha=" + pretty(a) + " multiplier " + pretty(beta_multiplier(a)));
    }
    r.tables.push_back({"figure3.csv", t});
  } else if (ctx.target == "section32") {
    CsvTable t({"config_hash", "scheme", "s", "alpha", "k_computed", "k_reference", "ratio", "within_factor_3"});
    struct Ref {
      const char* scheme;
      double s, alpha, ref;
    };
    for (const Ref& q : {Ref{"sgdm", 0.1, 0.9, 2.5e1}, Ref{"sgdm", 0.001, 0.9, 1.5e9}, Ref{"sgd", 0.1, 0.0, 2.5e2},
                         Ref{"sgd", 0.001, 0.0, 2.5e47}}) {
      if (std::string(q.scheme) == "sgd") {
        t.add({ctx.hash, q.scheme, fmt(q.s), fmt(q.alpha), "", fmt(q.ref), "", ""});
        continue;
      }
      const double k = stabilization_k(q.s, q.alpha);
      const double ratio = k / q.ref;
      const bool ok = ratio <= 3.0 && ratio >= 1.0 / 3.0;
      t.add({ctx.hash, q.scheme, fmt(q.s), fmt(q.alpha), fmt(k), fmt(q.ref), fmt(ratio), ok ? "1" : "0"});
      r.summary.push_back("k(" + pretty(q.s) + ", " + pretty(q.alpha) + ") = " + pretty(k) + " vs " + pretty(q.ref) + (ok ? " ok" : " FAIL"));
    }
    r.tables.push_back({"section32.csv", t});
  } else if (ctx.target == "ratio_demo") {
    const double H = c.real("barrier", 0.1577);
    CsvTable t({"config_hash", "s", "alpha", "barrier", "sgdm_over_sgd", "robustness_exponent"});
    for (double s : c.reals("s", {0.01, 0.02, 0.05, 0.1})) {
      for (double a : c.reals("alpha", {1.0 / 3.0, 0.5, 0.9})) {
        const RateRatios q = rate_ratios(s, a, H, s, 2.0 * s);
        t.add({ctx.hash, fmt(s), fmt(a), fmt(H), fmt(q.sgdm_over_sgd), fmt(q.robustness_exponent)});
      }
    }
    r.tables.push_back({"ratio_demo.csv", t});
    r.summary.push_back(std::to_string(t.rows()) + " ratio rows");
  } else {
    throw UsageError("unknown reproduce target '" + ctx.target + "' (figure3, section32, ratio_demo)");
  }
  return r;
}

unsigned resolve_threads(const std::optional<unsigned>& flag, const Config& cfg) {
  if (flag) {
    if (*flag == 0) throw ValidationError("--threads must be positive");
    return *flag;
  }
  if (const char* env = std::getenv("MOMENTUM_LAB_THREADS"); env && *env) {
    const long v = parse_integer(env);
    if (v <= 0) throw ValidationError("MOMENTUM_LAB_THREADS must be positive");
    return static_cast<unsigned>(v);
  }
  const long v = cfg.integer("threads", 1);
  if (v <= 0) throw ValidationError("threads must be positive");
  return static_cast<unsigned>(v);
}

int execute(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Context ctx;
    ctx.command = opt.command;
    ctx.target = opt.target;
    const Schema schema = schema_for(opt.command);
    if (!opt.config_path.empty()) {
      ctx.config = Config::load(opt.config_path, schema);
    } else {
      ctx.config = Config::parse("", schema);
    }
    if (opt.seed) ctx.config.set("seed", std::to_string(*opt.seed));
    const long seed = ctx.config.integer("seed", 0);
    if (seed < 0) throw ValidationError("seed must be non-negative");
    ctx.seed = static_cast<std::uint64_t>(seed);
    ctx.threads = resolve_threads(opt.threads, ctx.config);
    ctx.hash = hex64(fnv1a(opt.command + "\n" + opt.target + "\n" + ctx.config.canonical()));
    ctx.out = opt.out;
    std::filesystem::create_directories(ctx.out);

    Report rep;
    if (opt.command == "morse") rep = run_morse(ctx);
    else if (opt.command == "rates") rep = run_rates(ctx);
    else if (opt.command == "simulate") rep = run_simulate(ctx);
    else if (opt.command == "spectral") rep = run_spectral(ctx);
    else if (opt.command == "certify") rep = run_certify(ctx);
    else if (opt.command == "reproduce") rep = run_reproduce(ctx);

    nlohmann::json files = nlohmann::json::array();
    for (const auto& t : rep.tables) {
      write_atomic(ctx.out / t.file, t.csv.render());
      files.push_back(t.file);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json m{{"command", opt.command},
                     {"target", opt.target},
                     {"config_hash", ctx.hash},
                     {"config", ctx.config.canonical()},
                     {"seed", ctx.seed},
                     {"threads", ctx.threads},
                     {"version", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__},
                     {"wall_seconds", wall},
                     {"files", files},
                     {"warnings", rep.warnings}};
    write_atomic(ctx.out / "manifest.json", m.dump(2) + "\n");
    if (!opt.quiet) {
      for (const auto& line : rep.summary) out << line << "\n";
      for (const auto& w : rep.warnings) err << "warning: " << w << "\n";
    }
    return 0;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "validation error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mlab::cli
