// Command line driver: verification suites, scale-factor runs, phase-space
// sampling, self-consistent particle runs, and convergence studies.
//
// Exit codes: 0 all checks passed, 1 at least one check failed, 2 usage error.
// Every run writes a schema "v1" JSON manifest into the output directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kurth/ensemble.hpp"
#include "kurth/family.hpp"
#include "kurth/manifest.hpp"
#include "kurth/moments.hpp"
#include "kurth/phi_ode.hpp"
#include "kurth/steady.hpp"

namespace {

using namespace kurth;

struct Options {
  double eps = 0.3;
  double alpha = 1.0;
  long n = 100000;
  double dt = 0.0;    // 0: derived from the period
  long steps = 0;     // 0: subcommand default
  double tol = 0.0;   // 0: per-check defaults
  std::uint64_t seed = 20250819;
  int threads = 1;
  std::string out = "runs";
  double t_end = 0.0;  // 0: one period when defined
  double perturb = 0.0;
  std::string suite = "all";
  std::string axis = "n";

  bool eps_given = false;
  bool tol_given = false;
};

struct Checker {
  RunManifest& man;
  bool all_pass = true;

  // pass when |value| <= tol
  void below(const std::string& name, double value, double tol) {
    const bool ok = std::abs(value) <= tol;
    record(name, value, tol, ok);
  }
  // pass when value > tol (sensitivity probes)
  void above(const std::string& name, double value, double tol) {
    const bool ok = value > tol;
    record(name, value, tol, ok);
  }
  void record(const std::string& name, double value, double tol, bool ok) {
    man.checks.push_back({name, value, tol, ok});
    all_pass = all_pass && ok;
    std::printf("%s  %-46s %11.4e  (tol %.2e)\n", ok ? "PASS" : "FAIL",
                name.c_str(), value, tol);
  }
};

double pick_tol(const Options& o, double def) {
  return o.tol_given ? o.tol : def;
}

// physical phase-space point of the family member at time t whose image under
// the rescaling is the given steady-state point
PhaseVec family_point(const PhaseVec& steady_pt, double phi, double phidot) {
  return {phi * steady_pt.x, steady_pt.v / phi + phidot * steady_pt.x};
}

std::vector<PhaseVec> interior_points(long count, std::uint64_t seed) {
  ParticleEnsemble ens = sample_kurth(count, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<PhaseVec> pts;
  pts.reserve(count);
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    if (!(ens.r[i] > 0.0)) continue;
    pts.push_back(embed_isotropic({ens.r[i], ens.p_r[i], ens.beta[i]}, rng));
  }
  return pts;
}

// ---------------------------------------------------------------- verify core

void verify_core(const Options& o, Checker& ck) {
  // uniform density of the steady model
  const double rho0 = 3.0 / (4.0 * kPi);
  const SqrtProfile q{};
  const auto U = [](double r) { return potential_U(r); };
  double derr = 0.0;
  for (double r = 0.1; r < 0.95; r += 0.1)
    derr = std::max(derr, std::abs(density_from_distribution(q, U, r) - rho0));
  ck.below("steady-density-uniform", derr, pick_tol(o, 1e-10));
  double dout = 0.0;
  for (const double r : {1.0001, 1.2, 2.0, 5.0})
    dout = std::max(dout, std::abs(density_from_distribution(q, U, r)));
  ck.below("steady-density-vanishes-outside", dout, 0.0);

  // reduced (p_r, beta) integration against direct velocity quadrature
  double cov = 0.0;
  for (const double r : {0.15, 0.45, 0.8})
    cov = std::max(cov, change_of_variables_check(r));
  ck.below("velocity-measure-reduction", cov, pick_tol(o, 1e-9));

  // gradients versus central differences
  std::mt19937_64 rng(o.seed);
  const auto pts = interior_points(64, o.seed);
  double gerr = 0.0;
  const double h = 1e-6;
  for (const PhaseVec& p : pts) {
    if (eval_Q(p) <= 0.0) continue;
    const GradQ g = grad_Q(p);
    for (int k = 0; k < 3; ++k) {
      PhaseVec a = p, b = p;
      a.x[k] += h;
      b.x[k] -= h;
      if (eval_Q(a) <= 0.0 || eval_Q(b) <= 0.0) continue;
      gerr = std::max(gerr,
                      std::abs((eval_Q(a) - eval_Q(b)) / (2 * h) - g.dx[k]) /
                          std::max(1.0, std::abs(g.dx[k])));
      a = p;
      b = p;
      a.v[k] += h;
      b.v[k] -= h;
      if (eval_Q(a) <= 0.0 || eval_Q(b) <= 0.0) continue;
      gerr = std::max(gerr,
                      std::abs((eval_Q(a) - eval_Q(b)) / (2 * h) - g.dv[k]) /
                          std::max(1.0, std::abs(g.dv[k])));
    }
  }
  // Fixed tolerance: the bound is the central-difference truncation floor of
  // the probe itself, not a property of the identity under test, so the
  // --tol override (meant for identity residuals) does not apply.
  ck.below("gradient-vs-finite-difference", gerr, 1e-5);

  // inside the unit ball the support bracket equals -2(1+e) + beta
  double serr = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double r = 0.05 + 0.9 * uniform01(rng);
    const double p = 2.0 * uniform01(rng) - 1.0;
    const double beta = uniform01(rng) * r * r;
    const RadialState s{r, p, beta};
    serr = std::max(serr, std::abs(support_F(s).F -
                                   (-2.0 * (1.0 + energy(s)) + beta)));
  }
  ck.below("support-bracket-energy-identity", serr, pick_tol(o, 1e-13));
}

// ----------------------------------------------------------------- verify phi

void verify_phi(const Options& o, Checker& ck) {
  std::vector<double> eps_list = {0.1, 0.3, 0.6, 0.9};
  if (o.eps_given) eps_list = {o.eps};
  double perr = 0.0, eerr = 0.0, terr = 0.0;
  for (const double e : eps_list) {
    if (!(std::abs(e) < 1.0) || e == 0.0) continue;
    const double T = period(e);
    const PhiTrajectory traj = integrate_phi(1.0, e, 1.1 * T);
    if (traj.detected_period)
      perr = std::max(perr, std::abs(*traj.detected_period - T) / T);
    else
      perr = std::max(perr, 1.0);
    for (double t = 0.0; t <= traj.t_end; t += traj.t_end / 64)
      eerr = std::max(eerr, std::abs(traj.energy_at(t) - traj.energy0));
    const auto tp = traj.turning_points();
    if (tp) {
      // Coarse scan of the dense interpolant, then a fine rescan around each
      // extremum: the quadratic miss of the coarse grid alone is visible at
      // slow periods.
      const double h = T / 4096;
      double lo = 1e300, hi = 0.0, t_lo = 0.0, t_hi = 0.0;
      for (double t = 0.0; t <= traj.t_end; t += h) {
        const double p = traj.phi_at(t);
        if (p < lo) { lo = p; t_lo = t; }
        if (p > hi) { hi = p; t_hi = t; }
      }
      for (int i = -128; i <= 128; ++i) {
        const double f = h / 128.0 * i;
        const double a = std::clamp(t_lo + f, 0.0, traj.t_end);
        const double b = std::clamp(t_hi + f, 0.0, traj.t_end);
        lo = std::min(lo, traj.phi_at(a));
        hi = std::max(hi, traj.phi_at(b));
      }
      terr = std::max(terr, std::abs(lo - tp->first));
      terr = std::max(terr, std::abs(hi - tp->second));
    }
  }
  ck.below("period-detected-vs-closed-form", perr, pick_tol(o, 1e-6));
  ck.below("energy-first-integral-drift", eerr, pick_tol(o, 1e-9));
  ck.below("turning-points-vs-extrema", terr, pick_tol(o, 1e-5));

  // the equilibrium stays put and has no period
  const PhiTrajectory eq = integrate_phi(1.0, 0.0, 10.0);
  double eq_err = 0.0;
  for (double t = 0.0; t <= 10.0; t += 0.25)
    eq_err = std::max(eq_err, std::abs(eq.phi_at(t) - 1.0));
  ck.below("equilibrium-stays-constant", eq_err, pick_tol(o, 1e-12));
  ck.record("equilibrium-has-no-period", eq.detected_period ? 1.0 : 0.0, 0.0,
            !eq.detected_period);

  // fixed-step integrator agrees with the adaptive one
  const PhiTrajectory a = integrate_phi(1.0, 0.3, 5.0);
  const PhiTrajectory l = integrate_phi_leapfrog(1.0, 0.3, 5.0, 1e-4);
  const double cross = std::abs(a.phi_at(5.0) - l.phi_at(5.0));
  ck.below("leapfrog-vs-adaptive", cross, pick_tol(o, 1e-6));
}

// -------------------------------------------------------------- verify family

void verify_family(const Options& o, Checker& ck) {
  const double e = (o.eps_given && std::abs(o.eps) < 1.0 && o.eps != 0.0)
                       ? o.eps
                       : 0.3;
  const double T = period(e);
  const PhiTrajectory traj = integrate_phi(1.0, e, 1.05 * T);
  std::mt19937_64 rng(o.seed);

  double jerr = 0.0, ferr = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = uniform01(rng) * T;
    const PhiState s = traj.eval(t);
    jerr = std::max(jerr, std::abs(lambda_jacobian_det(s.phi, s.phidot) - 1.0));
    const double r = 0.1 + 2.0 * uniform01(rng);
    const double p = 2.0 * uniform01(rng) - 1.0;
    const Eigen::Vector2d res = hamiltonian_flow_residual(
        r, p, s.phi, s.phidot, phi_rhs(s.phi, 1.0));
    ferr = std::max({ferr, std::abs(res[0]), std::abs(res[1])});
  }
  ck.below("rescaling-jacobian-unity", jerr, pick_tol(o, 1e-12));
  ck.below("hamiltonian-flow-residual", ferr, pick_tol(o, 1e-10));

  const auto pts = interior_points(500, o.seed);
  double vmax = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double t = (i % 9) * T / 8.0;
    const PhiState s = traj.eval(t);
    const PhaseVec phys = family_point(pts[i], s.phi, s.phidot);
    vmax = std::max(vmax, std::abs(vlasov_residual(phys, t, traj).relative()));
  }
  ck.below("vlasov-residual-relative", vmax, pick_tol(o, 1e-9));

  double umax = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = uniform01(rng) * T;
    const double phi = traj.phi_at(t);
    const double r = (i % 2 == 0) ? phi * (0.05 + 0.9 * uniform01(rng))
                                  : phi * (1.0 + 3.0 * uniform01(rng));
    umax = std::max(umax, std::abs(umd_residual(r, phi)));
  }
  ck.below("time-dependent-force-identity", umax, pick_tol(o, 1e-12));

  const TransformFields fields = kurth_fields(traj);
  double amax = 0.0, rmax = 0.0, fdmax = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double t = uniform01(rng) * T;
    const PhiState s = traj.eval(t);
    const double r = s.phi * (0.05 + 0.9 * uniform01(rng));
    const double p = 2.0 * uniform01(rng) - 1.0;
    const double D = force_family(r, s.phi);
    const Eigen::Vector3d res = ansatz_residual(fields, t, r, p, D);
    amax = std::max({amax, std::abs(res[0]), std::abs(res[1]),
                     std::abs(res[2])});
    rmax = std::max(rmax, std::abs(reconstruction_residual(fields, t, r, p)));
    // analytic partials versus the central-difference fallback
    TransformFields fd;
    fd.R = fields.R;
    fd.P = fields.P;
    fdmax = std::max(fdmax, std::abs(fd.dR_dt(t, r, p) - fields.dR_dt(t, r, p)));
    fdmax = std::max(fdmax, std::abs(fd.dP_dt(t, r, p) - fields.dP_dt(t, r, p)));
    fdmax = std::max(fdmax, std::abs(fd.dP_dr(t, r, p) - fields.dP_dr(t, r, p)));
    fdmax = std::max(fdmax, std::abs(fd.dP_dp(t, r, p) - fields.dP_dp(t, r, p)));
  }
  ck.below("transformed-equation-coefficients", amax, pick_tol(o, 1e-11));
  ck.below("momentum-reconstruction-identity", rmax, pick_tol(o, 1e-11));
  // Fixed tolerance, as for gradient-vs-finite-difference: bounded by the
  // difference probe's truncation floor, not by the identities.
  ck.below("analytic-vs-numeric-partials", fdmax, 1e-5);
}

// ------------------------------------------------------------- verify moments

void verify_moments(const Options& o, Checker& ck) {
  const double e = (o.eps_given && std::abs(o.eps) < 1.0 && o.eps != 0.0)
                       ? o.eps
                       : 0.6;
  const double T = period(e);
  const PhiTrajectory traj = integrate_phi(1.0, e, 1.05 * T);

  double derr = 0.0, dout = 0.0;
  for (const double frac : {0.0, 0.25, 0.4, 0.5, 0.75}) {
    const double t = frac * T;
    const double phi = traj.phi_at(t);
    const double expect = 3.0 / (4.0 * kPi * phi * phi * phi);
    for (const double x : {0.2, 0.5, 0.9})
      derr = std::max(derr,
                      std::abs(density_family(traj, t, x * phi) - expect));
    dout = std::max(dout, std::abs(density_family(traj, t, 1.01 * phi)));
  }
  ck.below("family-density-scaling", derr, pick_tol(o, 1e-10));
  ck.below("family-density-vanishes-outside", dout, 0.0);

  // enclosed mass of the exact density is 1 (node placed on the edge)
  const auto rho = [](double r) {
    return (r < 1.0) ? 3.0 / (4.0 * kPi) : 0.0;
  };
  const RadialField f = radial_field_from_density(rho, uniform_grid(2.0, 256));
  ck.below("steady-mass-unity", f.total_mass - 1.0, pick_tol(o, 1e-12));
  double ferr = std::abs(f.force(0.5) - 0.5);
  ferr = std::max(ferr, std::abs(f.force(1.5) - 1.0 / 2.25));
  ferr = std::max(ferr, std::abs(f.force(3.0) - 1.0 / 9.0));
  ck.below("field-force-vs-analytic", ferr, pick_tol(o, 1e-5));
}

// ------------------------------------------------------------- verify theorem

void verify_theorem(const Options& o, Checker& ck) {
  const double e = (std::abs(o.eps) < 1.0 && o.eps != 0.0) ? o.eps : 0.3;
  const double T = period(e);
  const PhiTrajectory traj = integrate_phi(1.0, e, 1.1 * T);

  // the scale factor is periodic with the closed-form period
  double perr = 1.0;
  if (traj.detected_period) perr = std::abs(*traj.detected_period - T) / T;
  ck.below("family-period", perr, pick_tol(o, 1e-6));

  // the member solves the transport equation everywhere inside its support
  const auto pts = interior_points(1000, o.seed);
  double vmax = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double t = (i % 11) * T / 10.0;
    const PhiState s = traj.eval(t);
    vmax = std::max(vmax,
                    std::abs(vlasov_residual(family_point(pts[i], s.phi, s.phidot),
                                             t, traj)
                                 .relative()));
  }
  ck.below("vlasov-residual-relative", vmax, pick_tol(o, 1e-9));

  // uniform density of the correct amplitude and support at every time
  double derr = 0.0;
  for (const double frac : {0.1, 0.37, 0.5, 0.81}) {
    const double t = frac * T;
    const double phi = traj.phi_at(t);
    const double expect = 3.0 / (4.0 * kPi * phi * phi * phi);
    for (const double x : {0.25, 0.6, 0.95})
      derr = std::max(derr,
                      std::abs(density_family(traj, t, x * phi) - expect));
    const RadialField f = radial_field_from_density(
        [&](double r) { return rho_family(r, phi); }, uniform_grid(phi, 128));
    derr = std::max(derr, std::abs(f.total_mass - 1.0));
  }
  ck.below("family-density-and-mass", derr, pick_tol(o, 1e-9));

  // separation constant recovered from the scale factor alone
  const double ep = std::abs(e) >= 0.25 ? e : 0.3;
  const PhiTrajectory probe = integrate_phi(o.alpha, ep, 25.0);
  double smax = 0.0, smin_pert = 1e300;
  int used = 0;
  for (double t = 0.0; t <= probe.t_end && used < 64; t += probe.t_end / 256) {
    const PhiState s = probe.eval(t);
    if (std::abs(s.phi - 1.0) < 0.2) continue;
    ++used;
    const double a = 1.0 / s.phi;
    const double adot = -s.phidot / (s.phi * s.phi);
    const double dd = phi_rhs(s.phi, o.alpha);
    const double addot = -dd / (s.phi * s.phi) +
                         2.0 * s.phidot * s.phidot / (s.phi * s.phi * s.phi);
    smax = std::max(smax,
                    std::abs(separation_constant(a, adot, addot) - o.alpha));
    if (o.perturb != 0.0) {
      const double addot_p = -dd * (1.0 + o.perturb) / (s.phi * s.phi) +
                             2.0 * s.phidot * s.phidot /
                                 (s.phi * s.phi * s.phi);
      smin_pert = std::min(
          smin_pert,
          std::abs(separation_constant(a, adot, addot_p) - o.alpha));
    }
  }
  ck.below("separation-constant-recovery", smax, pick_tol(o, 1e-8));
  if (o.perturb != 0.0)
    ck.above("separation-constant-perturbed-probe", smin_pert, 1e-4);
}

// ------------------------------------------------------------------- commands

int cmd_verify(Options& o, RunManifest& man) {
  Checker ck{man};
  const bool all = o.suite == "all";
  if (all || o.suite == "core") verify_core(o, ck);
  if (all || o.suite == "phi") verify_phi(o, ck);
  if (all || o.suite == "family") verify_family(o, ck);
  if (all || o.suite == "moments") verify_moments(o, ck);
  if (all || o.suite == "theorem") verify_theorem(o, ck);
  std::size_t passed = 0;
  for (const auto& c : man.checks) passed += c.pass;
  std::printf("verify %s: %zu/%zu checks passed\n", o.suite.c_str(), passed,
              man.checks.size());
  man.pass = ck.all_pass;
  return ck.all_pass ? 0 : 1;
}

int cmd_phi(Options& o, RunManifest& man) {
  Checker ck{man};
  double t_end = o.t_end;
  const bool periodic = std::abs(o.eps) < 1.0 && o.eps != 0.0 && o.alpha == 1.0;
  if (t_end <= 0.0) t_end = periodic ? period(o.eps) : 10.0;
  const PhiTrajectory traj = integrate_phi(o.alpha, o.eps, t_end,
                                           o.tol_given ? o.tol : 1e-10);
  const long rows = o.steps > 0 ? o.steps : 1000;
  std::vector<std::vector<double>> table;
  table.reserve(rows + 1);
  double eerr = 0.0;
  for (long i = 0; i <= rows; ++i) {
    const double t = t_end * static_cast<double>(i) / rows;
    const PhiState s = traj.eval(t);
    const double en = phi_energy(s.phi, s.phidot, o.alpha);
    eerr = std::max(eerr, std::abs(en - traj.energy0));
    table.push_back({t, s.phi, s.phidot, phi_rhs(s.phi, o.alpha), en});
  }
  const std::string csv = o.out + "/phi-trajectory.csv";
  write_csv(csv, {"t", "phi", "phidot", "phiddot", "energy"}, table);
  man.outputs.push_back(csv);
  std::printf("wrote %s (%ld rows)\n", csv.c_str(), rows + 1);
  ck.below("energy-first-integral-drift", eerr, 1e-9);
  if (periodic) {
    const double T = period(o.eps);
    std::printf("closed-form period %.12f\n", T);
    if (traj.detected_period && t_end >= T) {
      std::printf("detected period    %.12f\n", *traj.detected_period);
      ck.below("period-detected-vs-closed-form",
               (*traj.detected_period - T) / T, 1e-6);
    }
  }
  man.pass = ck.all_pass;
  return ck.all_pass ? 0 : 1;
}

int cmd_sample(Options& o, RunManifest& man) {
  Checker ck{man};
  const ParticleEnsemble ens = sample_family_initial(o.eps, o.n, o.seed);
  std::vector<std::vector<double>> table;
  table.reserve(ens.size());
  for (Eigen::Index i = 0; i < ens.size(); ++i)
    table.push_back({ens.r[i], ens.p_r[i], ens.beta[i], ens.w[i]});
  const std::string csv = o.out + "/sample-ensemble.csv";
  write_csv(csv, {"r", "p_r", "beta", "w"}, table);
  man.outputs.push_back(csv);
  std::printf("wrote %s (%ld particles)\n", csv.c_str(),
              static_cast<long>(ens.size()));
  // compensated sum of the weights
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    const double y = ens.w[i] - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  ck.below("weights-sum-to-unity", sum - 1.0, 1e-12);
  long outside = 0;
  for (Eigen::Index i = 0; i < ens.size(); ++i)
    if (!(eval_f_radial({ens.r[i], ens.p_r[i], ens.beta[i]}, 1.0, o.eps) > 0.0))
      ++outside;
  ck.below("samples-inside-support", static_cast<double>(outside), 0.0);
  man.pass = ck.all_pass;
  return ck.all_pass ? 0 : 1;
}

int cmd_simulate(Options& o, RunManifest& man) {
  Checker ck{man};
  if (!(std::abs(o.eps) < 1.0))
    throw std::invalid_argument("simulate: requires |eps| < 1");
  const double T = o.eps != 0.0 ? period(o.eps) : 2.0 * kPi;
  PicConfig cfg;
  cfg.steps = o.steps > 0 ? o.steps : 2000;
  cfg.dt = o.dt > 0.0 ? o.dt : T / cfg.steps;
  cfg.grid_cells = 256;
  const double phi_max =
      o.eps != 0.0
          ? integrate_phi(1.0, o.eps, 0.0).turning_points()->second
          : 1.0;
  cfg.grid_max = 1.5 * phi_max;
  cfg.snapshot_every = std::max<long>(1, cfg.steps / 20);
  cfg.policy.threads = o.threads;
  const double t_total = cfg.dt * cfg.steps;

  const PhiTrajectory traj = integrate_phi(1.0, o.eps, t_total + 1e-9);
  ParticleEnsemble ens = sample_family_initial(o.eps, o.n, o.seed);
  const Eigen::ArrayXd r0 = ens.r;
  const PicResult res = evolve_selfconsistent(ens, cfg);

  const double q95 = std::cbrt(0.95);
  std::vector<std::vector<double>> table;
  double track = 0.0;
  for (const PicSnapshot& s : res.snapshots) {
    const double phi = traj.phi_at(s.t);
    const double proxy = radius_percentile(s.r, 0.95) / q95;
    track = std::max(track, std::abs(proxy - phi) / phi);
    table.push_back({s.t, phi, proxy, radius_percentile(s.r, 0.5), s.kinetic,
                     s.potential, s.kinetic + s.potential});
  }
  const std::string scsv = o.out + "/simulate-summary.csv";
  write_csv(scsv,
            {"t", "phi", "phi_proxy", "r_median", "kinetic", "potential",
             "total_energy"},
            table);
  man.outputs.push_back(scsv);

  // final density against the exact profile
  const Eigen::ArrayXd rho = deposit_density(ens, res.grid);
  const double phi_end = traj.phi_at(t_total);
  std::vector<std::vector<double>> dtable;
  for (Eigen::Index i = 0; i < res.grid.size(); ++i)
    dtable.push_back({res.grid[i], rho[i], rho_family(res.grid[i], phi_end)});
  const std::string dcsv = o.out + "/simulate-density.csv";
  write_csv(dcsv, {"r", "rho", "rho_exact"}, dtable);
  man.outputs.push_back(dcsv);
  std::printf("wrote %s, %s\n", scsv.c_str(), dcsv.c_str());

  ck.below("support-radius-tracks-scale-factor", track, pick_tol(o, 0.02));
  if (std::abs(t_total - T) < 1e-9 * T) {
    // Returned to the initial state, up to the Monte Carlo noise of the
    // method: per-step shot noise in the binned force is amplified over the
    // run, so the floor is measured by evolving a second independently
    // seeded ensemble through the identical pipeline. Systematic non-return
    // appears in evolved-vs-initial but cancels from evolved-vs-evolved.
    ParticleEnsemble twin = sample_family_initial(o.eps, o.n, o.seed + 1);
    PicConfig twin_cfg = cfg;
    twin_cfg.snapshot_every = 0;
    (void)evolve_selfconsistent(twin, twin_cfg);
    const double floor_w1 = w1_distance(ens.r, twin.r);
    ck.below("density-returns-after-one-period", w1_distance(ens.r, r0),
             2.0 * floor_w1);
  }
  const double drift = std::abs(res.snapshots.back().kinetic +
                                res.snapshots.back().potential -
                                res.snapshots.front().kinetic -
                                res.snapshots.front().potential) /
                       std::abs(res.snapshots.front().kinetic +
                                res.snapshots.front().potential);
  ck.below("energy-drift-relative", drift, pick_tol(o, 0.01));
  man.pass = ck.all_pass;
  return ck.all_pass ? 0 : 1;
}

int cmd_convergence(Options& o, RunManifest& man) {
  Checker ck{man};
  if (o.axis == "n") {
    const double e = (std::abs(o.eps) < 1.0 && o.eps != 0.0) ? o.eps : 0.3;
    const double T = period(e);
    const long n_top = o.n >= 1000 ? o.n : 100000;
    const std::vector<long> ns = {n_top / 100, n_top / 10, n_top};
    std::vector<std::vector<double>> table;
    std::vector<double> lx, ly;
    for (const long n : ns) {
      PicConfig cfg;
      cfg.steps = 2000;
      cfg.dt = T / cfg.steps;
      cfg.grid_cells = 64;
      cfg.grid_max = 1.5 * integrate_phi(1.0, e, 0.0).turning_points()->second;
      cfg.policy.threads = o.threads;
      ParticleEnsemble ens = sample_family_initial(e, n, o.seed);
      PicResult res = evolve_selfconsistent(ens, cfg);
      const Eigen::ArrayXd rho = deposit_density(ens, res.grid);
      // full period: the exact profile is back to the steady one
      double err2 = 0.0;
      long cnt = 0;
      for (Eigen::Index i = 0; i < res.grid.size(); ++i) {
        if (res.grid[i] < 0.1 || res.grid[i] > 0.85) continue;
        const double d = rho[i] - 3.0 / (4.0 * kPi);
        err2 += d * d;
        ++cnt;
      }
      const double err = std::sqrt(err2 / cnt);
      table.push_back({static_cast<double>(n), err});
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(err));
      std::printf("n %8ld   density rms error %.6e\n", n, err);
    }
    const std::string csv = o.out + "/convergence-n.csv";
    write_csv(csv, {"n", "density_rms_error"}, table);
    man.outputs.push_back(csv);
    // least squares slope of log err against log n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = lx.size();
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    std::printf("monte-carlo slope %.4f (expected -0.5)\n", slope);
    ck.below("density-error-slope-plus-half", slope + 0.5, 0.15);
  } else if (o.axis == "dt") {
    // frozen steady field; one smooth orbit, halved steps
    const RadialField field = radial_field_from_density(
        [](double r) { return (r < 1.0) ? 3.0 / (4.0 * kPi) : 0.0; },
        uniform_grid(2.0, 4096));
    const double t_end = 3.0;
    const auto run = [&](double dt) {
      ParticleEnsemble e1;
      e1.r = Eigen::ArrayXd::Constant(1, 0.5);
      e1.p_r = Eigen::ArrayXd::Constant(1, 0.2);
      e1.beta = Eigen::ArrayXd::Constant(1, 0.09);
      e1.w = Eigen::ArrayXd::Constant(1, 1.0);
      const long k = std::lround(t_end / dt);
      for (long i = 0; i < k; ++i) push_particles(e1, field, dt);
      return std::pair<double, double>(e1.r[0], e1.p_r[0]);
    };
    const double dt0 = o.dt > 0.0 ? o.dt : 0.01;
    const auto ref = run(dt0 / 64);
    std::vector<std::vector<double>> table;
    std::vector<double> errs;
    for (const double dt : {dt0, dt0 / 2, dt0 / 4}) {
      const auto got = run(dt);
      const double err = std::hypot(got.first - ref.first,
                                    got.second - ref.second);
      errs.push_back(err);
      table.push_back({dt, err});
      std::printf("dt %.6f   state error %.6e\n", dt, err);
    }
    const std::string csv = o.out + "/convergence-dt.csv";
    write_csv(csv, {"dt", "state_error"}, table);
    man.outputs.push_back(csv);
    const double order = 0.5 * (std::log2(errs[0] / errs[1]) +
                                std::log2(errs[1] / errs[2]));
    std::printf("time-step order %.3f (expected 2)\n", order);
    ck.below("leapfrog-order-minus-two", order - 2.0, 0.3);
  } else if (o.axis == "quad") {
    const SqrtProfile q{};
    const auto U = [](double r) { return potential_U(r); };
    const double rho0 = 3.0 / (4.0 * kPi);
    std::vector<std::vector<double>> table;
    double last = 0.0;
    for (const int nodes : {8, 16, 32, 64, 128}) {
      double err = 0.0;
      for (const double r : {0.3, 0.5, 0.7})
        err = std::max(err,
                       std::abs(density_from_distribution(q, U, r, nodes) -
                                rho0));
      table.push_back({static_cast<double>(nodes), err});
      std::printf("nodes %4d   density error %.6e\n", nodes, err);
      last = err;
    }
    const std::string csv = o.out + "/convergence-quad.csv";
    write_csv(csv, {"nodes", "density_error"}, table);
    man.outputs.push_back(csv);
    ck.below("quadrature-error-floor", last, 1e-12);
  } else {
    throw CLI::ValidationError("--axis must be one of n, dt, quad");
  }
  man.pass = ck.all_pass;
  return ck.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Steady state and breathing solutions of the spherical "
      "collisionless-matter equations: verification, sampling, and "
      "self-consistent particle runs"};
  app.require_subcommand(1);
  Options o;

  const auto add_common = [&](CLI::App* c) {
    c->add_option("--eps", o.eps, "family parameter (initial phidot)")
        ->envname("KURTH_EPS");
    c->add_option("--alpha", o.alpha, "scale-factor equation constant")
        ->envname("KURTH_ALPHA");
    c->add_option("--n", o.n, "particle / sample count")
        ->envname("KURTH_N")
        ->check(CLI::PositiveNumber);
    c->add_option("--dt", o.dt, "time step (0: one period / steps)")
        ->envname("KURTH_DT");
    c->add_option("--steps", o.steps, "step or row count (0: default)")
        ->envname("KURTH_STEPS");
    c->add_option("--tol", o.tol, "override check tolerances")
        ->envname("KURTH_TOL");
    c->add_option("--seed", o.seed, "random number generator seed")
        ->envname("KURTH_SEED");
    c->add_option("--threads", o.threads, "worker threads for particle pushes")
        ->envname("KURTH_THREADS")
        ->check(CLI::PositiveNumber);
    c->add_option("--out", o.out, "output directory")->envname("KURTH_OUT");
  };

  CLI::App* verify = app.add_subcommand(
      "verify", "run a named verification suite (exit 1 on failure)");
  verify
      ->add_option("suite", o.suite,
                   "one of: core, phi, family, moments, theorem, all")
      ->check(CLI::IsMember({"core", "phi", "family", "moments", "theorem",
                             "all"}));
  add_common(verify);
  verify
      ->add_option("--perturb", o.perturb,
                   "relative scale-factor perturbation for the off-family "
                   "probe (theorem suite)")
      ->envname("KURTH_PERTURB");

  CLI::App* phi = app.add_subcommand(
      "phi", "integrate the scale factor and write the trajectory");
  add_common(phi);
  phi->add_option("--t-end", o.t_end, "integration horizon (0: one period)")
      ->envname("KURTH_T_END");

  CLI::App* sample =
      app.add_subcommand("sample", "draw an exact phase-space sample");
  add_common(sample);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "self-consistent particle run of a family member");
  add_common(simulate);

  CLI::App* convergence = app.add_subcommand(
      "convergence", "error scaling along one axis: n, dt, or quad");
  add_common(convergence);
  convergence->add_option("--axis", o.axis, "n | dt | quad")
      ->check(CLI::IsMember({"n", "dt", "quad"}))
      ->envname("KURTH_AXIS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  o.eps_given = app.get_subcommands().front()->count("--eps") > 0;
  o.tol_given = app.get_subcommands().front()->count("--tol") > 0;

  RunManifest man;
  man.command = app.get_subcommands().front()->get_name();
  man.params = {{"eps", format_g17(o.eps)},
                {"alpha", format_g17(o.alpha)},
                {"n", std::to_string(o.n)},
                {"dt", format_g17(o.dt)},
                {"steps", std::to_string(o.steps)},
                {"tol", format_g17(o.tol)},
                {"seed", std::to_string(o.seed)},
                {"threads", std::to_string(o.threads)},
                {"out", o.out}};
  if (man.command == "verify") {
    man.params["suite"] = o.suite;
    man.params["perturb"] = format_g17(o.perturb);
  }
  if (man.command == "convergence") man.params["axis"] = o.axis;

  std::filesystem::create_directories(o.out);
  const auto t0 = std::chrono::steady_clock::now();
  int rc = 2;
  try {
    if (man.command == "verify")
      rc = cmd_verify(o, man);
    else if (man.command == "phi")
      rc = cmd_phi(o, man);
    else if (man.command == "sample")
      rc = cmd_sample(o, man);
    else if (man.command == "simulate")
      rc = cmd_simulate(o, man);
    else if (man.command == "convergence")
      rc = cmd_convergence(o, man);
  } catch (const CLI::ValidationError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    rc = 2;
    man.pass = false;
  } catch (const std::invalid_argument& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    rc = 2;
    man.pass = false;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    rc = 1;
    man.pass = false;
  }
  man.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const std::string mpath = o.out + "/" + man.command + "-manifest.json";
  man.write(mpath);
  std::printf("manifest: %s\n", mpath.c_str());
  return rc;
}
