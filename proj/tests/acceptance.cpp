// Acceptance suite: one pass/fail line per criterion, building from the
// closed-form model through the self-consistent particle runs. Exit code 0
// when every criterion holds at its stated tolerance.

#include <kurth/ensemble.hpp>
#include <kurth/family.hpp>
#include <kurth/moments.hpp>
#include <kurth/phi_ode.hpp>
#include <kurth/steady.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace kurth;

namespace {

int g_failures = 0;
int g_index = 0;

void report(const char* name, bool pass, const std::string& detail,
            double seconds) {
  ++g_index;
  if (!pass) ++g_failures;
  std::printf("[%2d] %s  %-42s %s  [%.2f s]\n", g_index,
              pass ? "PASS" : "FAIL", name, detail.c_str(), seconds);
  std::fflush(stdout);
}

template <typename Body>
void criterion(const char* name, Body&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    const auto r = body();
    pass = r.first;
    detail = r.second;
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(name, pass, detail, dt);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
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

double kahan_sum(const Eigen::ArrayXd& v) {
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double y = v[i] - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, u[i] - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - u[i]);
  }
  return d * std::sqrt(n);
}

// ---------------------------------------------------------------- criteria

// 1: the steady density is 3/(4 pi) on the unit ball and 0 outside
std::pair<bool, std::string> c1_density() {
  const double rho0 = 3.0 / (4.0 * kPi);
  const SqrtProfile q{};
  const auto U = [](double r) { return potential_U(r); };
  double inner = 0.0;
  for (int k = 1; k <= 9; ++k) {
    const double r = 0.1 * k;
    inner = std::max(inner, std::abs(density_from_distribution(q, U, r) -
                                     rho0));
  }
  double outer = 0.0;
  for (const double r : {1.0001, 1.5, 3.0})
    outer = std::max(outer, std::abs(density_from_distribution(q, U, r)));
  const bool pass = inner <= 1e-8 && outer == 0.0;
  return {pass, fmt("max interior dev %.2e, exterior %.1e (tol 1e-8, 0)",
                    inner, outer)};
}

// 2: the scale-factor period matches 2 pi / (1 - eps^2)^{3/2}
std::pair<bool, std::string> c2_period() {
  double worst = 0.0;
  for (const double eps : {0.1, 0.3, 0.6, 0.9}) {
    const double T = period(eps);
    const PhiTrajectory traj = integrate_phi(1.0, eps, 1.15 * T);
    if (!traj.detected_period) return {false, "no period detected"};
    worst = std::max(worst, std::abs(*traj.detected_period - T) / T);
  }
  return {worst <= 1e-6, fmt("max relative period error %.2e (tol 1e-6)",
                             worst)};
}

// 3: the transported distribution satisfies the kinetic equation pointwise
std::pair<bool, std::string> c3_vlasov() {
  double worst = 0.0;
  for (const double eps : {0.3, 0.6}) {
    const double T = period(eps);
    const PhiTrajectory traj = integrate_phi(1.0, eps, T, 1e-12);
    const auto pts = interior_points(1000, 424242);
    for (int j = 0; j <= 10; ++j) {
      const double t = T * j / 10.0;
      const double phi = traj.phi_at(t);
      const double phidot = traj.phidot_at(t);
      for (const PhaseVec& p0 : pts) {
        PhaseVec pt;
        pt.x = phi * p0.x;
        pt.v = p0.v / phi + phidot * p0.x;
        const VlasovTerms terms = vlasov_residual(pt, t, traj);
        if (terms.scale == 0.0) continue;
        worst = std::max(worst, std::abs(terms.relative()));
      }
    }
  }
  return {worst <= 1e-9, fmt("max relative residual %.2e (tol 1e-9)", worst)};
}

// 4: the rescaling follows the symplectic flow of its Hamiltonian
std::pair<bool, std::string> c4_flow() {
  std::mt19937_64 gen(9090);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double r = 0.05 + uniform01(gen);
    const double p = 2.0 * uniform01(gen) - 1.0;
    const double phi = 0.5 + 2.0 * uniform01(gen);
    const double phidot = 2.0 * uniform01(gen) - 1.0;
    const double phiddot = phi_rhs(phi, 1.0);
    const Eigen::Vector2d res =
        hamiltonian_flow_residual(r, p, phi, phidot, phiddot);
    worst = std::max(worst, res.cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-10, fmt("max flow residual %.2e (tol 1e-10)", worst)};
}

// 5: the rescaling has unit phase-space Jacobian
std::pair<bool, std::string> c5_jacobian() {
  std::mt19937_64 gen(707);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double phi = 0.3 + 3.0 * uniform01(gen);
    const double phidot = 3.0 * uniform01(gen) - 1.5;
    worst = std::max(worst, std::abs(lambda_jacobian_det(phi, phidot) - 1.0));
  }
  for (const double phi : {0.625, 1.0, 2.5})
    worst = std::max(worst, std::abs(lambda_jacobian_det(phi, 0.6) - 1.0));
  return {worst <= 1e-12, fmt("max |det - 1| %.2e (tol 1e-12)", worst)};
}

// 6: the time-dependent force equals the mapped steady force on both branches
std::pair<bool, std::string> c6_force() {
  double worst = 0.0;
  for (const double phi : {0.625, 0.8, 1.0, 1.4, 2.5}) {
    for (const double frac : {0.2, 0.6, 0.95, 1.0, 1.3, 3.0}) {
      worst = std::max(worst, std::abs(umd_residual(frac * phi, phi)));
    }
  }
  return {worst <= 1e-12, fmt("max force residual %.2e (tol 1e-12)", worst)};
}

// 7: the strength parameter is recovered from the inverse scale factor,
//    and a perturbed acceleration is flagged
std::pair<bool, std::string> c7_separation() {
  double worst = 0.0;
  for (const double alpha : {0.5, 1.0, 2.0}) {
    const PhiTrajectory traj = integrate_phi(alpha, 0.35, 20.0, 1e-12);
    for (int k = 0; k <= 400; ++k) {
      const double t = 20.0 * k / 400.0;
      const PhiState s = traj.eval(t);
      if (std::abs(s.phi - 1.0) < 0.2) continue;
      const double a = 1.0 / s.phi;
      const double adot = -s.phidot / (s.phi * s.phi);
      const double addot =
          (2.0 * s.phidot * s.phidot - s.phi * phi_rhs(s.phi, alpha)) /
          (s.phi * s.phi * s.phi);
      worst = std::max(
          worst, std::abs(separation_constant(a, adot, addot) - alpha) / alpha);
    }
  }
  // sensitivity probe: a 1e-3 relative error in the acceleration must move
  // the recovered constant by more than 1e-4
  const PhiTrajectory traj = integrate_phi(1.0, 0.35, 20.0, 1e-12);
  double min_dev = 1e300;
  for (int k = 0; k <= 400; ++k) {
    const double t = 20.0 * k / 400.0;
    const PhiState s = traj.eval(t);
    if (std::abs(s.phi - 1.0) < 0.2) continue;
    const double a = 1.0 / s.phi;
    const double adot = -s.phidot / (s.phi * s.phi);
    const double addot = (2.0 * s.phidot * s.phidot -
                          s.phi * phi_rhs(s.phi, 1.0) * (1.0 + 1e-3)) /
                         (s.phi * s.phi * s.phi);
    min_dev =
        std::min(min_dev, std::abs(separation_constant(a, adot, addot) - 1.0));
  }
  const bool pass = worst <= 1e-8 && min_dev > 1e-4;
  return {pass, fmt("max recovery error %.2e (tol 1e-8), probe %.2e (> 1e-4)",
                    worst, min_dev)};
}

// 8: the exact sampler reproduces the steady law (n = 1e5)
std::pair<bool, std::string> c8_sampler() {
  const Eigen::Index n = 100000;
  const ParticleEnsemble ens = sample_kurth(n, 20250819);

  // stored total mass is exactly one; weights compensated-sum to one
  if (ens.total_mass != 1.0) return {false, "stored total mass differs from 1"};
  const double wsum_err = std::abs(kahan_sum(ens.w) - 1.0);

  // 20 equal-mass shells in r^3 within 4 sigma
  Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(20);
  std::vector<double> u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = ens.r[i] * ens.r[i] * ens.r[i];
    u[i] = v;
    counts[std::min(19, static_cast<int>(v * 20.0))] += 1.0;
  }
  const double expect = static_cast<double>(n) / 20.0;
  const double sigma = std::sqrt(static_cast<double>(n) * 0.05 * 0.95);
  double shell_dev = 0.0;
  for (int k = 0; k < 20; ++k)
    shell_dev = std::max(shell_dev, std::abs(counts[k] - expect) / sigma);

  // KS of r^3 against uniform at the 1% level
  const double ks = ks_uniform(u);

  const bool pass = wsum_err <= 1e-12 && shell_dev <= 4.0 && ks <= 1.6276;
  return {pass, fmt("worst shell %.2f sigma (tol 4), KS %.3f (tol 1.628)",
                    shell_dev, ks) +
                    fmt(", weight sum err %.1e (tol 1e-12)", wsum_err)};
}

// 9: self-consistent particle runs track the breathing family
std::pair<bool, std::string> c9_pic() {
  const std::uint64_t seed = 20250819;
  const Eigen::Index n = 100000;

  // (a) eps = 0.3: the 95%-mass radius tracks the scale factor within 2%
  const double eps = 0.3;
  const double T = period(eps);
  PicConfig cfg;
  cfg.steps = 2000;
  cfg.dt = T / cfg.steps;
  cfg.grid_cells = 256;
  cfg.grid_max = 1.5 * integrate_phi(1.0, eps, 0.0).turning_points()->second;
  cfg.snapshot_every = cfg.steps / 20;
  const PhiTrajectory traj = integrate_phi(1.0, eps, T + 1.0);
  ParticleEnsemble ens = sample_family_initial(eps, n, seed);
  const Eigen::ArrayXd r0 = ens.r;
  const PicResult res = evolve_selfconsistent(ens, cfg);
  const double q95 = std::cbrt(0.95);
  double track = 0.0;
  for (const PicSnapshot& s : res.snapshots) {
    const double phi = traj.phi_at(s.t);
    const double proxy = radius_percentile(s.r, 0.95) / q95;
    track = std::max(track, std::abs(proxy - phi) / phi);
  }

  // (b) after one full period the radius distribution returns to the initial
  // one within the Monte Carlo noise of the method itself. Shot noise in the
  // binned self-consistent force is amplified over the 2000 steps, so the
  // honest floor is measured, not guessed: evolve a second independently
  // seeded ensemble through the identical pipeline and take the distance
  // between the two evolved states. A systematic failure to return shows up
  // in evolved-vs-initial but cancels from evolved-vs-evolved. The floor must
  // itself be small for the comparison to mean anything.
  ParticleEnsemble ens_b = sample_family_initial(eps, n, seed + 1);
  (void)evolve_selfconsistent(ens_b, cfg);
  const double floor_w1 = w1_distance(ens.r, ens_b.r);
  const double return_w1 = w1_distance(ens.r, r0);
  const bool floor_sane = floor_w1 <= 5e-3;

  // (c) eps = 0: the steady state does not drift beyond twice the largest
  // pairwise distance among three independent seeds
  PicConfig cfg0;
  cfg0.steps = 2000;
  cfg0.dt = 2.0 * kPi / cfg0.steps;
  cfg0.grid_cells = 256;
  cfg0.grid_max = 1.5;
  ParticleEnsemble eq = sample_kurth(n, seed);
  const Eigen::ArrayXd eq0 = eq.r;
  (void)evolve_selfconsistent(eq, cfg0);
  const Eigen::ArrayXd sa = sample_kurth(n, seed + 11).r;
  const Eigen::ArrayXd sb = sample_kurth(n, seed + 12).r;
  const Eigen::ArrayXd sc = sample_kurth(n, seed + 13).r;
  const double floor_eq = std::max(
      {w1_distance(sa, sb), w1_distance(sa, sc), w1_distance(sb, sc)});
  const double drift_eq = w1_distance(eq.r, eq0);

  const bool pass = track <= 0.02 && floor_sane &&
                    return_w1 <= 2.0 * floor_w1 && drift_eq <= 2.0 * floor_eq;
  return {pass,
          fmt("tracking %.3f%% (tol 2%%), ", 100.0 * track) +
              fmt("return W1 %.2e (tol %.2e, floor sane %.2e <= 5e-3), ",
                  return_w1, 2.0 * floor_w1, floor_w1) +
              fmt("steady drift %.2e (tol %.2e)", drift_eq, 2.0 * floor_eq)};
}

// 10: convergence orders: Monte Carlo 1/sqrt(n) density error and
//     second-order time stepping
std::pair<bool, std::string> c10_convergence() {
  const double eps = 0.3;
  const double T = period(eps);
  const double rho0 = 3.0 / (4.0 * kPi);
  std::vector<double> lx, ly;
  for (const long n : {1000L, 10000L, 100000L}) {
    PicConfig cfg;
    cfg.steps = 2000;
    cfg.dt = T / cfg.steps;
    cfg.grid_cells = 64;
    cfg.grid_max = 1.5 * integrate_phi(1.0, eps, 0.0).turning_points()->second;
    ParticleEnsemble ens = sample_family_initial(eps, n, 20250819);
    const PicResult res = evolve_selfconsistent(ens, cfg);
    const Eigen::ArrayXd rho = deposit_density(ens, res.grid);
    double err2 = 0.0;
    long cnt = 0;
    for (Eigen::Index i = 0; i < res.grid.size(); ++i) {
      if (res.grid[i] < 0.1 || res.grid[i] > 0.85) continue;
      const double d = rho[i] - rho0;
      err2 += d * d;
      ++cnt;
    }
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(std::sqrt(err2 / cnt)));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

  // frozen-field time-step study on a smooth orbit
  const RadialField field = radial_field_from_density(
      [](double r) { return (r < 1.0) ? 3.0 / (4.0 * kPi) : 0.0; },
      uniform_grid(2.0, 4096));
  const auto run = [&](double dt) {
    ParticleEnsemble e1;
    e1.r = Eigen::ArrayXd::Constant(1, 0.5);
    e1.p_r = Eigen::ArrayXd::Constant(1, 0.2);
    e1.beta = Eigen::ArrayXd::Constant(1, 0.09);
    e1.w = Eigen::ArrayXd::Constant(1, 1.0);
    const long k = std::lround(3.0 / dt);
    for (long i = 0; i < k; ++i) push_particles(e1, field, dt);
    return std::pair<double, double>(e1.r[0], e1.p_r[0]);
  };
  const auto ref = run(0.01 / 64);
  std::vector<double> errs;
  for (const double dt : {0.01, 0.005, 0.0025}) {
    const auto got = run(dt);
    errs.push_back(
        std::hypot(got.first - ref.first, got.second - ref.second));
  }
  const double order =
      0.5 * (std::log2(errs[0] / errs[1]) + std::log2(errs[1] / errs[2]));

  const bool pass = std::abs(slope + 0.5) <= 0.15 && std::abs(order - 2.0) <= 0.3;
  return {pass, fmt("MC slope %.3f (tol -0.5 +- 0.15), ", slope) +
                    fmt("time-step order %.3f (tol 2 +- 0.3)", order)};
}

}  // namespace

int main() {
  std::printf("acceptance suite: exact breathing solutions and the "
              "self-consistent particle solver\n");
  criterion("steady-density-profile", c1_density);
  criterion("scale-factor-period", c2_period);
  criterion("kinetic-equation-residual", c3_vlasov);
  criterion("hamiltonian-flow-residual", c4_flow);
  criterion("unit-jacobian", c5_jacobian);
  criterion("time-dependent-force-identity", c6_force);
  criterion("separation-constant-recovery", c7_separation);
  criterion("exact-sampler-distribution", c8_sampler);
  criterion("self-consistent-family-run", c9_pic);
  criterion("convergence-orders", c10_convergence);
  std::printf("acceptance: %d/%d criteria passed\n", g_index - g_failures,
              g_index);
  return g_failures == 0 ? 0 : 1;
}
