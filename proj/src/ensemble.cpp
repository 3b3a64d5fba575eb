#include "kurth/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace kurth {

PhaseVec embed_isotropic(const RadialState& s, std::mt19937_64& g) {
  if (!(s.r > 0.0))
    throw std::invalid_argument("embed_isotropic: r must be > 0");
  // uniform direction for the position
  const double z = 2.0 * uniform01(g) - 1.0;
  const double az = 2.0 * kPi * uniform01(g);
  const double sz = std::sqrt(std::max(0.0, 1.0 - z * z));
  const Eigen::Vector3d e1(sz * std::cos(az), sz * std::sin(az), z);
  // random unit vector orthogonal to e1
  Eigen::Vector3d e2;
  do {
    const double z2 = 2.0 * uniform01(g) - 1.0;
    const double az2 = 2.0 * kPi * uniform01(g);
    const double s2 = std::sqrt(std::max(0.0, 1.0 - z2 * z2));
    const Eigen::Vector3d raw(s2 * std::cos(az2), s2 * std::sin(az2), z2);
    e2 = raw - raw.dot(e1) * e1;
  } while (e2.norm() < 1e-6);
  e2.normalize();
  PhaseVec out;
  out.x = s.r * e1;
  out.v = s.p_r * e1 + (std::sqrt(std::max(0.0, s.beta)) / s.r) * e2;
  return out;
}

ParticleEnsemble sample_kurth(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_kurth: n must be >= 1");
  ParticleEnsemble ens;
  ens.r.resize(n);
  ens.p_r.resize(n);
  ens.beta.resize(n);
  ens.w = Eigen::ArrayXd::Constant(n, 1.0 / static_cast<double>(n));
  ens.total_mass = 1.0;
  ens.seed = seed;
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::cbrt(uniform01(rng));  // mass uniform in the ball
    // p_r / sqrt(1 - r^2) follows a semicircle on [-1, 1]
    double s;
    for (;;) {
      s = 2.0 * uniform01(rng) - 1.0;
      const double h = uniform01(rng);
      if (h * h <= 1.0 - s * s) break;
    }
    const double p = std::sqrt(1.0 - r * r) * s;
    // conditional law of beta: CDF 1 - sqrt(1 - beta/beta0) on [0, beta0]
    const double A = 1.0 - r * r - p * p;
    const double beta0 = (r < 1.0) ? A * r * r / (1.0 - r * r) : 0.0;
    const double u = uniform01(rng);
    const double beta = beta0 * (1.0 - (1.0 - u) * (1.0 - u));
    ens.r[i] = r;
    ens.p_r[i] = p;
    ens.beta[i] = beta;
  }
  return ens;
}

ParticleEnsemble sample_family_initial(double eps, Eigen::Index n,
                                       std::uint64_t seed) {
  ParticleEnsemble ens = sample_kurth(n, seed);
  ens.p_r += eps * ens.r;
  return ens;
}

namespace {

inline double accel(double r, double beta, const RadialField& field) {
  if (r <= 0.0) return 0.0;  // only beta = 0 orbits reach the centre
  return beta / (r * r * r) - field.force(r);
}

inline void kdk(double& r, double& p, double beta, const RadialField& field,
                double h) {
  p += 0.5 * h * accel(r, beta, field);
  r += h * p;
  if (r < 0.0) {
    r = -r;
    p = -p;
  }
  p += 0.5 * h * accel(r, beta, field);
}

void push_range(ParticleEnsemble& ens, const RadialField& field, double dt,
                const PushPolicy& policy, Eigen::Index lo, Eigen::Index hi) {
  const double r_scale_floor = 1e-6 * field.r[field.r.size() - 1];
  for (Eigen::Index i = lo; i < hi; ++i) {
    double r = ens.r[i], p = ens.p_r[i];
    const double b = ens.beta[i];
    if (!policy.subcycle) {
      kdk(r, p, b, field, dt);
    } else {
      const double h_min = dt / policy.max_substeps;
      double done = 0.0;
      int guard = 4 * policy.max_substeps;
      while (done < dt && guard-- > 0) {
        const double rs = std::max(std::abs(r), r_scale_floor);
        const double a = accel(r, b, field);
        double tau = 1e300;
        if (p != 0.0) tau = std::min(tau, rs / std::abs(p));
        if (a != 0.0) tau = std::min(tau, std::sqrt(rs / std::abs(a)));
        const double h =
            std::min(std::max(policy.eta * tau, h_min), dt - done);
        kdk(r, p, b, field, h);
        done += h;
      }
      if (done < dt) kdk(r, p, b, field, dt - done);
    }
    ens.r[i] = r;
    ens.p_r[i] = p;
  }
}

}  // namespace

void push_particles(ParticleEnsemble& ens, const RadialField& field, double dt,
                    const PushPolicy& policy) {
  if (!(dt > 0.0)) throw std::invalid_argument("push_particles: dt must be > 0");
  const Eigen::Index n = ens.size();
  const int nt = std::max(1, policy.threads);
  if (nt == 1 || n < 4 * nt) {
    push_range(ens, field, dt, policy, 0, n);
    return;
  }
  // particles are independent within a step, so any split is deterministic
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const Eigen::Index chunk = (n + nt - 1) / nt;
  for (int k = 0; k < nt; ++k) {
    const Eigen::Index lo = k * chunk;
    const Eigen::Index hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(push_range, std::ref(ens), std::cref(field), dt,
                      std::cref(policy), lo, hi);
  }
  for (auto& th : pool) th.join();
}

Eigen::ArrayXd bin_cell_mass(const ParticleEnsemble& ens,
                             const Eigen::ArrayXd& grid) {
  const Eigen::Index cells = grid.size() - 1;
  Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(cells);
  const double r_max = grid[cells];
  const double dr = r_max / static_cast<double>(cells);
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    const double r = ens.r[i];
    if (r < 0.0 || r >= r_max) continue;
    const Eigen::Index j =
        std::min(static_cast<Eigen::Index>(r / dr), cells - 1);
    mass[j] += ens.w[i];
  }
  return mass;
}

Eigen::ArrayXd deposit_density(const ParticleEnsemble& ens,
                               const Eigen::ArrayXd& grid) {
  const Eigen::Index nn = grid.size();
  const Eigen::Index cells = nn - 1;
  const double r_max = grid[cells];
  const double dr = r_max / static_cast<double>(cells);
  Eigen::ArrayXd node_mass = Eigen::ArrayXd::Zero(nn);
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    const double r = ens.r[i];
    if (r < 0.0 || r >= r_max) continue;
    const Eigen::Index j =
        std::min(static_cast<Eigen::Index>(r / dr), cells - 1);
    const double frac = (r - grid[j]) / (grid[j + 1] - grid[j]);
    node_mass[j] += ens.w[i] * (1.0 - frac);
    node_mass[j + 1] += ens.w[i] * frac;
  }
  // exact volume of each node's tent: rising wing [a,b] toward the node plus
  // falling wing [b,c] away from it
  auto rise = [](double a, double b) {
    return 4.0 * kPi / (b - a) *
           (b * b * b * b / 4.0 - a * b * b * b / 3.0 + a * a * a * a / 12.0);
  };
  auto fall = [](double b, double c) {
    return 4.0 * kPi / (c - b) *
           (c * c * c * c / 12.0 - c * b * b * b / 3.0 + b * b * b * b / 4.0);
  };
  Eigen::ArrayXd rho(nn);
  for (Eigen::Index j = 0; j < nn; ++j) {
    double vol = 0.0;
    if (j > 0) vol += rise(grid[j - 1], grid[j]);
    if (j < nn - 1) vol += fall(grid[j], grid[j + 1]);
    rho[j] = node_mass[j] / vol;
  }
  return rho;
}

PicResult evolve_selfconsistent(ParticleEnsemble& ens, const PicConfig& cfg) {
  if (!(cfg.dt > 0.0) || cfg.steps < 0)
    throw std::invalid_argument("evolve_selfconsistent: bad dt or steps");
  const Eigen::ArrayXd grid = uniform_grid(cfg.grid_max, cfg.grid_cells);
  PicResult out;
  out.grid = grid;
  auto snapshot = [&](double t) {
    PicSnapshot s;
    s.t = t;
    s.r = ens.r;
    s.kinetic = kinetic_energy(ens);
    s.potential = potential_energy(ens);
    out.snapshots.push_back(std::move(s));
  };
  snapshot(0.0);
  for (long k = 0; k < cfg.steps; ++k) {
    const RadialField field =
        radial_field_from_histogram(bin_cell_mass(ens, grid), grid);
    push_particles(ens, field, cfg.dt, cfg.policy);
    const bool last = (k + 1 == cfg.steps);
    if (last || (cfg.snapshot_every > 0 && (k + 1) % cfg.snapshot_every == 0))
      snapshot((k + 1) * cfg.dt);
  }
  return out;
}

double radius_percentile(const ParticleEnsemble& ens, double q) {
  if (!(q > 0.0) || !(q <= 1.0))
    throw std::invalid_argument("radius_percentile: q in (0, 1]");
  std::vector<Eigen::Index> idx(ens.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index a, Eigen::Index b) { return ens.r[a] < ens.r[b]; });
  const double target = q * ens.w.sum();
  double cum = 0.0;
  for (const Eigen::Index i : idx) {
    cum += ens.w[i];
    if (cum >= target) return ens.r[i];
  }
  return ens.r[idx.back()];
}

double radius_percentile(const Eigen::ArrayXd& r, double q) {
  ParticleEnsemble tmp;
  tmp.r = r;
  tmp.w = Eigen::ArrayXd::Constant(r.size(), 1.0 / static_cast<double>(r.size()));
  tmp.p_r = tmp.beta = Eigen::ArrayXd::Zero(r.size());
  return radius_percentile(tmp, q);
}

double w1_distance(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  if (a.size() == 0 || b.size() == 0)
    throw std::invalid_argument("w1_distance: empty input");
  std::vector<double> A(a.data(), a.data() + a.size());
  std::vector<double> B(b.data(), b.data() + b.size());
  std::sort(A.begin(), A.end());
  std::sort(B.begin(), B.end());
  const double wa = 1.0 / static_cast<double>(A.size());
  const double wb = 1.0 / static_cast<double>(B.size());
  // integrate |F_a - F_b| between consecutive points of the merged support
  std::size_t ia = 0, ib = 0;
  double Fa = 0.0, Fb = 0.0, x_prev = std::min(A[0], B[0]), w1 = 0.0;
  while (ia < A.size() || ib < B.size()) {
    const double xa = ia < A.size() ? A[ia] : 1e300;
    const double xb = ib < B.size() ? B[ib] : 1e300;
    const double x = std::min(xa, xb);
    w1 += std::abs(Fa - Fb) * (x - x_prev);
    while (ia < A.size() && A[ia] == x) {
      Fa += wa;
      ++ia;
    }
    while (ib < B.size() && B[ib] == x) {
      Fb += wb;
      ++ib;
    }
    x_prev = x;
  }
  return w1;
}

double kinetic_energy(const ParticleEnsemble& ens) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    const double vt2 = (ens.beta[i] > 0.0 && ens.r[i] > 0.0)
                           ? ens.beta[i] / (ens.r[i] * ens.r[i])
                           : 0.0;
    sum += 0.5 * ens.w[i] * (ens.p_r[i] * ens.p_r[i] + vt2);
  }
  return sum;
}

double potential_energy(const ParticleEnsemble& ens) {
  // shells interact as point masses on the interior one: W = -sum_i w_i M_i/r_i
  // with M_i the weight strictly inside r_i (ties split evenly)
  const Eigen::Index n = ens.size();
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index a, Eigen::Index b) { return ens.r[a] < ens.r[b]; });
  double W = 0.0, cum = 0.0;
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    double block = 0.0;
    while (j < n && ens.r[idx[j]] == ens.r[idx[i]]) block += ens.w[idx[j++]];
    const double r = ens.r[idx[i]];
    if (r > 0.0) {
      for (Eigen::Index k = i; k < j; ++k)
        W -= ens.w[idx[k]] * (cum + 0.5 * (block - ens.w[idx[k]])) / r;
    }
    cum += block;
    i = j;
  }
  return W;
}

}  // namespace kurth
