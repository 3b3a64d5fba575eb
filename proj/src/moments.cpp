#include "kurth/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace kurth {

void gauss_legendre(int n, Eigen::ArrayXd& nodes, Eigen::ArrayXd& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  nodes.resize(n);
  weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration from the Chebyshev estimate of the i-th root of P_n
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

double SqrtProfile::operator()(double e, double beta) const {
  const double bracket = -2.0 * (1.0 + e) + beta;
  if (!(bracket > 0.0) || !(beta >= 0.0) || !(beta < beta_cap)) return 0.0;
  return amp / std::sqrt(bracket);
}

namespace {

// int_0^hi amp (A - c b)^{-1/2} db with hi the smaller of cap and the root
// of the bracket. Assumes A > 0. When the bracket root cuts off first the
// closed form reduces to 2 amp sqrt(A) / c, evaluated directly so no
// cancellation noise enters near the support edge.
double beta_integral(double A, double c, double amp, double cap) {
  if (std::abs(c) * cap < 1e-14 * A) return amp * cap / std::sqrt(A);
  if (c > 0.0 && A <= c * cap) return 2.0 * amp * std::sqrt(A) / c;
  const double tail = A - c * cap;  // cap binds (positive for either sign of c)
  return (2.0 * amp / c) * (std::sqrt(A) - std::sqrt(std::max(tail, 0.0)));
}

}  // namespace

double density_from_distribution(const SqrtProfile& q,
                                 const std::function<double(double)>& U,
                                 double r, int nodes) {
  if (!(r > 0.0))
    throw std::invalid_argument("density_from_distribution: r must be > 0");
  const double A0 = -2.0 - 2.0 * U(r);
  if (A0 <= 0.0) return 0.0;  // no bound phase space at this radius
  const double c = 1.0 / (r * r) - 1.0;
  const double p_max = std::sqrt(A0);
  Eigen::ArrayXd x, w;
  gauss_legendre(nodes, x, w);
  // p_r = p_max sin(theta) removes the square-root endpoints of the p_r range
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double theta = 0.5 * kPi * x[i];
    const double p = p_max * std::sin(theta);
    const double A = A0 - p * p;
    sum += w[i] * (0.5 * kPi) * p_max * std::cos(theta) *
           beta_integral(A, c, q.amp, q.beta_cap);
  }
  return kPi / (r * r) * sum;
}

double density_family(const PhiTrajectory& traj, double t, double r,
                      int nodes) {
  if (!(r > 0.0))
    throw std::invalid_argument("density_family: r must be > 0");
  const PhiState s = traj.eval(t);
  const double R = r / s.phi;
  const double A0 = -2.0 - 2.0 * potential_U(R);
  if (A0 <= 0.0) return 0.0;
  const double c = 1.0 / (R * R) - 1.0;
  const double p_max = std::sqrt(A0);
  Eigen::ArrayXd x, w;
  gauss_legendre(nodes, x, w);
  const SqrtProfile q{};
  // integrate in P = phi p_r - phidot r (dp_r = dP / phi)
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double theta = 0.5 * kPi * x[i];
    const double P = p_max * std::sin(theta);
    const double A = A0 - P * P;
    sum += w[i] * (0.5 * kPi) * p_max * std::cos(theta) *
           beta_integral(A, c, q.amp, q.beta_cap);
  }
  return kPi / (s.phi * r * r) * sum;
}

double change_of_variables_check(double r, int nodes) {
  if (!(r > 0.0) || !(r < 1.0))
    throw std::invalid_argument("change_of_variables_check: need 0 < r < 1");
  const SqrtProfile q{};
  const auto U = [](double s) { return potential_U(s); };
  const double reduced = density_from_distribution(q, U, r, nodes);

  // direct: rho = 2 pi int f(r, p_r, v_t) v_t dv_t dp_r with beta = r^2 v_t^2,
  // evaluated through the energy-based form of the distribution
  Eigen::ArrayXd x, w;
  gauss_legendre(nodes, x, w);
  const double p_cap = std::sqrt(1.0 - r * r);
  const double Ur = potential_U(r);
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double th = 0.5 * kPi * x[i];
    const double p = p_cap * std::sin(th);
    const double vt_max =
        std::sqrt((1.0 - r * r - p * p) / (1.0 - r * r));
    double inner = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double ps = 0.25 * kPi * (x[j] + 1.0);  // v_t in (0, vt_max)
      const double vt = vt_max * std::sin(ps);
      const double e = 0.5 * (p * p + vt * vt) + Ur;
      const double fval = eval_Q_tilde(e, r * r * vt * vt);
      inner += w[j] * (0.25 * kPi) * vt_max * std::cos(ps) * vt * fval;
    }
    sum += w[i] * (0.5 * kPi) * p_cap * std::cos(th) * 2.0 * kPi * inner;
  }
  return std::abs(reduced - sum);
}

Eigen::ArrayXd uniform_grid(double r_max, int cells) {
  if (!(r_max > 0.0) || cells < 1)
    throw std::invalid_argument("uniform_grid: r_max > 0 and cells >= 1");
  return Eigen::ArrayXd::LinSpaced(cells + 1, 0.0, r_max);
}

namespace {

// node spacing when the mesh is uniform to rounding, else 0
double detect_uniform(const Eigen::ArrayXd& grid) {
  const Eigen::Index n = grid.size();
  const double dr = grid[n - 1] / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(grid[i] - i * dr) > 1e-12 * grid[n - 1]) return 0.0;
  return dr;
}

}  // namespace

RadialField radial_field_from_density(const std::function<double(double)>& rho,
                                      const Eigen::ArrayXd& grid) {
  const Eigen::Index n = grid.size();
  if (n < 2 || grid[0] != 0.0)
    throw std::invalid_argument("radial_field_from_density: grid[0] must be 0");
  Eigen::ArrayXd x, w;
  gauss_legendre(16, x, w);
  RadialField f;
  f.r = grid;
  f.M.resize(n);
  f.M[0] = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double a = grid[i - 1], b = grid[i];
    double cell = 0.0;
    for (int k = 0; k < x.size(); ++k) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * x[k];
      cell += w[k] * 0.5 * (b - a) * 4.0 * kPi * s * s * rho(s);
    }
    f.M[i] = f.M[i - 1] + cell;
  }
  f.total_mass = f.M[n - 1];
  f.uniform_dr = detect_uniform(grid);
  return f;
}

RadialField radial_field_from_histogram(const Eigen::ArrayXd& cell_mass,
                                        const Eigen::ArrayXd& grid) {
  const Eigen::Index n = grid.size();
  if (cell_mass.size() != n - 1)
    throw std::invalid_argument(
        "radial_field_from_histogram: need one mass per cell");
  RadialField f;
  f.r = grid;
  f.M.resize(n);
  f.M[0] = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) f.M[i] = f.M[i - 1] + cell_mass[i - 1];
  f.total_mass = f.M[n - 1];
  f.uniform_dr = detect_uniform(grid);
  return f;
}

}  // namespace kurth
