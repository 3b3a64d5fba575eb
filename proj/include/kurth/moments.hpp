#ifndef KURTH_MOMENTS_HPP
#define KURTH_MOMENTS_HPP

#include <Eigen/Dense>
#include <functional>

#include "kurth/phi_ode.hpp"
#include "kurth/steady.hpp"

namespace kurth {

// Gauss-Legendre nodes and weights on [-1, 1]
void gauss_legendre(int n, Eigen::ArrayXd& nodes, Eigen::ArrayXd& weights);

// inverse square root profile q(e, beta) = amp (-2(1+e) + beta)^{-1/2} on
// -2(1+e)+beta > 0 and 0 <= beta < beta_cap; defaults reproduce the steady model
struct SqrtProfile {
  double amp = kQAmplitude;
  double beta_cap = 1.0;
  double operator()(double e, double beta) const;
};

// rho(r) = int q(e, beta) dv for a spherical potential U. In (p_r, beta)
// variables dv = (pi/r^2) dp_r dbeta; the beta integral is closed-form and the
// p_r integral uses Gauss-Legendre after p_r = p_max sin(theta). Requires r > 0.
double density_from_distribution(const SqrtProfile& q,
                                 const std::function<double(double)>& U,
                                 double r, int nodes = 64);

// density of the family member at time t, radius r, by quadrature of Q o Lambda
double density_family(const PhiTrajectory& traj, double t, double r,
                      int nodes = 64);

// steady density two ways: reduced (p_r, beta) closed form vs direct
// two-dimensional velocity quadrature of the distribution; returns |difference|
double change_of_variables_check(double r, int nodes = 64);

// Enclosed-mass representation of a spherical field on a radial mesh.
// Between nodes M is linear; in the innermost cell it scales as r^3 (uniform
// core); beyond the last node all of total_mass acts as a point mass.
struct RadialField {
  Eigen::ArrayXd r;  // nodes, r[0] = 0, strictly increasing
  Eigen::ArrayXd M;  // enclosed mass at the nodes, M[0] = 0
  double total_mass = 0.0;
  double uniform_dr = 0.0;  // node spacing when the mesh is uniform, else 0

  double enclosed_mass(double rr) const;
  double force(double rr) const;  // dU/dr = M(r)/r^2 >= 0, finite at r = 0
};

inline double RadialField::enclosed_mass(double rr) const {
  const Eigen::Index n = r.size();
  if (rr <= 0.0) return 0.0;
  if (rr >= r[n - 1]) return total_mass;
  if (rr <= r[1]) {
    const double s = rr / r[1];
    return M[1] * s * s * s;  // uniform-density core
  }
  Eigen::Index i;
  if (uniform_dr > 0.0) {
    i = static_cast<Eigen::Index>(rr / uniform_dr);
    if (i >= n - 1) i = n - 2;  // rounding at the top node
  } else {
    const double* beg = r.data();
    i = std::upper_bound(beg, beg + n, rr) - beg - 1;  // r[i] <= rr < r[i+1]
  }
  const double s = (rr - r[i]) / (r[i + 1] - r[i]);
  return M[i] + s * (M[i + 1] - M[i]);
}

inline double RadialField::force(double rr) const {
  if (rr <= 0.0) return 0.0;
  if (rr <= r[1]) return M[1] * rr / (r[1] * r[1] * r[1]);
  return enclosed_mass(rr) / (rr * rr);
}

// nodes 0, dr, ..., r_max (cells+1 values)
Eigen::ArrayXd uniform_grid(double r_max, int cells);

// integrate 4 pi s^2 rho(s) cell by cell (Gauss-Legendre) and accumulate
RadialField radial_field_from_density(const std::function<double(double)>& rho,
                                      const Eigen::ArrayXd& grid);

// exact prefix sums of per-cell masses (cell j spans [grid[j], grid[j+1]))
RadialField radial_field_from_histogram(const Eigen::ArrayXd& cell_mass,
                                        const Eigen::ArrayXd& grid);

}  // namespace kurth

#endif
