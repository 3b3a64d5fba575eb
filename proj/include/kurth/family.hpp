#ifndef KURTH_FAMILY_HPP
#define KURTH_FAMILY_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "kurth/phi_ode.hpp"
#include "kurth/steady.hpp"

namespace kurth {

// The breathing family is the steady model composed with the time-dependent
// canonical rescaling
//   Lambda(t): (x, v) -> (x/phi, phi v - phidot x),
// which maps phase space onto itself with unit Jacobian. Everything in this
// header is exact; the tests check the identities to floating-point roundoff.

PhaseVec lambda_map(const PhaseVec& s, double phi, double phidot);
RadialState lambda_map_radial(const RadialState& s, double phi, double phidot);

// distribution function f(t) = Q o Lambda(t)
double eval_f(const PhaseVec& s, double phi, double phidot);
double eval_f_radial(const RadialState& s, double phi, double phidot);

// spatial density, potential and radial force of the family member:
// rho = 3/(4 pi phi^3) on r < phi; U_f(t,r) = U(r/phi)/phi
double rho_family(double r, double phi);
double potential_family(double r, double phi);
double force_family(double r, double phi);  // dU_f/dr

// Generating Hamiltonian of the rescaling in radial coordinates,
//   H(t,r,p) = -(phidot/phi) r p - (phidot^2 - phi phiddot) r^2 / 2,
// and its gradient (dH/dr, dH/dp).
double hamiltonian_H(double r, double p_r, double phi, double phidot,
                     double phiddot);
Eigen::Vector2d hamiltonian_H_grad(double r, double p_r, double phi,
                                   double phidot, double phiddot);

// Residual of d/dt Lambda(t)(r,p) against the symplectic flow of H evaluated
// at the image point: (Rdot - dH/dp, Pdot + dH/dr). Cancels identically.
Eigen::Vector2d hamiltonian_flow_residual(double r, double p_r, double phi,
                                          double phidot, double phiddot);

// det of d(R,P)/d(r,p) assembled from the four partial derivatives
double lambda_jacobian_det(double phi, double phidot);

// Decomposition of the Vlasov residual d_t f + v . grad_x f - grad_x U_f . grad_v f
// at a phase-space point whose image lies inside the support.
struct VlasovTerms {
  double dt_term;     // d_t f
  double transport;   // v . grad_x f
  double force_term;  // grad_x U_f . grad_v f
  double residual;    // dt_term + transport - force_term
  double scale;       // max of the three magnitudes
  double relative() const { return scale > 0.0 ? residual / scale : residual; }
};
VlasovTerms vlasov_residual(const PhaseVec& s, double phi, double phidot,
                            double phiddot);
VlasovTerms vlasov_residual(const PhaseVec& s, double t,
                            const PhiTrajectory& traj);

// Radial change of variables (R(t,r,p), P(t,r,p)) turning a steady solution
// into a time-dependent one. Partials fall back to central differences when
// no analytic closure is supplied.
struct TransformFields {
  using Field = std::function<double(double t, double r, double p_r)>;
  Field R, P;
  Field R_t, R_r, R_p, P_t, P_r, P_p;  // optional analytic partials
  double fd_scale = 1e-6;

  double dR_dt(double t, double r, double p) const;
  double dR_dr(double t, double r, double p) const;
  double dR_dp(double t, double r, double p) const;
  double dP_dt(double t, double r, double p) const;
  double dP_dr(double t, double r, double p) const;
  double dP_dp(double t, double r, double p) const;
};

// fields of the breathing family: R = r/phi, P = phi p - phidot r,
// with all partials analytic
TransformFields kurth_fields(const PhiTrajectory& traj);

// Coefficients of beta^0, beta^1, beta^2 in the transformed Vlasov equation;
// D is the radial force dU_f/dr of the time-dependent potential at (t,r).
// All three vanish for the breathing family inside the support.
Eigen::Vector3d ansatz_residual(const TransformFields& f, double t, double r,
                                double p_r, double D);

// P recovered from R alone,
//   P = p / (2 dR/dr) + (dR/dr) (r^3/R^3) (dR/dt + p/2 dR/dr),
// minus the field's own P. Zero for the breathing family.
double reconstruction_residual(const TransformFields& f, double t, double r,
                               double p_r);

// dU_f/dr(t,r) - (R/r)^2 U'(R) with R = r/phi; zero on both sides of r = phi
double umd_residual(double r, double phi);

// alpha recovered from a = 1/phi and its first two derivatives,
//   alpha = (2 adot^2 - a addot) / (a^5 (a - 1)),
// exact wherever phiddot comes from the scale-factor equation. Throws when
// a is 0 or 1 (the formula degenerates).
double separation_constant(double a, double adot, double addot);

}  // namespace kurth

#endif
