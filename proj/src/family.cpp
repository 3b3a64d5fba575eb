#include "kurth/family.hpp"

#include <cmath>
#include <stdexcept>

namespace kurth {

PhaseVec lambda_map(const PhaseVec& s, double phi, double phidot) {
  if (!(phi > 0.0)) throw std::invalid_argument("lambda_map: phi must be > 0");
  return {s.x / phi, phi * s.v - phidot * s.x};
}

RadialState lambda_map_radial(const RadialState& s, double phi, double phidot) {
  if (!(phi > 0.0)) throw std::invalid_argument("lambda_map: phi must be > 0");
  return {s.r / phi, phi * s.p_r - phidot * s.r, s.beta};
}

double eval_f(const PhaseVec& s, double phi, double phidot) {
  return eval_Q(lambda_map(s, phi, phidot));
}

double eval_f_radial(const RadialState& s, double phi, double phidot) {
  const RadialState m = lambda_map_radial(s, phi, phidot);
  return eval_Q_tilde(energy(m), m.beta);
}

double rho_family(double r, double phi) {
  if (!(phi > 0.0)) throw std::invalid_argument("rho_family: phi must be > 0");
  return (r < phi) ? 3.0 / (4.0 * kPi * phi * phi * phi) : 0.0;
}

double potential_family(double r, double phi) {
  if (!(phi > 0.0))
    throw std::invalid_argument("potential_family: phi must be > 0");
  return potential_U(r / phi) / phi;
}

double force_family(double r, double phi) {
  if (!(phi > 0.0)) throw std::invalid_argument("force_family: phi must be > 0");
  return potential_U_prime(r / phi) / (phi * phi);
}

double hamiltonian_H(double r, double p_r, double phi, double phidot,
                     double phiddot) {
  return -(phidot / phi) * r * p_r -
         0.5 * (phidot * phidot - phi * phiddot) * r * r;
}

Eigen::Vector2d hamiltonian_H_grad(double r, double p_r, double phi,
                                   double phidot, double phiddot) {
  const double dH_dr =
      -(phidot / phi) * p_r - (phidot * phidot - phi * phiddot) * r;
  const double dH_dp = -(phidot / phi) * r;
  return {dH_dr, dH_dp};
}

Eigen::Vector2d hamiltonian_flow_residual(double r, double p_r, double phi,
                                          double phidot, double phiddot) {
  const RadialState m = lambda_map_radial({r, p_r, 0.0}, phi, phidot);
  // time derivative of the map at frozen (r, p_r)
  const double Rdot = -(phidot / (phi * phi)) * r;
  const double Pdot = phidot * p_r - phiddot * r;
  const Eigen::Vector2d g =
      hamiltonian_H_grad(m.r, m.p_r, phi, phidot, phiddot);
  return {Rdot - g[1], Pdot + g[0]};
}

double lambda_jacobian_det(double phi, double phidot) {
  const double dR_dr = 1.0 / phi, dR_dp = 0.0;
  const double dP_dr = -phidot, dP_dp = phi;
  return dR_dr * dP_dp - dR_dp * dP_dr;
}

VlasovTerms vlasov_residual(const PhaseVec& s, double phi, double phidot,
                            double phiddot) {
  const PhaseVec m = lambda_map(s, phi, phidot);
  const GradQ g = grad_Q(m);  // throws outside the support
  // chain rule through Lambda(t)
  const double dt_term = g.dx.dot(-(phidot / (phi * phi)) * s.x) +
                         g.dv.dot(phidot * s.v - phiddot * s.x);
  const double transport = s.v.dot(g.dx / phi - phidot * g.dv);
  const double r = s.x.norm();
  // grad_x U_f = (dU_f/dr / r) x; the ratio stays finite at the centre
  const double dU_over_r =
      (r < phi) ? 1.0 / (phi * phi * phi) : force_family(r, phi) / r;
  const double force_term = dU_over_r * s.x.dot(phi * g.dv);
  VlasovTerms out;
  out.dt_term = dt_term;
  out.transport = transport;
  out.force_term = force_term;
  out.residual = dt_term + transport - force_term;
  out.scale = std::max({std::abs(dt_term), std::abs(transport),
                        std::abs(force_term)});
  return out;
}

VlasovTerms vlasov_residual(const PhaseVec& s, double t,
                            const PhiTrajectory& traj) {
  const PhiState p = traj.eval(t);
  return vlasov_residual(s, p.phi, p.phidot, phi_rhs(p.phi, traj.alpha));
}

namespace {

double central_diff(const std::function<double(double)>& f, double x,
                    double scale) {
  const double h = scale * std::max(1.0, std::abs(x));
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

double TransformFields::dR_dt(double t, double r, double p) const {
  if (R_t) return R_t(t, r, p);
  return central_diff([&](double u) { return R(u, r, p); }, t, fd_scale);
}
double TransformFields::dR_dr(double t, double r, double p) const {
  if (R_r) return R_r(t, r, p);
  return central_diff([&](double u) { return R(t, u, p); }, r, fd_scale);
}
double TransformFields::dR_dp(double t, double r, double p) const {
  if (R_p) return R_p(t, r, p);
  return central_diff([&](double u) { return R(t, r, u); }, p, fd_scale);
}
double TransformFields::dP_dt(double t, double r, double p) const {
  if (P_t) return P_t(t, r, p);
  return central_diff([&](double u) { return P(u, r, p); }, t, fd_scale);
}
double TransformFields::dP_dr(double t, double r, double p) const {
  if (P_r) return P_r(t, r, p);
  return central_diff([&](double u) { return P(t, u, p); }, r, fd_scale);
}
double TransformFields::dP_dp(double t, double r, double p) const {
  if (P_p) return P_p(t, r, p);
  return central_diff([&](double u) { return P(t, r, u); }, p, fd_scale);
}

TransformFields kurth_fields(const PhiTrajectory& traj) {
  const auto tr = std::make_shared<PhiTrajectory>(traj);
  TransformFields f;
  f.R = [tr](double t, double r, double) { return r / tr->phi_at(t); };
  f.P = [tr](double t, double r, double p) {
    const PhiState s = tr->eval(t);
    return s.phi * p - s.phidot * r;
  };
  f.R_t = [tr](double t, double r, double) {
    const PhiState s = tr->eval(t);
    return -s.phidot / (s.phi * s.phi) * r;
  };
  f.R_r = [tr](double t, double, double) { return 1.0 / tr->phi_at(t); };
  f.R_p = [](double, double, double) { return 0.0; };
  f.P_t = [tr](double t, double r, double p) {
    const PhiState s = tr->eval(t);
    return s.phidot * p - phi_rhs(s.phi, tr->alpha) * r;
  };
  f.P_r = [tr](double t, double, double) { return -tr->phidot_at(t); };
  f.P_p = [tr](double t, double, double) { return tr->phi_at(t); };
  return f;
}

Eigen::Vector3d ansatz_residual(const TransformFields& f, double t, double r,
                                double p_r, double D) {
  if (!(r > 0.0)) throw std::invalid_argument("ansatz_residual: r must be > 0");
  const double R = f.R(t, r, p_r);
  const double P = f.P(t, r, p_r);
  if (!(R > 0.0)) throw std::domain_error("ansatz_residual: R must be > 0");
  const double Rt = f.dR_dt(t, r, p_r), Rr = f.dR_dr(t, r, p_r),
               Rp = f.dR_dp(t, r, p_r);
  const double Pt = f.dP_dt(t, r, p_r), Pr = f.dP_dr(t, r, p_r),
               Pp = f.dP_dp(t, r, p_r);
  const double Up = potential_U_prime(R);
  const double bR = Rt + p_r * Rr - D * Rp;  // advective derivative of R
  const double bP = Pt + p_r * Pr - D * Pp;
  const double r3 = r * r * r, R3 = R * R * R;
  Eigen::Vector3d res;
  res[0] = Up * bR + P * bP;
  res[1] = Up * Rp / r3 + P * Pp / r3 - bR / R3;
  res[2] = -Rp / (r3 * R3);
  return res;
}

double reconstruction_residual(const TransformFields& f, double t, double r,
                               double p_r) {
  const double R = f.R(t, r, p_r);
  const double Rt = f.dR_dt(t, r, p_r);
  const double Rr = f.dR_dr(t, r, p_r);
  if (Rr == 0.0)
    throw std::domain_error("reconstruction_residual: dR/dr vanishes");
  const double recon = p_r / (2.0 * Rr) +
                       Rr * (r * r * r) / (R * R * R) * (Rt + 0.5 * p_r * Rr);
  return recon - f.P(t, r, p_r);
}

double umd_residual(double r, double phi) {
  if (!(r > 0.0)) throw std::invalid_argument("umd_residual: r must be > 0");
  const double R = r / phi;
  return force_family(r, phi) - (R / r) * (R / r) * potential_U_prime(R);
}

double separation_constant(double a, double adot, double addot) {
  if (a == 0.0 || a == 1.0)
    throw std::domain_error("separation_constant: degenerate at a in {0, 1}");
  const double a5 = a * a * a * a * a;
  return (2.0 * adot * adot - a * addot) / (a5 * (a - 1.0));
}

}  // namespace kurth
