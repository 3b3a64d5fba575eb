#include "kurth/steady.hpp"

#include <cmath>
#include <stdexcept>

namespace kurth {

RadialState to_radial(const PhaseVec& p) {
  const double r = p.x.norm();
  if (r <= 0.0)
    throw std::invalid_argument("to_radial: zero radius");
  const double xv = p.x.dot(p.v);
  const double beta = p.x.squaredNorm() * p.v.squaredNorm() - xv * xv;
  return {r, xv / r, std::max(beta, 0.0)};
}

SupportInfo support_F(const RadialState& s) {
  if (s.r <= 0.0 && s.beta > 0.0)
    throw std::invalid_argument("support_F: r = 0 with beta > 0");
  const double centrifugal = s.beta > 0.0 ? s.beta / (s.r * s.r) : 0.0;
  const double F = 1.0 - s.r * s.r - s.p_r * s.p_r - centrifugal + s.beta;
  return {F, F > 0.0 && s.beta < 1.0};
}

double potential_U(double r) {
  return r <= 1.0 ? 0.5 * r * r - 1.5 : -1.0 / r;
}

double potential_U_prime(double r) {
  return r <= 1.0 ? r : 1.0 / (r * r);
}

double effective_potential(double r, double beta) {
  if (r <= 0.0 && beta > 0.0)
    throw std::invalid_argument("effective_potential: r = 0 with beta > 0");
  const double centrifugal = beta > 0.0 ? 0.5 * beta / (r * r) : 0.0;
  return potential_U(r) + centrifugal;
}

double energy(const RadialState& s) {
  return 0.5 * s.p_r * s.p_r + effective_potential(s.r, s.beta);
}

double eval_Q(const PhaseVec& p) {
  const double xx = p.x.squaredNorm();
  const double vv = p.v.squaredNorm();
  const double xv = p.x.dot(p.v);
  const double beta = std::max(xx * vv - xv * xv, 0.0);
  const double F = 1.0 - xx - vv + beta;
  if (F <= 0.0 || beta >= 1.0)
    return 0.0;
  return kQAmplitude / std::sqrt(F);
}

double eval_Q_tilde(double e, double beta) {
  const double F = -2.0 * (1.0 + e) + beta;
  if (F <= 0.0 || beta >= 1.0)
    return 0.0;
  return kQAmplitude / std::sqrt(F);
}

GradQ grad_Q(const PhaseVec& p) {
  const double q = eval_Q(p);
  if (q <= 0.0)
    throw std::invalid_argument("grad_Q: point outside the support interior");
  const double xv = p.x.dot(p.v);
  const double scale = q * q * q / (kQAmplitude * kQAmplitude);  // (4pi^3/3)^2 Q^3
  GradQ g;
  g.dx = scale * ((1.0 - p.v.squaredNorm()) * p.x + xv * p.v);
  g.dv = scale * ((1.0 - p.x.squaredNorm()) * p.v + xv * p.x);
  return g;
}

}  // namespace kurth
