#ifndef KURTH_STEADY_HPP
#define KURTH_STEADY_HPP

#include <Eigen/Dense>

namespace kurth {

// Kurth steady state of the gravitational Vlasov-Poisson system,
//   Q(x,v) = 3/(4 pi^3) * (1 - |x|^2 - |v|^2 + |x^v|^2)^{-1/2}
// on the set where the bracket is positive and |x^v| < 1, zero elsewhere.
// Its spatial density is 3/(4 pi) * 1_{|x|<1}, total mass 1.

inline constexpr double kPi = 3.14159265358979323846264338328;

// amplitude 3/(4 pi^3)
inline const double kQAmplitude = 3.0 / (4.0 * kPi * kPi * kPi);

struct PhaseVec {
  Eigen::Vector3d x;  // position
  Eigen::Vector3d v;  // velocity
};

// spherically symmetric coordinates r = |x|, p_r = x.v/|x|, beta = |x^v|^2
struct RadialState {
  double r;
  double p_r;
  double beta;
};

struct SupportInfo {
  double F;     // 1 - r^2 - p_r^2 - beta/r^2 + beta
  bool inside;  // F > 0 and beta < 1
};

// Requires |x| > 0; beta clamped to >= 0 against roundoff.
RadialState to_radial(const PhaseVec& p);

// F(r, p_r, beta) and the support predicate. Requires r > 0 when beta > 0.
SupportInfo support_F(const RadialState& s);

// potential of the steady state: r^2/2 - 3/2 inside the unit ball, -1/r outside
double potential_U(double r);
// dU/dr: r inside, 1/r^2 outside
double potential_U_prime(double r);

// U(r) + beta/(2 r^2); requires r > 0 when beta > 0
double effective_potential(double r, double beta);

// particle energy e = p_r^2/2 + U_eff(r, beta)
double energy(const RadialState& s);

// distribution value at a Cartesian phase-space point (0 outside the support)
double eval_Q(const PhaseVec& p);

// the same state expressed through the invariants (e, beta):
//   (3/4pi^3) (-2(1+e) + beta)^{-1/2} where the bracket is positive and beta < 1
double eval_Q_tilde(double e, double beta);

struct GradQ {
  Eigen::Vector3d dx;
  Eigen::Vector3d dv;
};

// phase-space gradient on the interior of the support:
//   grad_x Q = (4pi^3/3)^2 Q^3 ((1-|v|^2) x + <x,v> v)
//   grad_v Q = (4pi^3/3)^2 Q^3 ((1-|x|^2) v + <x,v> x)
// Throws if the point is outside or on the boundary.
GradQ grad_Q(const PhaseVec& p);

}  // namespace kurth

#endif
