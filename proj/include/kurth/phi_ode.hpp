#ifndef KURTH_PHI_ODE_HPP
#define KURTH_PHI_ODE_HPP

#include <optional>
#include <vector>

namespace kurth {

// Scale factor of the breathing Kurth family:
//   phi'' = alpha (-1/phi^2 + 1/phi^3),  phi(0) = 1, phi'(0) = epsilon.
// For alpha = 1 and |epsilon| < 1 the orbit is periodic with period
// 2 pi / (1 - epsilon^2)^{3/2}.

// right-hand side alpha (-1/phi^2 + 1/phi^3)
double phi_rhs(double phi, double alpha);

// first integral E = phidot^2/2 + alpha (-1/phi + 1/(2 phi^2)); requires phi > 0
double phi_energy(double phi, double phidot, double alpha);

// closed-form period for alpha = 1; throws for |epsilon| >= 1
double period(double epsilon);

struct PhiState {
  double phi;
  double phidot;
};

class PhiTrajectory {
 public:
  double alpha = 1.0;
  double epsilon = 0.0;
  double t_end = 0.0;
  double tol = 1e-10;
  double energy0 = 0.0;
  std::optional<double> detected_period;

  // accepted integration nodes (t strictly increasing, t.front() = 0)
  std::vector<double> t, phi, phidot;

  // dense evaluation by quintic Hermite between nodes (second and third
  // derivatives supplied analytically by the ODE)
  PhiState eval(double time) const;
  double phi_at(double time) const { return eval(time).phi; }
  double phidot_at(double time) const { return eval(time).phidot; }
  double phiddot_at(double time) const { return phi_rhs(eval(time).phi, alpha); }
  double energy_at(double time) const;

  // analytic radial turning points of the current energy level (E < 0)
  std::optional<std::pair<double, double>> turning_points() const;
};

// Adaptive embedded Dormand-Prince 5(4) integration over [0, t_end].
// Throws std::runtime_error (with the last valid time in the message) if the
// step size collapses. detect_period is run on the result when it fits.
PhiTrajectory integrate_phi(double alpha, double epsilon, double t_end,
                            double tol = 1e-10);

// Fixed-step leapfrog for long-horizon runs; same trajectory interface.
PhiTrajectory integrate_phi_leapfrog(double alpha, double epsilon, double t_end,
                                     double dt);

// Numeric period from the first two phidot = 0 crossings (half period doubled).
// Empty when the trajectory has no two crossings (equilibrium, unbound, or
// t_end too short).
std::optional<double> detect_period(const PhiTrajectory& traj);

}  // namespace kurth

#endif
