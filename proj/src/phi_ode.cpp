#include "kurth/phi_ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kurth/steady.hpp"

namespace kurth {

double phi_rhs(double phi, double alpha) {
  return alpha * (-1.0 / (phi * phi) + 1.0 / (phi * phi * phi));
}

double phi_energy(double phi, double phidot, double alpha) {
  if (!(phi > 0.0)) throw std::invalid_argument("phi_energy: phi must be > 0");
  return 0.5 * phidot * phidot + alpha * (-1.0 / phi + 0.5 / (phi * phi));
}

double period(double epsilon) {
  if (!(std::abs(epsilon) < 1.0))
    throw std::invalid_argument("period: requires |epsilon| < 1");
  const double om = 1.0 - epsilon * epsilon;
  return 2.0 * kPi / (om * std::sqrt(om));
}

namespace {

// third time derivative: d/dt phi'' = alpha phidot (2/phi^3 - 3/phi^4)
double phi_rhs_dot(double phi, double phidot, double alpha) {
  const double p3 = phi * phi * phi;
  return alpha * phidot * (2.0 / p3 - 3.0 / (p3 * phi));
}

// Quintic Hermite on [0,1] matching value/first/second derivative at both ends
// (derivatives already scaled by the step h and h^2).
double hermite5(double s, double y0, double d0, double c0, double y1, double d1,
                double c1) {
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  const double h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
  const double h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
  const double h20 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
  const double h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
  const double h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
  const double h21 = 0.5 * s3 - s4 + 0.5 * s5;
  return h00 * y0 + h10 * d0 + h20 * c0 + h01 * y1 + h11 * d1 + h21 * c1;
}

struct Deriv {
  double dphi;     // = phidot
  double dphidot;  // = phi_rhs
};

Deriv rhs(double phi, double phidot, double alpha) {
  return {phidot, phi_rhs(phi, alpha)};
}

}  // namespace

PhiState PhiTrajectory::eval(double time) const {
  if (t.empty()) throw std::runtime_error("PhiTrajectory: empty trajectory");
  if (time <= t.front()) return {phi.front(), phidot.front()};
  if (time >= t.back()) return {phi.back(), phidot.back()};
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
  const double h = t[i + 1] - t[i];
  const double s = (time - t[i]) / h;
  const double a0 = phi_rhs(phi[i], alpha), a1 = phi_rhs(phi[i + 1], alpha);
  const double j0 = phi_rhs_dot(phi[i], phidot[i], alpha);
  const double j1 = phi_rhs_dot(phi[i + 1], phidot[i + 1], alpha);
  PhiState out;
  out.phi = hermite5(s, phi[i], h * phidot[i], h * h * a0, phi[i + 1],
                     h * phidot[i + 1], h * h * a1);
  out.phidot = hermite5(s, phidot[i], h * a0, h * h * j0, phidot[i + 1], h * a1,
                        h * h * j1);
  return out;
}

double PhiTrajectory::energy_at(double time) const {
  const PhiState s = eval(time);
  return phi_energy(s.phi, s.phidot, alpha);
}

std::optional<std::pair<double, double>> PhiTrajectory::turning_points() const {
  // phidot = 0  <=>  2 E phi^2 + 2 alpha phi - alpha = 0
  const double E = energy0;
  if (!(E < 0.0)) return std::nullopt;
  const double disc = alpha * alpha + 2.0 * E * alpha;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double lo = (alpha - sq) / (-2.0 * E);
  const double hi = (alpha + sq) / (-2.0 * E);
  return std::make_pair(lo, hi);
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepResult {
  double phi, phidot;  // 5th-order solution at t + h
  double err;          // scaled max-norm error estimate
};

StepResult dopri_step(double phi, double phidot, double alpha, double h,
                      const Deriv& k1, Deriv& k7_out, double tol) {
  auto f = [alpha](double p, double pd) { return rhs(p, pd, alpha); };
  const Deriv k2 = f(phi + h * a21 * k1.dphi, phidot + h * a21 * k1.dphidot);
  const Deriv k3 = f(phi + h * (a31 * k1.dphi + a32 * k2.dphi),
                     phidot + h * (a31 * k1.dphidot + a32 * k2.dphidot));
  const Deriv k4 =
      f(phi + h * (a41 * k1.dphi + a42 * k2.dphi + a43 * k3.dphi),
        phidot + h * (a41 * k1.dphidot + a42 * k2.dphidot + a43 * k3.dphidot));
  const Deriv k5 =
      f(phi + h * (a51 * k1.dphi + a52 * k2.dphi + a53 * k3.dphi + a54 * k4.dphi),
        phidot + h * (a51 * k1.dphidot + a52 * k2.dphidot + a53 * k3.dphidot +
                      a54 * k4.dphidot));
  const Deriv k6 = f(phi + h * (a61 * k1.dphi + a62 * k2.dphi + a63 * k3.dphi +
                                a64 * k4.dphi + a65 * k5.dphi),
                     phidot + h * (a61 * k1.dphidot + a62 * k2.dphidot +
                                   a63 * k3.dphidot + a64 * k4.dphidot +
                                   a65 * k5.dphidot));
  StepResult out;
  out.phi = phi + h * (b1 * k1.dphi + b3 * k3.dphi + b4 * k4.dphi +
                       b5 * k5.dphi + b6 * k6.dphi);
  out.phidot = phidot + h * (b1 * k1.dphidot + b3 * k3.dphidot +
                             b4 * k4.dphidot + b5 * k5.dphidot + b6 * k6.dphidot);
  k7_out = f(out.phi, out.phidot);  // FSAL
  const double err_phi =
      h * (e1 * k1.dphi + e3 * k3.dphi + e4 * k4.dphi + e5 * k5.dphi +
           e6 * k6.dphi + e7 * k7_out.dphi);
  const double err_pd =
      h * (e1 * k1.dphidot + e3 * k3.dphidot + e4 * k4.dphidot +
           e5 * k5.dphidot + e6 * k6.dphidot + e7 * k7_out.dphidot);
  const double sc_phi = tol * (1.0 + std::abs(out.phi));
  const double sc_pd = tol * (1.0 + std::abs(out.phidot));
  out.err = std::max(std::abs(err_phi) / sc_phi, std::abs(err_pd) / sc_pd);
  return out;
}

}  // namespace

PhiTrajectory integrate_phi(double alpha, double epsilon, double t_end,
                            double tol) {
  if (!(alpha > 0.0)) throw std::invalid_argument("integrate_phi: alpha > 0");
  if (!(t_end >= 0.0)) throw std::invalid_argument("integrate_phi: t_end >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("integrate_phi: tol > 0");

  PhiTrajectory traj;
  traj.alpha = alpha;
  traj.epsilon = epsilon;
  traj.t_end = t_end;
  traj.tol = tol;
  traj.energy0 = phi_energy(1.0, epsilon, alpha);

  double t = 0.0, phi = 1.0, phidot = epsilon;
  traj.t.push_back(t);
  traj.phi.push_back(phi);
  traj.phidot.push_back(phidot);
  if (t_end == 0.0) return traj;

  const double h_max = std::min(0.5, t_end / 50.0 + 1e-300);
  double h = std::min(h_max, 1e-3);
  Deriv k1 = rhs(phi, phidot, alpha);
  int rejects_in_a_row = 0;
  while (t < t_end) {
    h = std::min(h, t_end - t);
    Deriv k7;
    const StepResult step = dopri_step(phi, phidot, alpha, h, k1, k7, tol);
    if (step.err <= 1.0) {
      t += h;
      phi = step.phi;
      phidot = step.phidot;
      k1 = k7;
      traj.t.push_back(t);
      traj.phi.push_back(phi);
      traj.phidot.push_back(phidot);
      rejects_in_a_row = 0;
      if (!(phi > 0.0)) {
        std::ostringstream os;
        os << "integrate_phi: phi <= 0 at t = " << t;
        throw std::runtime_error(os.str());
      }
    } else if (++rejects_in_a_row > 50) {
      std::ostringstream os;
      os << "integrate_phi: step size collapsed at t = " << t;
      throw std::runtime_error(os.str());
    }
    const double fac =
        std::clamp(0.9 * std::pow(std::max(step.err, 1e-10), -0.2), 0.2, 5.0);
    h = std::min(h * fac, h_max);
    if (!(h > 1e-14)) {
      std::ostringstream os;
      os << "integrate_phi: step size collapsed at t = " << t;
      throw std::runtime_error(os.str());
    }
  }
  traj.detected_period = detect_period(traj);
  return traj;
}

PhiTrajectory integrate_phi_leapfrog(double alpha, double epsilon, double t_end,
                                     double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_phi_leapfrog: dt > 0");
  PhiTrajectory traj;
  traj.alpha = alpha;
  traj.epsilon = epsilon;
  traj.t_end = t_end;
  traj.tol = dt * dt;  // nominal
  traj.energy0 = phi_energy(1.0, epsilon, alpha);
  double phi = 1.0, phidot = epsilon;
  const long n = std::lround(std::ceil(t_end / dt - 1e-12));
  traj.t.reserve(n + 1);
  traj.phi.reserve(n + 1);
  traj.phidot.reserve(n + 1);
  traj.t.push_back(0.0);
  traj.phi.push_back(phi);
  traj.phidot.push_back(phidot);
  for (long i = 0; i < n; ++i) {
    const double h = std::min(dt, t_end - i * dt);
    phidot += 0.5 * h * phi_rhs(phi, alpha);
    phi += h * phidot;
    if (!(phi > 0.0))
      throw std::runtime_error("integrate_phi_leapfrog: phi <= 0");
    phidot += 0.5 * h * phi_rhs(phi, alpha);
    traj.t.push_back(std::min((i + 1) * dt, t_end));
    traj.phi.push_back(phi);
    traj.phidot.push_back(phidot);
  }
  traj.detected_period = detect_period(traj);
  return traj;
}

std::optional<double> detect_period(const PhiTrajectory& traj) {
  // Bisect phidot(t) = 0 on the dense interpolant at each sign change of the
  // node values; the period is twice the gap between consecutive crossings.
  std::vector<double> crossings;
  const auto& t = traj.t;
  const auto& pd = traj.phidot;
  for (std::size_t i = 0; i + 1 < t.size() && crossings.size() < 2; ++i) {
    const double f0 = pd[i], f1 = pd[i + 1];
    if (f0 == 0.0) {
      // node exactly on a turning point -- but a constant (equilibrium)
      // trajectory is all zeros and has no period
      if (f1 != 0.0 && i > 0) crossings.push_back(t[i]);
      continue;
    }
    if (f0 * f1 >= 0.0) continue;
    double lo = t[i], hi = t[i + 1], flo = f0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = traj.eval(mid).phidot;
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((flo < 0.0) == (fm < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
      if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    }
    crossings.push_back(0.5 * (lo + hi));
  }
  if (crossings.size() < 2) return std::nullopt;
  return 2.0 * (crossings[1] - crossings[0]);
}

}  // namespace kurth
