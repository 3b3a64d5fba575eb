#include <doctest.h>

#include <kurth/phi_ode.hpp>

#include <cmath>
#include <stdexcept>

using namespace kurth;

namespace {
// Closed-form radial periods, frozen from a high-precision evaluation of
// 2*pi/(1-eps^2)^{3/2}.
constexpr double kT01 = 6.3786250848450029;
constexpr double kT03 = 7.2379866855278119;
constexpr double kT06 = 12.271846303085130;
constexpr double kT09 = 75.866398331122942;
constexpr double kTwoPi = 6.2831853071795865;
// Radial period for alpha=2, eps=0.3 from the generalized closed form
// 2*pi*alpha/(alpha-eps^2)^{3/2}.
constexpr double kTAlpha2 = 4.7605794016980233;
}  // namespace

TEST_CASE("closed-form period values") {
  CHECK(period(0.0) == doctest::Approx(kTwoPi).epsilon(1e-15));
  CHECK(period(0.1) == doctest::Approx(kT01).epsilon(1e-15));
  CHECK(period(0.3) == doctest::Approx(kT03).epsilon(1e-15));
  CHECK(period(0.6) == doctest::Approx(kT06).epsilon(1e-15));
  CHECK(period(0.9) == doctest::Approx(kT09).epsilon(1e-15));
  CHECK(period(-0.3) == doctest::Approx(kT03).epsilon(1e-15));
  CHECK_THROWS_AS((void)period(1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)period(-1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)period(1.5), std::invalid_argument);
}

TEST_CASE("right-hand side and first integral") {
  CHECK(phi_rhs(1.0, 1.0) == 0.0);  // equilibrium of the unit-parameter flow
  CHECK(phi_rhs(2.0, 1.0) == doctest::Approx(-0.25 + 0.125).epsilon(1e-15));
  CHECK(phi_energy(1.0, 0.6, 1.0) == doctest::Approx(-0.32).epsilon(1e-15));
  CHECK(phi_energy(1.0, 0.3, 2.0) ==
        doctest::Approx(0.045 - 2.0 + 1.0).epsilon(1e-14));
}

TEST_CASE("adaptive integration conserves the first integral") {
  for (double eps : {0.1, 0.3, 0.6, 0.9}) {
    const double t_end = 1.1 * period(eps);
    const PhiTrajectory traj = integrate_phi(1.0, eps, t_end, 1e-10);
    const double e0 = traj.energy0;
    double max_drift = 0.0;
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
      max_drift = std::max(
          max_drift, std::abs(phi_energy(traj.phi[i], traj.phidot[i], 1.0) -
                              e0));
    }
    CHECK(max_drift <= 5e-9);
  }
}

TEST_CASE("detected period matches the closed form") {
  for (double eps : {0.1, 0.3, 0.6, 0.9}) {
    const double T = period(eps);
    const PhiTrajectory traj = integrate_phi(1.0, eps, 1.15 * T, 1e-10);
    REQUIRE(traj.detected_period.has_value());
    CHECK(std::abs(*traj.detected_period - T) / T <= 1e-7);
  }
}

TEST_CASE("detected period for a non-unit strength parameter") {
  const PhiTrajectory traj = integrate_phi(2.0, 0.3, 5.5, 1e-10);
  REQUIRE(traj.detected_period.has_value());
  CHECK(std::abs(*traj.detected_period - kTAlpha2) / kTAlpha2 <= 1e-7);
}

TEST_CASE("turning points match the closed-form extremes") {
  {
    const PhiTrajectory traj = integrate_phi(1.0, 0.3, 1.1 * period(0.3),
                                             1e-10);
    const auto tp = traj.turning_points();
    REQUIRE(tp.has_value());
    CHECK(std::abs(tp->first - 10.0 / 13.0) <= 1e-12);
    CHECK(std::abs(tp->second - 10.0 / 7.0) <= 1e-12);
    // The trajectory actually attains them (scan the dense interpolant;
    // accepted step endpoints alone straddle the extremes too coarsely).
    double lo = 1e300, hi = -1e300;
    const int scan = 8192;
    for (int i = 0; i <= scan; ++i) {
      const double v = traj.phi_at(traj.t_end * i / scan);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(std::abs(lo - 10.0 / 13.0) <= 1e-6);
    CHECK(std::abs(hi - 10.0 / 7.0) <= 1e-6);
  }
  {
    const PhiTrajectory traj = integrate_phi(1.0, 0.6, 1.1 * period(0.6),
                                             1e-10);
    const auto tp = traj.turning_points();
    REQUIRE(tp.has_value());
    CHECK(std::abs(tp->first - 0.625) <= 1e-12);
    CHECK(std::abs(tp->second - 2.5) <= 1e-12);
  }
}

TEST_CASE("dense output is consistent with re-integration") {
  const PhiTrajectory traj = integrate_phi(1.0, 0.6, 10.0, 1e-10);
  for (double t : {0.37, 1.9, 5.5, 9.99}) {
    const PhiTrajectory fresh = integrate_phi(1.0, 0.6, t, 1e-11);
    CHECK(std::abs(traj.phi_at(t) - fresh.phi.back()) <= 1e-8);
    CHECK(std::abs(traj.phidot_at(t) - fresh.phidot.back()) <= 1e-8);
  }
  // The interpolant respects the first integral between nodes.
  const double e0 = traj.energy0;
  for (int k = 0; k <= 200; ++k) {
    const double t = 10.0 * k / 200.0;
    CHECK(std::abs(traj.energy_at(t) - e0) <= 1e-9);
  }
  // Interpolated derivative agrees with a difference quotient of the
  // interpolated value.
  for (double t : {0.5, 3.3, 7.7}) {
    const double h = 1e-5;
    const double fd = (traj.phi_at(t + h) - traj.phi_at(t - h)) / (2.0 * h);
    CHECK(std::abs(fd - traj.phidot_at(t)) <= 1e-6);
  }
  // Second derivative from the interpolant equals the right-hand side.
  for (double t : {0.5, 3.3, 7.7}) {
    CHECK(std::abs(traj.phiddot_at(t) -
                   phi_rhs(traj.phi_at(t), traj.alpha)) <= 1e-12);
  }
}

TEST_CASE("equilibrium initial data stays at the fixed point") {
  const PhiTrajectory traj = integrate_phi(1.0, 0.0, 20.0, 1e-10);
  for (double t : {0.0, 3.7, 11.1, 19.9}) {
    CHECK(traj.phi_at(t) == 1.0);
    CHECK(traj.phidot_at(t) == 0.0);
  }
  CHECK_FALSE(traj.detected_period.has_value());
}

TEST_CASE("fixed-step integrator agrees with the adaptive one") {
  const double T = period(0.3);
  const PhiTrajectory ref = integrate_phi(1.0, 0.3, 2.0 * T, 1e-12);
  const PhiTrajectory lf = integrate_phi_leapfrog(1.0, 0.3, 2.0 * T, 1e-3);
  // Endpoint agreement at second-order accuracy.
  CHECK(std::abs(lf.phi.back() - ref.phi.back()) <= 1e-4);
  CHECK(std::abs(lf.phidot.back() - ref.phidot.back()) <= 1e-4);
  // Symplectic scheme: bounded energy error of size O(dt^2).
  double max_drift = 0.0;
  for (std::size_t i = 0; i < lf.t.size(); ++i) {
    max_drift = std::max(
        max_drift,
        std::abs(phi_energy(lf.phi[i], lf.phidot[i], 1.0) - lf.energy0));
  }
  CHECK(max_drift <= 1e-5);
  REQUIRE(lf.detected_period.has_value());
  CHECK(std::abs(*lf.detected_period - T) / T <= 1e-4);
}

TEST_CASE("unbound initial data has no detected period") {
  const PhiTrajectory traj = integrate_phi(1.0, 1.5, 8.0, 1e-10);
  CHECK(traj.phi.back() > 5.0);  // escapes monotonically
  CHECK_FALSE(traj.detected_period.has_value());
  CHECK_FALSE(traj.turning_points().has_value());
}

TEST_CASE("invalid arguments are rejected") {
  CHECK_THROWS_AS((void)integrate_phi(-1.0, 0.3, 1.0, 1e-10),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)integrate_phi(1.0, 0.3, -1.0, 1e-10),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)integrate_phi(1.0, 0.3, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)integrate_phi_leapfrog(1.0, 0.3, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)phi_energy(0.0, 0.3, 1.0), std::invalid_argument);
}
