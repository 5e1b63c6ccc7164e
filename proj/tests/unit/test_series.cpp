#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bessel_oracle.hpp"
#include "dsmps/series.hpp"
#include "fit.hpp"

using namespace dsmps;

namespace {

const double kWave = 2 * std::numbers::pi / 0.75;

Complex total(const CircleSeriesSolution& s, const Incidence& inc, Vec2 x) {
  return incident_field(inc, s.k, x).u + s.scattered(x);
}

// Normal derivative of the total field on circle (c, a) at angle t by a
// one-sided outward difference.
Complex radial_derivative(const CircleSeriesSolution& s, const Incidence& inc, Vec2 c, double a, double t) {
  const double h = 1e-5;
  const Vec2 e = unit_from_angle(t);
  const Complex u1 = total(s, inc, c + (a * (1 + 1e-12) + h) * e);
  const Complex u2 = total(s, inc, c + (a * (1 + 1e-12) + 2 * h) * e);
  const Complex u0 = total(s, inc, c + (a * (1 + 1e-12) + 3 * h) * e);
  // Second-order forward difference anchored at a + h... reconstructed at a.
  const Complex ua = total(s, inc, c + a * (1 + 1e-12) * e);
  (void)u0;
  return (-3.0 * ua + 4.0 * u1 - u2) / (2 * h);
}

}  // namespace

TEST(Series, SoundSoftModeCoefficientIsMinusJOverH) {
  const double a = 0.15;
  const auto circ = Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({0, 0}, a));
  const Incidence inc = Incidence::plane_wave(0.0);
  const auto sol = solve_circle_series({circ}, inc, kWave);
  for (int n = 0; n <= 6; ++n) {
    // plane wave along +x about the origin: alpha_n = i^n
    const Complex alpha = std::pow(Complex(0, 1), n);
    const double x = kWave * a;
    const Complex ref = -oracle::j(n, x) / Complex(oracle::j(n, x), oracle::y(n, x));
    const Complex got = sol.coeffs[0][n + sol.order] / alpha;
    EXPECT_NEAR(std::abs(got - ref), 0.0, 1e-10 * std::abs(ref)) << "n=" << n;
  }
}

TEST(Series, DirichletConditionHoldsOnBoundary) {
  const auto circ = Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({0.1, -0.2}, 0.3));
  for (const Incidence& inc : {Incidence::plane_wave(0.9), Incidence::point_source({4.0, 1.0})}) {
    const auto sol = solve_circle_series({circ}, inc, kWave);
    double umax = 0;
    for (int i = 0; i < 16; ++i) {
      const Vec2 x = Vec2{0.1, -0.2} + 0.3 * (1 + 1e-13) * unit_from_angle(i * 0.4);
      umax = std::max(umax, std::abs(total(sol, inc, x)));
    }
    EXPECT_LT(umax, 1e-9);
  }
}

TEST(Series, NeumannAndRobinConditionsHoldOnBoundary) {
  const Vec2 c{0.0, 0.1};
  const double a = 0.25;
  const Incidence inc = Incidence::plane_wave(2.0);
  for (double lambda : {0.0, 1.0, 2.5}) {
    const auto circ = Scatterer::obstacle(lambda == 0.0 ? ScattererKind::SoundHard : ScattererKind::Impedance,
                                          Boundary::circle(c, a), lambda);
    const auto sol = solve_circle_series({circ}, inc, kWave);
    for (double t : {0.0, 1.3, 4.0}) {
      const Complex du = radial_derivative(sol, inc, c, a, t);
      const Complex u = total(sol, inc, c + a * (1 + 1e-12) * unit_from_angle(t));
      EXPECT_LT(std::abs(du + Complex(0, kWave * lambda) * u), 1e-4 * kWave) << "lambda=" << lambda;
    }
  }
}

TEST(Series, NoContrastMediumScattersNothing) {
  const auto circ = Scatterer::medium(Boundary::circle({0, 0}, 0.3), 1.0);
  const auto sol = solve_circle_series({circ}, Incidence::plane_wave(0.3), kWave);
  for (int r = 0; r < 100; ++r) EXPECT_LT(std::abs(sol.scattered(4.0 * unit_from_angle(r * 0.0628))), 1e-12);
}

TEST(Series, GrafAdditionTheorem) {
  // H_n(k|X+Y|) e^{in arg(X+Y)} = sum_m H_{n-m}(k|X|) e^{i(n-m) arg X} J_m(k|Y|) e^{im arg Y}
  const double k = 3.0;
  const Vec2 X{1.1, 0.4};
  const Vec2 Y{-0.2, 0.35};
  const Vec2 S = X + Y;
  for (int n : {-3, 0, 2, 5}) {
    const double ns = std::abs(n);
    Complex lhs = Complex(oracle::j(ns, k * norm(S)), oracle::y(ns, k * norm(S))) *
                  std::exp(Complex(0, n * std::atan2(S.y, S.x)));
    if (n < 0 && (-n) % 2 == 1) lhs = -lhs;
    Complex rhs{};
    for (int m = -40; m <= 40; ++m) {
      const int p = n - m;
      Complex hp(oracle::j(std::abs(p), k * norm(X)), oracle::y(std::abs(p), k * norm(X)));
      if (p < 0 && (-p) % 2 == 1) hp = -hp;
      double jm = oracle::j(std::abs(m), k * norm(Y));
      if (m < 0 && (-m) % 2 == 1) jm = -jm;
      rhs += hp * std::exp(Complex(0, p * std::atan2(X.y, X.x))) * jm * std::exp(Complex(0, m * std::atan2(Y.y, Y.x)));
    }
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-10 * std::abs(lhs)) << "n=" << n;
  }
}

TEST(Series, TransparentNeighbourLeavesSingleCircleSolution) {
  const auto soft = Scatterer::obstacle(ScattererKind::SoundHard, Boundary::circle({-0.3, 0}, 0.2));
  const auto ghost = Scatterer::medium(Boundary::circle({0.4, 0.1}, 0.25), 1.0);
  const Incidence inc = Incidence::plane_wave(0.5);
  const auto one = solve_circle_series({soft}, inc, kWave, 30);
  const auto two = solve_circle_series({soft, ghost}, inc, kWave, 30);
  for (int r = 0; r < 20; ++r) {
    const Vec2 x = 4.0 * unit_from_angle(r * 0.314);
    EXPECT_NEAR(std::abs(one.scattered(x) - two.scattered(x)), 0.0, 1e-12);
  }
}

TEST(Series, MultipleScatteringSatisfiesEveryBoundaryCondition) {
  const std::vector<Scatterer> circles{Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({-0.35, 0.1}, 0.25)),
                                       Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({0.3, -0.2}, 0.2)),
                                       Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({0.2, 0.55}, 0.2))};
  const Incidence inc = Incidence::plane_wave(0.3);
  const auto sol = solve_circle_series(circles, inc, kWave);
  double worst = 0;
  for (const auto& c : circles)
    for (int i = 0; i < 24; ++i) {
      const Vec2 x = c.boundary.center + c.boundary.radius * (1 + 1e-13) * unit_from_angle(i * 0.2618);
      worst = std::max(worst, std::abs(total(sol, inc, x)));
    }
  EXPECT_LT(worst, 1e-8);
}

TEST(Series, TruncationIsConverged) {
  const std::vector<Scatterer> circles{Scatterer::medium(Boundary::circle({-0.4, 0.0}, 0.25), 2.5),
                                       Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({0.35, 0.2}, 0.22))};
  const Incidence inc = Incidence::plane_wave(1.0);
  CircleSeriesSolver base(circles, kWave);
  const auto a = base.solve(inc);
  const auto b = CircleSeriesSolver(circles, kWave, 2 * base.order()).solve(inc);
  for (int r = 0; r < 10; ++r) {
    const Vec2 x = 4.0 * unit_from_angle(r * 0.6);
    EXPECT_LT(std::abs(a.scattered(x) - b.scattered(x)), 1e-10);
  }
}

TEST(Series, NearlyTouchingCirclesConverge) {
  for (double gap : {0.05, 0.005}) {
    const std::vector<Scatterer> circles{
        Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({-0.3, 0.0}, 0.3)),
        Scatterer::medium(Boundary::circle({0.3 + gap, 0.0}, 0.3), 3.0),
        Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({0.0, 0.6 + gap}, 0.29))};
    const Incidence inc = Incidence::plane_wave(0.7);
    CircleSeriesSolver base(circles, kWave);
    const auto a = base.solve(inc);
    const auto b = CircleSeriesSolver(circles, kWave, base.order() - 15).solve(inc);
    for (int r = 0; r < 10; ++r) {
      const Vec2 x = 4.0 * unit_from_angle(r * 0.6);
      EXPECT_LT(std::abs(a.scattered(x) - b.scattered(x)), 1e-8) << gap;
    }
    double worst = 0;
    for (int i = 0; i < 24; ++i) {
      const Vec2 x = circles[0].boundary.center + 0.3 * (1 + 1e-13) * unit_from_angle(i * 0.2618);
      worst = std::max(worst, std::abs(total(a, inc, x)));
    }
    EXPECT_LT(worst, 1e-6) << gap;
  }
}

TEST(Series, OverlappingCirclesRejected) {
  const std::vector<Scatterer> circles{Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({0, 0}, 0.3)),
                                       Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({0.5, 0}, 0.3))};
  EXPECT_THROW(CircleSeriesSolver(circles, kWave), DomainError);
}

TEST(Series, ScatteredFieldTendsToFarField) {
  const auto circ = Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({0.2, 0.1}, 0.3));
  const auto sol = solve_circle_series({circ}, Incidence::plane_wave(0.0), kWave);
  const Vec2 xhat = unit_from_angle(2.2);
  std::vector<double> radii{16, 32, 64, 128};
  std::vector<double> err;
  for (double R : radii) {
    const Complex scaled = sol.scattered(R * xhat) * std::sqrt(R) * std::exp(Complex(0, -kWave * R));
    err.push_back(std::abs(scaled - sol.farfield(xhat)));
  }
  const double slope = testfit::loglog_slope(radii, err);
  EXPECT_NEAR(slope, -1.0, 0.15);
}

TEST(Series, NonCircleRejected) {
  const auto poly = Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::polygon(square({0, 0}, 0.2)));
  EXPECT_THROW(solve_circle_series({poly}, Incidence::plane_wave(0.0), kWave), DomainError);
}
