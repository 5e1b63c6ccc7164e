#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bessel_oracle.hpp"
#include "dsmps/forward.hpp"
#include "fit.hpp"

using namespace dsmps;

namespace {

const double kWave = 2 * std::numbers::pi / 0.75;

Scene example1() {
  Scene s;
  s.scatterers = {Scatterer::obstacle(ScattererKind::SoundHard, Boundary::circle({0, 0}, 0.15))};
  s.incidences = {Incidence::plane_wave(std::numbers::pi / 4)};
  return s;
}

double rel(const std::vector<Complex>& a, const std::vector<Complex>& b) { return testfit::rel_l2(a, b); }

// sum |u_inf|^2 dtheta against -sqrt(8 pi / k) Re(e^{i pi/4} u_inf(d)).
std::pair<double, double> optical_theorem(const ScatteringModel& m, double angle) {
  const auto sol = m.solve(Incidence::plane_wave(angle));
  double lhs = 0;
  const int n = 512;
  for (int l = 0; l < n; ++l) lhs += std::norm(farfield_at(sol, unit_from_angle(2 * std::numbers::pi * l / n))) * 2 * std::numbers::pi / n;
  const Complex f = farfield_at(sol, unit_from_angle(angle));
  const double rhs = -std::sqrt(8 * std::numbers::pi / m.wavenumber()) * std::real(std::exp(Complex(0, std::numbers::pi / 4)) * f);
  return {lhs, rhs};
}

}  // namespace

TEST(Forward, EmptySceneGivesZeroScatteredField) {
  Scene s;
  s.incidences = {Incidence::plane_wave(0.0), Incidence::point_source({3.0, 0.0})};
  const auto r = simulate(s);
  EXPECT_EQ(r.solver, "none");
  for (const auto& row : r.u_scat)
    for (Complex v : row) EXPECT_EQ(v, Complex{});
  EXPECT_TRUE(r.consistent());
}

TEST(Forward, AutomaticSolverChoice) {
  Scene s = example1();
  EXPECT_EQ(ScatteringModel(s).solver_name(), "series");
  s.scatterers = {Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::polygon(square({0, 0}, 0.3)))};
  EXPECT_EQ(ScatteringModel(s).solver_name(), "bie");
  s.scatterers = {Scatterer::medium(Boundary::polygon(square({0, 0}, 0.3)), 2.0)};
  EXPECT_EQ(ScatteringModel(s, {.ls_resolution = 32}).solver_name(), "ls");
  s.scatterers.push_back(Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::polygon(square({0.6, 0.6}, 0.2))));
  EXPECT_THROW(ScatteringModel{s}, InvalidScene);
}

TEST(Forward, OracleTriangleImpenetrable) {
  for (auto kind : {ScattererKind::SoundSoft, ScattererKind::SoundHard, ScattererKind::Impedance}) {
    Scene s = example1();
    s.scatterers[0].kind = kind;
    const auto a = simulate(s, {.solver = "series"});
    const auto b = simulate(s, {.solver = "bie"});
    EXPECT_LT(rel(b.u_scat[0], a.u_scat[0]), 1e-3) << to_string(kind);
    EXPECT_TRUE(b.warnings.empty());
  }
}

TEST(Forward, OracleTrianglePenetrable) {
  Scene s = example1();
  s.scatterers = {Scatterer::medium(Boundary::circle({0, 0}, 0.3), 1.1)};
  const auto a = simulate(s, {.solver = "series"});
  const auto b = simulate(s, {.solver = "ls", .ls_resolution = 96});
  EXPECT_LT(rel(b.u_scat[0], a.u_scat[0]), 5e-3);
}

TEST(Forward, NoContrastMediumGivesZeroField) {
  Scene s = example1();
  s.scatterers = {Scatterer::medium(Boundary::circle({0, 0}, 0.3), 1.0)};
  const auto r = simulate(ScatteringModel(s, {.solver = "series"}), s.receivers, s.incidences, 0);
  for (Complex v : r.u_scat[0]) EXPECT_LT(std::abs(v), 1e-12);
}

TEST(Forward, ScatteredFieldApproachesFarFieldForPolygon) {
  Scene s = example1();
  s.scatterers = {Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::polygon(regular_polygon({0.1, 0.0}, 0.35, 5, 0.1)))};
  const ScatteringModel m(s);
  const auto sol = m.solve(s.incidences[0]);
  std::vector<double> radii{10, 20, 40, 80};
  std::vector<double> err;
  const Vec2 xh = unit_from_angle(1.9);
  for (double R : radii) {
    const Complex scaled = scattered_at(sol, R * xh) * std::sqrt(R) * std::exp(Complex(0, -kWave * R));
    err.push_back(std::abs(scaled - farfield_at(sol, xh)));
  }
  EXPECT_NEAR(testfit::loglog_slope(radii, err), -1.0, 0.15);
}

TEST(Forward, OpticalTheorem) {
  Scene s = example1();
  s.scatterers[0].kind = ScattererKind::SoundSoft;
  const auto [l1, r1] = optical_theorem(ScatteringModel(s), 0.7);
  EXPECT_GT(l1, 0.0);
  EXPECT_NEAR(l1, r1, 1e-9 * l1);
  s.scatterers = {Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::polygon(regular_polygon({0, 0}, 0.4, 3, 0.0)))};
  const auto [l2, r2] = optical_theorem(ScatteringModel(s), 0.3);
  EXPECT_GT(l2, 0.0);
  EXPECT_NEAR(l2, r2, 1e-6 * l2);
}

TEST(Forward, PointSourceFieldsAreNotRenormalized) {
  Scene s = example1();
  s.incidences = {Incidence::point_source({4.0, 0.0})};
  s.receivers = {8.0, 100};
  const auto r = simulate(s);
  for (int i = 0; i < 100; ++i) {
    const Vec2 x = s.receivers.point(i);
    EXPECT_EQ(r.u_inc[0][i], greens(x, {4.0, 0.0}, kWave));
  }
}

TEST(Forward, HuygensResidualDecreases) {
  Scene s;
  s.scatterers = {Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({0.1, -0.1}, 0.2))};
  s.grid.resolution = 16;
  const auto rows = huygens_check(s, Incidence::plane_wave(0.3), {4, 8, 16, 32});
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].residual, 1.1 * rows[i - 1].residual);
  std::vector<double> r, v;
  for (const auto& row : rows) {
    r.push_back(row.radius);
    v.push_back(row.residual);
  }
  EXPECT_LT(testfit::loglog_slope(r, v), -0.5);
}

TEST(Forward, HuygensTranslationCovariance) {
  Scene a;
  a.scatterers = {Scatterer::obstacle(ScattererKind::SoundSoft, Boundary::circle({0.0, 0.1}, 0.2))};
  a.grid = {-0.5, 0.5, 12};
  Scene b = a;
  b.scatterers[0].boundary.center = {0.2, 0.1};
  const Incidence inc = Incidence::plane_wave(0.4);
  const auto ra = huygens_check(a, inc, {8, 32});
  const auto rb = huygens_check(b, inc, {8, 32}, 256, 0, {0.2, 0.0});
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(rb[i].residual, ra[i].residual, 1e-8 * ra[i].residual);
}

TEST(Forward, OnePointHuygensMatchesExactIntegral) {
  // int_{|x|=R} conj(G(z,x)) G(x,y) ds  =  (2 pi R / 16) sum_n J_n(k|y|) J_n(k|z|) e^{in(ty - tz)} |H_n(kR)|^2
  const double k = kWave;
  const Vec2 y{0.3, -0.2}, z{-0.1, 0.4};
  const double R = 8.0;
  const int N = 400;
  const ReceiverArray ring{R, N};
  Complex quad{};
  for (int r = 0; r < N; ++r) quad += std::conj(greens(z, ring.point(r), k)) * greens(ring.point(r), y, k);
  quad *= ring.weight();
  Complex exact{};
  const double ty = std::atan2(y.y, y.x), tz = std::atan2(z.y, z.x);
  for (int n = -40; n <= 40; ++n) {
    const int m = std::abs(n);
    const double jy = oracle::j(m, k * norm(y)), jz = oracle::j(m, k * norm(z));
    const double h2 = std::pow(oracle::j(m, k * R), 2) + std::pow(oracle::y(m, k * R), 2);
    exact += jy * jz * std::exp(Complex(0, n * (ty - tz))) * h2;  // (-1)^n factors cancel in J_{-n} J_{-n}
  }
  exact *= 2 * std::numbers::pi * R / 16.0;
  EXPECT_NEAR(std::abs(quad - exact), 0.0, 1e-12);
  // and the far-ring approximation k^{-1} Im G(z, y) is already close
  EXPECT_LT(std::abs(quad - greens(z, y, k).imag() / k), 0.05 * std::abs(greens(z, y, k).imag() / k) + 1e-3);
}
