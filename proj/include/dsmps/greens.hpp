#pragma once

// Fundamental solutions of the Helmholtz equation, their far-field patterns
// and the incident fields built from them.

#include <cmath>
#include <complex>
#include <numbers>

#include "dsmps/error.hpp"
#include "dsmps/geometry.hpp"
#include "dsmps/scene.hpp"
#include "dsmps/specfun.hpp"

namespace dsmps {

using Complex = std::complex<double>;
inline constexpr Complex kI{0.0, 1.0};

/// G(z, y) for dim 2 ((i/4) H_0(k|z-y|)) or dim 3 (e^{ik|z-y|} / (4 pi |z-y|)).
/// The 3D kernel is evaluated for points in the plane x3 = 0.
inline Complex greens(Vec2 z, Vec2 y, double k, int dim = 2) {
  const double r = distance(z, y);
  if (r == 0.0) throw DomainError("greens: coincident points");
  if (dim == 2) return 0.25 * kI * specfun::hankel1(0, k * r);
  if (dim == 3) return std::exp(kI * (k * r)) / (4.0 * std::numbers::pi * r);
  throw DomainError("greens: dim must be 2 or 3");
}

/// 2D Green's function without argument checks; r > 0 assumed.
inline Complex greens2(double k, double r) {
  const auto b = specfun::bessel01(k * r);
  return 0.25 * Complex(-b.y0, b.j0);
}

/// Far-field normalization constant of G: e^{i pi/4}/sqrt(8 pi k) in 2D, 1/(4 pi) in 3D.
inline Complex farfield_constant(double k, int dim = 2) {
  if (dim == 2) return std::exp(kI * (std::numbers::pi / 4.0)) / std::sqrt(8.0 * std::numbers::pi * k);
  if (dim == 3) return 1.0 / (4.0 * std::numbers::pi);
  throw DomainError("farfield_constant: dim must be 2 or 3");
}

inline Complex greens_farfield(Vec2 z, Vec2 xhat, double k, int dim = 2) {
  if (std::abs(norm(xhat) - 1.0) > 1e-10) throw DomainError("greens_farfield: direction must be a unit vector");
  return farfield_constant(k, dim) * std::exp(-kI * (k * dot(xhat, z)));
}

/// Value and gradient of an incident field at x.
struct IncidentValue {
  Complex u;
  Complex dx;
  Complex dy;

  Complex normal_derivative(Vec2 nu) const { return dx * nu.x + dy * nu.y; }
};

/// Plane wave e^{ik x.d} or point source G(x, x_s).
inline IncidentValue incident_field(const Incidence& inc, double k, Vec2 x) {
  if (inc.type == Incidence::Type::PlaneWave) {
    const Complex u = std::exp(kI * (k * dot(x, inc.direction)));
    return {u, kI * k * inc.direction.x * u, kI * k * inc.direction.y * u};
  }
  const Vec2 d = x - inc.source;
  const double r = norm(d);
  if (r == 0.0) throw DomainError("incident_field: evaluation at the source point");
  const auto b = specfun::bessel01(k * r);
  const Complex h0(b.j0, b.y0);
  const Complex h1(b.j1, b.y1);
  // grad (i/4) H_0(k|x - xs|) = -(ik/4) H_1(kr) (x - xs)/r
  const Complex g = -0.25 * kI * k * h1 / r;
  return {0.25 * kI * h0, g * d.x, g * d.y};
}

}  // namespace dsmps
