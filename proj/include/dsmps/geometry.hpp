#pragma once

// Planar vectors and smooth closed parametrized curves used by the boundary
// integral solver. Curves are 2*pi-periodic in their parameter and oriented
// counterclockwise, so (z2', -z1') is the outward normal direction.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dsmps/error.hpp"

namespace dsmps {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }
inline Vec2 rotate(Vec2 a, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

/// Point, first and second derivative of a curve at one parameter value.
struct CurvePoint {
  Vec2 z;
  Vec2 dz;
  Vec2 ddz;

  double speed() const { return norm(dz); }
  /// Outward unit normal for a counterclockwise curve.
  Vec2 normal() const { return Vec2{dz.y, -dz.x} / speed(); }
};

/// A closed curve given as a truncated complex Fourier series
/// z(t) = sum_m c_m e^{imt}, t in [0, 2pi). Circles are the m = 0, 1 case.
class FourierCurve {
 public:
  FourierCurve() = default;
  /// coeffs[j] holds c_{j - max_mode}.
  FourierCurve(std::vector<std::complex<double>> coeffs, int max_mode)
      : coeffs_(std::move(coeffs)), max_mode_(max_mode) {
    if (static_cast<int>(coeffs_.size()) != 2 * max_mode_ + 1) {
      throw DomainError("FourierCurve: coefficient count must be 2*max_mode+1");
    }
  }

  static FourierCurve circle(Vec2 center, double radius) {
    return FourierCurve({{0.0, 0.0}, {center.x, center.y}, {radius, 0.0}}, 1);
  }

  CurvePoint at(double t) const {
    std::complex<double> z{}, dz{}, ddz{};
    for (int j = 0; j < static_cast<int>(coeffs_.size()); ++j) {
      const int m = j - max_mode_;
      const std::complex<double> e(std::cos(m * t), std::sin(m * t));
      const std::complex<double> c = coeffs_[j] * e;
      z += c;
      dz += std::complex<double>(0.0, m) * c;
      ddz += -static_cast<double>(m) * m * c;
    }
    return {{z.real(), z.imag()}, {dz.real(), dz.imag()}, {ddz.real(), ddz.imag()}};
  }

  int max_mode() const { return max_mode_; }
  const std::vector<std::complex<double>>& coefficients() const { return coeffs_; }

 private:
  std::vector<std::complex<double>> coeffs_;
  int max_mode_ = 0;
};

/// Signed area of a closed vertex chain (positive when counterclockwise).
inline double polygon_signed_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

inline bool point_in_polygon(const std::vector<Vec2>& v, Vec2 p) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double xc = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < xc) inside = !inside;
    }
  }
  return inside;
}

/// Point on the vertex chain at arc length s in [0, perimeter).
inline Vec2 polygon_point_at_arclength(const std::vector<Vec2>& v, double s) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i];
    const Vec2 b = v[(i + 1) % v.size()];
    const double len = distance(a, b);
    if (s <= len || i + 1 == v.size()) return a + (b - a) * (std::min(s, len) / len);
    s -= len;
  }
  return v.front();
}

inline double polygon_perimeter(const std::vector<Vec2>& v) {
  double p = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) p += distance(v[i], v[(i + 1) % v.size()]);
  return p;
}

/// Smooth Fourier curve approximating a polygon: the vertex chain is sampled
/// uniformly in arc length, expanded in a trigonometric series and low-pass
/// filtered with a Gaussian of arc-length width `rounding`, which rounds the
/// corners on that length scale.
inline FourierCurve smoothed_polygon(std::vector<Vec2> vertices, double rounding) {
  if (vertices.size() < 3) throw DomainError("smoothed_polygon: need at least 3 vertices");
  if (!(rounding > 0.0)) throw DomainError("smoothed_polygon: rounding must be positive");
  if (polygon_signed_area(vertices) < 0.0) std::reverse(vertices.begin(), vertices.end());

  const double perimeter = polygon_perimeter(vertices);
  // Keep modes whose filter factor exceeds 1e-10.
  const double width = 2.0 * std::numbers::pi * rounding / perimeter;
  const int max_mode = std::max(8, static_cast<int>(std::ceil(std::sqrt(2.0 * std::log(1e10)) / width)));
  const int samples = std::max(4096, 8 * max_mode);

  std::vector<std::complex<double>> pts(samples);
  for (int i = 0; i < samples; ++i) {
    const Vec2 p = polygon_point_at_arclength(vertices, perimeter * i / samples);
    pts[i] = {p.x, p.y};
  }
  std::vector<std::complex<double>> coeffs(2 * max_mode + 1);
  for (int m = -max_mode; m <= max_mode; ++m) {
    std::complex<double> c{};
    const std::complex<double> step(std::cos(-2.0 * std::numbers::pi * m / samples),
                                    std::sin(-2.0 * std::numbers::pi * m / samples));
    std::complex<double> e(1.0, 0.0);
    for (int i = 0; i < samples; ++i) {
      c += pts[i] * e;
      e *= step;
      if (i % 256 == 255) {  // renormalize the rotating phasor
        const double ang = -2.0 * std::numbers::pi * m * (i + 1) / samples;
        e = {std::cos(ang), std::sin(ang)};
      }
    }
    c /= static_cast<double>(samples);
    const double f = std::exp(-0.5 * (m * width) * (m * width));
    coeffs[m + max_mode] = c * f;
  }
  return FourierCurve(std::move(coeffs), max_mode);
}

/// Vertices of a regular polygon with the given circumradius.
inline std::vector<Vec2> regular_polygon(Vec2 center, double circumradius, int sides, double rotation) {
  std::vector<Vec2> v;
  v.reserve(sides);
  for (int i = 0; i < sides; ++i) {
    v.push_back(center + circumradius * unit_from_angle(rotation + 2.0 * std::numbers::pi * i / sides));
  }
  return v;
}

/// Axis-aligned square of the given side length.
inline std::vector<Vec2> square(Vec2 center, double width) {
  const double h = width / 2.0;
  return {center + Vec2{-h, -h}, center + Vec2{h, -h}, center + Vec2{h, h}, center + Vec2{-h, h}};
}

}  // namespace dsmps
