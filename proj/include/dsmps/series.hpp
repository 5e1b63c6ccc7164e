#pragma once

// Cylindrical-harmonic (T-matrix) solution for one or more disjoint circles
// of any kind. Each circle radiates u_j = sum_n b_{j,n} H_n(k r_j) e^{i n theta_j};
// the coefficients satisfy b_j = T_j (alpha_j + sum_{i != j} S_{ji} b_i) where
// alpha_j is the local expansion of the incident field and S_{ji} re-expands
// the outgoing field of circle i about circle j (Graf's addition theorem).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsmps/error.hpp"
#include "dsmps/greens.hpp"
#include "dsmps/scene.hpp"
#include "dsmps/specfun.hpp"

namespace dsmps {

inline constexpr int kMaxProximityOrder = 100;

/// N_t = ceil(x + 6 x^{1/3} + 12) for the size parameter x = k a.
inline int series_truncation(double ka) {
  return static_cast<int>(std::ceil(ka + 6.0 * std::cbrt(ka) + 12.0));
}

namespace detail {

inline Complex signed_order(const std::vector<Complex>& h, int n) {
  const int m = std::abs(n);
  return (n < 0 && (m % 2 == 1)) ? -h[m] : h[m];
}

inline Complex expi(double phase) { return {std::cos(phase), std::sin(phase)}; }

/// Diagonal T-matrix entries t_0..t_N (t_{-n} = t_n).
inline std::vector<Complex> circle_t_matrix(const Scatterer& s, double k, int N) {
  const double a = s.boundary.radius;
  const double x = k * a;
  std::vector<double> j, y;
  specfun::bessel_sequences(N + 1, x, j, y);
  std::vector<Complex> t(N + 1);
  std::vector<double> j1;
  double x1 = 0.0;
  if (s.kind == ScattererKind::Medium) {
    x1 = k * std::sqrt(s.refractive_index) * a;
    std::vector<double> y1;
    specfun::bessel_sequences(N + 1, x1, j1, y1);
  }
  for (int n = 0; n <= N; ++n) {
    const Complex h(j[n], y[n]);
    const double jp = (n / x) * j[n] - j[n + 1];
    const Complex hp = Complex((n / x) * j[n] - j[n + 1], (n / x) * y[n] - y[n + 1]);
    switch (s.kind) {
      case ScattererKind::SoundSoft: t[n] = -j[n] / h; break;
      case ScattererKind::SoundHard: t[n] = -jp / hp; break;
      case ScattererKind::Impedance: {
        const Complex il = kI * s.impedance;
        t[n] = -(jp + il * j[n]) / (hp + il * h);
        break;
      }
      case ScattererKind::Medium: {
        if (s.refractive_index == 1.0) {
          t[n] = 0.0;
          break;
        }
        const double k1 = k * std::sqrt(s.refractive_index);
        const double jin = j1[n];
        const double jinp = (n / x1) * j1[n] - j1[n + 1];
        t[n] = -(k * jp * jin - k1 * j[n] * jinp) / (k * hp * jin - k1 * h * jinp);
        break;
      }
    }
  }
  return t;
}

}  // namespace detail

/// Outgoing-wave coefficients of every circle for one incidence.
struct CircleSeriesSolution {
  double k = 0.0;
  int order = 0;
  std::vector<Vec2> centers;
  std::vector<double> radii;
  std::vector<std::vector<Complex>> coeffs;  // coeffs[j][n + order]

  Complex scattered(Vec2 x) const {
    Complex u{};
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const Vec2 d = x - centers[c];
      const double r = norm(d);
      if (r <= radii[c]) throw DomainError("CircleSeriesSolution: evaluation point inside a scatterer");
      const auto h = specfun::hankel1_sequence(order, k * r);
      const double th = std::atan2(d.y, d.x);
      for (int n = -order; n <= order; ++n) u += coeffs[c][n + order] * detail::signed_order(h, n) * detail::expi(n * th);
    }
    return u;
  }

  Complex farfield(Vec2 xhat) const {
    const double th = std::atan2(xhat.y, xhat.x);
    const Complex lead = std::sqrt(2.0 / (std::numbers::pi * k)) * detail::expi(-std::numbers::pi / 4.0);
    Complex u{};
    for (std::size_t c = 0; c < centers.size(); ++c) {
      Complex s{};
      for (int n = -order; n <= order; ++n) {
        // (-i)^n
        static constexpr Complex kPow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
        s += coeffs[c][n + order] * kPow[((n % 4) + 4) % 4] * detail::expi(n * th);
      }
      u += s * std::exp(-kI * (k * dot(xhat, centers[c])));
    }
    return lead * u;
  }
};

/// Factorizes the multiple-scattering system once; solve() per incidence.
class CircleSeriesSolver {
 public:
  CircleSeriesSolver(std::vector<Scatterer> circles, double k, int truncation = 0)
      : circles_(std::move(circles)), k_(k) {
    if (circles_.empty()) throw DomainError("CircleSeriesSolver: no scatterers");
    int n = 0;
    for (const Scatterer& s : circles_) {
      if (s.boundary.type != Boundary::Type::Circle) throw DomainError("CircleSeriesSolver: all scatterers must be circles");
      double kk = k;
      if (s.kind == ScattererKind::Medium) kk = std::max(k, k * std::sqrt(s.refractive_index));
      n = std::max(n, series_truncation(kk * s.boundary.radius));
    }
    if (circles_.size() > 1) n += 10;
    // Fields radiated by a neighbor converge on circle j like rho^n with
    // rho = a_j / (d - a_i).
    for (std::size_t i = 0; i < circles_.size(); ++i)
      for (std::size_t j = 0; j < circles_.size(); ++j) {
        if (i == j) continue;
        const double d = norm(circles_[i].boundary.center - circles_[j].boundary.center);
        const double rho = circles_[j].boundary.radius / (d - circles_[i].boundary.radius);
        if (rho >= 1.0) throw DomainError("CircleSeriesSolver: circles overlap");
        n = std::max(n, std::min(kMaxProximityOrder, static_cast<int>(std::ceil(std::log(1e-14) / std::log(rho)))));
      }
    order_ = truncation > 0 ? truncation : n;
    const int m = 2 * order_ + 1;
    const int J = static_cast<int>(circles_.size());

    // Unknowns are scaled as b_{j,n} |H_n(k a_j)| so that the coupling
    // entries stay bounded for high orders.
    t_.resize(J);
    scale_.resize(J);
    for (int j = 0; j < J; ++j) {
      t_[j] = detail::circle_t_matrix(circles_[j], k_, order_);
      const auto h = specfun::hankel1_sequence(order_, k_ * circles_[j].boundary.radius);
      for (const Complex& v : h) scale_[j].push_back(std::abs(v));
    }

    if (J > 1) {
      Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(J * m, J * m);
      for (int j = 0; j < J; ++j) {
        for (int i = 0; i < J; ++i) {
          if (i == j) continue;
          const Vec2 d = circles_[j].boundary.center - circles_[i].boundary.center;
          const double dist = norm(d);
          const double phi = std::atan2(d.y, d.x);
          const auto h = specfun::hankel1_sequence(2 * order_, k_ * dist);
          for (int mm = -order_; mm <= order_; ++mm) {
            const Complex tj = t_[j][std::abs(mm)] * scale_[j][std::abs(mm)];
            for (int nn = -order_; nn <= order_; ++nn) {
              const Complex s = detail::signed_order(h, nn - mm) * detail::expi((nn - mm) * phi);
              A(j * m + mm + order_, i * m + nn + order_) -= tj * s / scale_[i][std::abs(nn)];
            }
          }
        }
      }
      lu_ = A.partialPivLu();
    }
  }

  int order() const { return order_; }

  CircleSeriesSolution solve(const Incidence& inc) const {
    const int m = 2 * order_ + 1;
    const int J = static_cast<int>(circles_.size());
    Eigen::VectorXcd rhs(J * m);
    for (int j = 0; j < J; ++j) {
      const Vec2 c = circles_[j].boundary.center;
      std::vector<Complex> alpha(m);
      if (inc.type == Incidence::Type::PlaneWave) {
        const Complex base = std::exp(kI * (k_ * dot(c, inc.direction)));
        const double thd = std::atan2(inc.direction.y, inc.direction.x);
        static constexpr Complex kPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        for (int n = -order_; n <= order_; ++n) alpha[n + order_] = base * kPow[((n % 4) + 4) % 4] * detail::expi(-n * thd);
      } else {
        const Vec2 d = inc.source - c;
        const double rs = norm(d);
        if (rs <= circles_[j].boundary.radius) throw DomainError("CircleSeriesSolver: point source inside a scatterer");
        const auto h = specfun::hankel1_sequence(order_, k_ * rs);
        const double ths = std::atan2(d.y, d.x);
        for (int n = -order_; n <= order_; ++n) alpha[n + order_] = 0.25 * kI * detail::signed_order(h, n) * detail::expi(-n * ths);
      }
      for (int n = -order_; n <= order_; ++n) {
        rhs(j * m + n + order_) = t_[j][std::abs(n)] * scale_[j][std::abs(n)] * alpha[n + order_];
      }
    }
    const Eigen::VectorXcd b = J > 1 ? Eigen::VectorXcd(lu_.solve(rhs)) : rhs;

    CircleSeriesSolution sol;
    sol.k = k_;
    sol.order = order_;
    double peak = 0.0;
    for (int i = 0; i < b.size(); ++i) peak = std::max(peak, std::abs(b(i)));
    for (int j = 0; j < J; ++j) {
      sol.centers.push_back(circles_[j].boundary.center);
      sol.radii.push_back(circles_[j].boundary.radius);
      std::vector<Complex> cj(b.data() + j * m, b.data() + (j + 1) * m);
      const double tail = std::max(std::abs(cj.front()), std::abs(cj.back()));
      if (peak > 0.0 && tail > 1e-12 * peak) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", tail / peak);
        throw SolverError("circle series did not converge at truncation " + std::to_string(order_) + " (tail ratio " +
                          buf + ")");
      }
      for (int n = -order_; n <= order_; ++n) cj[n + order_] /= scale_[j][std::abs(n)];
      sol.coeffs.push_back(std::move(cj));
    }
    return sol;
  }

 private:
  std::vector<Scatterer> circles_;
  double k_;
  int order_ = 0;
  std::vector<std::vector<Complex>> t_;
  std::vector<std::vector<double>> scale_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
};

inline CircleSeriesSolution solve_circle_series(const std::vector<Scatterer>& circles, const Incidence& inc, double k,
                                                int truncation = 0) {
  return CircleSeriesSolver(circles, k, truncation).solve(inc);
}

}  // namespace dsmps
