#pragma once

// Nystrom boundary integral solver for impenetrable obstacles with smooth
// (or smoothed) boundaries. Logarithmic kernel singularities are split off
// and integrated with the Martensen-Kussmaul weights R_j(t); all other
// kernel parts use the trapezoid rule on 2n equispaced nodes per curve.
//
// Operators below carry the conventional factor 2:
//   S psi(t) = 2 int G psi ds, K psi(t) = 2 int dG/dnu(y) psi ds, K' likewise in nu(x).
//
// Formulations:
//   CombinedField  u^s = int (dG/dnu(y) - i eta G) psi ds,  (I + K - i eta S) psi = -2 u^i
//   SingleLayerRobin   u^s = int G phi ds, (I - K' - i k lambda S) phi = 2 du^i/dnu + 2 i k lambda u^i
//   SingleLayerDirichlet u^s = int G phi ds, S phi = -2 u^i

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsmps/error.hpp"
#include "dsmps/geometry.hpp"
#include "dsmps/greens.hpp"
#include "dsmps/scene.hpp"
#include "dsmps/specfun.hpp"

namespace dsmps {

enum class BieFormulation { CombinedField, SingleLayerRobin, SingleLayerDirichlet };

/// Smooth parametrization used by the solver for a scatterer boundary.
inline FourierCurve boundary_curve(const Boundary& b) {
  if (b.type == Boundary::Type::Circle) return FourierCurve::circle(b.center, b.radius);
  if (b.type == Boundary::Type::Polygon) return smoothed_polygon(b.vertices, 0.02 * b.reach(b.centroid()));
  throw DomainError("boundary_curve: annulus boundaries are not supported by the boundary integral solver");
}

namespace detail {

inline constexpr double kEuler = 0.57721566490153286060651209;

/// Martensen-Kussmaul weight R_j(t) for node spacing pi/n and offset d = t - t_j.
inline double mk_weight(int n, double d) {
  double s = 0.0;
  for (int m = 1; m < n; ++m) s += std::cos(m * d) / m;
  return -(2.0 * std::numbers::pi / n) * s - (std::numbers::pi / (n * static_cast<double>(n))) * std::cos(n * d);
}

/// Trigonometric interpolation weight of node j at offset d = t - t_j (2n nodes).
inline double trig_interp_weight(int n, double d) {
  double s = 1.0 + std::cos(n * d);
  for (int m = 1; m < n; ++m) s += 2.0 * std::cos(m * d);
  return s / (2.0 * n);
}

struct CurveNodes {
  int n = 0;                      // half the node count
  std::vector<double> t;          // parameters pi j / n
  std::vector<CurvePoint> p;
  double impedance = 0.0;
};

inline CurveNodes sample_curve(const FourierCurve& c, int n) {
  CurveNodes cn;
  cn.n = n;
  for (int j = 0; j < 2 * n; ++j) {
    const double t = std::numbers::pi * j / n;
    cn.t.push_back(t);
    cn.p.push_back(c.at(t));
  }
  return cn;
}

// Unnormalized normal (z2', -z1'), length |z'|.
inline Vec2 raw_normal(const CurvePoint& p) { return {p.dz.y, -p.dz.x}; }

struct KernelParts {
  Complex full;  // complete kernel (off-diagonal)
  Complex log;   // coefficient of ln(4 sin^2((t - tau)/2))
};

}  // namespace detail

/// Densities for one incidence plus the evaluators that use them.
class BieSolution {
 public:
  BieSolution(BieFormulation f, double k, double eta, std::vector<detail::CurveNodes> curves,
              std::vector<Eigen::VectorXcd> densities)
      : f_(f), k_(k), eta_(eta), curves_(std::move(curves)), dens_(std::move(densities)) {}

  Complex scattered(Vec2 x) const {
    Complex u{};
    for (std::size_t c = 0; c < curves_.size(); ++c) {
      const auto& cn = curves_[c];
      const double w = std::numbers::pi / cn.n;
      for (int j = 0; j < 2 * cn.n; ++j) {
        const Vec2 d = x - cn.p[j].z;
        const double r = norm(d);
        if (r == 0.0) throw DomainError("BieSolution: evaluation at a quadrature node");
        const auto b = specfun::bessel01(k_ * r);
        const Complex h0(b.j0, b.y0);
        Complex kern;
        if (f_ == BieFormulation::CombinedField) {
          const Complex h1(b.j1, b.y1);
          kern = 0.25 * kI * k_ * h1 / r * dot(detail::raw_normal(cn.p[j]), d) + eta_ * 0.25 * h0 * cn.p[j].speed();
        } else {
          kern = 0.25 * kI * h0 * cn.p[j].speed();
        }
        u += w * kern * dens_[c](j);
      }
    }
    return u;
  }

  Complex farfield(Vec2 xhat) const {
    const Complex gamma = farfield_constant(k_);
    Complex u{};
    for (std::size_t c = 0; c < curves_.size(); ++c) {
      const auto& cn = curves_[c];
      const double w = std::numbers::pi / cn.n;
      for (int j = 0; j < 2 * cn.n; ++j) {
        const Complex e = std::exp(-kI * (k_ * dot(xhat, cn.p[j].z)));
        Complex kern;
        if (f_ == BieFormulation::CombinedField) {
          kern = (-kI * k_ * dot(detail::raw_normal(cn.p[j]), xhat) - kI * eta_ * cn.p[j].speed()) * e;
        } else {
          kern = e * cn.p[j].speed();
        }
        u += w * kern * dens_[c](j);
      }
    }
    return gamma * u;
  }

  /// Density interpolated at parameter t on curve c.
  Complex density(std::size_t c, double t) const {
    const auto& cn = curves_[c];
    Complex v{};
    for (int j = 0; j < 2 * cn.n; ++j) v += detail::trig_interp_weight(cn.n, t - cn.t[j]) * dens_[c](j);
    return v;
  }

  /// Exterior trace of u^s at parameter t on curve c (jump relations applied).
  Complex boundary_scattered(std::size_t c, double t, const FourierCurve& curve) const {
    const CurvePoint pt = curve.at(t);
    Complex s{};      // S psi (factor 2)
    Complex kdl{};    // K psi (factor 2)
    for (std::size_t q = 0; q < curves_.size(); ++q) {
      const auto& cn = curves_[q];
      const double w = std::numbers::pi / cn.n;
      for (int j = 0; j < 2 * cn.n; ++j) {
        const CurvePoint& y = cn.p[j];
        const Vec2 d = pt.z - y.z;
        const double r = norm(d);
        const double diff = t - cn.t[j];
        const double lg = std::log(4.0 * std::pow(std::sin(diff / 2.0), 2));
        const auto b = specfun::bessel01(k_ * r);
        const Complex h0(b.j0, b.y0), h1(b.j1, b.y1);
        const double bracket = dot(detail::raw_normal(y), d);
        const Complex m = 0.5 * kI * h0 * y.speed();
        const Complex l = 0.5 * kI * k_ * h1 / r * bracket;
        if (q == c) {
          const double m1 = -b.j0 * y.speed() / (2.0 * std::numbers::pi);
          const double l1 = -k_ * b.j1 / r * bracket / (2.0 * std::numbers::pi);
          const double rw = detail::mk_weight(cn.n, diff);
          s += (rw * m1 + w * (m - m1 * lg)) * dens_[q](j);
          kdl += (rw * l1 + w * (l - l1 * lg)) * dens_[q](j);
        } else {
          s += w * m * dens_[q](j);
          kdl += w * l * dens_[q](j);
        }
      }
    }
    if (f_ == BieFormulation::CombinedField) return 0.5 * (density(c, t) + kdl - kI * eta_ * s);
    return 0.5 * s;
  }

  /// Exterior normal derivative of u^s at parameter t (single-layer formulations).
  Complex boundary_normal_derivative(std::size_t c, double t, const FourierCurve& curve) const {
    if (f_ == BieFormulation::CombinedField) throw DomainError("boundary_normal_derivative: single-layer formulations only");
    const CurvePoint pt = curve.at(t);
    Complex kp{};
    for (std::size_t q = 0; q < curves_.size(); ++q) {
      const auto& cn = curves_[q];
      const double w = std::numbers::pi / cn.n;
      for (int j = 0; j < 2 * cn.n; ++j) {
        const CurvePoint& y = cn.p[j];
        const Vec2 d = pt.z - y.z;
        const double r = norm(d);
        const double diff = t - cn.t[j];
        const auto b = specfun::bessel01(k_ * r);
        const Complex h1(b.j1, b.y1);
        const double bracket = dot(detail::raw_normal(pt), d) * y.speed() / pt.speed();
        const Complex l = -0.5 * kI * k_ * h1 / r * bracket;
        if (q == c) {
          const double l1 = k_ * b.j1 / r * bracket / (2.0 * std::numbers::pi);
          const double lg = std::log(4.0 * std::pow(std::sin(diff / 2.0), 2));
          kp += (detail::mk_weight(cn.n, diff) * l1 + w * (l - l1 * lg)) * dens_[q](j);
        } else {
          kp += w * l * dens_[q](j);
        }
      }
    }
    return 0.5 * (-density(c, t) + kp);
  }

  const std::vector<detail::CurveNodes>& curves() const { return curves_; }
  const Eigen::VectorXcd& density_nodes(std::size_t c) const { return dens_[c]; }

 private:
  BieFormulation f_;
  double k_;
  double eta_;
  std::vector<detail::CurveNodes> curves_;
  std::vector<Eigen::VectorXcd> dens_;
};

/// Assembles and factorizes the Nystrom system once; solve() per incidence.
class BieSolver {
 public:
  /// `nodes` = total nodes per curve (even, >= 64); 0 picks a size from the
  /// wavelength and the curve's Fourier content.
  BieSolver(const std::vector<Scatterer>& obstacles, double k, int nodes = 0,
            std::optional<BieFormulation> formulation = std::nullopt)
      : k_(k), eta_(k) {
    if (obstacles.empty()) throw DomainError("BieSolver: no obstacles");
    bool soft = false, neumann = false;
    for (const Scatterer& s : obstacles) {
      if (!is_obstacle(s.kind)) throw DomainError("BieSolver: media are not supported");
      (s.kind == ScattererKind::SoundSoft ? soft : neumann) = true;
    }
    if (formulation) {
      f_ = *formulation;
    } else {
      if (soft && neumann) {
        throw InvalidScene("boundary integral solver: mixing sound-soft with sound-hard/impedance obstacles is not supported");
      }
      f_ = soft ? BieFormulation::CombinedField : BieFormulation::SingleLayerRobin;
    }
    if (nodes != 0 && (nodes < 64 || nodes % 2 != 0)) throw DomainError("BieSolver: node count must be even and >= 64");

    for (const Scatterer& s : obstacles) {
      curves_.push_back(boundary_curve(s.boundary));
      const FourierCurve& c = curves_.back();
      int n = nodes / 2;
      if (n == 0) {
        double perimeter = 0.0;
        for (int i = 0; i < 512; ++i) perimeter += c.at(2 * std::numbers::pi * i / 512).speed() * 2 * std::numbers::pi / 512;
        const double wavelength = 2 * std::numbers::pi / k;
        n = std::max({32, c.max_mode(), static_cast<int>(std::ceil(8.0 * perimeter / wavelength))});
      }
      auto cn = detail::sample_curve(c, n);
      cn.impedance = s.kind == ScattererKind::Impedance ? s.impedance : 0.0;
      nodes_.push_back(std::move(cn));
    }
    assemble();
  }

  BieFormulation formulation() const { return f_; }
  double condition_estimate() const { return cond_; }
  bool resonance_warning() const { return cond_ > 1e12; }
  const std::vector<FourierCurve>& curves() const { return curves_; }
  int total_nodes() const { return size_; }

  BieSolution solve(const Incidence& inc) const {
    Eigen::VectorXcd rhs(size_);
    int row = 0;
    for (const auto& cn : nodes_) {
      for (int i = 0; i < 2 * cn.n; ++i, ++row) {
        const CurvePoint& p = cn.p[i];
        const IncidentValue v = incident_field(inc, k_, p.z);
        switch (f_) {
          case BieFormulation::CombinedField:
          case BieFormulation::SingleLayerDirichlet: rhs(row) = -2.0 * v.u; break;
          case BieFormulation::SingleLayerRobin:
            rhs(row) = 2.0 * v.normal_derivative(p.normal()) + 2.0 * kI * k_ * cn.impedance * v.u;
            break;
        }
      }
    }
    const Eigen::VectorXcd x = lu_.solve(rhs);
    std::vector<Eigen::VectorXcd> dens;
    int off = 0;
    for (const auto& cn : nodes_) {
      dens.push_back(x.segment(off, 2 * cn.n));
      off += 2 * cn.n;
    }
    return BieSolution(f_, k_, eta_, nodes_, std::move(dens));
  }

 private:
  // Kernel between collocation point p (curve with impedance lam) and source y.
  detail::KernelParts kernel(const CurvePoint& p, const CurvePoint& y, double lam) const {
    const Vec2 d = p.z - y.z;
    const double r = norm(d);
    const auto b = specfun::bessel01(k_ * r);
    const Complex h0(b.j0, b.y0), h1(b.j1, b.y1);
    const double two_pi = 2.0 * std::numbers::pi;
    const Complex m = 0.5 * kI * h0 * y.speed();
    const double m1 = -b.j0 * y.speed() / two_pi;
    switch (f_) {
      case BieFormulation::CombinedField: {
        const double br = dot(detail::raw_normal(y), d);
        const Complex l = 0.5 * kI * k_ * h1 / r * br;
        const double l1 = -k_ * b.j1 / r * br / two_pi;
        return {l - kI * eta_ * m, l1 - kI * eta_ * m1};
      }
      case BieFormulation::SingleLayerRobin: {
        const double br = dot(detail::raw_normal(p), d) * y.speed() / p.speed();
        const Complex l = -0.5 * kI * k_ * h1 / r * br;
        const double l1 = k_ * b.j1 / r * br / two_pi;
        return {l + kI * k_ * lam * m, l1 + kI * k_ * lam * m1};
      }
      case BieFormulation::SingleLayerDirichlet: return {m, m1};
    }
    return {};
  }

  // Limit of the smooth remainder at tau = t.
  Complex diagonal(const CurvePoint& p, double lam) const {
    const double sp = p.speed();
    const Complex m2 = (0.5 * kI - detail::kEuler / std::numbers::pi - std::log(k_ * sp / 2.0) / std::numbers::pi) * sp;
    const double l2 = (p.dz.y * p.ddz.x - p.dz.x * p.ddz.y) / (2.0 * std::numbers::pi * sp * sp);
    switch (f_) {
      case BieFormulation::CombinedField: return l2 - kI * eta_ * m2;
      case BieFormulation::SingleLayerRobin: return l2 + kI * k_ * lam * m2;
      case BieFormulation::SingleLayerDirichlet: return m2;
    }
    return {};
  }

  void assemble() {
    std::vector<int> offset;
    size_ = 0;
    for (const auto& cn : nodes_) {
      offset.push_back(size_);
      size_ += 2 * cn.n;
    }
    // I + A for the combined field, I - A for the Robin single layer, A alone otherwise.
    const double sign = f_ == BieFormulation::SingleLayerRobin ? -1.0 : 1.0;
    const double ident = f_ == BieFormulation::SingleLayerDirichlet ? 0.0 : 1.0;
    Eigen::MatrixXcd A(size_, size_);
    for (std::size_t pc = 0; pc < nodes_.size(); ++pc) {
      const auto& P = nodes_[pc];
      std::vector<double> rw(2 * P.n), lg(2 * P.n);
      for (int d = 0; d < 2 * P.n; ++d) {
        const double diff = std::numbers::pi * d / P.n;
        rw[d] = detail::mk_weight(P.n, diff);
        lg[d] = d == 0 ? 0.0 : std::log(4.0 * std::pow(std::sin(diff / 2.0), 2));
      }
      for (std::size_t qc = 0; qc < nodes_.size(); ++qc) {
        const auto& Q = nodes_[qc];
        const double w = std::numbers::pi / Q.n;
        for (int i = 0; i < 2 * P.n; ++i) {
          for (int j = 0; j < 2 * Q.n; ++j) {
            Complex v;
            if (pc != qc) {
              v = w * kernel(P.p[i], Q.p[j], P.impedance).full;
            } else if (i == j) {
              const auto kp = kernel_log_only(P.p[i], P.impedance);
              v = rw[0] * kp + w * diagonal(P.p[i], P.impedance);
            } else {
              const int d = ((i - j) % (2 * P.n) + 2 * P.n) % (2 * P.n);
              const auto kp = kernel(P.p[i], Q.p[j], P.impedance);
              v = rw[d] * kp.log + w * (kp.full - kp.log * lg[d]);
            }
            A(offset[pc] + i, offset[qc] + j) = sign * v;
          }
        }
      }
    }
    for (int i = 0; i < size_; ++i) A(i, i) += ident;
    lu_ = A.partialPivLu();
    const double rc = lu_.rcond();
    if (!(rc > 0.0) || !std::isfinite(rc)) throw SolverError("boundary integral system is singular");
    cond_ = 1.0 / rc;
    if (!std::isfinite(cond_) || cond_ > 1e16) throw SolverError("boundary integral system is singular (condition " + std::to_string(cond_) + ")");
  }

  // Log-coefficient at coincident points: J_0(0) = 1, J_1(kr)/r -> k/2 and bracket -> 0.
  Complex kernel_log_only(const CurvePoint& p, double lam) const {
    const double m1 = -p.speed() / (2.0 * std::numbers::pi);
    switch (f_) {
      case BieFormulation::CombinedField: return -kI * eta_ * m1;
      case BieFormulation::SingleLayerRobin: return kI * k_ * lam * m1;
      case BieFormulation::SingleLayerDirichlet: return m1;
    }
    return {};
  }

  double k_;
  double eta_;
  BieFormulation f_ = BieFormulation::CombinedField;
  std::vector<FourierCurve> curves_;
  std::vector<detail::CurveNodes> nodes_;
  int size_ = 0;
  double cond_ = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
};

}  // namespace dsmps
