#pragma once

// Lippmann-Schwinger volume integral solver for penetrable media:
//   u(x) = u^i(x) + k^2 int G(x, y) q(y) u(y) dy,   q = n - 1.
// Midpoint collocation on a uniform grid over the sampling domain, restricted
// to cells with nonzero (cell-averaged) contrast. The weakly singular self
// term integrates G exactly over the disk with the cell's area.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsmps/error.hpp"
#include "dsmps/greens.hpp"
#include "dsmps/scene.hpp"
#include "dsmps/specfun.hpp"

namespace dsmps {

/// Total field inside the contrast support for one incidence.
class LsSolution {
 public:
  LsSolution(double k, double h, std::vector<Vec2> cells, std::vector<double> q, Eigen::VectorXcd u)
      : k_(k), h_(h), cells_(std::move(cells)), q_(std::move(q)), u_(std::move(u)) {}

  Complex scattered(Vec2 x) const {
    Complex s{};
    for (std::size_t j = 0; j < cells_.size(); ++j) {
      const double r = distance(x, cells_[j]);
      if (r < 0.5 * h_) throw DomainError("LsSolution: evaluation point inside a contrast cell");
      s += q_[j] * greens2(k_, r) * u_(j);
    }
    return k_ * k_ * h_ * h_ * s;
  }

  Complex farfield(Vec2 xhat) const {
    Complex s{};
    for (std::size_t j = 0; j < cells_.size(); ++j) s += q_[j] * std::exp(-kI * (k_ * dot(xhat, cells_[j]))) * u_(j);
    return farfield_constant(k_) * k_ * k_ * h_ * h_ * s;
  }

  const Eigen::VectorXcd& cell_field() const { return u_; }
  const std::vector<Vec2>& cells() const { return cells_; }

 private:
  double k_;
  double h_;
  std::vector<Vec2> cells_;
  std::vector<double> q_;
  Eigen::VectorXcd u_;
};

class LippmannSchwingerSolver {
 public:
  /// `resolution` cells per side over the scene's sampling domain; contrast is
  /// averaged over supersample^2 points per cell.
  LippmannSchwingerSolver(const Scene& scene, int resolution = 96, int supersample = 8) : k_(scene.wavenumber) {
    if (scene.has_obstacles()) throw DomainError("LippmannSchwingerSolver: impenetrable obstacles are not supported");
    if (resolution < 8) throw DomainError("LippmannSchwingerSolver: resolution must be at least 8");
    const double lo = scene.grid.lo;
    h_ = (scene.grid.hi - lo) / resolution;
    res_ = resolution;
    for (int i = 0; i < resolution; ++i) {
      for (int j = 0; j < resolution; ++j) {
        double acc = 0.0;
        for (int a = 0; a < supersample; ++a)
          for (int b = 0; b < supersample; ++b) {
            const Vec2 p{lo + (j + (b + 0.5) / supersample) * h_, lo + (i + (a + 0.5) / supersample) * h_};
            acc += scene.refractive_index_at(p) - 1.0;
          }
        const double q = acc / (supersample * supersample);
        if (q != 0.0) {
          cells_.push_back({lo + (j + 0.5) * h_, lo + (i + 0.5) * h_});
          idx_.push_back({i, j});
          q_.push_back(q);
        }
      }
    }
    assemble();
  }

  std::size_t active_cells() const { return cells_.size(); }
  double spacing() const { return h_; }

  LsSolution solve(const Incidence& inc) const {
    const int n = static_cast<int>(cells_.size());
    Eigen::VectorXcd b(n);
    for (int i = 0; i < n; ++i) b(i) = incident_field(inc, k_, cells_[i]).u;
    if (n == 0) return LsSolution(k_, h_, cells_, q_, b);
    Eigen::VectorXcd x = lu_.solve(b);
    const double bn = b.norm();
    double rel = (b - A_ * x).norm() / bn;
    for (int it = 0; it < 4 && rel > 1e-8; ++it) {
      x += lu_.solve(Eigen::VectorXcd(b - A_ * x));
      rel = (b - A_ * x).norm() / bn;
    }
    if (!(rel <= 1e-8)) {
      throw SolverError("Lippmann-Schwinger iterative refinement stalled at residual " + std::to_string(rel));
    }
    return LsSolution(k_, h_, cells_, q_, std::move(x));
  }

  /// First Born approximation u^i + k^2 int G q u^i on the same grid.
  LsSolution born(const Incidence& inc) const {
    const int n = static_cast<int>(cells_.size());
    Eigen::VectorXcd u(n);
    for (int i = 0; i < n; ++i) u(i) = incident_field(inc, k_, cells_[i]).u;
    return LsSolution(k_, h_, cells_, q_, std::move(u));
  }

 private:
  void assemble() {
    const int n = static_cast<int>(cells_.size());
    // G depends only on the integer offset between cells.
    const int m = res_;
    std::vector<Complex> table(static_cast<std::size_t>(m) * m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (a != 0 || b != 0) table[a * m + b] = greens2(k_, h_ * std::hypot(a, b));
    const double rho = h_ / std::sqrt(std::numbers::pi);
    const Complex self = 0.5 * kI * std::numbers::pi * k_ * rho * specfun::hankel1(1, k_ * rho) - 1.0;
    const double w = k_ * k_ * h_ * h_;
    A_.resize(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) {
          A_(i, i) = 1.0 - q_[i] * self;
        } else {
          const int da = std::abs(idx_[i][0] - idx_[j][0]);
          const int db = std::abs(idx_[i][1] - idx_[j][1]);
          A_(i, j) = -w * q_[j] * table[da * m + db];
        }
      }
    }
    if (n > 0) lu_ = A_.partialPivLu();
  }

  double k_;
  double h_ = 0.0;
  int res_ = 0;
  std::vector<Vec2> cells_;
  std::vector<std::array<int, 2>> idx_;
  std::vector<double> q_;
  Eigen::MatrixXcd A_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
};

}  // namespace dsmps
