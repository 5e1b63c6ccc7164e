#pragma once

// Forward problem front end: chooses a solver for a scene, evaluates
// scattered fields on the receiver ring and far-field patterns on a uniform
// angular grid, and hosts the Huygens-principle diagnostic.
//
// Solver choice ("auto"): no scatterers -> zero field; only circles -> series;
// only obstacles -> boundary integral; only media -> Lippmann-Schwinger.

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "dsmps/bie.hpp"
#include "dsmps/error.hpp"
#include "dsmps/greens.hpp"
#include "dsmps/lippmann_schwinger.hpp"
#include "dsmps/parallel.hpp"
#include "dsmps/scene.hpp"
#include "dsmps/series.hpp"

namespace dsmps {

struct ForwardOptions {
  std::string solver = "auto";  // auto | series | bie | ls
  int series_truncation = 0;    // 0: automatic
  int bie_nodes = 0;            // 0: automatic
  int ls_resolution = 96;
  int farfield_count = 0;       // 0: same as the receiver count
};

struct NoScatterer {};

using FieldSolution = std::variant<NoScatterer, CircleSeriesSolution, BieSolution, LsSolution>;

inline Complex scattered_at(const FieldSolution& s, Vec2 x) {
  return std::visit(
      [&](const auto& v) -> Complex {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, NoScatterer>) return {};
        else return v.scattered(x);
      },
      s);
}

inline Complex farfield_at(const FieldSolution& s, Vec2 xhat) {
  return std::visit(
      [&](const auto& v) -> Complex {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, NoScatterer>) return {};
        else return v.farfield(xhat);
      },
      s);
}

/// A scene's scatterers with the chosen solver set up (factorized) once.
class ScatteringModel {
 public:
  explicit ScatteringModel(const Scene& scene, const ForwardOptions& opt = {}) : k_(scene.wavenumber) {
    std::string choice = opt.solver;
    const bool empty = scene.scatterers.empty() && !scene.medium_image;
    const bool circles = !scene.medium_image && !scene.scatterers.empty() &&
                         std::all_of(scene.scatterers.begin(), scene.scatterers.end(),
                                     [](const Scatterer& s) { return s.boundary.type == Boundary::Type::Circle; });
    if (choice == "auto") {
      if (empty) choice = "none";
      else if (circles) choice = "series";
      else if (!scene.has_media()) choice = "bie";
      else if (!scene.has_obstacles()) choice = "ls";
      else throw InvalidScene("scenes combining media with non-circular obstacles are not supported");
    }
    if (empty) choice = "none";
    name_ = choice;
    if (choice == "none") return;
    if (choice == "series") {
      series_ = std::make_shared<CircleSeriesSolver>(scene.scatterers, k_, opt.series_truncation);
    } else if (choice == "bie") {
      bie_ = std::make_shared<BieSolver>(scene.scatterers, k_, opt.bie_nodes);
      if (bie_->resonance_warning()) {
        warnings_.push_back("boundary integral system is ill-conditioned (condition estimate " +
                            std::to_string(bie_->condition_estimate()) + "); wavenumber may be near a resonance");
      }
    } else if (choice == "ls") {
      ls_ = std::make_shared<LippmannSchwingerSolver>(scene, opt.ls_resolution);
    } else {
      throw InvalidScene("unknown solver '" + choice + "'");
    }
  }

  const std::string& solver_name() const { return name_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  double wavenumber() const { return k_; }

  FieldSolution solve(const Incidence& inc) const {
    if (series_) return series_->solve(inc);
    if (bie_) return bie_->solve(inc);
    if (ls_) return ls_->solve(inc);
    return NoScatterer{};
  }

 private:
  double k_;
  std::string name_;
  std::vector<std::string> warnings_;
  std::shared_ptr<CircleSeriesSolver> series_;
  std::shared_ptr<BieSolver> bie_;
  std::shared_ptr<LippmannSchwingerSolver> ls_;
};

/// Fields per (incidence, receiver) and far fields per (incidence, direction).
struct ForwardResult {
  std::string solver;
  double wavenumber = 0.0;
  ReceiverArray receivers;
  std::vector<Incidence> incidences;
  std::vector<std::vector<Complex>> u_inc;
  std::vector<std::vector<Complex>> u_scat;
  std::vector<std::vector<Complex>> u_total;
  int farfield_count = 0;
  std::vector<std::vector<Complex>> u_inf;
  std::vector<std::string> warnings;

  Vec2 farfield_direction(int l) const { return unit_from_angle(2.0 * std::numbers::pi * l / farfield_count); }

  /// u_total - u_inc - u_scat == 0 exactly.
  bool consistent() const {
    for (std::size_t i = 0; i < u_inc.size(); ++i)
      for (std::size_t r = 0; r < u_inc[i].size(); ++r)
        if (u_total[i][r] - u_inc[i][r] - u_scat[i][r] != Complex{}) return false;
    return true;
  }
};

inline ForwardResult simulate(const ScatteringModel& model, const ReceiverArray& receivers,
                              const std::vector<Incidence>& incidences, int farfield_count) {
  ForwardResult out;
  out.solver = model.solver_name();
  out.wavenumber = model.wavenumber();
  out.receivers = receivers;
  out.incidences = incidences;
  out.farfield_count = farfield_count > 0 ? farfield_count : receivers.count;
  out.warnings = model.warnings();
  const std::size_t ni = incidences.size();
  out.u_inc.assign(ni, std::vector<Complex>(receivers.count));
  out.u_scat = out.u_inc;
  out.u_total = out.u_inc;
  out.u_inf.assign(ni, std::vector<Complex>(out.farfield_count));
  const auto pts = receivers.points();
  parallel_for(ni, [&](std::size_t i) {
    const FieldSolution sol = model.solve(incidences[i]);
    for (int r = 0; r < receivers.count; ++r) {
      out.u_inc[i][r] = incident_field(incidences[i], model.wavenumber(), pts[r]).u;
      out.u_scat[i][r] = scattered_at(sol, pts[r]);
      out.u_total[i][r] = out.u_inc[i][r] + out.u_scat[i][r];
    }
    for (int l = 0; l < out.farfield_count; ++l) out.u_inf[i][l] = farfield_at(sol, out.farfield_direction(l));
  });
  return out;
}

inline ForwardResult simulate(const Scene& scene, const ForwardOptions& opt = {}) {
  validate(scene);
  const ScatteringModel model(scene, opt);
  return simulate(model, scene.receivers, scene.incidences, opt.farfield_count);
}

// ---------------------------------------------------------------- Huygens

struct HuygensRow {
  double radius = 0.0;
  int receivers = 0;
  double residual = 0.0;
};

/// For a single sound-soft obstacle represented by the single layer
/// u^s = sum_j w_j G(., y_j), compares int_{Gamma_r} conj(G(z, x_r)) u^s(x_r) ds
/// with k^{-1} sum_j w_j Im G(y_j, z) over the sampling grid, per radius.
/// Both the receiver ring and the sampling grid are translated by `center`.
inline std::vector<HuygensRow> huygens_check(const Scene& scene, const Incidence& inc, const std::vector<double>& radii,
                                             int receivers = 256, int bie_nodes = 0, Vec2 center = {}) {
  if (scene.scatterers.size() != 1 || scene.scatterers[0].kind != ScattererKind::SoundSoft) {
    throw InvalidScene("huygens_check: requires a single sound-soft obstacle");
  }
  const double k = scene.wavenumber;
  BieSolver solver(scene.scatterers, k, bie_nodes, BieFormulation::SingleLayerDirichlet);
  const BieSolution sol = solver.solve(inc);
  const auto& cn = sol.curves()[0];
  const auto& phi = sol.density_nodes(0);
  std::vector<Vec2> y;
  std::vector<Complex> w;
  for (int j = 0; j < 2 * cn.n; ++j) {
    y.push_back(cn.p[j].z);
    w.push_back(phi(j) * (std::numbers::pi / cn.n) * cn.p[j].speed());
  }
  auto pixels = scene.grid.pixels();
  for (auto& p : pixels) p = p + center;
  std::vector<Complex> rhs(pixels.size());
  for (std::size_t p = 0; p < pixels.size(); ++p) {
    Complex s{};
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double r = distance(y[j], pixels[p]);
      s += w[j] * (r == 0.0 ? 0.25 : 0.25 * specfun::bessel01(k * r).j0);
    }
    rhs[p] = s / k;
  }
  std::vector<HuygensRow> rows;
  for (double R : radii) {
    const ReceiverArray ring{R, receivers};
    auto xr = ring.points();
    for (auto& x : xr) x = x + center;
    std::vector<Complex> us(xr.size());
    for (std::size_t r = 0; r < xr.size(); ++r) {
      Complex s{};
      for (std::size_t j = 0; j < y.size(); ++j) s += w[j] * greens2(k, distance(xr[r], y[j]));
      us[r] = s;
    }
    std::vector<double> diff(pixels.size());
    parallel_for(pixels.size(), [&](std::size_t p) {
      Complex s{};
      for (std::size_t r = 0; r < xr.size(); ++r) s += std::conj(greens2(k, distance(pixels[p], xr[r]))) * us[r];
      diff[p] = std::abs(ring.weight() * s - rhs[p]);
    });
    rows.push_back({R, receivers, *std::max_element(diff.begin(), diff.end())});
  }
  return rows;
}

}  // namespace dsmps
