#pragma once

// Direct sampling index functions.
//   phased:    I(z) = |sum_r w_r G(z, x_r) conj(u^s(x_r))|
//   far field: I(z) = |sum_l (2 pi / L) G^inf(z, xhat_l) conj(u^inf(xhat_l))|
//   phaseless: I(z) = |sum_r w_r G(z, x_r) Delta(x_r)|,  Delta = (|u|^2 - |u^i|^2) / u^i
// with trapezoid weights w_r = 2 pi R_r / N_recv on the receiver circle.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "dsmps/error.hpp"
#include "dsmps/forward.hpp"
#include "dsmps/greens.hpp"
#include "dsmps/parallel.hpp"
#include "dsmps/scene.hpp"

namespace dsmps {

struct IndexMap {
  SamplingGrid grid;
  std::vector<double> values;  // row-major, row 0 at the top
  bool normalized = false;

  double max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  }
  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * grid.resolution + col]; }
};

/// Magnitudes of the total field plus the known incident field, per (incidence, receiver).
struct PhaselessMeasurement {
  double wavenumber = 0.0;
  ReceiverArray receivers;
  std::vector<Incidence> incidences;
  std::vector<std::vector<double>> magnitude;
  std::vector<std::vector<Complex>> u_inc;
};

inline PhaselessMeasurement phaseless(const ForwardResult& f) {
  PhaselessMeasurement m{f.wavenumber, f.receivers, f.incidences, {}, f.u_inc};
  for (const auto& row : f.u_total) {
    std::vector<double> a(row.size());
    std::transform(row.begin(), row.end(), a.begin(), [](Complex v) { return std::abs(v); });
    m.magnitude.push_back(std::move(a));
  }
  return m;
}

/// The matrix w_r G(z_p, x_r) over pixels p and receivers r.
class ProbeKernel {
 public:
  ProbeKernel(const SamplingGrid& grid, const ReceiverArray& receivers, double k)
      : grid_(grid), n_(receivers.count), values_(grid.size() * receivers.count) {
    const auto z = grid.pixels();
    const auto x = receivers.points();
    const double w = receivers.weight();
    parallel_for(z.size(), [&](std::size_t p) {
      for (int r = 0; r < n_; ++r) values_[p * n_ + r] = w * greens(z[p], x[r], k);
    });
  }

  /// sum_r w_r G(z_p, x_r) data_r for every pixel.
  std::vector<Complex> apply(const std::vector<Complex>& data) const {
    if (static_cast<int>(data.size()) != n_) throw DomainError("ProbeKernel: data length does not match receiver count");
    std::vector<Complex> out(grid_.size());
    for (std::size_t p = 0; p < out.size(); ++p) {
      Complex s{};
      const Complex* row = &values_[p * n_];
      for (int r = 0; r < n_; ++r) s += row[r] * data[r];
      out[p] = s;
    }
    return out;
  }

  IndexMap modulus(const std::vector<Complex>& data) const {
    const auto c = apply(data);
    IndexMap m{grid_, std::vector<double>(c.size())};
    for (std::size_t p = 0; p < c.size(); ++p) m.values[p] = std::abs(c[p]);
    return m;
  }

  const SamplingGrid& grid() const { return grid_; }

 private:
  SamplingGrid grid_;
  int n_;
  std::vector<Complex> values_;
};

inline std::vector<Complex> conjugated(std::vector<Complex> v) {
  for (auto& x : v) x = std::conj(x);
  return v;
}

inline IndexMap index_phased(const ProbeKernel& kernel, const std::vector<Complex>& u_scat) {
  return kernel.modulus(conjugated(u_scat));
}

inline IndexMap index_phased(const std::vector<Complex>& u_scat, const ReceiverArray& receivers,
                             const SamplingGrid& grid, double k) {
  return index_phased(ProbeKernel(grid, receivers, k), u_scat);
}

/// Far field sampled at xhat_l = (cos 2 pi l / L, sin 2 pi l / L).
inline IndexMap index_farfield(const std::vector<Complex>& u_inf, const SamplingGrid& grid, double k) {
  const std::size_t L = u_inf.size();
  std::vector<Vec2> dirs(L);
  for (std::size_t l = 0; l < L; ++l) dirs[l] = unit_from_angle(2.0 * std::numbers::pi * l / L);
  const auto z = grid.pixels();
  IndexMap m{grid, std::vector<double>(z.size())};
  parallel_for(z.size(), [&](std::size_t p) {
    Complex s{};
    for (std::size_t l = 0; l < L; ++l) s += greens_farfield(z[p], dirs[l], k) * std::conj(u_inf[l]);
    m.values[p] = std::abs(s) * 2.0 * std::numbers::pi / L;
  });
  return m;
}

inline std::vector<Complex> corrected_data(const std::vector<double>& magnitude, const std::vector<Complex>& u_inc) {
  if (magnitude.size() != u_inc.size()) throw DomainError("corrected_data: magnitude and incident field lengths differ");
  std::vector<Complex> d(u_inc.size());
  for (std::size_t r = 0; r < d.size(); ++r) {
    if (!(std::abs(u_inc[r]) >= 1e-14)) {
      throw DomainError("corrected_data: incident field vanishes at receiver " + std::to_string(r));
    }
    d[r] = (magnitude[r] * magnitude[r] - std::norm(u_inc[r])) / u_inc[r];
  }
  return d;
}

inline IndexMap index_phaseless(const ProbeKernel& kernel, const std::vector<double>& magnitude,
                                const std::vector<Complex>& u_inc) {
  return kernel.modulus(corrected_data(magnitude, u_inc));
}

inline IndexMap index_phaseless(const std::vector<double>& magnitude, const std::vector<Complex>& u_inc,
                                const ReceiverArray& receivers, const SamplingGrid& grid, double k) {
  return index_phaseless(ProbeKernel(grid, receivers, k), magnitude, u_inc);
}

/// One phaseless map per incidence.
inline std::vector<IndexMap> index_phaseless(const PhaselessMeasurement& m, const SamplingGrid& grid) {
  const ProbeKernel kernel(grid, m.receivers, m.wavenumber);
  std::vector<IndexMap> maps;
  for (std::size_t i = 0; i < m.magnitude.size(); ++i) maps.push_back(index_phaseless(kernel, m.magnitude[i], m.u_inc[i]));
  return maps;
}

inline std::vector<IndexMap> index_phased(const ForwardResult& f, const SamplingGrid& grid) {
  const ProbeKernel kernel(grid, f.receivers, f.wavenumber);
  std::vector<IndexMap> maps;
  for (const auto& row : f.u_scat) maps.push_back(index_phased(kernel, row));
  return maps;
}

inline IndexMap normalize(IndexMap m) {
  const double mx = m.max();
  if (mx > 0.0)
    for (double& v : m.values) v /= mx;
  m.normalized = true;
  return m;
}

inline IndexMap index_average(const std::vector<IndexMap>& maps, bool normalized = false) {
  if (maps.empty()) throw DomainError("index_average: no maps");
  IndexMap out{maps[0].grid, std::vector<double>(maps[0].values.size(), 0.0)};
  for (const auto& m : maps) {
    if (!(m.grid == out.grid) || m.values.size() != out.values.size()) throw DomainError("index_average: grid mismatch");
    for (std::size_t p = 0; p < m.values.size(); ++p) out.values[p] += m.values[p];
  }
  for (double& v : out.values) v /= static_cast<double>(maps.size());
  return normalized ? normalize(std::move(out)) : out;
}

/// Pixel distance between two flat indices of the same grid.
inline double pixel_distance(const SamplingGrid& g, std::size_t a, std::size_t b) {
  const int n = g.resolution;
  return std::hypot(static_cast<double>(static_cast<int>(a / n) - static_cast<int>(b / n)),
                    static_cast<double>(static_cast<int>(a % n) - static_cast<int>(b % n)));
}

/// Flat index of the pixel whose center is nearest to x.
inline std::size_t nearest_pixel(const SamplingGrid& g, Vec2 x) {
  const double h = g.spacing();
  const int col = std::clamp(static_cast<int>(std::floor((x.x - g.lo) / h)), 0, g.resolution - 1);
  const int row = std::clamp(static_cast<int>(std::floor((g.hi - x.y) / h)), 0, g.resolution - 1);
  return static_cast<std::size_t>(row) * g.resolution + col;
}

/// Local maxima above `threshold`, strongest first, with non-maximum
/// suppression within `radius` (same length unit as the grid).
inline std::vector<std::size_t> find_peaks(const IndexMap& m, double threshold, double radius) {
  const int n = m.grid.resolution;
  std::vector<std::size_t> order(m.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m.values[a] > m.values[b]; });
  const double rpix = radius / m.grid.spacing();
  std::vector<std::size_t> peaks;
  for (std::size_t idx : order) {
    if (m.values[idx] < threshold) break;
    const int row = static_cast<int>(idx) / n, col = static_cast<int>(idx) % n;
    bool local = true;
    for (int dr = -1; dr <= 1 && local; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const int rr = row + dr, cc = col + dc;
        if ((dr || dc) && rr >= 0 && rr < n && cc >= 0 && cc < n && m.at(rr, cc) > m.values[idx]) {
          local = false;
          break;
        }
      }
    if (!local) continue;
    if (std::none_of(peaks.begin(), peaks.end(), [&](std::size_t p) { return pixel_distance(m.grid, p, idx) <= rpix; }))
      peaks.push_back(idx);
  }
  return peaks;
}

}  // namespace dsmps
