#pragma once

// Point-wise relative noise |u_delta(x_r)| = |u(x_r)| + delta zeta_r ||u||_2,
// ||u||_2 = (N^{-1} sum_r |u(x_r)|^2)^{1/2} per incidence. zeta_r is a
// standard normal drawn from a counter-based generator keyed by
// (seed, incidence, receiver, component), so results do not depend on
// evaluation order. Negative magnitudes are clamped to zero.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "dsmps/error.hpp"
#include "dsmps/probe.hpp"

namespace dsmps {

struct NoiseSpec {
  double delta = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double unit_open(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace detail

/// Standard normal keyed by (seed, incidence, receiver, component) via Box-Muller.
inline double keyed_normal(std::uint64_t seed, std::uint64_t incidence, std::uint64_t receiver, std::uint64_t component = 0) {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ incidence);
  h = detail::splitmix64(h ^ receiver);
  h = detail::splitmix64(h ^ component);
  const double u1 = detail::unit_open(detail::splitmix64(h));
  const double u2 = detail::unit_open(detail::splitmix64(h ^ 0xd1b54a32d192ed03ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double rms(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return a.empty() ? 0.0 : std::sqrt(s / a.size());
}

inline double rms(const std::vector<Complex>& a) {
  double s = 0.0;
  for (Complex v : a) s += std::norm(v);
  return a.empty() ? 0.0 : std::sqrt(s / a.size());
}

inline void check(const NoiseSpec& spec) {
  if (!(spec.delta >= 0.0 && spec.delta <= 1.0)) throw DomainError("noise level must lie in [0, 1]");
}

inline PhaselessMeasurement add_noise(PhaselessMeasurement m, const NoiseSpec& spec) {
  check(spec);
  if (spec.delta == 0.0) return m;
  for (std::size_t i = 0; i < m.magnitude.size(); ++i) {
    auto& row = m.magnitude[i];
    const double scale = spec.delta * rms(row);
    for (std::size_t r = 0; r < row.size(); ++r) row[r] = std::max(0.0, row[r] + scale * keyed_normal(spec.seed, i, r));
  }
  return m;
}

/// Phased variant: the same formula applied to Re and Im separately, with
/// ||u||_2 taken over the complex values of each incidence.
inline std::vector<std::vector<Complex>> add_noise_phased(std::vector<std::vector<Complex>> u, const NoiseSpec& spec) {
  check(spec);
  if (spec.delta == 0.0) return u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double scale = spec.delta * rms(u[i]);
    for (std::size_t r = 0; r < u[i].size(); ++r)
      u[i][r] += Complex(scale * keyed_normal(spec.seed, i, r, 1), scale * keyed_normal(spec.seed, i, r, 2));
  }
  return u;
}

}  // namespace dsmps
