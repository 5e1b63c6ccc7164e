#pragma once

// Cylindrical Bessel functions J_n, Y_n and the Hankel function H_n^(1) for
// integer orders 0..200 and real arguments in (0, 1e4].
//
// Evaluation regions:
//   x <= 12        ascending series, accumulated in long double
//   12 < x < 25    Miller backward recurrence for J, Neumann series for Y_0/Y_1
//   x >= 25        Hankel asymptotic expansion for orders 0 and 1
// Higher orders come from forward recurrence (Y always; J while n < x) or from
// the Miller sequence (J with n >= x).

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dsmps/error.hpp"

namespace dsmps::specfun {

using Complex = std::complex<double>;

inline constexpr int kMaxOrder = 200;
inline constexpr double kMaxArgument = 1.0e4;

struct BesselPair01 {
  double j0, j1, y0, y1;
};

namespace detail {

inline constexpr double kSeriesLimit = 12.0;
inline constexpr double kAsymptoticLimit = 25.0;
inline constexpr long double kEulerGammaL = 0.577215664901532860606512090082402431L;
inline constexpr long double kPiL = 3.141592653589793238462643383279502884L;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline void check_argument(int n, double x) {
  if (!(x > 0.0) || !(x <= kMaxArgument)) {
    throw DomainError("bessel: argument must satisfy 0 < x <= 1e4, got " + std::to_string(x));
  }
  if (n < 0 || n > kMaxOrder) {
    throw DomainError("bessel: order must satisfy 0 <= n <= 200, got " + std::to_string(n));
  }
}

// J_n(x) from the ascending series.
inline long double series_j(int n, long double x) {
  const long double half = x / 2;
  long double lead = 1;
  for (int i = 1; i <= n; ++i) lead *= half / i;
  if (lead == 0) return 0;
  const long double q = -half * half;
  long double term = lead;
  long double sum = lead;
  for (int k = 1; k < 400; ++k) {
    term *= q / (static_cast<long double>(k) * static_cast<long double>(n + k));
    sum += term;
    if (std::fabs(term) <= 1e-21L * std::fabs(sum)) break;
  }
  return sum;
}

// Y_n(x) from the ascending series (finite sum + logarithmic part + psi series).
inline long double series_y(int n, long double x) {
  const long double half = x / 2;
  const long double h2 = half * half;

  long double finite = 0;
  if (n > 0) {
    long double t = 1;
    for (int i = 1; i < n; ++i) t *= i;
    for (int i = 0; i < n; ++i) t /= half;
    for (int k = 0; k < n; ++k) {
      finite += t;
      if (n - k - 1 > 0) t *= h2 / (static_cast<long double>(k + 1) * (n - k - 1));
    }
  }

  long double lead = 1;
  for (int i = 1; i <= n; ++i) lead *= half / i;
  long double psi_a = -kEulerGammaL;
  long double psi_b = -kEulerGammaL;
  for (int i = 1; i <= n; ++i) psi_b += 1.0L / i;
  long double term = lead;
  long double psi_sum = (psi_a + psi_b) * term;
  for (int k = 1; k < 400; ++k) {
    term *= -h2 / (static_cast<long double>(k) * static_cast<long double>(n + k));
    psi_a += 1.0L / k;
    psi_b += 1.0L / (n + k);
    const long double contrib = (psi_a + psi_b) * term;
    psi_sum += contrib;
    if (std::fabs(contrib) <= 1e-21L * std::fabs(psi_sum) && std::fabs(contrib) != 0) break;
    if (term == 0) break;
  }
  return -finite / kPiL + 2.0L / kPiL * std::log(half) * series_j(n, x) - psi_sum / kPiL;
}

// Rough log10 magnitude of 1/J_m(x) for m well above x (Zhang & Jin's envelope).
inline double envelope_j(double m, double x) {
  return 0.5 * std::log10(6.28 * m) - m * std::log10(1.36 * x / m);
}

inline int miller_start(int nmax, double x) {
  const int lo = std::max(nmax, static_cast<int>(std::ceil(x))) + 2;
  const double target = 18.0 + std::max(0.0, envelope_j(std::max(nmax, 1), x));
  int m = lo;
  while (envelope_j(m, x) < target) ++m;
  return m;
}

// J_0..J_start by Miller's backward recurrence, normalized with
// J_0 + 2 sum_k J_2k = 1. The returned vector is longer than nmax + 1.
inline std::vector<double> miller_sequence(int nmax, double x) {
  const int start = miller_start(nmax, x);
  std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-30;
  constexpr double kBig = 1e250;
  for (int k = start; k >= 1; --k) {
    j[k - 1] = (2.0 * k / x) * j[k] - j[k + 1];
    if (std::fabs(j[k - 1]) > kBig) {
      for (int i = k - 1; i <= start + 1; ++i) j[i] /= kBig;
    }
  }
  double norm = j[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0 * j[k];
  for (double& v : j) v /= norm;
  return j;
}

// Y_0 and Y_1 from Neumann series over a Miller sequence.
inline std::pair<double, double> neumann_y01(const std::vector<double>& j, double x) {
  const double lg = std::log(x / 2.0) + static_cast<double>(kEulerGammaL);
  double s0 = 0.0;
  double s1 = 0.0;
  const int top = static_cast<int>(j.size()) - 2;
  for (int k = 1; 2 * k + 1 <= top; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    s0 += sign * j[2 * k] / k;
    s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k;
  }
  const double y0 = 2.0 / kPi * lg * j[0] - 4.0 / kPi * s0;
  const double y1 = -2.0 / (kPi * x) * j[0] + 2.0 / kPi * lg * j[1] + 2.0 / kPi * s1;
  return {y0, y1};
}

// H_n^(1)(x) from the Hankel asymptotic expansion, truncated at its smallest term.
inline Complex hankel_asymptotic(int n, double x) {
  const double mu = 4.0 * n * n;
  const Complex i_unit(0.0, 1.0);
  Complex sum = 1.0;
  Complex term = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 80; ++k) {
    const double odd = 2.0 * k - 1.0;
    const Complex next = term * i_unit * ((mu - odd * odd) / (8.0 * k * x));
    const double mag = std::abs(next);
    if (mag >= prev) break;
    sum += next;
    term = next;
    prev = mag;
    if (mag < 1e-18) break;
  }
  // e^{i(x - n pi/2 - pi/4)} with the n pi/2 part applied exactly.
  const double phase = x - kPi / 4.0;
  Complex rot(std::cos(phase), std::sin(phase));
  static constexpr Complex kQuarter[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  rot *= kQuarter[n % 4];
  return std::sqrt(2.0 / (kPi * x)) * rot * sum;
}

inline BesselPair01 bessel01_unchecked(double x) {
  if (x <= kSeriesLimit) {
    const long double xl = x;
    return {static_cast<double>(series_j(0, xl)), static_cast<double>(series_j(1, xl)),
            static_cast<double>(series_y(0, xl)), static_cast<double>(series_y(1, xl))};
  }
  if (x < kAsymptoticLimit) {
    const auto j = miller_sequence(1, x);
    const auto [y0, y1] = neumann_y01(j, x);
    return {j[0], j[1], y0, y1};
  }
  const Complex h0 = hankel_asymptotic(0, x);
  const Complex h1 = hankel_asymptotic(1, x);
  return {h0.real(), h1.real(), h0.imag(), h1.imag()};
}

}  // namespace detail

/// J_0, J_1, Y_0, Y_1 at x in one pass. Hot path for Green's function kernels.
inline BesselPair01 bessel01(double x) {
  detail::check_argument(0, x);
  return detail::bessel01_unchecked(x);
}

inline double bessel_j(int n, double x) {
  detail::check_argument(n, x);
  if (x <= detail::kSeriesLimit) return static_cast<double>(detail::series_j(n, x));
  if (n <= 1 || n < x) {
    const auto b = detail::bessel01_unchecked(x);
    if (n == 0) return b.j0;
    double jm = b.j0;
    double jn = b.j1;
    for (int k = 1; k < n; ++k) {
      const double next = (2.0 * k / x) * jn - jm;
      jm = jn;
      jn = next;
    }
    return jn;
  }
  return detail::miller_sequence(n, x)[n];
}

inline double bessel_y(int n, double x) {
  detail::check_argument(n, x);
  const auto b = detail::bessel01_unchecked(x);
  if (n == 0) return b.y0;
  double ym = b.y0;
  double yn = b.y1;
  for (int k = 1; k < n; ++k) {
    const double next = (2.0 * k / x) * yn - ym;
    ym = yn;
    yn = next;
  }
  if (!std::isfinite(yn)) {
    throw DomainError("bessel_y: Y_" + std::to_string(n) + "(" + std::to_string(x) +
                      ") overflows double precision");
  }
  return yn;
}

inline Complex hankel1(int n, double x) { return {bessel_j(n, x), bessel_y(n, x)}; }

/// J_0..J_nmax and Y_0..Y_nmax at a common argument.
inline void bessel_sequences(int nmax, double x, std::vector<double>& j, std::vector<double>& y) {
  detail::check_argument(nmax, x);
  j.assign(static_cast<std::size_t>(nmax) + 1, 0.0);
  y.assign(static_cast<std::size_t>(nmax) + 1, 0.0);
  const auto b = detail::bessel01_unchecked(x);

  y[0] = b.y0;
  if (nmax >= 1) y[1] = b.y1;
  for (int k = 1; k < nmax; ++k) y[k + 1] = (2.0 * k / x) * y[k] - y[k - 1];
  for (int k = 0; k <= nmax; ++k) {
    if (!std::isfinite(y[k])) {
      throw DomainError("bessel_sequences: Y_" + std::to_string(k) + " overflows at x=" +
                        std::to_string(x));
    }
  }

  if (x <= detail::kSeriesLimit) {
    for (int k = 0; k <= nmax; ++k) j[k] = static_cast<double>(detail::series_j(k, x));
  } else if (nmax < x) {
    j[0] = b.j0;
    if (nmax >= 1) j[1] = b.j1;
    for (int k = 1; k < nmax; ++k) j[k + 1] = (2.0 * k / x) * j[k] - j[k - 1];
  } else {
    const auto seq = detail::miller_sequence(nmax, x);
    std::copy(seq.begin(), seq.begin() + nmax + 1, j.begin());
  }
}

inline std::vector<Complex> hankel1_sequence(int nmax, double x) {
  std::vector<double> j;
  std::vector<double> y;
  bessel_sequences(nmax, x, j, y);
  std::vector<Complex> h(j.size());
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = {j[k], y[k]};
  return h;
}

}  // namespace dsmps::specfun
