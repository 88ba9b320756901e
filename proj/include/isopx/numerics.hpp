#pragma once

// Scalar special functions of the standard normal law and an adaptive
// quadrature wrapper used by every integral in the library.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "isopx/errors.hpp"

namespace isopx {

inline constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934381868;
inline constexpr double sqrt_2_over_pi = 0.797884560802865355879892119868763737;

inline double std_normal_pdf(double x) noexcept {
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double std_normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Upper tail 1 - Phi(x), accurate for large x.
inline double std_normal_sf(double x) noexcept {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

// Mass of [-s, s] under N(0,1): 2 Phi(s) - 1.
inline double sym_mass(double s) {
  if (s < 0.0) throw domain_error("sym_mass: s must be >= 0");
  if (std::isinf(s)) return 1.0;
  return std::erf(s / std::numbers::sqrt2);
}

// sym_mass(s)^p without losing the tail 1 - sym_mass(s) when p is large.
inline double sym_mass_pow(double s, double p) {
  if (p == 0.0) return 1.0;
  if (s <= 0.0) return 0.0;
  if (std::isinf(s)) return 1.0;
  if (s < 1.0) return std::pow(std::erf(s / std::numbers::sqrt2), p);
  return std::exp(p * std::log1p(-std::erfc(s / std::numbers::sqrt2)));
}

namespace detail {

// Lower-region solve, p <= 1/2. Rational start (Acklam), then Newton on Phi.
inline double lower_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  for (int step = 0; step < 2; ++step) {
    const double residual = std_normal_cdf(x) - p;
    x -= residual / std_normal_pdf(x);
  }
  return x;
}

}  // namespace detail

inline double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw domain_error("std_normal_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return detail::lower_quantile(p);
  return -detail::lower_quantile(1.0 - p);
}

// Phi^{-1}(1 - q), computed from q directly so small tails keep full precision.
inline double std_normal_upper_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw domain_error("std_normal_upper_quantile: q must lie in (0, 1)");
  if (q == 0.5) return 0.0;
  if (q < 0.5) return -detail::lower_quantile(q);
  return detail::lower_quantile(1.0 - q);
}

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, QuadratureResult partial)
      : std::runtime_error(what), partial_(partial) {}
  const QuadratureResult& partial() const noexcept { return partial_; }

 private:
  QuadratureResult partial_;
};

inline constexpr double default_rel_tol = 1e-10;

struct QuadratureOptions {
  double rel_tol = default_rel_tol;
  // Bisection depth budget per segment.
  unsigned max_depth = 40;
  // Monotone decreasing bound on |f| used to truncate b = +infinity. Defaults to |f| itself.
  std::function<double(double)> envelope{};
};

// Truncation point for the semi-infinite integrals below; every integrand is
// dominated by exp(-s^2/2) beyond it.
inline double truncation_point(long long k) {
  const double kk = static_cast<double>(k < 2 ? 2 : k);
  return std::sqrt(2.0 * std::log(kk)) + 10.0;
}

namespace detail {

template <class F>
QuadratureResult gauss_kronrod_segment(F& f, double a, double b, unsigned max_depth, double tol) {
  double error = 0.0;
  double l1 = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, tol, &error, &l1);
  return {value, error, 0};
}

}  // namespace detail

// Adaptive Gauss-Kronrod (7/15) integration of f over (a, b). b may be +infinity:
// the range is then extended in doubling steps past max(a, 0) + 1 until the
// envelope falls below 1e-18 of the running value.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
  if (!(opts.rel_tol > 1e-15 && opts.rel_tol < 1e-2))
    throw domain_error("integrate: rel_tol must lie in (1e-15, 1e-2)");
  if (!std::isfinite(a)) throw domain_error("integrate: lower limit must be finite");
  if (!(b > a)) throw domain_error("integrate: require a < b");

  std::size_t evaluations = 0;
  auto counted = [&](double s) {
    ++evaluations;
    return static_cast<double>(f(s));
  };

  // The per-segment tolerance is tightened when the summed error estimate
  // still exceeds rel_tol * |value|.
  QuadratureResult total;
  double segment_tol = opts.rel_tol;
  for (int attempt = 0;; ++attempt) {
    total = {};
    auto accumulate = [&](double lo, double hi) {
      const auto piece = detail::gauss_kronrod_segment(counted, lo, hi, opts.max_depth, segment_tol);
      total.value += piece.value;
      total.error_estimate += piece.error_estimate;
    };

    if (std::isfinite(b)) {
      accumulate(a, b);
    } else {
      auto envelope = [&](double s) { return opts.envelope ? opts.envelope(s) : std::abs(counted(s)); };
      // The envelope is only consulted from max(a, 0) + 1 onwards.
      double lo = a;
      double width = std::max(a, 0.0) + 1.0 - a;
      constexpr int max_segments = 64;
      int segment = 0;
      for (; segment < max_segments; ++segment) {
        const double hi = lo + width;
        accumulate(lo, hi);
        lo = hi;
        width = segment == 0 ? 1.0 : 2.0 * width;
        const double running = std::abs(total.value);
        if (envelope(lo) <= 1e-18 * running || (running == 0.0 && envelope(lo) == 0.0)) break;
      }
      if (segment == max_segments) {
        total.evaluations = evaluations;
        throw convergence_error("integrate: tail envelope never decayed", total);
      }
    }
    total.evaluations = evaluations;

    const bool converged = std::isfinite(total.value) &&
                           total.error_estimate <= opts.rel_tol * std::abs(total.value) +
                                                       std::numeric_limits<double>::min();
    if (converged) break;
    if (attempt == 3 || segment_tol < 1e-14)
      throw convergence_error("integrate: relative tolerance not reached within subdivision budget", total);
    segment_tol /= 10.0;
  }
  return total;
}

}  // namespace isopx
