#pragma once

// Order-statistic identities, window bounds, and the three routes to the
// measure of the flat piece {t1 = t2 >= |t3|, ..., |tk|}.

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "isopx/errors.hpp"
#include "isopx/numerics.hpp"

namespace isopx {

struct BoundCheckConfig {
  double C = 10.0;
  double eps_slack = 1.0;
  long long k_min = 2;
  long long k_max = 10000;

  void validate() const {
    // C = 1 is admitted: the window is still well defined and the check simply fails.
    if (!(C >= 1.0)) throw domain_error("BoundCheckConfig: C must be >= 1");
    if (!(eps_slack > 0.0)) throw domain_error("BoundCheckConfig: eps_slack must be > 0");
    if (k_min < 2 || k_max < k_min) throw domain_error("BoundCheckConfig: k range must be nonempty with k >= 2");
  }
};

inline constexpr double infinity = std::numeric_limits<double>::infinity();

// (1/sqrt(2 pi)) int_a^b sym_mass(s)^(k-1) e^{-s^2/2} ds, via its antiderivative
// sym_mass(s)^k / (2k).
inline double window_mass(long long k, double a, double b) {
  if (k < 1) throw domain_error("window_mass: k must be >= 1");
  if (!(a >= 0.0) || !(a < b)) throw domain_error("window_mass: require 0 <= a < b");
  const double kk = static_cast<double>(k);
  return (sym_mass_pow(b, kk) - sym_mass_pow(a, kk)) / (2.0 * kk);
}

// Same quantity by direct quadrature; an independent check on the closed form.
inline QuadratureResult window_mass_quadrature(long long k, double a, double b,
                                               double rel_tol = default_rel_tol) {
  if (k < 1) throw domain_error("window_mass_quadrature: k must be >= 1");
  if (!(a >= 0.0) || !(a < b)) throw domain_error("window_mass_quadrature: require 0 <= a < b");
  const double power = static_cast<double>(k - 1);
  const double upper = std::min(b, truncation_point(k));
  if (!(upper > a)) return {0.0, 0.0, 1};
  auto integrand = [power](double s) { return sym_mass_pow(s, power) * std_normal_pdf(s); };
  return integrate(integrand, a, upper, {.rel_tol = rel_tol});
}

struct Lemma1Row {
  long long k = 0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

inline Lemma1Row lemma1_row(long long k, double C, double eps_slack) {
  const double kk = static_cast<double>(k);
  Lemma1Row row;
  row.k = k;
  row.window_lo = kk > C ? std::max(0.0, std::sqrt(2.0 * std::log(kk / C)) - 1.0) : 0.0;
  row.window_hi = std::sqrt(2.0 * std::log(C * kk));
  row.lhs = window_mass(k, row.window_lo, row.window_hi);
  row.rhs = 1.0 / ((2.0 + eps_slack) * kk);
  row.holds = row.lhs >= row.rhs;
  return row;
}

inline std::vector<Lemma1Row> lemma1_check(const BoundCheckConfig& cfg) {
  cfg.validate();
  std::vector<Lemma1Row> rows;
  rows.reserve(static_cast<std::size_t>(cfg.k_max - cfg.k_min + 1));
  for (long long k = cfg.k_min; k <= cfg.k_max; ++k) rows.push_back(lemma1_row(k, cfg.C, cfg.eps_slack));
  return rows;
}

// The piece integral in its direct form:
// (1/sqrt(2 pi)) int_0^inf sym_mass(s)^(k-2) e^{-s^2} ds.
inline QuadratureResult piece_measure_paper_quadrature(long long k, double rel_tol = default_rel_tol) {
  if (k < 2) throw domain_error("piece_measure_paper: k must be >= 2");
  const double power = static_cast<double>(k - 2);
  auto integrand = [power](double s) { return inv_sqrt_2pi * sym_mass_pow(s, power) * std::exp(-s * s); };
  return integrate(integrand, 0.0, truncation_point(k), {.rel_tol = rel_tol});
}

inline double piece_measure_paper(long long k) { return piece_measure_paper_quadrature(k).value; }

// Integrated-by-parts form: (1/(2(k-1))) int_0^inf sym_mass(s)^(k-1) s e^{-s^2/2} ds.
inline QuadratureResult piece_measure_ibp_quadrature(long long k, double rel_tol = default_rel_tol) {
  if (k < 2) throw domain_error("piece_measure_ibp: k must be >= 2");
  const double power = static_cast<double>(k - 1);
  auto integrand = [power](double s) { return sym_mass_pow(s, power) * s * std::exp(-0.5 * s * s); };
  auto r = integrate(integrand, 0.0, truncation_point(k), {.rel_tol = rel_tol});
  const double scale = 1.0 / (2.0 * static_cast<double>(k - 1));
  r.value *= scale;
  r.error_estimate *= scale;
  return r;
}

inline double piece_measure_ibp(long long k) { return piece_measure_ibp_quadrature(k).value; }

// Measure of the piece inside its hyperplane, normalized so a full hyperplane
// through the origin has measure 1. Unit-speed parametrization of the diagonal
// t1 = t2 contributes the sqrt(2) Jacobian.
inline double piece_measure_geometric(long long k) {
  return std::numbers::sqrt2 * piece_measure_paper(k);
}

struct Prop1Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

inline Prop1Bounds prop1_bounds(long long k, double C, double eps_slack) {
  if (k < 2) throw domain_error("prop1_bounds: k must be >= 2");
  const double kk = static_cast<double>(k);
  const double denom = 2.0 * kk * (kk - 1.0);
  Prop1Bounds b;
  if (kk > C) {
    b.lower = std::max(0.0, (std::sqrt(std::numbers::pi * std::log(kk / C)) - 1.0) / ((1.0 + eps_slack) * denom));
  }
  b.upper = (1.0 + eps_slack) * std::sqrt(std::numbers::pi * std::log(C * kk)) / denom;
  return b;
}

inline Prop1Bounds prop1_bounds(long long k, const BoundCheckConfig& cfg) {
  return prop1_bounds(k, cfg.C, cfg.eps_slack);
}

// Gaussian level t with upper tail mass 1/k.
inline double tail_level(long long k) {
  if (k < 2) throw domain_error("tail_level: k must be >= 2");
  return std_normal_upper_quantile(1.0 / static_cast<double>(k));
}

// Sum over k disjoint per-cell collars of the half-space minimum, in units
// where a hyperplane through the origin measures 1: (k/2) e^{-t^2/2}.
inline double isoperimetric_lower_bound(long long k) {
  const double t = tail_level(k);
  return 0.5 * static_cast<double>(k) * std::exp(-0.5 * t * t);
}

// Smallest k for which sqrt(ln k) <= t <= sqrt(2 ln k) holds (and keeps holding).
inline constexpr long long tail_bracket_threshold = 32;

struct TailBracket {
  double t = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool holds = false;
  bool in_regime = false;
};

inline TailBracket tail_bracket(long long k) {
  TailBracket r;
  const double logk = std::log(static_cast<double>(k));
  r.t = tail_level(k);
  r.lower = std::sqrt(logk);
  r.upper = std::sqrt(2.0 * logk);
  r.holds = r.lower <= r.t && r.t <= r.upper;
  r.in_regime = k >= tail_bracket_threshold;
  return r;
}

}  // namespace isopx
