#pragma once

// Boundary measure of a partition as the Minkowski-content limit of its
// epsilon-collar: the Gaussian mass of points within epsilon of the boundary of
// their own cell, divided by sqrt(2/pi) * epsilon, extrapolated to epsilon -> 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isopx/errors.hpp"
#include "isopx/integrals.hpp"
#include "isopx/montecarlo.hpp"
#include "isopx/partitions.hpp"

namespace isopx {

struct EpsSchedule {
  std::vector<double> epsilons{0.02, 0.01, 0.005};

  void validate(double max_eps = 0.5) const {
    if (epsilons.size() < 2) throw domain_error("eps schedule: need at least two values");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      const double e = epsilons[i];
      if (!(e > 0.0 && e <= max_eps))
        throw domain_error("eps schedule: " + std::to_string(e) + " outside (0, " + std::to_string(max_eps) + "]");
      if (i > 0 && !(e < epsilons[i - 1])) throw domain_error("eps schedule: must be strictly decreasing");
    }
    if (epsilons.back() < 1e-4) throw domain_error("eps schedule: smallest value must be >= 1e-4");
  }
};

struct CollarEstimate {
  double epsilon = 0.0;
  double collar_mass = 0.0;
  double quotient = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

enum class Method { mc_extrapolated, exact_flat };

inline std::string method_name(Method m) { return m == Method::exact_flat ? "exact_flat" : "mc_extrapolated"; }

struct BoundaryMeasureReport {
  double value = 0.0;
  double ci95 = 0.0;
  double slope = 0.0;  // d quotient / d epsilon of the affine fit
  Method method = Method::mc_extrapolated;
  std::vector<CollarEstimate> per_eps;
  std::string partition;
  std::size_t dim = 0;
  std::uint64_t cells = 0;
  std::string geometry = "gaussian";
  bool low_precision = false;
  std::optional<double> exact;
};

inline constexpr std::uint64_t min_collar_samples = 100000;

// Number of samples whose distance falls below each epsilon. `eps` must be
// strictly decreasing; counts are then nested (nonincreasing).
template <class SampleDistance>
std::vector<std::uint64_t> collar_counts(std::uint64_t samples, std::uint64_t seed, std::size_t sample_dim,
                                         const std::vector<double>& eps, SampleDistance distance) {
  const std::vector<std::uint64_t> zero(eps.size(), 0);
  const auto per_chunk = run_chunked(samples, seed, zero,
                                     [&](GaussianStream& g, std::uint64_t count, std::vector<std::uint64_t>& acc) {
                                       std::vector<double> x(sample_dim);
                                       for (std::uint64_t s = 0; s < count; ++s) {
                                         g.fill(x);
                                         const double d = distance(x.data());
                                         for (std::size_t j = 0; j < eps.size() && d < eps[j]; ++j) ++acc[j];
                                       }
                                     });
  std::vector<std::uint64_t> total(eps.size(), 0);
  for (const auto& chunk : per_chunk)
    for (std::size_t j = 0; j < eps.size(); ++j) total[j] += chunk[j];
  return total;
}

inline std::vector<std::uint64_t> gaussian_collar_counts(const Partition& p, const std::vector<double>& eps,
                                                         std::uint64_t samples, std::uint64_t seed) {
  return p.visit([&](const auto& kind) {
    return collar_counts(samples, seed, p.active_dims(), eps, [&](const double* x) { return kind.distance(x); });
  });
}

inline CollarEstimate make_collar_estimate(double eps, std::uint64_t hits, std::uint64_t samples,
                                           std::uint64_t seed, double normalizer) {
  CollarEstimate e;
  e.epsilon = eps;
  e.samples = samples;
  e.seed = seed;
  e.collar_mass = static_cast<double>(hits) / static_cast<double>(samples);
  e.quotient = e.collar_mass / (normalizer * eps);
  e.std_error =
      std::sqrt(e.collar_mass * (1.0 - e.collar_mass) / static_cast<double>(samples)) / (normalizer * eps);
  return e;
}

inline CollarEstimate collar_estimate(const Partition& p, double eps, std::uint64_t samples, std::uint64_t seed) {
  if (!(eps > 0.0 && eps <= 0.5)) throw domain_error("collar_estimate: eps must lie in (0, 0.5]");
  if (samples < min_collar_samples) throw domain_error("collar_estimate: need at least 1e5 samples");
  const auto hits = gaussian_collar_counts(p, {eps}, samples, seed);
  return make_collar_estimate(eps, hits[0], samples, seed, sqrt_2_over_pi);
}

struct AffineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double ci95 = 0.0;
};

// Weighted least squares of quotient = a + b * eps (weights 1/stderr^2). The
// estimates share one sample stream, so the intercept's variance uses the
// covariance of nested collar indicators: Cov = (p_small - p_i p_j) / N.
inline AffineFit extrapolate_to_zero(const std::vector<CollarEstimate>& est, double normalizer) {
  const std::size_t m = est.size();
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double n = static_cast<double>(est[i].samples);
    // Floor at one hit / one miss so empty or saturated collars keep a finite weight.
    const double inside = std::max(est[i].collar_mass, 1.0 / n);
    const double outside = std::max(1.0 - est[i].collar_mass, 1.0 / n);
    const double se = std::sqrt(inside * outside / n) / (normalizer * est[i].epsilon);
    w[i] = 1.0 / (se * se);
  }
  double s0 = 0, s1 = 0, s2 = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = est[i].epsilon;
    s0 += w[i];
    s1 += w[i] * e;
    s2 += w[i] * e * e;
    sy += w[i] * est[i].quotient;
    sxy += w[i] * e * est[i].quotient;
  }
  const double det = s0 * s2 - s1 * s1;
  AffineFit fit;
  fit.intercept = (s2 * sy - s1 * sxy) / det;
  fit.slope = (s0 * sxy - s1 * sy) / det;

  std::vector<double> c(m);
  for (std::size_t i = 0; i < m; ++i) c[i] = w[i] * (s2 - s1 * est[i].epsilon) / det;
  double var = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double pi = est[i].collar_mass, pj = est[j].collar_mass;
      const double cov = (std::min(pi, pj) - pi * pj) / static_cast<double>(est[i].samples) /
                         (normalizer * est[i].epsilon * normalizer * est[j].epsilon);
      var += c[i] * c[j] * cov;
    }
  fit.ci95 = 1.959963984540054 * std::sqrt(std::max(var, 0.0));
  return fit;
}

inline std::optional<double> exact_value_if_flat(const Partition& p);

// Builds the report from nested per-epsilon hit counts.
inline BoundaryMeasureReport report_from_counts(const EpsSchedule& sched, const std::vector<std::uint64_t>& hits,
                                                std::uint64_t samples, std::uint64_t seed, double normalizer) {
  for (std::size_t j = 1; j < hits.size(); ++j)
    if (hits[j] > hits[j - 1]) throw std::logic_error("collar mass decreased as epsilon grew");
  BoundaryMeasureReport r;
  for (std::size_t j = 0; j < hits.size(); ++j)
    r.per_eps.push_back(make_collar_estimate(sched.epsilons[j], hits[j], samples, seed, normalizer));
  const auto fit = extrapolate_to_zero(r.per_eps, normalizer);
  r.value = fit.intercept;
  r.slope = fit.slope;
  r.ci95 = fit.ci95;
  r.method = Method::mc_extrapolated;
  r.low_precision = hits.back() == 0 || !(r.ci95 <= 0.25 * std::abs(r.value));
  return r;
}

inline BoundaryMeasureReport boundary_measure(const Partition& p, const EpsSchedule& sched, std::uint64_t samples,
                                              std::uint64_t seed) {
  sched.validate();
  if (samples < min_collar_samples) throw domain_error("boundary_measure: need at least 1e5 samples");
  const auto hits = gaussian_collar_counts(p, sched.epsilons, samples, seed);
  auto r = report_from_counts(sched, hits, samples, seed, sqrt_2_over_pi);
  r.partition = p.descriptor();
  r.dim = p.dim();
  r.cells = p.cells();
  r.exact = exact_value_if_flat(p);
  return r;
}

inline bool has_exact_boundary_measure(const Partition& p) {
  switch (p.kind()) {
    case PartitionKind::halfspace:
    case PartitionKind::sectors3:
    case PartitionKind::quadrants:
    case PartitionKind::signed_axis: return true;
    default: return false;
  }
}

// Flat-piece accounting for partitions whose boundary is a finite union of
// pieces of hyperplanes.
inline double exact_boundary_measure(const Partition& p) {
  switch (p.kind()) {
    case PartitionKind::halfspace: {
      const double t = p.halfspace_offset();
      return std::exp(-0.5 * t * t);
    }
    case PartitionKind::sectors3: return 1.5;  // three half-lines through the origin
    case PartitionKind::quadrants: return static_cast<double>(p.dim());
    case PartitionKind::signed_axis: {
      const auto m = static_cast<long long>(p.signed_axis_m());
      if (m == 1) return 1.0;
      // 2m(m-1) congruent pieces {s_i t_i = s_j t_j >= |t_l|, l != i, j}.
      return 2.0 * static_cast<double>(m) * static_cast<double>(m - 1) * piece_measure_geometric(m);
    }
    default: throw domain_error("exact_boundary_measure: no flat-piece formula for " + p.descriptor());
  }
}

inline std::optional<double> exact_value_if_flat(const Partition& p) {
  if (!has_exact_boundary_measure(p)) return std::nullopt;
  return exact_boundary_measure(p);
}

inline BoundaryMeasureReport exact_report(const Partition& p) {
  BoundaryMeasureReport r;
  r.value = exact_boundary_measure(p);
  r.exact = r.value;
  r.method = Method::exact_flat;
  r.partition = p.descriptor();
  r.dim = p.dim();
  r.cells = p.cells();
  return r;
}

enum class SweepFamily { signed_axis, quadrants, simplex };

inline SweepFamily parse_family(const std::string& s) {
  if (s == "signed-axis") return SweepFamily::signed_axis;
  if (s == "quadrants") return SweepFamily::quadrants;
  if (s == "simplex") return SweepFamily::simplex;
  throw domain_error("unknown sweep family '" + s + "'");
}

inline Partition family_member(SweepFamily f, std::size_t size) {
  switch (f) {
    case SweepFamily::signed_axis: return Partition::signed_axis(size, size);
    case SweepFamily::quadrants: return Partition::quadrants(size);
    case SweepFamily::simplex:
      if (size < 2) throw domain_error("simplex: k must be >= 2");
      return Partition::simplex_voronoi(size, size - 1);
  }
  throw domain_error("unknown sweep family");
}

enum class SweepMethod { automatic, exact, monte_carlo };

struct SweepRow {
  std::string kind;
  std::uint64_t k = 0;
  std::size_t n = 0;
  double measure = 0.0;
  double ci95 = 0.0;
  double ratio = 0.0;  // measure / sqrt(ln k)
  double lower_bound = 0.0;
  Method method = Method::mc_extrapolated;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  bool low_precision = false;
  bool below_lower_bound = false;
};

inline SweepRow sweep_row(const Partition& p, const BoundaryMeasureReport& r, std::uint64_t seed,
                          std::uint64_t samples) {
  SweepRow row;
  row.kind = kind_name(p.kind());
  row.k = p.cells();
  row.n = p.dim();
  row.measure = r.value;
  row.ci95 = r.ci95;
  row.ratio = r.value / std::sqrt(std::log(static_cast<double>(row.k)));
  row.lower_bound = isoperimetric_lower_bound(static_cast<long long>(row.k));
  row.method = r.method;
  row.seed = r.method == Method::exact_flat ? 0 : seed;
  row.samples = r.method == Method::exact_flat ? 0 : samples;
  row.low_precision = r.low_precision;
  row.below_lower_bound = row.measure < row.lower_bound - 4.0 * row.ci95;
  return row;
}

inline std::vector<SweepRow> sweep(SweepFamily family, const std::vector<std::size_t>& sizes,
                                   const EpsSchedule& sched, std::uint64_t samples, std::uint64_t seed,
                                   SweepMethod method = SweepMethod::automatic) {
  if (sizes.empty()) throw domain_error("sweep: size list is empty");
  std::vector<SweepRow> rows;
  for (std::size_t size : sizes) {
    const Partition p = family_member(family, size);
    const bool exact = method == SweepMethod::exact ||
                       (method == SweepMethod::automatic && has_exact_boundary_measure(p));
    const auto report = exact ? exact_report(p) : boundary_measure(p, sched, samples, seed);
    rows.push_back(sweep_row(p, report, seed, samples));
  }
  return rows;
}

}  // namespace isopx
