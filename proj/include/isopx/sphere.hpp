#pragma once

// Partitions of the sphere S^{n-1} induced by cone partitions of R^n, measured
// under normalized Haar measure with geodesic collars and the sqrt(2n/pi)
// normalization (a great subsphere measures 1 as n grows).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "isopx/collar.hpp"
#include "isopx/errors.hpp"
#include "isopx/montecarlo.hpp"
#include "isopx/partitions.hpp"

namespace isopx {

class SphericalPartition {
 public:
  explicit SphericalPartition(Partition base) : base_(std::move(base)) {
    if (!base_.is_cone())
      throw domain_error("spherical partition: " + base_.descriptor() + " is not a cone (facets miss the origin)");
    if (base_.dim() < 3)
      throw unsupported_dimension("spherical partition: S^" + std::to_string(base_.dim() - 1) +
                                  " has a 0-dimensional boundary; need n >= 3");
  }

  const Partition& base() const { return base_; }
  std::size_t dim() const { return base_.dim(); }

  CellId classify(std::span<const double> x) const { return base_.classify(x); }

  // Geodesic distance from a unit vector to the boundary of its spherical cell.
  // Facets are central hyperplanes {x.w = 0}, at angle asin(|x.w| / |w|).
  double geodesic_boundary_distance(std::span<const double> unit) const {
    return std::asin(std::min(1.0, base_.boundary_distance(unit)));
  }

 private:
  Partition base_;
};

inline double sphere_normalizer(std::size_t n) {
  return std::sqrt(2.0 * static_cast<double>(n) / std::numbers::pi);
}

// Exact small-epsilon band mass of a great subsphere relative to the
// sqrt(2n/pi) normalization: 2 Gamma(n/2) / (sqrt(pi) Gamma((n-1)/2)) / sqrt(2n/pi).
// Tends to 1 like 1 - 3/(4n).
inline double great_sphere_band_factor(std::size_t n) {
  const double nn = static_cast<double>(n);
  const double density_at_equator = std::exp(std::lgamma(nn / 2.0) - std::lgamma((nn - 1.0) / 2.0)) / std::sqrt(std::numbers::pi);
  return 2.0 * density_at_equator / sphere_normalizer(n);
}

// Points uniform on S^{n-1}: normalized standard Gaussian vectors.
inline std::vector<std::vector<double>> sphere_sample(std::size_t n, std::uint64_t seed, std::uint64_t count) {
  if (n < 2) throw domain_error("sphere_sample: n must be >= 2");
  using Block = std::vector<std::vector<double>>;
  const auto chunks = run_chunked(count, seed, Block{}, [&](GaussianStream& g, std::uint64_t c, Block& out) {
    out.reserve(c);
    for (std::uint64_t s = 0; s < c; ++s) {
      std::vector<double> x(n);
      double r2 = 0.0;
      do {
        g.fill(x);
        r2 = 0.0;
        for (double v : x) r2 += v * v;
      } while (r2 == 0.0);
      const double inv = 1.0 / std::sqrt(r2);
      for (double& v : x) v *= inv;
      out.push_back(std::move(x));
    }
  });
  Block points;
  points.reserve(count);
  for (const auto& block : chunks)
    for (const auto& x : block) points.push_back(x);
  return points;
}

inline std::vector<std::uint64_t> sphere_collar_counts(const SphericalPartition& sp, const std::vector<double>& eps,
                                                       std::uint64_t samples, std::uint64_t seed) {
  const std::size_t n = sp.dim();
  const std::size_t active = sp.base().active_dims();
  return sp.base().visit([&](const auto& kind) {
    return collar_counts(samples, seed, n, eps, [&, active](const double* x) {
      double r2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) r2 += x[i] * x[i];
      const double inv = 1.0 / std::sqrt(r2);
      thread_local std::vector<double> unit;
      unit.resize(active);
      for (std::size_t i = 0; i < active; ++i) unit[i] = x[i] * inv;
      return std::asin(std::min(1.0, kind.distance(unit.data())));
    });
  });
}

inline CollarEstimate geodesic_collar_estimate(const SphericalPartition& sp, double eps, std::uint64_t samples,
                                               std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 0.3)) throw domain_error("geodesic_collar_estimate: eps must lie in (0, 0.3)");
  if (samples < min_collar_samples) throw domain_error("geodesic_collar_estimate: need at least 1e5 samples");
  const auto hits = sphere_collar_counts(sp, {eps}, samples, seed);
  return make_collar_estimate(eps, hits[0], samples, seed, sphere_normalizer(sp.dim()));
}

// Flat-piece value carried to the sphere. Each boundary piece is a cone inside
// a central hyperplane, so its share of the great subsphere equals its
// Gaussian share, and the whole subsphere measures great_sphere_band_factor(n).
inline std::optional<double> sphere_exact_boundary_measure(const SphericalPartition& sp) {
  const auto flat = exact_value_if_flat(sp.base());
  if (!flat) return std::nullopt;
  return *flat * great_sphere_band_factor(sp.dim());
}

inline BoundaryMeasureReport sphere_boundary_measure(const SphericalPartition& sp, const EpsSchedule& sched,
                                                     std::uint64_t samples, std::uint64_t seed) {
  sched.validate(0.3);
  if (sched.epsilons.front() >= 0.3) throw domain_error("sphere: eps must lie in (0, 0.3)");
  if (samples < min_collar_samples) throw domain_error("sphere_boundary_measure: need at least 1e5 samples");
  const auto hits = sphere_collar_counts(sp, sched.epsilons, samples, seed);
  auto r = report_from_counts(sched, hits, samples, seed, sphere_normalizer(sp.dim()));
  r.partition = sp.base().descriptor();
  r.dim = sp.dim();
  r.cells = sp.base().cells();
  r.geometry = "sphere";
  r.exact = sphere_exact_boundary_measure(sp);
  return r;
}

}  // namespace isopx
