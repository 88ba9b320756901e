#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>

#include "isopx/collar.hpp"

using namespace isopx;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// 4 standard errors of the extrapolated value.
double four_sigma(const BoundaryMeasureReport& r) { return 4.0 * r.ci95 / 1.959963984540054; }

struct ThreadsEnv {
  explicit ThreadsEnv(const char* v) { setenv("ISOPX_THREADS", v, 1); }
  ~ThreadsEnv() { unsetenv("ISOPX_THREADS"); }
};

}  // namespace

TEST_CASE("collar estimates at a single epsilon") {
  const std::uint64_t n = 1000000;
  const auto h0 = collar_estimate(Partition::halfspace(1, 0.0), 0.01, n, 1);
  CHECK(std::abs(h0.quotient - 1.0) <= 4.0 * h0.std_error);
  CHECK(h0.collar_mass >= 0.0);
  CHECK(h0.collar_mass <= 1.0);
  CHECK_THAT(h0.std_error, WithinRel(std::sqrt(h0.collar_mass * (1 - h0.collar_mass) / n) / (sqrt_2_over_pi * 0.01), 1e-12));

  const auto h1 = collar_estimate(Partition::halfspace(3, 1.0), 0.01, n, 2);
  CHECK(std::abs(h1.quotient - std::exp(-0.5)) <= 4.0 * h1.std_error);

  const auto q2 = collar_estimate(Partition::quadrants(2), 0.01, n, 3);
  CHECK(std::abs(q2.quotient - 2.0) <= 4.0 * q2.std_error);

  CHECK_THROWS_AS(collar_estimate(Partition::quadrants(2), 0.01, 1000, 3), isopx::domain_error);
  CHECK_THROWS_AS(collar_estimate(Partition::quadrants(2), 0.0, n, 3), isopx::domain_error);
}

TEST_CASE("eps schedule validation") {
  CHECK_NOTHROW(EpsSchedule{}.validate());
  CHECK_THROWS_AS(EpsSchedule{{0.01}}.validate(), isopx::domain_error);
  CHECK_THROWS_AS((EpsSchedule{{0.01, 0.02}}.validate()), isopx::domain_error);
  CHECK_THROWS_AS((EpsSchedule{{0.6, 0.1}}.validate()), isopx::domain_error);
  CHECK_THROWS_AS((EpsSchedule{{0.01, 0.00005}}.validate()), isopx::domain_error);
  CHECK_THROWS_AS((EpsSchedule{{0.01, 0.01}}.validate()), isopx::domain_error);
}

TEST_CASE("affine extrapolation recovers an exact line") {
  std::vector<CollarEstimate> est;
  for (double eps : {0.02, 0.01, 0.005}) {
    CollarEstimate e;
    e.epsilon = eps;
    e.samples = 1000000;
    e.quotient = 1.7 - 3.0 * eps;
    e.collar_mass = e.quotient * sqrt_2_over_pi * eps;
    est.push_back(e);
  }
  const auto fit = extrapolate_to_zero(est, sqrt_2_over_pi);
  CHECK_THAT(fit.intercept, WithinAbs(1.7, 1e-12));
  CHECK_THAT(fit.slope, WithinAbs(-3.0, 1e-9));
  CHECK(fit.ci95 > 0.0);
}

TEST_CASE("boundary measure of flat partitions") {
  const EpsSchedule sched;
  const std::uint64_t n = 2000000;

  const auto s3 = boundary_measure(Partition::sectors3(2), sched, n, 7);
  CHECK(std::abs(s3.value - 1.5) <= four_sigma(s3));
  CHECK(s3.method == Method::mc_extrapolated);
  CHECK(s3.per_eps.size() == 3);
  REQUIRE(s3.exact.has_value());
  CHECK(*s3.exact == 1.5);

  const auto sa2 = boundary_measure(Partition::signed_axis(2, 2), sched, n, 8);
  CHECK(std::abs(sa2.value - 2.0) <= four_sigma(sa2));

  const auto q3 = boundary_measure(Partition::quadrants(3), sched, n, 9);
  CHECK(std::abs(q3.value - 3.0) <= four_sigma(q3));
  CHECK_FALSE(q3.low_precision);

  for (const auto* r : {&s3, &sa2, &q3})
    for (std::size_t j = 1; j < r->per_eps.size(); ++j) CHECK(r->per_eps[j].collar_mass <= r->per_eps[j - 1].collar_mass);
}

TEST_CASE("low precision is flagged, not thrown") {
  // a far-off hyperplane has almost no collar mass at 1e5 samples
  const auto r = boundary_measure(Partition::halfspace(1, 4.5), EpsSchedule{}, 100000, 1);
  CHECK(r.low_precision);
}

TEST_CASE("exact boundary measures") {
  CHECK(exact_boundary_measure(Partition::halfspace(2, 0.0)) == 1.0);
  CHECK_THAT(exact_boundary_measure(Partition::halfspace(2, 1.0)), WithinRel(std::exp(-0.5), 1e-15));
  CHECK(exact_boundary_measure(Partition::sectors3(2)) == 1.5);
  CHECK(exact_boundary_measure(Partition::quadrants(5)) == 5.0);
  CHECK(exact_boundary_measure(Partition::signed_axis(1, 1)) == 1.0);
  CHECK_THAT(exact_boundary_measure(Partition::signed_axis(2, 2)), WithinRel(2.0, 1e-12));
  CHECK_THROWS_AS(exact_boundary_measure(Partition::simplex_voronoi(4, 3)), isopx::domain_error);
}

TEST_CASE("signed-axis Monte Carlo agrees with the flat-piece formula") {
  for (std::size_t m : {2u, 4u, 8u}) {
    const auto p = Partition::signed_axis(m, m);
    const auto r = boundary_measure(p, EpsSchedule{}, 2000000, 100 + m);
    const double exact = exact_boundary_measure(p);
    CHECK(std::abs(r.value - exact) <= std::max(0.02 * exact, 4.0 * r.ci95));
  }
}

TEST_CASE("two-cell simplex is a rotated half-space") {
  const auto a = boundary_measure(Partition::simplex_voronoi(2, 1), EpsSchedule{}, 500000, 4);
  const auto b = boundary_measure(Partition::halfspace(1, 0.0), EpsSchedule{}, 500000, 4);
  CHECK(std::abs(a.value - b.value) <= std::hypot(a.ci95, b.ci95));
}

TEST_CASE("reports are deterministic across runs and worker counts") {
  const auto p = Partition::simplex_voronoi(5, 6);
  BoundaryMeasureReport first, second;
  {
    ThreadsEnv env("1");
    first = boundary_measure(p, EpsSchedule{}, 300000, 42);
  }
  {
    ThreadsEnv env("8");
    second = boundary_measure(p, EpsSchedule{}, 300000, 42);
  }
  CHECK(first.value == second.value);
  CHECK(first.ci95 == second.ci95);
  for (std::size_t j = 0; j < first.per_eps.size(); ++j) CHECK(first.per_eps[j].collar_mass == second.per_eps[j].collar_mass);
  const auto other_seed = boundary_measure(p, EpsSchedule{}, 300000, 43);
  CHECK(other_seed.value != first.value);
}

TEST_CASE("equal-cell partitions dominate the isoperimetric lower bound") {
  const EpsSchedule sched;
  const std::vector<Partition> parts = {Partition::halfspace(1, 0.0), Partition::sectors3(2),
                                        Partition::signed_axis(3, 3), Partition::quadrants(3),
                                        Partition::simplex_voronoi(4, 3), Partition::simplex_voronoi(7, 6)};
  std::uint64_t seed = 300;
  for (const auto& p : parts) {
    const auto r = boundary_measure(p, sched, 1000000, seed++);
    CHECK(r.value >= isoperimetric_lower_bound(static_cast<long long>(p.cells())) - 4.0 * r.ci95);
  }
}

TEST_CASE("standard error shrinks like one over root N") {
  const auto p = Partition::sectors3(2);
  double ratio_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto small = collar_estimate(p, 0.01, 200000, seed);
    const auto large = collar_estimate(p, 0.01, 400000, seed + 1000);
    const double ratio = small.std_error / large.std_error;
    CHECK_THAT(ratio, WithinRel(std::numbers::sqrt2, 0.10));
    ratio_sum += ratio;
  }
  CHECK_THAT(ratio_sum / 5.0, WithinRel(std::numbers::sqrt2, 0.10));
}

TEST_CASE("sweeps") {
  const auto sa = sweep(SweepFamily::signed_axis, {2, 4, 8, 16}, EpsSchedule{}, 100000, 0);
  REQUIRE(sa.size() == 4);
  for (const auto& row : sa) {
    CHECK(row.method == Method::exact_flat);
    CHECK(row.ratio >= 0.5);
    CHECK(row.ratio <= 3.0);
    CHECK(row.measure >= row.lower_bound);
    CHECK_FALSE(row.below_lower_bound);
    CHECK(row.k == 2 * row.n);
  }
  CHECK_THAT(sa[0].measure, WithinRel(2.0, 1e-12));

  const auto qd = sweep(SweepFamily::quadrants, {2, 3, 4, 5, 6, 7, 8, 9, 10}, EpsSchedule{}, 100000, 0);
  for (const auto& row : qd) {
    CHECK(row.measure == static_cast<double>(row.n));
    CHECK(row.k == (std::uint64_t{1} << row.n));
    CHECK(row.measure >= row.lower_bound);
  }

  const auto mc = sweep(SweepFamily::quadrants, {2, 3}, EpsSchedule{}, 1000000, 5, SweepMethod::monte_carlo);
  for (const auto& row : mc) {
    CHECK(row.method == Method::mc_extrapolated);
    CHECK(std::abs(row.measure - row.n) <= std::max(0.02 * row.n, 4.0 * row.ci95));
    CHECK(row.samples == 1000000);
  }

  const auto sx = sweep(SweepFamily::simplex, {3, 5}, EpsSchedule{}, 400000, 5);
  for (const auto& row : sx) {
    CHECK(row.method == Method::mc_extrapolated);
    CHECK(row.n == row.k - 1);
    CHECK_FALSE(row.below_lower_bound);
  }

  CHECK_THROWS_AS(sweep(SweepFamily::signed_axis, {}, EpsSchedule{}, 100000, 0), isopx::domain_error);
  CHECK_THROWS_AS(sweep(SweepFamily::simplex, {4}, EpsSchedule{}, 100000, 0, SweepMethod::exact), isopx::domain_error);
  CHECK_THROWS_AS(parse_family("hexagons"), isopx::domain_error);
}
