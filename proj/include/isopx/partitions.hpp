#pragma once

// Catalogue of convex k-cell partitions of R^n. Each partition classifies
// points and gives the exact distance from a point to the boundary of its own
// cell: cells are intersections of half-spaces, so that distance is the
// minimum over the cell's facet hyperplanes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "isopx/errors.hpp"
#include "isopx/montecarlo.hpp"

namespace isopx {

using CellId = std::uint64_t;

// Nearest facet of the cell containing a point.
struct Facet {
  CellId cell = 0;
  double distance = 0.0;
  std::vector<double> outward_normal;  // unit, length dim
};

namespace kinds {

// Cell 0 = {x1 >= t}, cell 1 = {x1 < t}.
struct Halfspace {
  double offset = 0.0;

  std::size_t active_dims() const { return 1; }
  CellId classify(const double* x) const { return x[0] >= offset ? 0 : 1; }
  double distance(const double* x) const { return std::abs(x[0] - offset); }
  void facet(const double* x, Facet& f) const {
    f.cell = classify(x);
    f.distance = distance(x);
    f.outward_normal[0] = f.cell == 0 ? -1.0 : 1.0;
  }
};

// Three 2pi/3 sectors in the (x1, x2) plane; sector j is centered on angle 2 pi j / 3.
struct Sectors3 {
  static constexpr double dirs[3][2] = {
      {1.0, 0.0}, {-0.5, 0.86602540378443864676}, {-0.5, -0.86602540378443864676}};
  static constexpr double site_gap = 1.73205080756887729353;  // |u_i - u_j|

  std::size_t active_dims() const { return 2; }

  CellId classify(const double* x) const {
    CellId best = 0;
    double best_dot = dot(0, x);
    for (CellId j = 1; j < 3; ++j) {
      const double d = dot(j, x);
      if (d > best_dot) {
        best_dot = d;
        best = j;
      }
    }
    return best;
  }

  double distance(const double* x) const {
    const CellId i = classify(x);
    const double di = dot(i, x);
    double d = std::numeric_limits<double>::infinity();
    for (CellId q = 0; q < 3; ++q)
      if (q != i) d = std::min(d, (di - dot(q, x)) / site_gap);
    return d;
  }

  void facet(const double* x, Facet& f) const {
    const CellId i = classify(x);
    const double di = dot(i, x);
    f.cell = i;
    f.distance = std::numeric_limits<double>::infinity();
    for (CellId q = 0; q < 3; ++q) {
      if (q == i) continue;
      const double d = (di - dot(q, x)) / site_gap;
      if (d < f.distance) {
        f.distance = d;
        f.outward_normal[0] = (dirs[q][0] - dirs[i][0]) / site_gap;
        f.outward_normal[1] = (dirs[q][1] - dirs[i][1]) / site_gap;
      }
    }
  }

  static double dot(CellId j, const double* x) { return dirs[j][0] * x[0] + dirs[j][1] * x[1]; }
};

// Voronoi cells of {+e_1, -e_1, ..., +e_m, -e_m}; cell 2i is +e_i, 2i+1 is -e_i.
struct SignedAxis {
  std::size_t m = 1;

  std::size_t active_dims() const { return m; }

  std::size_t dominant(const double* x) const {
    std::size_t best = 0;
    double best_abs = std::abs(x[0]);
    for (std::size_t j = 1; j < m; ++j) {
      const double a = std::abs(x[j]);
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    return best;
  }

  CellId classify(const double* x) const {
    const std::size_t i = dominant(x);
    return 2 * i + (x[i] < 0.0 ? 1 : 0);
  }

  double distance(const double* x) const {
    const std::size_t i = dominant(x);
    const double top = std::abs(x[i]);
    double runner_up = -1.0;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) runner_up = std::max(runner_up, std::abs(x[j]));
    double d = top;  // antipodal facet x_i = 0
    if (runner_up >= 0.0) d = std::min(d, (top - runner_up) / std::numbers::sqrt2);
    return d;
  }

  void facet(const double* x, Facet& f) const {
    const std::size_t i = dominant(x);
    const double si = x[i] < 0.0 ? -1.0 : 1.0;
    f.cell = classify(x);
    f.distance = std::abs(x[i]);
    std::fill(f.outward_normal.begin(), f.outward_normal.end(), 0.0);
    f.outward_normal[i] = -si;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double d = (std::abs(x[i]) - std::abs(x[j])) / std::numbers::sqrt2;
      if (d < f.distance) {
        const double sj = x[j] < 0.0 ? -1.0 : 1.0;
        f.distance = d;
        std::fill(f.outward_normal.begin(), f.outward_normal.end(), 0.0);
        f.outward_normal[j] = sj / std::numbers::sqrt2;
        f.outward_normal[i] = -si / std::numbers::sqrt2;
      }
    }
  }
};

// Orthants; bit i of the cell id is set when x_i < 0.
struct Quadrants {
  std::size_t n = 1;

  std::size_t active_dims() const { return n; }

  CellId classify(const double* x) const {
    CellId id = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (x[i] < 0.0) id |= CellId{1} << i;
    return id;
  }

  double distance(const double* x) const {
    double d = std::abs(x[0]);
    for (std::size_t i = 1; i < n; ++i) d = std::min(d, std::abs(x[i]));
    return d;
  }

  void facet(const double* x, Facet& f) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(x[i]) < std::abs(x[best])) best = i;
    f.cell = classify(x);
    f.distance = std::abs(x[best]);
    std::fill(f.outward_normal.begin(), f.outward_normal.end(), 0.0);
    f.outward_normal[best] = x[best] < 0.0 ? 1.0 : -1.0;
  }
};

// Nearest-site cells. Sites live in the first `site_dim` coordinates.
struct SiteVoronoi {
  std::size_t count = 0;
  std::size_t site_dim = 0;
  std::vector<double> sites;   // count x site_dim, row-major
  std::vector<double> norms2;  // |s_q|^2
  std::vector<double> gaps;    // count x count, |s_p - s_q|

  SiteVoronoi() = default;
  SiteVoronoi(std::vector<double> flat, std::size_t k, std::size_t dim)
      : count(k), site_dim(dim), sites(std::move(flat)), norms2(k), gaps(k * k) {
    for (std::size_t p = 0; p < k; ++p) {
      double acc = 0.0;
      for (std::size_t c = 0; c < dim; ++c) acc += sites[p * dim + c] * sites[p * dim + c];
      norms2[p] = acc;
    }
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) {
        double acc = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
          const double d = sites[p * dim + c] - sites[q * dim + c];
          acc += d * d;
        }
        gaps[p * k + q] = std::sqrt(acc);
      }
  }

  std::size_t active_dims() const { return site_dim; }
  std::span<const double> site(std::size_t q) const { return {sites.data() + q * site_dim, site_dim}; }

  // |x - s_q|^2 - |x|^2 for every q.
  void offsets(const double* x, double* out) const {
    for (std::size_t q = 0; q < count; ++q) {
      const double* s = sites.data() + q * site_dim;
      double d = 0.0;
      for (std::size_t c = 0; c < site_dim; ++c) d += x[c] * s[c];
      out[q] = norms2[q] - 2.0 * d;
    }
  }

  static std::size_t argmin(const double* v, std::size_t k) {
    std::size_t best = 0;
    for (std::size_t q = 1; q < k; ++q)
      if (v[q] < v[best]) best = q;
    return best;
  }

  CellId classify(const double* x) const {
    thread_local std::vector<double> buf;
    buf.resize(count);
    offsets(x, buf.data());
    return argmin(buf.data(), count);
  }

  double distance(const double* x) const {
    thread_local std::vector<double> buf;
    buf.resize(count);
    offsets(x, buf.data());
    const std::size_t i = argmin(buf.data(), count);
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < count; ++q)
      if (q != i) d = std::min(d, (buf[q] - buf[i]) / (2.0 * gaps[i * count + q]));
    return d;
  }

  void facet(const double* x, Facet& f) const {
    std::vector<double> buf(count);
    offsets(x, buf.data());
    const std::size_t i = argmin(buf.data(), count);
    f.cell = i;
    f.distance = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < count; ++q) {
      if (q == i) continue;
      const double d = (buf[q] - buf[i]) / (2.0 * gaps[i * count + q]);
      if (d < f.distance) {
        f.distance = d;
        std::fill(f.outward_normal.begin(), f.outward_normal.end(), 0.0);
        for (std::size_t c = 0; c < site_dim; ++c)
          f.outward_normal[c] = (sites[q * site_dim + c] - sites[i * site_dim + c]) / gaps[i * count + q];
      }
    }
  }
};

}  // namespace kinds

enum class PartitionKind { halfspace, sectors3, signed_axis, quadrants, simplex_voronoi, site_voronoi };

inline std::string kind_name(PartitionKind k) {
  switch (k) {
    case PartitionKind::halfspace: return "halfspace";
    case PartitionKind::sectors3: return "sectors3";
    case PartitionKind::signed_axis: return "signed-axis";
    case PartitionKind::quadrants: return "quadrants";
    case PartitionKind::simplex_voronoi: return "simplex";
    case PartitionKind::site_voronoi: return "voronoi";
  }
  return "unknown";
}

// k unit vectors with pairwise inner products -1/(k-1), centred at the origin,
// in the first k-1 coordinates of R^n. Row q is e_q minus the centroid of the
// standard basis of R^k, scaled to unit length and written in the Helmert basis
// of the sum-zero hyperplane.
inline std::vector<std::vector<double>> make_simplex_sites(std::size_t k, std::size_t n) {
  if (k < 2) throw domain_error("make_simplex_sites: k must be >= 2");
  if (k - 1 > n) throw domain_error("make_simplex_sites: need k - 1 <= n");
  const double scale = std::sqrt(static_cast<double>(k) / static_cast<double>(k - 1));
  std::vector<std::vector<double>> sites(k, std::vector<double>(n, 0.0));
  for (std::size_t j = 1; j < k; ++j) {
    const double jj = static_cast<double>(j);
    const double h = 1.0 / std::sqrt(jj * (jj + 1.0));
    for (std::size_t q = 0; q < j; ++q) sites[q][j - 1] = scale * h;
    sites[j][j - 1] = -scale * jj * h;
  }
  return sites;
}

class Partition {
 public:
  using Kind = std::variant<kinds::Halfspace, kinds::Sectors3, kinds::SignedAxis, kinds::Quadrants,
                            kinds::SiteVoronoi>;

  static Partition halfspace(std::size_t dim, double offset) {
    require_dim(dim, 1, "halfspace");
    if (!std::isfinite(offset)) throw domain_error("halfspace: offset must be finite");
    return Partition(PartitionKind::halfspace, dim, 2, kinds::Halfspace{offset});
  }

  static Partition sectors3(std::size_t dim) {
    require_dim(dim, 2, "sectors3");
    return Partition(PartitionKind::sectors3, dim, 3, kinds::Sectors3{});
  }

  static Partition signed_axis(std::size_t m, std::size_t dim) {
    if (m < 1) throw domain_error("signed-axis: m must be >= 1");
    require_dim(dim, m, "signed-axis");
    Partition p(PartitionKind::signed_axis, dim, 2 * m, kinds::SignedAxis{m});
    p.m_ = m;
    return p;
  }

  static Partition quadrants(std::size_t dim) {
    require_dim(dim, 1, "quadrants");
    if (dim > 62) throw domain_error("quadrants: dimension must be <= 62");
    return Partition(PartitionKind::quadrants, dim, CellId{1} << dim, kinds::Quadrants{dim});
  }

  static Partition simplex_voronoi(std::size_t k, std::size_t dim) {
    const auto sites = make_simplex_sites(k, dim);
    const std::size_t site_dim = k - 1;
    std::vector<double> flat;
    flat.reserve(k * site_dim);
    for (const auto& s : sites) flat.insert(flat.end(), s.begin(), s.begin() + static_cast<long>(site_dim));
    return Partition(PartitionKind::simplex_voronoi, dim, k, kinds::SiteVoronoi(std::move(flat), k, site_dim));
  }

  static Partition site_voronoi(const std::vector<std::vector<double>>& sites, std::size_t dim = 0) {
    if (sites.size() < 2) throw domain_error("voronoi: need at least two sites");
    const std::size_t site_dim = sites.front().size();
    if (site_dim == 0) throw domain_error("voronoi: sites must have at least one coordinate");
    for (const auto& s : sites) {
      if (s.size() != site_dim) throw domain_error("voronoi: sites must share one dimension");
      for (double c : s)
        if (!std::isfinite(c)) throw domain_error("voronoi: site coordinates must be finite");
    }
    if (dim == 0) dim = site_dim;
    require_dim(dim, site_dim, "voronoi");
    std::vector<double> flat;
    for (const auto& s : sites) flat.insert(flat.end(), s.begin(), s.end());
    kinds::SiteVoronoi v(std::move(flat), sites.size(), site_dim);
    for (std::size_t p = 0; p < v.count; ++p)
      for (std::size_t q = p + 1; q < v.count; ++q)
        if (v.gaps[p * v.count + q] == 0.0) throw domain_error("voronoi: sites must be distinct");
    return Partition(PartitionKind::site_voronoi, dim, sites.size(), std::move(v));
  }

  PartitionKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  CellId cells() const { return cells_; }
  std::size_t active_dims() const {
    return std::visit([](const auto& k) { return k.active_dims(); }, impl_);
  }

  double halfspace_offset() const {
    if (auto h = std::get_if<kinds::Halfspace>(&impl_)) return h->offset;
    return 0.0;
  }
  std::size_t signed_axis_m() const { return m_; }

  // Canonical CLI string for this partition.
  std::string descriptor() const {
    std::ostringstream os;
    os << kind_name(kind_);
    switch (kind_) {
      case PartitionKind::halfspace: os << ":t=" << halfspace_offset(); break;
      case PartitionKind::signed_axis: os << ":m=" << m_; break;
      case PartitionKind::simplex_voronoi: os << ":k=" << cells_; break;
      case PartitionKind::site_voronoi: os << ":sites=" << cells_; break;
      default: break;
    }
    return os.str();
  }

  // Scale-invariant classifier (every facet hyperplane passes through the origin).
  bool is_cone() const {
    switch (kind_) {
      case PartitionKind::halfspace: return halfspace_offset() == 0.0;
      case PartitionKind::site_voronoi: {
        const auto& v = std::get<kinds::SiteVoronoi>(impl_);
        return std::all_of(v.norms2.begin(), v.norms2.end(),
                           [&](double r) { return std::abs(r - v.norms2.front()) <= 1e-12 * v.norms2.front(); });
      }
      default: return true;
    }
  }

  // Kinds whose cells all have Gaussian measure exactly 1/k.
  bool has_equal_cells() const {
    switch (kind_) {
      case PartitionKind::halfspace: return halfspace_offset() == 0.0;
      case PartitionKind::site_voronoi: return false;
      default: return true;
    }
  }

  CellId classify(std::span<const double> x) const {
    check(x);
    return std::visit([&](const auto& k) { return k.classify(x.data()); }, impl_);
  }

  double boundary_distance(std::span<const double> x) const {
    check(x);
    return std::visit([&](const auto& k) { return k.distance(x.data()); }, impl_);
  }

  Facet nearest_facet(std::span<const double> x) const {
    check(x);
    Facet f;
    f.outward_normal.assign(dim_, 0.0);
    std::visit([&](const auto& k) { k.facet(x.data(), f); }, impl_);
    return f;
  }

  // Calls fn with the concrete kind so hot loops avoid per-point dispatch. The
  // kind reads only the first active_dims() coordinates of a point.
  template <class Fn>
  decltype(auto) visit(Fn&& fn) const {
    return std::visit(std::forward<Fn>(fn), impl_);
  }

 private:
  Partition(PartitionKind kind, std::size_t dim, CellId cells, Kind impl)
      : kind_(kind), dim_(dim), cells_(cells), impl_(std::move(impl)) {}

  static void require_dim(std::size_t dim, std::size_t need, const char* what) {
    if (dim < need)
      throw domain_error(std::string(what) + ": dimension " + std::to_string(dim) + " is too small (need " +
                         std::to_string(need) + ")");
  }

  void check(std::span<const double> x) const {
    if (x.size() != dim_)
      throw domain_error("point has dimension " + std::to_string(x.size()) + ", partition expects " +
                         std::to_string(dim_));
  }

  PartitionKind kind_;
  std::size_t dim_;
  CellId cells_;
  std::size_t m_ = 0;
  Kind impl_;
};

struct CellMeasure {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

// Gaussian measure of one cell by plain Monte Carlo.
inline CellMeasure cell_measure(const Partition& p, CellId cell, std::uint64_t samples, std::uint64_t seed) {
  if (samples < 10000) throw domain_error("cell_measure: need at least 1e4 samples");
  if (cell >= p.cells()) throw domain_error("cell_measure: cell id out of range");
  const std::size_t active = p.active_dims();
  const auto hits = run_chunked(samples, seed, std::uint64_t{0},
                                [&](GaussianStream& g, std::uint64_t count, std::uint64_t& acc) {
                                  std::vector<double> x(active);
                                  p.visit([&](const auto& k) {
                                    for (std::uint64_t s = 0; s < count; ++s) {
                                      g.fill(x);
                                      if (k.classify(x.data()) == cell) ++acc;
                                    }
                                  });
                                });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  CellMeasure r;
  r.samples = samples;
  r.estimate = static_cast<double>(total) / static_cast<double>(samples);
  r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(samples));
  return r;
}

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& token, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw domain_error(context + ": cannot parse '" + token + "' as a number");
  }
  if (used != token.size() || !std::isfinite(v))
    throw domain_error(context + ": cannot parse '" + token + "' as a number");
  return v;
}

inline std::size_t parse_count(const std::string& token, const std::string& context) {
  const double v = parse_real(token, context);
  if (v < 0.0 || v != std::floor(v) || v > 1e15)
    throw domain_error(context + ": '" + token + "' is not a non-negative integer");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

// One site per row, comma separated; blank lines and lines starting with '#' are skipped.
inline std::vector<std::vector<double>> read_sites_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("voronoi: cannot open sites file '" + path + "'");
  std::vector<std::vector<double>> sites;
  std::string line;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(detail::parse_real(detail::trim(cell), "voronoi sites"));
    sites.push_back(std::move(row));
  }
  return sites;
}

// Grammar: halfspace[:t=<real>] | sectors3 | signed-axis:m=<int> | quadrants |
// simplex:k=<int> | voronoi:@<path>. dim = 0 picks the smallest valid dimension.
inline Partition parse_partition(const std::string& spec, std::size_t dim = 0) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string tail = colon == std::string::npos ? std::string{} : spec.substr(colon + 1);

  auto param = [&](const std::string& key) -> std::string {
    const std::string prefix = key + "=";
    if (tail.rfind(prefix, 0) != 0) throw domain_error("partition '" + spec + "': expected '" + prefix + "...'");
    return tail.substr(prefix.size());
  };
  auto no_params = [&] {
    if (!tail.empty()) throw domain_error("partition '" + spec + "': unexpected parameter '" + tail + "'");
  };

  if (head == "halfspace") {
    const double t = tail.empty() ? 0.0 : detail::parse_real(param("t"), "halfspace");
    return Partition::halfspace(dim == 0 ? 1 : dim, t);
  }
  if (head == "sectors3") {
    no_params();
    return Partition::sectors3(dim == 0 ? 2 : dim);
  }
  if (head == "signed-axis") {
    const std::size_t m = detail::parse_count(param("m"), "signed-axis");
    return Partition::signed_axis(m, dim == 0 ? std::max<std::size_t>(m, 1) : dim);
  }
  if (head == "quadrants") {
    no_params();
    return Partition::quadrants(dim == 0 ? 2 : dim);
  }
  if (head == "simplex") {
    const std::size_t k = detail::parse_count(param("k"), "simplex");
    if (k < 2) throw domain_error("simplex: k must be >= 2");
    return Partition::simplex_voronoi(k, dim == 0 ? k - 1 : dim);
  }
  if (head == "voronoi") {
    if (tail.size() < 2 || tail.front() != '@') throw domain_error("partition '" + spec + "': expected voronoi:@<file>");
    return Partition::site_voronoi(read_sites_csv(tail.substr(1)), dim);
  }
  throw domain_error("unknown partition kind '" + head + "'");
}

}  // namespace isopx
