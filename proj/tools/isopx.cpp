// isopx: verification of the Gaussian partition integrals, Monte Carlo
// boundary measures, k-sweeps and bound tables.
//
// Exit codes: 0 success, 1 a verification check failed, 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isopx/integrals.hpp"
#include "isopx/report.hpp"
#include "isopx/sphere.hpp"

namespace {

using namespace isopx;

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_usage = 2;

struct Options {
  std::string partition = "halfspace";
  std::size_t dim = 0;
  std::string samples = "1e6";
  std::string eps = "0.02,0.01,0.005";
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
  std::string plot;
  double C = 10.0;
  double eps_slack = 1.0;
  double tol = 1e-8;
  long long k_max = 1024;
  std::string k = "2..16";
  std::string family = "signed-axis";
  std::string sizes;
  std::string method = "auto";
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) parts.push_back(detail::trim(item));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<double> parse_eps(const std::string& s) {
  std::vector<double> eps;
  for (const auto& tok : split(s, ',')) eps.push_back(detail::parse_real(tok, "--eps"));
  return eps;
}

std::uint64_t parse_samples(const std::string& s) {
  const auto n = detail::parse_count(s, "--samples");
  if (n < min_collar_samples) throw domain_error("--samples: '" + s + "' is below the minimum of 100000");
  return n;
}

// "7", "2,4,8" or "3..12".
std::vector<std::size_t> parse_int_list(const std::string& s, const std::string& flag) {
  std::vector<std::size_t> out;
  if (detail::trim(s).empty()) throw domain_error(flag + ": empty list");
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const auto lo = detail::parse_count(detail::trim(s.substr(0, dots)), flag);
    const auto hi = detail::parse_count(detail::trim(s.substr(dots + 2)), flag);
    if (hi < lo) throw domain_error(flag + ": empty range '" + s + "'");
    if (hi - lo > 10000000) throw domain_error(flag + ": range '" + s + "' is too long");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  for (const auto& tok : split(s, ',')) {
    if (tok.empty()) throw domain_error(flag + ": empty entry in '" + s + "'");
    out.push_back(detail::parse_count(tok, flag));
  }
  return out;
}

// Destination for the main report: a file or standard output.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw domain_error("--out: cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void emit(const Options& o, const RunConfig& cfg, const Table& table, nlohmann::ordered_json extra = {}) {
  Output out(o.out);
  if (o.format == "json") {
    nlohmann::ordered_json body;
    for (const auto& [k, v] : extra.items()) body[k] = v;
    body["rows"] = table_json(table);
    write_json(out.stream(), cfg, body);
  } else {
    write_csv(out.stream(), cfg, table);
  }
}

RunConfig base_config(const std::string& sub, const Options& o) {
  RunConfig cfg;
  cfg.subcommand = sub;
  cfg.seed = o.seed;
  cfg.format = o.format;
  cfg.out = o.out;
  return cfg;
}

// ---- verify ----

struct CheckRow {
  std::string check;
  long long k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<double> upper;
  double rel_diff = 0.0;  // signed; equalities: (lhs - rhs) / rhs, inequalities: relative slack
  bool holds = false;
  double badness = 0.0;   // larger is worse, used to pick the worst row
};

struct CheckSummary {
  std::string check;
  std::size_t rows = 0;
  std::size_t failing = 0;
  std::optional<CheckRow> worst;
  std::vector<CheckRow> failures;

  void add(CheckRow r) {
    ++rows;
    if (!worst || r.badness > worst->badness) worst = r;
    if (!r.holds) {
      ++failing;
      failures.push_back(std::move(r));
    }
  }
};

// Quadrature tolerance for a verification at tol: two orders tighter, within
// what Gauss-Kronrod can certify in double precision.
double quadrature_tol(double tol) { return std::clamp(tol * 1e-2, 1e-13, 1e-3); }

CheckRow equality_row(const std::string& name, long long k, double lhs, double rhs, double tol) {
  CheckRow r{name, k, lhs, rhs, std::nullopt, (lhs - rhs) / rhs, false, 0.0};
  r.badness = std::abs(r.rel_diff);
  r.holds = std::isfinite(lhs) && r.badness <= tol;
  return r;
}

CheckRow quadrature_failure(const std::string& name, long long k, const convergence_error& e) {
  CheckRow r{name, k, e.partial().value, 0.0, std::nullopt, std::nan(""), false, INFINITY};
  return r;
}

int cmd_verify(const Options& o) {
  if (!(o.tol >= 1e-12 && o.tol < 1.0)) throw domain_error("--tol: must lie in [1e-12, 1)");
  if (o.k_max < 2) throw domain_error("--k-max: '" + std::to_string(o.k_max) + "' is below 2");
  if (o.k_max > 1000000) throw domain_error("--k-max: '" + std::to_string(o.k_max) + "' exceeds 1000000");
  const BoundCheckConfig bound_cfg{.C = o.C, .eps_slack = o.eps_slack, .k_min = 2, .k_max = o.k_max};
  bound_cfg.validate();
  const double qtol = quadrature_tol(o.tol);

  std::vector<CheckSummary> checks(4);
  checks[0].check = "identity";
  checks[1].check = "ibp";
  checks[2].check = "lemma1";
  checks[3].check = "prop1";

  for (long long k = 1; k <= o.k_max; ++k) {
    try {
      const double q = window_mass_quadrature(k, 0.0, infinity, qtol).value;
      checks[0].add(equality_row("identity", k, q, 1.0 / (2.0 * static_cast<double>(k)), o.tol));
    } catch (const convergence_error& e) {
      checks[0].add(quadrature_failure("identity", k, e));
    }
  }
  for (long long k = 2; k <= o.k_max; ++k) {
    try {
      const double paper = piece_measure_paper_quadrature(k, qtol).value;
      const double ibp = piece_measure_ibp_quadrature(k, qtol).value;
      checks[1].add(equality_row("ibp", k, paper, ibp, o.tol));
    } catch (const convergence_error& e) {
      checks[1].add(quadrature_failure("ibp", k, e));
    }
  }
  for (const auto& row : lemma1_check(bound_cfg)) {
    CheckRow r{"lemma1", row.k, row.lhs, row.rhs, std::nullopt, (row.lhs - row.rhs) / row.rhs, row.holds, 0.0};
    r.badness = -r.rel_diff;
    checks[2].add(r);
  }
  for (long long k = 100; k <= o.k_max; ++k) {
    const double piece = piece_measure_paper(k);
    const auto b = prop1_bounds(k, bound_cfg);
    CheckRow r{"prop1", k, piece, b.lower, b.upper, 0.0, b.lower < piece && piece < b.upper, 0.0};
    r.rel_diff = std::min(piece - b.lower, b.upper - piece) / piece;
    r.badness = -r.rel_diff;
    checks[3].add(r);
  }

  auto cfg = base_config("verify", o);
  cfg.options = {{"tol", fmt_num(o.tol)}, {"k-max", std::to_string(o.k_max)}, {"C", fmt_num(o.C)},
                 {"eps-slack", fmt_num(o.eps_slack)}};

  Table t;
  t.columns = {"check", "role", "k", "lhs", "rhs", "upper", "rel_diff", "holds"};
  bool all_hold = true;
  auto summary = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    all_hold = all_hold && c.failing == 0;
    t.notes.emplace_back(c.check, std::to_string(c.rows) + " rows, " + std::to_string(c.failing) + " failing");
    summary.push_back({{"check", c.check}, {"rows", c.rows}, {"failing", c.failing}, {"holds", c.failing == 0}});
    auto push = [&](const CheckRow& r, const char* role) {
      t.rows.push_back({r.check, std::string(role), static_cast<std::uint64_t>(r.k), r.lhs, r.rhs,
                        r.upper ? Cell{*r.upper} : Cell{std::string{}}, r.rel_diff, r.holds});
    };
    if (c.worst) push(*c.worst, "worst");
    for (const auto& r : c.failures) push(r, "failing");
  }
  t.notes.emplace_back("status", all_hold ? "pass" : "fail");
  emit(o, cfg, t, {{"status", all_hold ? "pass" : "fail"}, {"summary", summary}});
  return all_hold ? exit_ok : exit_check_failed;
}

// ---- measure / sphere ----

int cmd_measure(const Options& o, bool sphere) {
  const auto samples = parse_samples(o.samples);
  const EpsSchedule sched{parse_eps(o.eps)};
  const Partition p = parse_partition(o.partition, o.dim);

  BoundaryMeasureReport r;
  if (sphere) {
    r = sphere_boundary_measure(SphericalPartition(p), sched, samples, o.seed);
  } else {
    r = boundary_measure(p, sched, samples, o.seed);
  }

  auto cfg = base_config(sphere ? "sphere" : "measure", o);
  cfg.samples = samples;
  cfg.eps = sched.epsilons;
  cfg.options = {{"partition", o.partition}, {"dim", std::to_string(p.dim())}};

  auto table = measure_table(p, r, o.seed, samples);
  if (o.format == "json") {
    Output out(o.out);
    write_json(out.stream(), cfg, {{"report", to_json(r)}, {"rows", table_json(table)}});
  } else {
    emit(o, cfg, table);
  }
  return exit_ok;
}

// ---- sweep ----

SweepMethod parse_method(const std::string& s) {
  if (s == "auto") return SweepMethod::automatic;
  if (s == "exact") return SweepMethod::exact;
  if (s == "mc") return SweepMethod::monte_carlo;
  throw domain_error("--method: unknown method '" + s + "' (auto, exact, mc)");
}

int cmd_sweep(const Options& o) {
  const auto family = parse_family(o.family);
  const auto sizes = parse_int_list(o.sizes, "--sizes");
  const auto method = parse_method(o.method);
  const auto samples = parse_samples(o.samples);
  const EpsSchedule sched{parse_eps(o.eps)};
  const auto rows = sweep(family, sizes, sched, samples, o.seed, method);

  auto cfg = base_config("sweep", o);
  cfg.samples = samples;
  cfg.eps = sched.epsilons;
  cfg.options = {{"family", o.family}, {"sizes", o.sizes}, {"method", o.method}};
  if (!o.plot.empty()) cfg.options.emplace_back("plot", o.plot);

  emit(o, cfg, sweep_table(rows));
  if (!o.plot.empty()) {
    std::ofstream gp(o.plot);
    if (!gp) throw domain_error("--plot: cannot open '" + o.plot + "' for writing");
    const std::string csv = o.format == "csv" ? o.out : std::string{};
    auto image = o.plot;
    if (const auto dot = image.find_last_of('.'); dot != std::string::npos && image.find('/', dot) == std::string::npos)
      image.erase(dot);
    gp << gnuplot_script(cfg, rows, csv, image + ".png");
  }
  return exit_ok;
}

// ---- bounds ----

int cmd_bounds(const Options& o) {
  const auto ks = parse_int_list(o.k, "--k");
  for (auto k : ks)
    if (k < 2) throw domain_error("--k: '" + std::to_string(k) + "' is below 2");
  const BoundCheckConfig bound_cfg{.C = o.C, .eps_slack = o.eps_slack};
  bound_cfg.validate();

  Table t;
  t.columns = {"k", "t", "lower_bound", "tail_lower", "tail_upper", "tail_holds", "prop1_lower", "prop1_upper",
               "piece_paper", "piece_geometric", "prop1_holds"};
  for (auto k : ks) {
    const auto kk = static_cast<long long>(k);
    const auto tb = tail_bracket(kk);
    const auto pb = prop1_bounds(kk, bound_cfg);
    const double piece = piece_measure_paper(kk);
    t.rows.push_back({static_cast<std::uint64_t>(k), tb.t, isoperimetric_lower_bound(kk), tb.lower, tb.upper,
                      tb.holds, pb.lower, pb.upper, piece, piece_measure_geometric(kk),
                      pb.lower < piece && piece < pb.upper});
  }
  auto cfg = base_config("bounds", o);
  cfg.options = {{"k", o.k}, {"C", fmt_num(o.C)}, {"eps-slack", fmt_num(o.eps_slack)}};
  emit(o, cfg, t);
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Gaussian partition boundary measures: integral checks, Monte Carlo estimates, sweeps and bounds"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", o.out, "Write the report to PATH instead of standard output");
  };
  auto add_sampling = [&](CLI::App* sub) {
    sub->add_option("--samples", o.samples, "Gaussian samples per run, e.g. 2e6")->capture_default_str();
    sub->add_option("--eps", o.eps, "Comma-separated decreasing collar widths")->capture_default_str();
    sub->add_option("--seed", o.seed, "Seed of the sample stream")->capture_default_str();
  };
  auto add_bound_cfg = [&](CLI::App* sub) {
    sub->add_option("--C", o.C, "Window constant C")->capture_default_str();
    sub->add_option("--eps-slack", o.eps_slack, "Slack epsilon of the window and bracket bounds")->capture_default_str();
  };

  auto* verify = app.add_subcommand("verify", "Check the integral identities and brackets for k up to --k-max");
  verify->add_option("--tol", o.tol, "Relative tolerance of the identity checks")->capture_default_str();
  verify->add_option("--k-max", o.k_max, "Largest k checked")->capture_default_str();
  add_bound_cfg(verify);
  add_output(verify);

  auto* measure = app.add_subcommand("measure", "Monte Carlo Gaussian boundary measure of one partition");
  measure->add_option("--partition", o.partition, "Partition spec, e.g. signed-axis:m=8")->capture_default_str();
  measure->add_option("--dim", o.dim, "Ambient dimension (0: the kind's default)");
  add_sampling(measure);
  add_output(measure);

  auto* sphere = app.add_subcommand("sphere", "Boundary measure of a cone partition restricted to the sphere");
  sphere->add_option("--partition", o.partition, "Cone partition spec")->capture_default_str();
  sphere->add_option("--dim", o.dim, "Ambient dimension n, the sphere is S^{n-1}");
  add_sampling(sphere);
  add_output(sphere);

  auto* sweep_cmd = app.add_subcommand("sweep", "Boundary measure over a family of partitions");
  sweep_cmd->add_option("--family", o.family, "signed-axis, quadrants or simplex")->capture_default_str();
  sweep_cmd->add_option("--sizes", o.sizes, "Family sizes: list 2,4,8 or range 2..8")->required();
  sweep_cmd->add_option("--method", o.method, "auto, exact or mc")->capture_default_str();
  sweep_cmd->add_option("--plot", o.plot, "Write a gnuplot script of the ratio against k");
  add_sampling(sweep_cmd);
  add_output(sweep_cmd);

  auto* bounds = app.add_subcommand("bounds", "Table of lower bounds and brackets, no sampling");
  bounds->add_option("--k", o.k, "k values: 7, 2,4,8 or 2..16")->capture_default_str();
  add_bound_cfg(bounds);
  add_output(bounds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? exit_ok : exit_usage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? exit_ok : exit_usage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (verify->parsed()) return cmd_verify(o);
    if (measure->parsed()) return cmd_measure(o, false);
    if (sphere->parsed()) return cmd_measure(o, true);
    if (sweep_cmd->parsed()) return cmd_sweep(o);
    if (bounds->parsed()) return cmd_bounds(o);
  } catch (const std::domain_error& e) {
    std::cerr << "isopx: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "isopx: " << e.what() << '\n';
    return exit_check_failed;
  }
  return exit_usage;
}
