#pragma once

// Run configuration and report serialization. CSV keeps a frozen column
// order; JSON is the superset and carries the per-epsilon detail.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "isopx/collar.hpp"

namespace isopx {

// Everything needed to reproduce a run. Thread counts and timings are
// deliberately absent so that reports are byte-identical across machines.
struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  std::vector<double> eps;
  std::string format = "csv";
  std::string out;  // empty: standard output
  std::vector<std::pair<std::string, std::string>> options;  // remaining flags, in emission order
};

inline constexpr const char* sweep_csv_columns = "kind,k,n,measure,ci95,ratio,lower_bound,method,seed,samples";

// 12 significant digits.
inline std::string fmt_num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline nlohmann::ordered_json json_num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::strtod(fmt_num(x).c_str(), nullptr);
}

inline std::string fmt_eps_list(const std::vector<double>& eps) {
  std::string s;
  for (std::size_t i = 0; i < eps.size(); ++i) s += (i ? "," : "") + fmt_num(eps[i]);
  return s;
}

// The command line that reproduces this run.
inline std::string command_line(const RunConfig& cfg) {
  std::string s = "isopx " + cfg.subcommand;
  for (const auto& [k, v] : cfg.options) s += " --" + k + " " + v;
  if (cfg.samples) {
    s += " --samples " + std::to_string(cfg.samples);
    s += " --eps " + fmt_eps_list(cfg.eps);
    s += " --seed " + std::to_string(cfg.seed);
  }
  s += " --format " + cfg.format;
  if (!cfg.out.empty()) s += " --out " + cfg.out;
  return s;
}

inline nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["subcommand"] = cfg.subcommand;
  for (const auto& [k, v] : cfg.options) j[k] = v;
  if (cfg.samples) {
    j["samples"] = cfg.samples;
    auto eps = nlohmann::ordered_json::array();
    for (double e : cfg.eps) eps.push_back(json_num(e));
    j["eps"] = eps;
    j["seed"] = cfg.seed;
  }
  j["format"] = cfg.format;
  j["out"] = cfg.out.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(cfg.out);
  j["command"] = command_line(cfg);
  return j;
}

inline void write_config_header(std::ostream& os, const RunConfig& cfg) {
  os << "# " << command_line(cfg) << '\n';
  os << "# subcommand=" << cfg.subcommand << '\n';
  for (const auto& [k, v] : cfg.options) os << "# " << k << '=' << v << '\n';
  if (cfg.samples) {
    os << "# samples=" << cfg.samples << '\n';
    os << "# eps=" << fmt_eps_list(cfg.eps) << '\n';
    os << "# seed=" << cfg.seed << '\n';
  }
  os << "# format=" << cfg.format << '\n';
  os << "# out=" << (cfg.out.empty() ? "-" : cfg.out) << '\n';
}

// A flat table: the common shape of every CLI output.
using Cell = std::variant<std::string, double, std::uint64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> notes;  // extra "# key=value" lines in CSV
};

inline std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return fmt_num(*d);
  if (const auto* u = std::get_if<std::uint64_t>(&c)) return std::to_string(*u);
  return std::get<bool>(c) ? "true" : "false";
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return json_num(*d);
  if (const auto* u = std::get_if<std::uint64_t>(&c)) return *u;
  return std::get<bool>(c);
}

inline void write_csv(std::ostream& os, const RunConfig& cfg, const Table& t) {
  write_config_header(os, cfg);
  for (const auto& [k, v] : t.notes) os << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
}

inline nlohmann::ordered_json table_json(const Table& t) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r;
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<Cell> sweep_cells(const SweepRow& r) {
  return {r.kind, r.k, static_cast<std::uint64_t>(r.n), r.measure, r.ci95, r.ratio, r.lower_bound,
          method_name(r.method), r.seed, r.samples};
}

inline Table sweep_table(const std::vector<SweepRow>& rows, const std::string& geometry = "gaussian") {
  Table t;
  std::string cols = sweep_csv_columns;
  for (std::size_t pos = 0;;) {
    const auto comma = cols.find(',', pos);
    t.columns.push_back(cols.substr(pos, comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (geometry != "gaussian") t.columns.push_back("geometry");
  for (const auto& r : rows) {
    auto cells = sweep_cells(r);
    if (geometry != "gaussian") cells.emplace_back(geometry);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline std::optional<double> relative_gap(const BoundaryMeasureReport& r) {
  if (!r.exact || *r.exact == 0.0 || r.method == Method::exact_flat) return std::nullopt;
  return (r.value - *r.exact) / *r.exact;
}

inline nlohmann::ordered_json to_json(const BoundaryMeasureReport& r) {
  nlohmann::ordered_json j;
  j["partition"] = r.partition;
  j["geometry"] = r.geometry;
  j["dim"] = r.dim;
  j["cells"] = r.cells;
  j["measure"] = json_num(r.value);
  j["ci95"] = json_num(r.ci95);
  j["slope"] = json_num(r.slope);
  j["method"] = method_name(r.method);
  j["low_precision"] = r.low_precision;
  j["exact"] = r.exact ? json_num(*r.exact) : nlohmann::ordered_json(nullptr);
  const auto gap = relative_gap(r);
  j["relative_gap"] = gap ? json_num(*gap) : nlohmann::ordered_json(nullptr);
  if (r.cells >= 2) {
    const double lb = isoperimetric_lower_bound(static_cast<long long>(r.cells));
    j["lower_bound"] = json_num(lb);
    j["ratio"] = json_num(r.value / std::sqrt(std::log(static_cast<double>(r.cells))));
  }
  auto per = nlohmann::ordered_json::array();
  for (const auto& e : r.per_eps) {
    nlohmann::ordered_json pe;
    pe["epsilon"] = json_num(e.epsilon);
    pe["collar_mass"] = json_num(e.collar_mass);
    pe["quotient"] = json_num(e.quotient);
    pe["std_error"] = json_num(e.std_error);
    pe["samples"] = e.samples;
    pe["seed"] = e.seed;
    per.push_back(std::move(pe));
  }
  j["per_eps"] = per;
  return j;
}

// Single-partition report as one sweep-schema row. The comparison with the
// exact value lives in the header notes.
inline Table measure_table(const Partition& p, const BoundaryMeasureReport& r, std::uint64_t seed,
                           std::uint64_t samples) {
  Table t = sweep_table({sweep_row(p, r, seed, samples)}, r.geometry);
  t.notes.emplace_back("exact", r.exact ? fmt_num(*r.exact) : "none");
  const auto gap = relative_gap(r);
  t.notes.emplace_back("relative_gap", gap ? fmt_num(*gap) : "none");
  t.notes.emplace_back("low_precision", r.low_precision ? "true" : "false");
  return t;
}

inline void write_json(std::ostream& os, const RunConfig& cfg, const nlohmann::ordered_json& body) {
  nlohmann::ordered_json j;
  j["config"] = to_json(cfg);
  for (const auto& [k, v] : body.items()) j[k] = v;
  os << j.dump(2) << '\n';
}

// Gnuplot script of ratio = measure / sqrt(ln k) against k, with the
// isoperimetric floor LB(k) / sqrt(ln k) for reference. With an empty
// csv_path the data are embedded as an inline datablock.
inline std::string gnuplot_script(const RunConfig& cfg, const std::vector<SweepRow>& rows, const std::string& csv_path,
                                  const std::string& image_path) {
  std::ostringstream os;
  os << "# " << command_line(cfg) << '\n';
  os << "set datafile separator ','\n";
  os << "set terminal pngcairo size 900,560\n";
  os << "set output '" << image_path << "'\n";
  os << "set logscale x 2\n";
  os << "set xlabel 'k (cells)'\n";
  os << "set ylabel 'boundary measure / sqrt(ln k)'\n";
  os << "set key top left\n";
  os << "set grid\n";
  std::string source;
  if (csv_path.empty()) {
    os << "$data << EOD\n";
    for (const auto& r : rows) {
      const auto cells = sweep_cells(r);
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cell_text(cells[i]);
      os << '\n';
    }
    os << "EOD\n";
    source = "$data";
  } else {
    // '#' lines are gnuplot comments; columnhead consumes the CSV header line.
    os << "set key autotitle columnhead\n";
    source = "'" + csv_path + "'";
  }
  os << "plot " << source << " using 2:6 with linespoints pt 7 title 'measure / sqrt(ln k)', \\\n";
  os << "     " << source << " using 2:($7/sqrt(log($2))) with lines dt 2 title 'LB(k) / sqrt(ln k)'\n";
  return os.str();
}

}  // namespace isopx
