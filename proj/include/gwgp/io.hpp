#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwgp/blr.hpp"
#include "gwgp/errors.hpp"
#include "gwgp/gp.hpp"
#include "gwgp/metrics.hpp"
#include "gwgp/qpso.hpp"
#include "gwgp/synth.hpp"

namespace gwgp::io {

namespace fs = std::filesystem;
using nlohmann::json;

/// Round-trip decimal form, stable across runs.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + p.string() + "'");
}

inline json read_json(const fs::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in '" + p.string() + "': " + e.what());
  }
}

inline void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

/// 64-bit FNV-1a, used as a training-data digest.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ConfigError("CSV is missing column '" + name + "'");
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    out.push_back(cell.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Numeric CSV with a header row. Blank lines are skipped.
inline CsvTable parse_csv(const std::string& text, const std::string& origin = "CSV") {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw ConfigError(origin + " line " + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != c.size())
        throw ConfigError(origin + " line " + std::to_string(lineno) + ": '" + c + "' is not a number");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw ConfigError(origin + " has no header row");
  return t;
}

inline CsvTable read_csv(const fs::path& p) { return parse_csv(read_text(p), p.string()); }

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

inline constexpr const char* kDatasetHeader = "x_mm,y_mm,rho_mm,theta_rad,h_m";

inline std::string dataset_csv(const std::vector<FeatureRow>& rows) {
  std::string s = std::string(kDatasetHeader) + "\n";
  for (const auto& r : rows)
    s += fmt(r.x) + "," + fmt(r.y) + "," + fmt(r.rho) + "," + fmt(r.theta) + "," + fmt(r.h) + "\n";
  return s;
}

inline std::vector<FeatureRow> parse_dataset(const CsvTable& t) {
  const std::size_t cx = t.column("x_mm"), cy = t.column("y_mm"), cr = t.column("rho_mm"),
                    ct = t.column("theta_rad"), ch = t.column("h_m");
  std::vector<FeatureRow> rows;
  rows.reserve(t.rows.size());
  for (const auto& r : t.rows) rows.push_back({r[cx], r[cy], r[cr], r[ct], r[ch]});
  return rows;
}

inline std::vector<FeatureRow> read_dataset(const fs::path& p) { return parse_dataset(read_csv(p)); }

inline std::vector<Location> locations(const std::vector<FeatureRow>& rows) {
  std::vector<Location> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(Location{{r.x, r.y}, PolarPoint(r.rho, r.theta)});
  return out;
}

inline std::vector<double> values(const std::vector<FeatureRow>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.h);
  return out;
}

/// Source position implied by a row (x - rho cos theta, y - rho sin theta).
inline CartesianPoint implied_source(const FeatureRow& r) {
  return {r.x - r.rho * std::cos(r.theta), r.y - r.rho * std::sin(r.theta)};
}

// ---------------------------------------------------------------------------
// Config sections
// ---------------------------------------------------------------------------

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

inline void require_object(const json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
}

inline CartesianPoint point_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(what + " must be a two-element numeric array");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const FieldConfig& c) {
  return {{"half_width", c.half_width},   {"source", {c.source.x, c.source.y}},
          {"a0", c.a0},                   {"zeta0", c.zeta0},
          {"zeta_aniso", c.zeta_aniso},   {"n_axes", c.n_axes},
          {"noise_sigma", c.noise_sigma}, {"noise_floor", c.noise_floor},
          {"rho_min", c.rho_min},         {"grid", {c.grid_nx, c.grid_ny}}};
}

inline FieldConfig field_config_from_json(const json& j) {
  require_object(j, "field config");
  FieldConfig c;
  c.half_width = get_or(j, "half_width", c.half_width);
  if (j.contains("source")) c.source = point_from_json(j["source"], "field.source");
  else c.source = {c.half_width, c.half_width};
  c.a0 = get_or(j, "a0", c.a0);
  c.zeta0 = get_or(j, "zeta0", c.zeta0);
  c.zeta_aniso = get_or(j, "zeta_aniso", c.zeta_aniso);
  c.n_axes = get_or(j, "n_axes", c.n_axes);
  c.noise_sigma = get_or(j, "noise_sigma", c.noise_sigma);
  c.noise_floor = get_or(j, "noise_floor", c.noise_floor);
  c.rho_min = get_or(j, "rho_min", c.rho_min);
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (g.is_number_integer()) {
      c.grid_nx = c.grid_ny = g.get<int>();
    } else if (g.is_array() && g.size() == 2 && g[0].is_number_integer() && g[1].is_number_integer()) {
      c.grid_nx = g[0].get<int>();
      c.grid_ny = g[1].get<int>();
    } else {
      throw ConfigError("field.grid must be an integer or [nx, ny]");
    }
  }
  c.validate();
  return c;
}

inline SwarmConfig swarm_config_from_json(const json& j, SwarmConfig c = {}) {
  if (j.is_null()) return c;
  require_object(j, "swarm config");
  c.particles = get_or(j, "particles", c.particles);
  c.iterations = get_or(j, "iterations", c.iterations);
  c.beta_start = get_or(j, "beta_start", c.beta_start);
  c.beta_end = get_or(j, "beta_end", c.beta_end);
  c.tolerance = get_or(j, "tolerance", c.tolerance);
  c.patience = get_or(j, "patience", c.patience);
  c.threads = get_or(j, "threads", c.threads);
  c.validate();
  return c;
}

inline ParamScale parse_scale(const std::string& s) {
  if (s == "log") return ParamScale::Log;
  if (s == "linear") return ParamScale::Linear;
  throw ConfigError("unknown parameter scale '" + s + "'");
}

/// {"name": {"lower": a, "upper": b, "scale": "log" | "linear"}, ...} merged
/// onto `base` (entries replace same-named ranges).
inline SearchSpace search_space_from_json(const json& j, SearchSpace base = {}) {
  if (j.is_null()) return base;
  require_object(j, "search space");
  for (const auto& [name, r] : j.items()) {
    require_object(r, "search range '" + name + "'");
    if (!r.contains("lower") || !r.contains("upper"))
      throw ConfigError("search range '" + name + "' needs lower and upper");
    ParamRange p{name, r["lower"].get<double>(), r["upper"].get<double>(),
                 parse_scale(get_or<std::string>(r, "scale", "log"))};
    base.add(std::move(p));
  }
  return base;
}

inline json to_json(const SearchSpace& s) {
  json j = json::object();
  for (const auto& p : s.params())
    j[p.name] = {{"lower", p.lower}, {"upper", p.upper}, {"scale", p.scale == ParamScale::Log ? "log" : "linear"}};
  return j;
}

inline ParamMap param_map_from_json(const json& j, const std::string& what) {
  ParamMap m;
  if (j.is_null()) return m;
  require_object(j, what);
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw ConfigError(what + " entry '" + k + "' must be numeric");
    m[k] = v.get<double>();
  }
  return m;
}

inline json to_json(const MeanFunctionSpec& m) {
  if (const auto* att = std::get_if<AttenuationMean>(&m)) {
    json w = json::array();
    for (Eigen::Index i = 0; i < att->weights.size(); ++i) w.push_back(att->weights(i));
    return {{"type", "attenuation"}, {"basis", att->basis.name()}, {"weights", w}};
  }
  return {{"type", "zero"}};
}

inline MeanFunctionSpec mean_from_json(const json& j) {
  if (j.is_null()) return ZeroMean{};
  require_object(j, "mean spec");
  const auto type = get_or<std::string>(j, "type", "zero");
  if (type == "zero") return ZeroMean{};
  if (type != "attenuation") throw ConfigError("unknown mean type '" + type + "'");
  AttenuationMean m;
  m.basis = parse_basis(get_or<std::string>(j, "basis", "phi3"));
  m.weights = Eigen::VectorXd::Zero(m.basis.columns());
  if (j.contains("weights")) {
    const auto& w = j["weights"];
    if (!w.is_array() || static_cast<Eigen::Index>(w.size()) != m.basis.columns())
      throw ConfigError("mean weights must be an array matching the basis");
    for (std::size_t i = 0; i < w.size(); ++i) m.weights(static_cast<Eigen::Index>(i)) = w[i].get<double>();
  }
  return m;
}

inline std::string trace_csv(const OptimResult& r) {
  std::string s = "iteration,best_nlml,evaluations\n";
  for (std::size_t i = 0; i < r.trace.size(); ++i)
    s += std::to_string(i) + "," + fmt(r.trace[i]) + "," + std::to_string(r.evaluations_trace[i]) + "\n";
  return s;
}

inline std::string report_csv_row(const EvalReport& r) {
  return fmt(r.lml) + "," + fmt(r.pll_i) + "," + fmt(r.pll_c) + "," + fmt(r.nmse) + "," +
         std::to_string(r.n_train) + "," + std::to_string(r.n_test);
}

inline json to_json(const AttenuationFit& f) {
  const auto& post = f.posterior;
  json v = json::array();
  for (Eigen::Index i = 0; i < post.V.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < post.V.cols(); ++j) row.push_back(post.V(i, j));
    v.push_back(std::move(row));
  }
  json j;
  j["basis"] = f.basis.name();
  j["flags"] = {f.basis.flags[0], f.basis.flags[1], f.basis.flags[2]};
  j["w"] = std::vector<double>(post.w.data(), post.w.data() + post.w.size());
  j["V"] = std::move(v);
  j["a"] = post.a;
  j["b"] = post.b;
  j["n"] = post.n;
  j["beta1"] = f.betas.beta1 ? json(*f.betas.beta1) : json();
  j["beta2"] = f.betas.beta2 ? json(*f.betas.beta2) : json();
  return j;
}

}  // namespace gwgp::io
