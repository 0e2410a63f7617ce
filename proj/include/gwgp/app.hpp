#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwgp/errors.hpp"
#include "gwgp/gp.hpp"
#include "gwgp/io.hpp"
#include "gwgp/kernel_json.hpp"
#include "gwgp/metrics.hpp"
#include "gwgp/optimize.hpp"
#include "gwgp/strategy.hpp"
#include "gwgp/synth.hpp"

// Batch commands behind the gwgp executable. Each command is a function of
// (config, seed, input files) and writes plain CSV/JSON into an output
// directory.
namespace gwgp::app {

namespace fs = std::filesystem;
using nlohmann::json;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent seed for one consumer of randomness.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return splitmix64(splitmix64(root) ^ splitmix64(stream * 0x632be59bd9b4e019ull));
}

enum SeedStream : std::uint64_t { kSubsample = 1, kSplit = 2, kSwarm = 3, kSynth = 4, kPrior = 5 };

inline std::uint64_t config_seed(const json& cfg, std::optional<std::uint64_t> override_seed) {
  if (override_seed) return *override_seed;
  return io::get_or<std::uint64_t>(cfg, "seed", 0);
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline std::string require_string(const json& cfg, const char* key) {
  if (!cfg.contains(key) || !cfg[key].is_string()) throw ConfigError(std::string("config needs string '") + key + "'");
  return cfg[key].get<std::string>();
}

inline GPOptions gp_options_from_json(const json& cfg) {
  GPOptions o;
  o.rho_min = io::get_or(cfg, "rho_min", o.rho_min);
  o.max_jitter = io::get_or(cfg, "max_jitter", o.max_jitter);
  if (!(o.rho_min >= 0.0)) throw ConfigError("rho_min must be >= 0");
  if (!(o.max_jitter >= 0.0)) throw ConfigError("max_jitter must be >= 0");
  return o;
}

// ---------------------------------------------------------------------------
// Training data
// ---------------------------------------------------------------------------

struct PreparedData {
  std::vector<FeatureRow> rows;  // after optional subsampling
  SplitIndices split;
  std::vector<FeatureRow> train_rows;
  std::vector<Location> train_x, test_x;
  std::vector<double> train_y, test_y;
};

inline PreparedData prepare_data(const json& cfg, const fs::path& base, std::uint64_t seed) {
  PreparedData d;
  d.rows = io::read_dataset(resolve(base, require_string(cfg, "dataset")));
  const auto max_points = io::get_or<std::int64_t>(cfg, "max_points", 0);
  if (max_points < 0) throw ConfigError("max_points must be >= 0");
  if (max_points > 0 && static_cast<std::size_t>(max_points) < d.rows.size()) {
    std::vector<std::size_t> idx(d.rows.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(seed, kSubsample));
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(static_cast<std::size_t>(max_points));
    std::sort(idx.begin(), idx.end());
    std::vector<FeatureRow> kept;
    for (std::size_t i : idx) kept.push_back(d.rows[i]);
    d.rows = std::move(kept);
  }

  SplitSpec spec;
  if (cfg.contains("split")) {
    io::require_object(cfg["split"], "split");
    spec.train_fraction = io::get_or(cfg["split"], "train_fraction", spec.train_fraction);
  }
  spec.seed = derive_seed(seed, kSplit);
  d.split = split(d.rows.size(), spec);

  const auto xs = io::locations(d.rows);
  const auto ys = io::values(d.rows);
  for (std::size_t i : d.split.train) {
    d.train_rows.push_back(d.rows[i]);
    d.train_x.push_back(xs[i]);
    d.train_y.push_back(ys[i]);
  }
  for (std::size_t i : d.split.test) {
    d.test_x.push_back(xs[i]);
    d.test_y.push_back(ys[i]);
  }
  return d;
}

struct ModelSetup {
  std::string tag;
  ModelTemplate tmpl;
  SearchSpace space;
};

/// Strategy (with its default search box) or explicit kernel. `search` and
/// `fixed` come from the config; fixed names leave the search space.
inline ModelSetup model_setup(const std::string& strategy_tag, const json* kernel, const json& mean,
                              const json& search, const json& fixed_json, std::span<const Location> xs,
                              std::span<const double> y) {
  const ParamMap fixed = io::param_map_from_json(fixed_json, "fixed parameters");
  if (kernel) {
    ModelSetup s{"custom", kernel_template(kernel_from_json(*kernel), io::mean_from_json(mean), fixed), {}};
    s.space = io::search_space_from_json(search);
    return s;
  }
  const ModelStrategy strategy = parse_strategy(strategy_tag);
  ModelSetup s{to_string(strategy), strategy_template(strategy, fixed), default_search_space(strategy, xs, y)};
  for (const auto& [name, v] : fixed) s.space.remove(name);
  s.space = io::search_space_from_json(search, std::move(s.space));
  return s;
}

inline const json& section(const json& cfg, const char* key) {
  static const json null_json;
  return cfg.contains(key) ? cfg[key] : null_json;
}

inline json params_json(const ParamMap& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

inline std::string report_header() { return std::string("strategy,") + kReportCsvHeader; }

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

inline void cmd_synth(const json& cfg, const fs::path& /*base*/, const fs::path& out, std::uint64_t seed) {
  io::require_object(cfg, "config");
  const FieldConfig field = io::field_config_from_json(cfg.contains("field") ? cfg["field"] : json::object());
  const FeatureDataset ds = generate_field(field, derive_seed(seed, kSynth));
  io::write_text(out / "dataset.csv", io::dataset_csv(ds.rows));
  json meta;
  meta["config"] = io::to_json(field);
  meta["seed"] = seed;
  meta["rows"] = ds.size();
  meta["notes"] = {"zeta_aniso is an arbitrary choice; the anisotropy magnitude is not calibrated to any measurement",
                   "noise: h * exp(noise_sigma * e) + noise_floor with e ~ N(0, 1)"};
  io::write_json(out / "dataset.json", meta);
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

inline void cmd_fit(const json& cfg, const fs::path& base, const fs::path& out, std::uint64_t seed) {
  io::require_object(cfg, "config");
  const PreparedData data = prepare_data(cfg, base, seed);
  const json* kernel = cfg.contains("kernel") ? &cfg["kernel"] : nullptr;
  const std::string tag = kernel ? std::string() : require_string(cfg, "strategy");
  ModelSetup setup = model_setup(tag, kernel, section(cfg, "mean"), section(cfg, "search_space"),
                                 section(cfg, "fixed"), data.train_x, data.train_y);
  SwarmConfig swarm = io::swarm_config_from_json(section(cfg, "swarm"));
  swarm.seed = derive_seed(seed, kSwarm);
  const GPOptions gp_opts = gp_options_from_json(cfg);

  HyperFit fit = fit_hyperparameters(setup.tmpl, data.train_x, data.train_y, setup.space, swarm, gp_opts);
  const EvalReport report = evaluate(fit.model, data.test_x, data.test_y);

  const std::string training_csv = io::dataset_csv(data.train_rows);
  io::write_text(out / "training.csv", training_csv);

  json model;
  model["strategy"] = setup.tag;
  model["kernel"] = kernel_to_json(fit.model.kernel_spec());
  model["mean"] = io::to_json(fit.model.mean());
  model["noise_var"] = fit.model.noise_var();
  model["jitter"] = fit.model.jitter();
  model["rho_min"] = gp_opts.rho_min;
  model["max_jitter"] = gp_opts.max_jitter;
  const CartesianPoint src = io::implied_source(data.train_rows.front());
  model["source"] = {src.x, src.y};
  model["params"] = params_json(fit.params);
  model["nlml"] = fit.model.nlml();
  model["seed"] = seed;
  model["training"] = {{"path", "training.csv"},
                       {"count", data.train_rows.size()},
                       {"fnv1a64", io::hex64(io::fnv1a64(training_csv))}};
  io::write_json(out / "model.json", model);

  io::write_text(out / "trace.csv", io::trace_csv(fit.result));

  json rep = to_json(report);
  rep["strategy"] = setup.tag;
  rep["evaluations"] = fit.result.evaluations;
  rep["search_space"] = io::to_json(setup.space);
  io::write_json(out / "report.json", rep);
  io::write_text(out / "report.csv", report_header() + "\n" + setup.tag + "," + io::report_csv_row(report) + "\n");
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

/// Rebuilds a fitted model from its JSON record and training sidecar.
inline GPModel load_model(const fs::path& model_path, CartesianPoint* source = nullptr) {
  const json m = io::read_json(model_path);
  io::require_object(m, "model file");
  if (!m.contains("training") || !m["training"].is_object()) throw ConfigError("model file lacks a training record");
  const auto& tr = m["training"];
  const fs::path sidecar = resolve(model_path.parent_path(), require_string(tr, "path"));
  const std::string text = io::read_text(sidecar);
  if (io::hex64(io::fnv1a64(text)) != io::get_or<std::string>(tr, "fnv1a64", ""))
    throw ConfigError("training sidecar '" + sidecar.string() + "' does not match the model digest");
  const auto rows = io::parse_dataset(io::parse_csv(text, sidecar.string()));
  if (rows.size() != io::get_or<std::size_t>(tr, "count", 0))
    throw ConfigError("training sidecar row count does not match the model record");
  if (!m.contains("kernel")) throw ConfigError("model file lacks a kernel");
  GPOptions opts;
  opts.rho_min = io::get_or(m, "rho_min", opts.rho_min);
  opts.max_jitter = io::get_or(m, "max_jitter", opts.max_jitter);
  if (source) *source = io::point_from_json(m.at("source"), "model source");
  return GPModel::fit(kernel_from_json(m["kernel"]), io::mean_from_json(section(m, "mean")),
                      io::get_or(m, "noise_var", 0.0), io::locations(rows), io::values(rows), opts);
}

struct GridSpec {
  int nx = 50, ny = 50;
  double x0 = 0.0, x1 = 300.0, y0 = 0.0, y1 = 300.0;
};

inline GridSpec grid_from_json(const json& j, CartesianPoint source) {
  io::require_object(j, "grid");
  GridSpec g;
  g.x1 = 2.0 * source.x;
  g.y1 = 2.0 * source.y;
  g.nx = io::get_or(j, "nx", g.nx);
  g.ny = io::get_or(j, "ny", g.ny);
  if (j.contains("x_range")) {
    const auto r = io::point_from_json(j["x_range"], "grid.x_range");
    g.x0 = r.x;
    g.x1 = r.y;
  }
  if (j.contains("y_range")) {
    const auto r = io::point_from_json(j["y_range"], "grid.y_range");
    g.y0 = r.x;
    g.y1 = r.y;
  }
  if (g.nx < 1 || g.ny < 1) throw ConfigError("grid needs nx, ny >= 1");
  if (!(g.x1 > g.x0) || !(g.y1 > g.y0)) throw ConfigError("grid ranges must be increasing");
  return g;
}

/// Cell centres of the grid, optionally dropping points inside rho_min.
inline std::vector<Location> grid_locations(const GridSpec& g, CartesianPoint source, double exclude_below) {
  std::vector<Location> out;
  for (const auto& p : scan_grid(g.x1 - g.x0, g.y1 - g.y0, g.nx, g.ny)) {
    const Location loc = Location::from_cartesian({p.x + g.x0, p.y + g.y0}, source);
    if (loc.rho() < exclude_below) continue;
    out.push_back(loc);
  }
  return out;
}

inline std::vector<Location> point_locations(const fs::path& csv, CartesianPoint source) {
  const std::string text = io::read_text(csv);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};
  const io::CsvTable t = io::parse_csv(text, csv.string());
  const std::size_t cx = t.column("x_mm"), cy = t.column("y_mm");
  std::vector<Location> out;
  for (const auto& r : t.rows) out.push_back(Location::from_cartesian({r[cx], r[cy]}, source));
  return out;
}

/// Query locations from either {"grid": {...}} or {"points": "file.csv"}.
/// Grid points inside rho_min are dropped when `needs_rho_min`; explicit
/// points are passed through for the model to validate.
inline std::vector<Location> query_locations(const json& cfg, const fs::path& base, CartesianPoint source,
                                             bool needs_rho_min, double rho_min) {
  if (cfg.contains("points")) return point_locations(resolve(base, require_string(cfg, "points")), source);
  if (cfg.contains("grid")) return grid_locations(grid_from_json(cfg["grid"], source), source,
                                                  needs_rho_min ? rho_min : -1.0);
  throw ConfigError("config needs 'grid' or 'points'");
}

inline bool needs_rho_min(const Kernel& k, const MeanFunctionSpec& mean) {
  return k.singular_at_origin() || log_space(mean);
}

inline void cmd_predict(const json& cfg, const fs::path& base, const fs::path& out, std::uint64_t /*seed*/) {
  io::require_object(cfg, "config");
  CartesianPoint source;
  const GPModel model = load_model(resolve(base, require_string(cfg, "model")), &source);
  const auto xs = query_locations(cfg, base, source, needs_rho_min(model.kernel(), model.mean()),
                                  model.options().rho_min);
  const bool log10 = io::get_or(cfg, "log10", false);
  PredictOptions po;
  po.noisy = true;
  po.amplitude = true;
  po.full_covariance = false;
  const PredictiveDistribution pd = predict(model, xs, po);
  std::string s = "x_mm,y_mm,mean,variance\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double mu = pd.mean(static_cast<Eigen::Index>(i));
    double var = pd.variance(static_cast<Eigen::Index>(i));
    if (log10) {
      // first-order propagation of the variance through log10
      const double d = 1.0 / (mu * std::log(10.0));
      var *= d * d;
      mu = std::log10(mu);
    }
    s += io::fmt(xs[i].cart.x) + "," + io::fmt(xs[i].cart.y) + "," + io::fmt(mu) + "," + io::fmt(var) + "\n";
  }
  io::write_text(out / "predictions.csv", s);
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

inline std::string sanitize_cell(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

inline void cmd_compare(const json& cfg, const fs::path& base, const fs::path& out, std::uint64_t seed) {
  io::require_object(cfg, "config");
  if (!cfg.contains("strategies") || !cfg["strategies"].is_array())
    throw ConfigError("config needs a 'strategies' array");
  std::vector<ModelStrategy> strategies;
  for (const auto& t : cfg["strategies"]) {
    if (!t.is_string()) throw ConfigError("strategy tags must be strings");
    strategies.push_back(parse_strategy(t.get<std::string>()));
  }
  if (strategies.size() < 2) throw ConfigError("compare needs at least 2 strategies");

  const PreparedData data = prepare_data(cfg, base, seed);
  SwarmConfig swarm = io::swarm_config_from_json(section(cfg, "swarm"));
  swarm.seed = derive_seed(seed, kSwarm);
  const GPOptions gp_opts = gp_options_from_json(cfg);
  const json& spaces = section(cfg, "search_spaces");
  const json& fixed = section(cfg, "fixed");

  std::string csv = "strategy,lml,pll_i,pll_c,nmse,error\n";
  json rows = json::array();
  std::size_t ok = 0;
  for (ModelStrategy s : strategies) {
    const std::string tag = to_string(s);
    json row{{"strategy", tag}};
    try {
      ModelSetup setup = model_setup(tag, nullptr, json(), spaces.is_object() ? section(spaces, tag.c_str()) : json(),
                                     fixed.is_object() ? section(fixed, tag.c_str()) : json(), data.train_x,
                                     data.train_y);
      HyperFit fit = fit_hyperparameters(setup.tmpl, data.train_x, data.train_y, setup.space, swarm, gp_opts);
      const EvalReport r = evaluate(fit.model, data.test_x, data.test_y);
      csv += tag + "," + io::fmt(r.lml) + "," + io::fmt(r.pll_i) + "," + io::fmt(r.pll_c) + "," + io::fmt(r.nmse) + ",\n";
      row["report"] = to_json(r);
      row["params"] = params_json(fit.params);
      ++ok;
    } catch (const Error& e) {
      csv += tag + ",,,,," + sanitize_cell(e.what()) + "\n";
      row["error"] = e.what();
    }
    rows.push_back(std::move(row));
  }
  io::write_text(out / "compare.csv", csv);
  io::write_json(out / "compare.json", {{"seed", seed}, {"rows", rows}});
  io::write_json(out / "split.json", {{"train", data.split.train}, {"test", data.split.test}});
  if (ok == 0) throw NumericalError("every strategy failed");
}

// ---------------------------------------------------------------------------
// sample-prior
// ---------------------------------------------------------------------------

inline void cmd_sample_prior(const json& cfg, const fs::path& base, const fs::path& out, std::uint64_t seed) {
  io::require_object(cfg, "config");
  KernelSpec kernel;
  MeanFunctionSpec mean = ZeroMean{};
  if (cfg.contains("kernel")) {
    kernel = kernel_from_json(cfg["kernel"]);
    mean = io::mean_from_json(section(cfg, "mean"));
  } else {
    const ModelStrategy s = parse_strategy(require_string(cfg, "strategy"));
    ParamMap p = strategy_fixed(s);
    for (const auto& [k, v] : io::param_map_from_json(section(cfg, "params"), "params")) p[k] = v;
    kernel = strategy_kernel(s, p);
    mean = strategy_mean(s, p);
  }
  const Kernel k(kernel);
  const int count = io::get_or(cfg, "count", 4);
  const GPOptions opts = gp_options_from_json(cfg);
  const CartesianPoint source =
      cfg.contains("source") ? io::point_from_json(cfg["source"], "source") : CartesianPoint{150.0, 150.0};
  const auto xs = query_locations(cfg, base, source, needs_rho_min(k, mean), opts.rho_min);
  const Eigen::MatrixXd draws = sample_prior(kernel, mean, xs, count, derive_seed(seed, kPrior), opts);

  std::string s = "x_mm,y_mm,rho_mm,theta_rad";
  for (int c = 0; c < count; ++c) s += ",draw_" + std::to_string(c);
  s += "\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s += io::fmt(xs[i].cart.x) + "," + io::fmt(xs[i].cart.y) + "," + io::fmt(xs[i].rho()) + "," +
         io::fmt(xs[i].theta());
    for (int c = 0; c < count; ++c) s += "," + io::fmt(draws(static_cast<Eigen::Index>(i), c));
    s += "\n";
  }
  io::write_text(out / "samples.csv", s);
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one verb on a config file, mapping failures to exit codes:
/// 2 for configuration/validation errors, 3 for numerical failures.
inline int run_command(const std::string& verb, const fs::path& config_path, const fs::path& out_dir,
                       std::optional<std::uint64_t> seed_override, std::ostream& err) {
  try {
    const json cfg = io::read_json(config_path);
    const fs::path base = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
    const std::uint64_t seed = config_seed(cfg, seed_override);
    fs::create_directories(out_dir);
    if (verb == "synth") cmd_synth(cfg, base, out_dir, seed);
    else if (verb == "fit") cmd_fit(cfg, base, out_dir, seed);
    else if (verb == "predict") cmd_predict(cfg, base, out_dir, seed);
    else if (verb == "compare") cmd_compare(cfg, base, out_dir, seed);
    else if (verb == "sample-prior") cmd_sample_prior(cfg, base, out_dir, seed);
    else throw ConfigError("unknown command '" + verb + "'");
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace gwgp::app
