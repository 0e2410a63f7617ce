#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gwgp/blr.hpp"
#include "gwgp/gp.hpp"
#include "gwgp/kernels.hpp"
#include "gwgp/qpso.hpp"

namespace gwgp {

/// Modelling strategies A-F.
///   A  SE on Cartesian inputs, zero mean, amplitude targets
///   B  generic polar kernel, zero mean, amplitude targets
///   C  generic polar kernel, attenuation mean, log targets
///   D  Wendland (geodesic) on theta, attenuation mean, log targets
///   E  informed kernel k3, zero mean, amplitude targets
///   F  informed kernel k4, zero mean, amplitude targets
enum class ModelStrategy { A, B, C, D, E, F };

inline constexpr std::array<ModelStrategy, 6> kAllStrategies = {
    ModelStrategy::A, ModelStrategy::B, ModelStrategy::C, ModelStrategy::D, ModelStrategy::E, ModelStrategy::F};

inline std::string to_string(ModelStrategy s) { return std::string(1, char('A' + static_cast<int>(s))); }

inline ModelStrategy parse_strategy(const std::string& tag) {
  if (tag.size() == 1 && tag[0] >= 'A' && tag[0] <= 'F') return static_cast<ModelStrategy>(tag[0] - 'A');
  throw ConfigError("unknown strategy '" + tag + "' (expected A-F)");
}

inline bool uses_polar(ModelStrategy s) { return s != ModelStrategy::A; }
inline bool uses_attenuation_mean(ModelStrategy s) { return s == ModelStrategy::C || s == ModelStrategy::D; }

/// A concrete model: kernel, mean and noise variance.
struct ModelInstance {
  KernelSpec kernel;
  MeanFunctionSpec mean;
  double noise_var = 0.0;
};

/// Maps a flat parameter vector (by name) to a model. Fixed values are
/// merged first and overridden by the searched ones.
class ModelTemplate {
 public:
  using Builder = std::function<ModelInstance(const ParamMap&)>;

  ModelTemplate(std::string name, Builder builder, std::vector<std::string> required, ParamMap fixed = {})
      : name_(std::move(name)), builder_(std::move(builder)), required_(std::move(required)),
        fixed_(std::move(fixed)) {}

  ModelInstance build(const ParamMap& params) const {
    ParamMap merged = fixed_;
    for (const auto& [k, v] : params) merged[k] = v;
    return builder_(merged);
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& required() const noexcept { return required_; }
  const ParamMap& fixed() const noexcept { return fixed_; }

  void fix(const std::string& name, double value) { fixed_[name] = value; }

  /// Throws MissingParameter for the first required name covered by neither
  /// the search space nor the fixed values.
  void check_coverage(const SearchSpace& space) const {
    for (const auto& r : required_)
      if (!space.contains(r) && !fixed_.count(r)) throw MissingParameter(r);
  }

 private:
  std::string name_;
  Builder builder_;
  std::vector<std::string> required_;
  ParamMap fixed_;
};

namespace detail {

inline double pick(const ParamMap& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) throw MissingParameter(name);
  return it->second;
}

inline HyperParams pick_all(const ParamMap& p, std::initializer_list<const char*> names) {
  HyperParams h;
  for (const char* n : names) h.set(n, pick(p, n));
  return h;
}

inline void copy_optional(const ParamMap& p, HyperParams& h, std::initializer_list<const char*> names) {
  for (const char* n : names)
    if (auto it = p.find(n); it != p.end()) h.set(n, it->second);
}

inline AttenuationMean attenuation_from(const ParamMap& p) {
  AttenuationMean m;
  m.basis = BasisModel::phi3();
  m.weights = Eigen::Vector2d(pick(p, "w1"), pick(p, "w2"));
  return m;
}

// Replaces every hyperparameter in the tree whose name appears in params.
inline void override_hyper(KernelSpec& spec, const ParamMap& params) {
  for (const auto& [name, value] : params)
    if (spec.hyper.contains(name)) spec.hyper.set(name, value);
  for (auto& c : spec.children) override_hyper(c, params);
}

}  // namespace detail

/// Names each strategy needs in the search space or the fixed values.
inline std::vector<std::string> strategy_parameters(ModelStrategy s) {
  switch (s) {
    case ModelStrategy::A: return {"l", "sigma_f2", "sigma_n2"};
    case ModelStrategy::B: return {"sigma_f2", "sigma_f_r2", "sigma_f_a2", "l", "tau", "sigma_n2"};
    case ModelStrategy::C:
      return {"sigma_f2", "sigma_f_r2", "sigma_f_a2", "l", "tau", "w1", "w2", "sigma_n2"};
    case ModelStrategy::D: return {"sigma_f2", "tau", "w1", "w2", "sigma_n2"};
    case ModelStrategy::E:
      return {"l1",         "alpha1",     "alpha2",   "sigma_f_sqe2", "sigma_f_sym2", "l2",
              "sigma_f_r2", "sigma_f_a2", "sigma_n2", "n_sym",        "p"};
    case ModelStrategy::F: return {"tau", "sigma_f_a2", "sigma_f_r2", "l2", "sigma_n2", "n_sym", "p"};
  }
  return {};
}

/// Fixed structural values per strategy. The symmetric angular terms of E
/// (cos(4 d)) and F (Wendland of arccos(cos(4 dtheta))) both repeat every
/// pi/2, matching a field with two orthogonal fibre axes.
inline ParamMap strategy_fixed(ModelStrategy s) {
  switch (s) {
    case ModelStrategy::E: return {{"n_sym", 4.0}, {"p", -0.5}};
    case ModelStrategy::F: return {{"n_sym", 2.0}, {"p", -0.5}};
    default: return {};
  }
}

inline KernelSpec strategy_kernel(ModelStrategy s, const ParamMap& p) {
  using detail::pick_all;
  switch (s) {
    case ModelStrategy::A:
      return make_kernel(KernelKind::SquaredExponential, pick_all(p, {"l", "sigma_f2"}), InputSpace::Cartesian);
    case ModelStrategy::B:
    case ModelStrategy::C:
      return make_kernel(KernelKind::GenericPolar, pick_all(p, {"sigma_f2", "sigma_f_r2", "sigma_f_a2", "l", "tau"}));
    case ModelStrategy::D:
      return make_wendland(AngularDistance::Geodesic, pick_all(p, {"tau", "sigma_f2"}));
    case ModelStrategy::E: {
      HyperParams h = pick_all(p, {"l1", "alpha1", "alpha2", "sigma_f_sqe2", "sigma_f_sym2", "l2", "sigma_f_r2",
                                   "sigma_f_a2", "n_sym", "p"});
      detail::copy_optional(p, h, {"sigma_f2"});
      return make_kernel(KernelKind::InformedK3, std::move(h));
    }
    case ModelStrategy::F: {
      HyperParams h = pick_all(p, {"tau", "n_sym", "sigma_f_a2", "sigma_f_r2", "l2", "p"});
      detail::copy_optional(p, h, {"sigma_f2"});
      return make_kernel(KernelKind::InformedK4, std::move(h));
    }
  }
  throw ConfigError("unknown strategy");
}

inline MeanFunctionSpec strategy_mean(ModelStrategy s, const ParamMap& p) {
  if (uses_attenuation_mean(s)) return detail::attenuation_from(p);
  return ZeroMean{};
}

/// Template for one of the built-in strategies; `fixed` adds to or
/// overrides the strategy's structural constants.
inline ModelTemplate strategy_template(ModelStrategy s, const ParamMap& fixed = {}) {
  ParamMap f = strategy_fixed(s);
  for (const auto& [k, v] : fixed) f[k] = v;
  return ModelTemplate(
      to_string(s),
      [s](const ParamMap& p) {
        return ModelInstance{strategy_kernel(s, p), strategy_mean(s, p), detail::pick(p, "sigma_n2")};
      },
      strategy_parameters(s), std::move(f));
}

/// Template around an explicit kernel: any searched name equal to a
/// hyperparameter in the tree replaces it, "sigma_n2" sets the noise and
/// "w1"/"w2" set attenuation-mean weights.
inline ModelTemplate kernel_template(KernelSpec base, MeanFunctionSpec mean = ZeroMean{}, ParamMap fixed = {}) {
  return ModelTemplate(
      "custom",
      [base = std::move(base), mean = std::move(mean)](const ParamMap& p) {
        ModelInstance inst{base, mean, detail::pick(p, "sigma_n2")};
        detail::override_hyper(inst.kernel, p);
        if (auto* att = std::get_if<AttenuationMean>(&inst.mean)) {
          Eigen::Index c = 0;
          if (att->basis.intercept()) {
            if (auto it = p.find("w1"); it != p.end()) att->weights(c) = it->second;
            ++c;
          }
          if (att->basis.decay())
            if (auto it = p.find("w2"); it != p.end()) att->weights(c) = it->second;
        }
        return inst;
      },
      {"sigma_n2"}, std::move(fixed));
}

namespace detail {

inline double population_variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / double(v.size());
}

}  // namespace detail

/// Data-adaptive default search box. Variances scale with the spread of
/// the (possibly log-transformed) targets and length scales with the extent
/// of the inputs; attenuation weights are centred on a BLR fit.
inline SearchSpace default_search_space(ModelStrategy s, std::span<const Location> xs, std::span<const double> y) {
  if (xs.size() != y.size()) throw DimensionMismatch("inputs and targets differ in length");
  if (xs.size() < 2) throw TooFewPoints("need at least 2 points to size a search space");

  double extent = 0.0;
  if (s == ModelStrategy::A) {
    double xmin = xs[0].cart.x, xmax = xmin, ymin = xs[0].cart.y, ymax = ymin;
    for (const auto& p : xs) {
      xmin = std::min(xmin, p.cart.x);
      xmax = std::max(xmax, p.cart.x);
      ymin = std::min(ymin, p.cart.y);
      ymax = std::max(ymax, p.cart.y);
    }
    extent = std::hypot(xmax - xmin, ymax - ymin);
  } else {
    for (const auto& p : xs) extent = std::max(extent, p.rho());
  }
  if (!(extent > 0.0)) throw DegenerateData("inputs have zero spatial extent");

  std::vector<double> target(y.begin(), y.end());
  double w1 = 0.0, w2 = 0.0;
  if (uses_attenuation_mean(s)) {
    std::vector<double> rho(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) rho[i] = xs[i].rho();
    const AttenuationFit af = fit_attenuation(rho, y, BasisModel::phi3());
    w1 = af.posterior.w(0);
    w2 = af.posterior.w(1);
    const AttenuationMean m{BasisModel::phi3(), af.posterior.w};
    const Eigen::VectorXd r = transform_targets(y, m, xs);
    target.assign(r.data(), r.data() + r.size());
  }
  double v = detail::population_variance(target);
  if (!(v > 0.0)) throw DegenerateData("targets have zero variance");

  SearchSpace sp;
  const auto log = ParamScale::Log;
  const auto lin = ParamScale::Linear;
  auto signal = [&](const char* name) { sp.add({name, v * 1e-2, v * 1e2, log}); };
  auto noise = [&] { sp.add({"sigma_n2", v * 1e-6, v, log}); };
  auto weights = [&] {
    sp.add({"w1", w1 - 3.0, w1 + 3.0, lin});
    sp.add({"w2", w2 - 2.0 / extent, w2 + 2.0 / extent, lin});
  };

  switch (s) {
    case ModelStrategy::A:
      sp.add({"l", extent * 1e-2, extent * 2.0, log});
      signal("sigma_f2");
      noise();
      break;
    case ModelStrategy::B:
    case ModelStrategy::C:
      signal("sigma_f2");
      sp.add({"sigma_f_r2", 1e-3, 1e3, log});
      sp.add({"sigma_f_a2", 1e-3, 1e3, log});
      sp.add({"l", extent * 1e-2, extent * 2.0, log});
      sp.add({"tau", 4.0, 100.0, log});
      if (s == ModelStrategy::C) weights();
      noise();
      break;
    case ModelStrategy::D:
      signal("sigma_f2");
      sp.add({"tau", 4.0, 100.0, log});
      weights();
      noise();
      break;
    case ModelStrategy::E:
      // Geodesic SE on the circle is only positive definite for short length
      // scales, so l1 stays below 0.7 rad.
      sp.add({"l1", 0.05, 0.7, log});
      sp.add({"alpha1", 1e-3, 10.0, log});
      sp.add({"alpha2", 1e-3, 10.0, log});
      sp.add({"sigma_f_sqe2", 1e-4, 10.0, log});
      sp.add({"sigma_f_sym2", 1e-4, 10.0, log});
      sp.add({"l2", 1e-6, 20.0 / extent, log});
      sp.add({"sigma_f_r2", 1e-6, 1e4, log});
      sp.add({"sigma_f_a2", 1e-6, 1e2, log});
      noise();
      break;
    case ModelStrategy::F:
      sp.add({"tau", 4.0, 100.0, log});
      sp.add({"sigma_f_a2", 1e-6, 1e2, log});
      sp.add({"sigma_f_r2", 1e-6, 1e4, log});
      sp.add({"l2", 1e-6, 20.0 / extent, log});
      noise();
      break;
  }
  return sp;
}

}  // namespace gwgp
