#pragma once

#include <limits>
#include <span>
#include <vector>

#include "gwgp/gp.hpp"
#include "gwgp/qpso.hpp"
#include "gwgp/strategy.hpp"

namespace gwgp {

struct HyperFit {
  GPModel model;
  OptimResult result;
  ParamMap params;  // fixed and searched values at the optimum
};

/// Minimizes the NLML over the search space with QPSO and refits the GP at
/// the best point. Failures during the search score +inf; a failure at the
/// final refit propagates.
inline HyperFit fit_hyperparameters(const ModelTemplate& tmpl, std::span<const Location> xs,
                                    std::span<const double> y, const SearchSpace& space,
                                    const SwarmConfig& cfg, const GPOptions& gp_opts = {}) {
  tmpl.check_coverage(space);
  space.validate();
  cfg.validate();
  if (xs.size() != y.size()) throw DimensionMismatch("inputs and targets differ in length");
  if (xs.empty()) throw TooFewPoints("hyperparameter fit needs training points");

  const std::vector<Location> inputs(xs.begin(), xs.end());
  const std::vector<double> targets(y.begin(), y.end());

  // Input-domain problems do not depend on the hyperparameters, so surface
  // them up front rather than scoring every particle +inf.
  {
    std::vector<double> mid(space.size());
    for (std::size_t d = 0; d < space.size(); ++d)
      mid[d] = space.to_natural(d, 0.5 * (space.internal_lower(d) + space.internal_upper(d)));
    const ModelInstance probe = tmpl.build(space.to_map(mid));
    const Kernel k(probe.kernel);
    detail::check_rho_min(k, probe.mean, inputs, gp_opts.rho_min);
    (void)transform_targets(targets, probe.mean, inputs);
  }

  const Objective objective = [&](std::span<const double> theta) {
    const ModelInstance inst = tmpl.build(space.to_map(theta));
    return GPModel::fit(inst.kernel, inst.mean, inst.noise_var, inputs, targets, gp_opts).nlml();
  };

  OptimResult result = qpso_minimize(objective, space, cfg);
  ParamMap params = tmpl.fixed();
  for (const auto& [k, v] : space.to_map(result.best)) params[k] = v;
  const ModelInstance best = tmpl.build(params);
  GPModel model = GPModel::fit(best.kernel, best.mean, best.noise_var, inputs, targets, gp_opts);
  return {std::move(model), std::move(result), std::move(params)};
}

inline HyperFit fit_hyperparameters(ModelStrategy strategy, std::span<const Location> xs, std::span<const double> y,
                                    const SearchSpace& space, const SwarmConfig& cfg,
                                    const GPOptions& gp_opts = {}) {
  return fit_hyperparameters(strategy_template(strategy), xs, y, space, cfg, gp_opts);
}

}  // namespace gwgp
