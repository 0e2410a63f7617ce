#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "gwgp/errors.hpp"

namespace gwgp {

// Every hyperparameter name a kernel may carry.
inline constexpr std::array<std::string_view, 14> kHyperNames = {
    "l",            "l1",           "l2",     "sigma_f2", "sigma_f_r2", "sigma_f_a2", "sigma_f_sqe2",
    "sigma_f_sym2", "alpha1",       "alpha2", "tau",      "sigma0_2",   "p",          "n_sym"};

inline bool is_known_hyper(std::string_view name) {
  return std::find(kHyperNames.begin(), kHyperNames.end(), name) != kHyperNames.end();
}

/// Checks a single named value against the constraints of its name.
inline void validate_hyper(std::string_view name, double value) {
  const std::string n(name);
  if (!is_known_hyper(name)) throw InvalidHyper("unknown hyperparameter '" + n + "'");
  if (!std::isfinite(value)) throw InvalidHyper(n + " must be finite");
  if (name == "l" || name == "l1" || name == "l2") {
    if (value <= 0.0) throw InvalidHyper(n + " must be > 0");
  } else if (name == "tau") {
    if (value < 4.0) throw InvalidHyper("tau must be >= 4");
  } else if (name == "n_sym") {
    if (value < 1.0 || value != std::floor(value)) throw InvalidHyper("n_sym must be an integer >= 1");
  } else if (name != "p") {
    // variances, offsets and periodic weights
    if (value < 0.0) throw InvalidHyper(n + " must be >= 0");
  }
}

/// Named hyperparameter values of one kernel node.
class HyperParams {
 public:
  HyperParams() = default;
  HyperParams(std::initializer_list<std::pair<const std::string, double>> init) : values_(init) {}

  bool contains(const std::string& name) const { return values_.count(name) != 0; }

  double at(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw MissingParameter(name);
    return it->second;
  }

  double get_or(const std::string& name, double fallback) const {
    auto it = values_.find(name);
    return it == values_.end() ? fallback : it->second;
  }

  void set(const std::string& name, double value) { values_[name] = value; }

  const std::map<std::string, double>& values() const noexcept { return values_; }

  void validate() const {
    for (const auto& [name, value] : values_) validate_hyper(name, value);
  }

  friend bool operator==(const HyperParams&, const HyperParams&) = default;

 private:
  std::map<std::string, double> values_;
};

}  // namespace gwgp
