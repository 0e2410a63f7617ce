#pragma once

#include <string>

#include <json.hpp>

#include "gwgp/errors.hpp"
#include "gwgp/kernels.hpp"

namespace gwgp {

inline KernelKind parse_kernel_kind(const std::string& name) {
  for (auto kind : {KernelKind::SquaredExponential, KernelKind::Matern52, KernelKind::Polynomial,
                    KernelKind::Wendland, KernelKind::ExpDecay, KernelKind::StrictlyPeriodic,
                    KernelKind::AngularInformed, KernelKind::RadialInformed, KernelKind::GenericPolar,
                    KernelKind::InformedK3, KernelKind::InformedK4, KernelKind::Sum, KernelKind::Product})
    if (to_string(kind) == name) return kind;
  throw ConfigError("unknown kernel kind '" + name + "'");
}

inline InputSpace parse_input_space(const std::string& name) {
  for (auto s : {InputSpace::Cartesian, InputSpace::Rho, InputSpace::Theta, InputSpace::Polar})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown input space '" + name + "'");
}

inline AngularDistance parse_angular_distance(const std::string& name) {
  for (auto d : {AngularDistance::Chordal, AngularDistance::Geodesic, AngularDistance::ModifiedGeodesic})
    if (to_string(d) == name) return d;
  throw ConfigError("unknown angular distance '" + name + "'");
}

inline nlohmann::json kernel_to_json(const KernelSpec& spec) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["hyper"] = nlohmann::json::object();
  for (const auto& [name, value] : spec.hyper.values()) j["hyper"][name] = value;
  j["children"] = nlohmann::json::array();
  for (const auto& c : spec.children) j["children"].push_back(kernel_to_json(c));
  if (!is_composite(spec.kind)) j["input"] = std::string(to_string(spec.input));
  if (spec.kind == KernelKind::Wendland) j["distance"] = std::string(to_string(spec.distance));
  return j;
}

/// Accepts {"kind", "hyper", "children"} plus optional "input" and
/// "distance"; omitted inputs fall back to the kind's natural dimension.
inline KernelSpec kernel_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("kernel spec must be an object with a string 'kind'");
  KernelSpec spec;
  spec.kind = parse_kernel_kind(j["kind"].get<std::string>());
  spec.input = j.contains("input") ? parse_input_space(j["input"].get<std::string>())
                                   : default_input(spec.kind);
  if (j.contains("distance")) spec.distance = parse_angular_distance(j["distance"].get<std::string>());
  if (j.contains("hyper")) {
    if (!j["hyper"].is_object()) throw ConfigError("kernel 'hyper' must be an object");
    for (const auto& [name, value] : j["hyper"].items()) {
      if (!value.is_number()) throw ConfigError("hyperparameter '" + name + "' must be numeric");
      spec.hyper.set(name, value.get<double>());
    }
  }
  if (j.contains("children")) {
    if (!j["children"].is_array()) throw ConfigError("kernel 'children' must be an array");
    for (const auto& c : j["children"]) spec.children.push_back(kernel_from_json(c));
  }
  return spec;
}

}  // namespace gwgp
