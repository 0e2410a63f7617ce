#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gwgp/errors.hpp"
#include "gwgp/geometry.hpp"
#include "gwgp/hyper_params.hpp"

namespace gwgp {

inline constexpr double kDefaultJitter = 1e-8;

enum class KernelKind {
  SquaredExponential,
  Matern52,
  Polynomial,
  Wendland,
  ExpDecay,
  StrictlyPeriodic,
  AngularInformed,
  RadialInformed,
  GenericPolar,
  InformedK3,
  InformedK4,
  Sum,
  Product,
};

/// Which part of a Location a kernel consumes.
enum class InputSpace { Cartesian, Rho, Theta, Polar };

enum class AngularDistance { Chordal, Geodesic, ModifiedGeodesic };

// ---------------------------------------------------------------------------
// Scalar catalog
// ---------------------------------------------------------------------------

/// sigma_f^2 exp(-r^2 / (2 l^2))
inline double squared_exponential(double r, double length, double variance) {
  return variance * std::exp(-0.5 * r * r / (length * length));
}

/// Matern nu = 5/2 on an absolute difference r.
inline double matern52(double r, double length, double variance) {
  const double s = std::sqrt(5.0) * std::abs(r) / length;
  return variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

/// sigma_f^2 (x . x' + sigma_0^2)^p. With p = -1/2 and no offset this is the
/// geometric-spreading law.
inline double polynomial(double dot, double power, double variance, double offset = 0.0) {
  const double base = dot + offset;
  if (power < 0.0 && base <= 0.0)
    throw DomainError("polynomial kernel with negative power needs x.x' + sigma0^2 > 0");
  if (base < 0.0 && power != std::floor(power))
    throw DomainError("polynomial kernel with fractional power needs x.x' + sigma0^2 >= 0");
  return variance * std::pow(base, power);
}

/// C2-Wendland function with the positive-part truncation; support c.
inline double wendland(double t, double support, double tau, double variance) {
  if (tau < 4.0) throw InvalidHyper("Wendland kernel requires tau >= 4");
  const double u = t / support;
  if (u >= 1.0) return 0.0;
  return variance * (1.0 + tau * u) * std::pow(1.0 - u, tau);
}

/// Wendland kernel on angles. Chordal distance uses support 2; the geodesic
/// variants use support pi.
inline double wendland_angular(double theta, double theta2, AngularDistance kind, double tau,
                               double variance, int n_sym = 1) {
  switch (kind) {
    case AngularDistance::Chordal:
      return wendland(chordal_distance(theta, theta2), 2.0, tau, variance);
    case AngularDistance::Geodesic:
      return wendland(geodesic_distance(theta, theta2), kPi, tau, variance);
    case AngularDistance::ModifiedGeodesic:
      return wendland(modified_geodesic_distance(theta, theta2, n_sym), kPi, tau, variance);
  }
  return 0.0;
}

/// sigma_f^2 exp(-rho l) exp(-rho' l); rank one by construction.
inline double exp_decay(double rho, double rho2, double rate, double variance) {
  return variance * std::exp(-(rho + rho2) * rate);
}

/// sigma_f^2 (alpha1 + alpha2 cos(2 n d2)).
inline double strictly_periodic(double theta, double theta2, double alpha1, double alpha2, int n,
                                double variance) {
  const double d = geodesic_distance(theta, theta2);
  return variance * (alpha1 + alpha2 * std::cos(2.0 * n * d));
}

struct AngularInformedParams {
  double length = 1.0;        // l1
  double sqe_variance = 1.0;  // sigma_f_sqe2
  double sym_variance = 1.0;  // sigma_f_sym2
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  int n_sym = 1;
};

/// Additive combination of a geodesic squared exponential and a periodic
/// term: sqe exp(-d2^2 / l1^2) + sym (alpha1 + alpha2 cos(n d2)).
///
/// Note the exponent has no factor 1/2 and the cosine has no factor 2,
/// unlike the standalone squared-exponential and strictly-periodic kernels.
/// The Gaussian of a geodesic distance is only numerically positive
/// semi-definite on the circle for l1 up to about 0.7.
inline double angular_informed(double theta, double theta2, const AngularInformedParams& p) {
  const double d = geodesic_distance(theta, theta2);
  return p.sqe_variance * std::exp(-d * d / (p.length * p.length)) +
         p.sym_variance * (p.alpha1 + p.alpha2 * std::cos(p.n_sym * d));
}

/// sigma_f_r^2 (rho rho')^p exp(-rho l2) exp(-rho' l2). Diverges at the
/// source, so rho <= 0 is rejected.
inline double radial_informed(double rho, double rho2, double variance, double rate,
                              double power = -0.5) {
  if (rho <= 0.0 || rho2 <= 0.0) throw DomainError("radial informed kernel requires rho > 0");
  return variance * std::pow(rho * rho2, power) * std::exp(-(rho + rho2) * rate);
}

struct GenericPolarParams {
  double variance = 1.0;          // sigma_f2
  double radial_variance = 1.0;   // sigma_f_r2
  double angular_variance = 1.0;  // sigma_f_a2
  double length = 1.0;            // l (Matern)
  double tau = 4.0;
};

/// ANOVA polar kernel k2: Matern 5/2 on |rho - rho'| times geodesic Wendland.
inline double generic_polar(const PolarPoint& a, const PolarPoint& b, const GenericPolarParams& p) {
  const double radial = matern52(a.rho() - b.rho(), p.length, 1.0);
  const double angular = wendland(geodesic_distance(a.theta(), b.theta()), kPi, p.tau, 1.0);
  return p.variance * (1.0 + p.radial_variance * radial) * (1.0 + p.angular_variance * angular);
}

struct InformedK3Params {
  AngularInformedParams angular;
  double angular_variance = 1.0;  // sigma_f_a2
  double radial_variance = 1.0;   // sigma_f_r2
  double rate = 1.0;              // l2
  double power = -0.5;            // p
  double variance = 1.0;          // optional outer sigma_f2
};

/// k3: (1 + sigma_f_a^2 k_ang)(1 + sigma_f_r^2 k_rad). sigma_f_r^2 also scales
/// k_rad itself; both occurrences are kept.
inline double informed_k3(const PolarPoint& a, const PolarPoint& b, const InformedK3Params& p) {
  const double ang = angular_informed(a.theta(), b.theta(), p.angular);
  const double rad = radial_informed(a.rho(), b.rho(), p.radial_variance, p.rate, p.power);
  return p.variance * (1.0 + p.angular_variance * ang) * (1.0 + p.radial_variance * rad);
}

struct InformedK4Params {
  double tau = 4.0;
  int n_sym = 1;
  double angular_variance = 1.0;  // sigma_f_a2
  double radial_variance = 1.0;   // sigma_f_r2
  double rate = 1.0;              // l2
  double power = -0.5;
  double variance = 1.0;
};

/// k4: k3 with the angular factor replaced by a Wendland function of the
/// modified geodesic distance.
inline double informed_k4(const PolarPoint& a, const PolarPoint& b, const InformedK4Params& p) {
  const double ang =
      wendland_angular(a.theta(), b.theta(), AngularDistance::ModifiedGeodesic, p.tau, 1.0, p.n_sym);
  const double rad = radial_informed(a.rho(), b.rho(), p.radial_variance, p.rate, p.power);
  return p.variance * (1.0 + p.angular_variance * ang) * (1.0 + p.radial_variance * rad);
}

// ---------------------------------------------------------------------------
// Declarative kernel description
// ---------------------------------------------------------------------------

inline std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::SquaredExponential: return "SquaredExponential";
    case KernelKind::Matern52: return "Matern52";
    case KernelKind::Polynomial: return "Polynomial";
    case KernelKind::Wendland: return "WendlandC2";
    case KernelKind::ExpDecay: return "ExpDecay";
    case KernelKind::StrictlyPeriodic: return "StrictlyPeriodic";
    case KernelKind::AngularInformed: return "AngularInformed";
    case KernelKind::RadialInformed: return "RadialInformed";
    case KernelKind::GenericPolar: return "GenericPolar";
    case KernelKind::InformedK3: return "InformedK3";
    case KernelKind::InformedK4: return "InformedK4";
    case KernelKind::Sum: return "Sum";
    case KernelKind::Product: return "Product";
  }
  return "?";
}

inline std::string_view to_string(InputSpace s) {
  switch (s) {
    case InputSpace::Cartesian: return "cartesian";
    case InputSpace::Rho: return "rho";
    case InputSpace::Theta: return "theta";
    case InputSpace::Polar: return "polar";
  }
  return "?";
}

inline std::string_view to_string(AngularDistance d) {
  switch (d) {
    case AngularDistance::Chordal: return "chordal";
    case AngularDistance::Geodesic: return "geodesic";
    case AngularDistance::ModifiedGeodesic: return "modified_geodesic";
  }
  return "?";
}

inline InputSpace default_input(KernelKind kind) {
  switch (kind) {
    case KernelKind::SquaredExponential: return InputSpace::Cartesian;
    case KernelKind::Matern52:
    case KernelKind::Polynomial:
    case KernelKind::ExpDecay:
    case KernelKind::RadialInformed: return InputSpace::Rho;
    case KernelKind::Wendland:
    case KernelKind::StrictlyPeriodic:
    case KernelKind::AngularInformed: return InputSpace::Theta;
    default: return InputSpace::Polar;
  }
}

inline bool is_composite(KernelKind kind) {
  return kind == KernelKind::Sum || kind == KernelKind::Product;
}

/// A node of a kernel expression tree. Leaves carry hyperparameters and the
/// input dimensions they consume; Sum and Product carry children.
struct KernelSpec {
  KernelKind kind = KernelKind::SquaredExponential;
  InputSpace input = InputSpace::Cartesian;
  AngularDistance distance = AngularDistance::Geodesic;
  HyperParams hyper;
  std::vector<KernelSpec> children;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline KernelSpec make_kernel(KernelKind kind, HyperParams hyper) {
  KernelSpec s;
  s.kind = kind;
  s.input = default_input(kind);
  s.hyper = std::move(hyper);
  return s;
}

inline KernelSpec make_kernel(KernelKind kind, HyperParams hyper, InputSpace input) {
  KernelSpec s = make_kernel(kind, std::move(hyper));
  s.input = input;
  return s;
}

inline KernelSpec make_wendland(AngularDistance distance, HyperParams hyper) {
  KernelSpec s = make_kernel(KernelKind::Wendland, std::move(hyper));
  s.distance = distance;
  return s;
}

inline KernelSpec make_sum(std::vector<KernelSpec> children) {
  KernelSpec s;
  s.kind = KernelKind::Sum;
  s.input = InputSpace::Polar;
  s.children = std::move(children);
  return s;
}

inline KernelSpec make_product(std::vector<KernelSpec> children) {
  KernelSpec s = make_sum(std::move(children));
  s.kind = KernelKind::Product;
  return s;
}

/// Required and optional hyperparameter names of a leaf kind.
struct HyperSignature {
  std::vector<std::string> required;
  std::vector<std::pair<std::string, double>> optional;
};

inline HyperSignature hyper_signature(KernelKind kind) {
  switch (kind) {
    case KernelKind::SquaredExponential:
    case KernelKind::Matern52:
    case KernelKind::ExpDecay: return {{"l", "sigma_f2"}, {}};
    case KernelKind::Polynomial: return {{"p", "sigma_f2"}, {{"sigma0_2", 0.0}}};
    case KernelKind::Wendland: return {{"tau", "sigma_f2"}, {{"n_sym", 1.0}}};
    case KernelKind::StrictlyPeriodic: return {{"alpha1", "alpha2", "n_sym", "sigma_f2"}, {}};
    case KernelKind::AngularInformed:
      return {{"l1", "sigma_f_sqe2", "sigma_f_sym2", "alpha1", "alpha2", "n_sym"}, {}};
    case KernelKind::RadialInformed: return {{"sigma_f_r2", "l2"}, {{"p", -0.5}}};
    case KernelKind::GenericPolar: return {{"sigma_f2", "sigma_f_r2", "sigma_f_a2", "l", "tau"}, {}};
    case KernelKind::InformedK3:
      return {{"l1", "alpha1", "alpha2", "sigma_f_sqe2", "sigma_f_sym2", "l2", "sigma_f_r2",
               "sigma_f_a2", "n_sym"},
              {{"p", -0.5}, {"sigma_f2", 1.0}}};
    case KernelKind::InformedK4:
      return {{"tau", "n_sym", "sigma_f_a2", "sigma_f_r2", "l2"}, {{"p", -0.5}, {"sigma_f2", 1.0}}};
    case KernelKind::Sum:
    case KernelKind::Product: return {};
  }
  return {};
}

namespace detail {

inline bool accepts_input(KernelKind kind, InputSpace input) {
  switch (kind) {
    case KernelKind::SquaredExponential:
    case KernelKind::Matern52:
      return input == InputSpace::Cartesian || input == InputSpace::Rho || input == InputSpace::Theta;
    case KernelKind::Polynomial: return input == InputSpace::Cartesian || input == InputSpace::Rho;
    case KernelKind::ExpDecay:
    case KernelKind::RadialInformed: return input == InputSpace::Rho;
    case KernelKind::Wendland:
    case KernelKind::StrictlyPeriodic:
    case KernelKind::AngularInformed: return input == InputSpace::Theta;
    case KernelKind::GenericPolar:
    case KernelKind::InformedK3:
    case KernelKind::InformedK4: return input == InputSpace::Polar;
    case KernelKind::Sum:
    case KernelKind::Product: return true;
  }
  return false;
}

enum class Family { Cartesian, Polar };

}  // namespace detail

/// Compiled, validated kernel ready for fast evaluation. Hyperparameters are
/// resolved once so evaluation does no name lookups.
class Kernel {
 public:
  explicit Kernel(const KernelSpec& spec) : spec_(spec), root_(compile(spec)) { family_of(root_); }

  double operator()(const Location& a, const Location& b) const { return eval(root_, a, b); }

  double diagonal(const Location& a) const { return eval(root_, a, a); }

  const KernelSpec& spec() const noexcept { return spec_; }

  /// True when evaluation diverges as rho -> 0, so callers should enforce a
  /// minimum radius.
  bool singular_at_origin() const { return singular(root_); }

  /// True when every leaf consumes Cartesian coordinates.
  bool cartesian() const { return family_of(root_) == detail::Family::Cartesian; }

 private:
  struct Resolved {
    double l = 0, l1 = 0, l2 = 0, sigma_f2 = 0, sigma_f_r2 = 0, sigma_f_a2 = 0, sigma_f_sqe2 = 0,
           sigma_f_sym2 = 0, alpha1 = 0, alpha2 = 0, tau = 4, sigma0_2 = 0, p = 0;
    int n_sym = 1;
  };

  struct Node {
    KernelKind kind{};
    InputSpace input{};
    AngularDistance distance{};
    Resolved h;
    std::vector<Node> children;
  };

  static Node compile(const KernelSpec& spec) {
    Node node;
    node.kind = spec.kind;
    node.input = spec.input;
    node.distance = spec.distance;
    if (is_composite(spec.kind)) {
      if (spec.children.empty())
        throw ConfigError(std::string(to_string(spec.kind)) + " kernel needs at least one child");
      if (!spec.hyper.values().empty())
        throw InvalidHyper(std::string(to_string(spec.kind)) + " kernel takes no hyperparameters");
      for (const auto& c : spec.children) node.children.push_back(compile(c));
      return node;
    }
    if (!spec.children.empty())
      throw ConfigError(std::string(to_string(spec.kind)) + " kernel takes no children");
    if (!detail::accepts_input(spec.kind, spec.input))
      throw ConfigError(std::string(to_string(spec.kind)) + " kernel cannot consume input '" +
                        std::string(to_string(spec.input)) + "'");

    spec.hyper.validate();
    const HyperSignature sig = hyper_signature(spec.kind);
    HyperParams full = spec.hyper;
    for (const auto& name : sig.required)
      if (!full.contains(name)) throw MissingParameter(name);
    for (const auto& [name, value] : sig.optional)
      if (!full.contains(name)) full.set(name, value);
    for (const auto& [name, value] : full.values()) {
      const bool used = std::find(sig.required.begin(), sig.required.end(), name) != sig.required.end() ||
                        std::any_of(sig.optional.begin(), sig.optional.end(),
                                    [&](const auto& o) { return o.first == name; });
      if (!used)
        throw InvalidHyper("hyperparameter '" + name + "' is not used by " +
                           std::string(to_string(spec.kind)));
    }

    Resolved& h = node.h;
    h.l = full.get_or("l", 0.0);
    h.l1 = full.get_or("l1", 0.0);
    h.l2 = full.get_or("l2", 0.0);
    h.sigma_f2 = full.get_or("sigma_f2", 0.0);
    h.sigma_f_r2 = full.get_or("sigma_f_r2", 0.0);
    h.sigma_f_a2 = full.get_or("sigma_f_a2", 0.0);
    h.sigma_f_sqe2 = full.get_or("sigma_f_sqe2", 0.0);
    h.sigma_f_sym2 = full.get_or("sigma_f_sym2", 0.0);
    h.alpha1 = full.get_or("alpha1", 0.0);
    h.alpha2 = full.get_or("alpha2", 0.0);
    h.tau = full.get_or("tau", 4.0);
    h.sigma0_2 = full.get_or("sigma0_2", 0.0);
    h.p = full.get_or("p", 0.0);
    h.n_sym = static_cast<int>(full.get_or("n_sym", 1.0));
    return node;
  }

  static detail::Family family_of(const Node& node) {
    if (!is_composite(node.kind))
      return node.input == InputSpace::Cartesian ? detail::Family::Cartesian : detail::Family::Polar;
    const detail::Family first = family_of(node.children.front());
    for (const auto& c : node.children)
      if (family_of(c) != first)
        throw ConfigError("composite kernel mixes Cartesian and polar children");
    return first;
  }

  static bool singular(const Node& node) {
    switch (node.kind) {
      case KernelKind::RadialInformed:
      case KernelKind::InformedK3:
      case KernelKind::InformedK4: return true;
      case KernelKind::Polynomial: return node.h.p < 0.0 && node.h.sigma0_2 == 0.0;
      case KernelKind::Sum:
      case KernelKind::Product:
        return std::any_of(node.children.begin(), node.children.end(), singular);
      default: return false;
    }
  }

  static double distance(InputSpace input, const Location& a, const Location& b) {
    switch (input) {
      case InputSpace::Cartesian: return std::hypot(a.cart.x - b.cart.x, a.cart.y - b.cart.y);
      case InputSpace::Rho: return std::abs(a.rho() - b.rho());
      case InputSpace::Theta: return geodesic_distance(a.theta(), b.theta());
      case InputSpace::Polar: break;
    }
    throw ConfigError("no scalar distance for polar input");
  }

  static double dot(InputSpace input, const Location& a, const Location& b) {
    if (input == InputSpace::Cartesian) return a.cart.x * b.cart.x + a.cart.y * b.cart.y;
    return a.rho() * b.rho();
  }

  static double eval(const Node& node, const Location& a, const Location& b) {
    const Resolved& h = node.h;
    switch (node.kind) {
      case KernelKind::SquaredExponential:
        return squared_exponential(distance(node.input, a, b), h.l, h.sigma_f2);
      case KernelKind::Matern52: return matern52(distance(node.input, a, b), h.l, h.sigma_f2);
      case KernelKind::Polynomial: return polynomial(dot(node.input, a, b), h.p, h.sigma_f2, h.sigma0_2);
      case KernelKind::Wendland:
        return wendland_angular(a.theta(), b.theta(), node.distance, h.tau, h.sigma_f2, h.n_sym);
      case KernelKind::ExpDecay: return exp_decay(a.rho(), b.rho(), h.l, h.sigma_f2);
      case KernelKind::StrictlyPeriodic:
        return strictly_periodic(a.theta(), b.theta(), h.alpha1, h.alpha2, h.n_sym, h.sigma_f2);
      case KernelKind::AngularInformed:
        return angular_informed(a.theta(), b.theta(), angular_params(h));
      case KernelKind::RadialInformed: return radial_informed(a.rho(), b.rho(), h.sigma_f_r2, h.l2, h.p);
      case KernelKind::GenericPolar:
        return generic_polar(a.polar, b.polar, {h.sigma_f2, h.sigma_f_r2, h.sigma_f_a2, h.l, h.tau});
      case KernelKind::InformedK3:
        return informed_k3(a.polar, b.polar,
                           {angular_params(h), h.sigma_f_a2, h.sigma_f_r2, h.l2, h.p, h.sigma_f2});
      case KernelKind::InformedK4:
        return informed_k4(a.polar, b.polar,
                           {h.tau, h.n_sym, h.sigma_f_a2, h.sigma_f_r2, h.l2, h.p, h.sigma_f2});
      case KernelKind::Sum: {
        double s = 0.0;
        for (const auto& c : node.children) s += eval(c, a, b);
        return s;
      }
      case KernelKind::Product: {
        double s = 1.0;
        for (const auto& c : node.children) s *= eval(c, a, b);
        return s;
      }
    }
    return 0.0;
  }

  static AngularInformedParams angular_params(const Resolved& h) {
    return {h.l1, h.sigma_f_sqe2, h.sigma_f_sym2, h.alpha1, h.alpha2, h.n_sym};
  }

  KernelSpec spec_;
  Node root_;
};

// ---------------------------------------------------------------------------
// Gram matrices
// ---------------------------------------------------------------------------

struct GramMatrix {
  Eigen::MatrixXd values;
  double jitter = 0.0;  // magnitude added to the diagonal
};

namespace detail {
inline DomainError at_pair(const DomainError& e, std::size_t i, std::size_t j) {
  return DomainError(std::string(e.what()) + " at pair (" + std::to_string(i) + ", " +
                     std::to_string(j) + ")");
}
}  // namespace detail

/// Square self-covariance K(X, X) + jitter I. Only the upper triangle is
/// evaluated, so the result is exactly symmetric.
inline GramMatrix gram(const Kernel& k, std::span<const Location> xs, double jitter = kDefaultJitter) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  GramMatrix g{Eigen::MatrixXd(n, n), jitter};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double v;
      try {
        v = k(xs[i], xs[j]);
      } catch (const DomainError& e) {
        throw detail::at_pair(e, i, j);
      }
      g.values(i, j) = v;
      g.values(j, i) = v;
    }
    g.values(i, i) += jitter;
  }
  return g;
}

/// Rectangular cross-covariance K(X, X2); never jittered.
inline Eigen::MatrixXd cross_gram(const Kernel& k, std::span<const Location> xs,
                                  std::span<const Location> ys) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) {
      try {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k(xs[i], ys[j]);
      } catch (const DomainError& e) {
        throw detail::at_pair(e, i, j);
      }
    }
  return m;
}

inline GramMatrix gram(const KernelSpec& spec, std::span<const Location> xs,
                       double jitter = kDefaultJitter) {
  return gram(Kernel(spec), xs, jitter);
}

}  // namespace gwgp
