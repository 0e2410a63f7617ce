#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "gwgp/errors.hpp"
#include "gwgp/geometry.hpp"

namespace gwgp {

/// Ground-truth amplitude field on a square plate:
///   h(rho, theta) = A0 rho^{-1/2} exp(-zeta(theta) rho),
///   zeta(theta)   = zeta0 + zeta_aniso (1 - cos(2 n_axes theta)) / 2,
/// observed as h exp(noise_sigma e) + noise_floor with e ~ N(0, 1).
struct FieldConfig {
  double half_width = 150.0;             // mm
  CartesianPoint source{150.0, 150.0};   // mm, plate coordinates with origin at a corner
  double a0 = 1.0;
  double zeta0 = 0.01;                   // 1/mm
  double zeta_aniso = 0.01;              // 1/mm, arbitrary: not quantified by any measurement
  int n_axes = 2;
  double noise_sigma = 0.1;
  double noise_floor = 0.0;
  double rho_min = 5.0;                  // mm
  int grid_nx = 60;
  int grid_ny = 60;

  void validate() const {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ConfigError("half_width must be > 0");
    if (!std::isfinite(source.x) || !std::isfinite(source.y)) throw ConfigError("source must be finite");
    if (!(a0 > 0.0) || !std::isfinite(a0)) throw ConfigError("A0 must be > 0");
    if (!(zeta0 >= 0.0) || !std::isfinite(zeta0)) throw ConfigError("zeta0 must be >= 0");
    if (!(zeta_aniso >= 0.0) || !std::isfinite(zeta_aniso)) throw ConfigError("zeta_aniso must be >= 0");
    if (n_axes < 1) throw ConfigError("n_axes must be >= 1");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("noise_sigma must be >= 0");
    if (!(noise_floor >= 0.0) || !std::isfinite(noise_floor)) throw ConfigError("noise_floor must be >= 0");
    if (!(rho_min > 0.0) || !std::isfinite(rho_min)) throw ConfigError("rho_min must be > 0");
    if (grid_nx < 1 || grid_ny < 1) throw ConfigError("grid resolution must be >= 1");
  }
};

inline double attenuation_coefficient(const FieldConfig& cfg, double theta) {
  return cfg.zeta0 + cfg.zeta_aniso * 0.5 * (1.0 - std::cos(2.0 * cfg.n_axes * theta));
}

/// Noiseless field value at a polar location relative to the source.
inline double analytic_field(const FieldConfig& cfg, double rho, double theta) {
  if (!(rho > 0.0)) throw DomainError("field is singular at the source");
  return cfg.a0 / std::sqrt(rho) * std::exp(-attenuation_coefficient(cfg, theta) * rho);
}

struct FeatureRow {
  double x = 0.0;  // mm
  double y = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  double h = 0.0;
};

struct FeatureDataset {
  std::vector<FeatureRow> rows;
  FieldConfig config;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return rows.size(); }

  /// Locations in source-centred polar form (Cartesian part in plate coordinates).
  std::vector<Location> locations() const {
    std::vector<Location> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(Location::from_cartesian({r.x, r.y}, config.source));
    return out;
  }

  std::vector<double> values() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.h);
    return out;
  }
};

/// Scan grid of cell centres covering the plate, (i + 1/2) * step.
inline std::vector<CartesianPoint> scan_grid(double width, double height, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("grid resolution must be >= 1");
  std::vector<CartesianPoint> pts;
  pts.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  const double dx = width / nx, dy = height / ny;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) pts.push_back({(i + 0.5) * dx, (j + 0.5) * dy});
  return pts;
}

/// Samples the field on the scan grid, dropping points inside rho_min.
/// Noise draws are taken in row order from one seeded stream.
inline FeatureDataset generate_field(const FieldConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  FeatureDataset ds;
  ds.config = cfg;
  ds.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double side = 2.0 * cfg.half_width;
  for (const auto& p : scan_grid(side, side, cfg.grid_nx, cfg.grid_ny)) {
    const PolarPoint pp = cart_to_polar(p, cfg.source);
    if (pp.rho() < cfg.rho_min) continue;
    double h = analytic_field(cfg, pp.rho(), pp.theta());
    if (cfg.noise_sigma > 0.0) h *= std::exp(cfg.noise_sigma * normal(rng));
    h += cfg.noise_floor;
    ds.rows.push_back({p.x, p.y, pp.rho(), pp.theta(), h});
  }
  return ds;
}

struct Waveform {
  double sample_rate = 1.0;  // Hz
  std::vector<double> samples;

  void validate() const {
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw ConfigError("sample rate must be > 0");
    if (samples.size() < 2) throw EmptySignal("waveform needs at least 2 samples");
    for (double s : samples)
      if (!std::isfinite(s)) throw DomainError("waveform samples must be finite");
  }
};

/// Analytic signal s + i H[s] via the one-sided spectrum: keep DC (and
/// Nyquist for even n), double positive frequencies, zero negative ones.
inline std::vector<std::complex<double>> analytic_signal(const std::vector<double>& s) {
  const std::size_t n = s.size();
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, s);
  spec.resize(n);  // full spectrum, not the half-spectrum shortcut
  for (std::size_t k = 1; k < n; ++k) {
    if (2 * k < n) spec[k] *= 2.0;
    else if (2 * k > n) spec[k] = 0.0;
  }
  std::vector<std::complex<double>> out;
  fft.inv(out, spec);
  return out;
}

/// Peak of the Hilbert envelope.
inline double extract_hm(const Waveform& w) {
  if (w.samples.empty()) throw EmptySignal("waveform has no samples");
  w.validate();
  double peak = 0.0;
  for (const auto& z : analytic_signal(w.samples)) peak = std::max(peak, std::abs(z));
  return peak;
}

struct WavepacketConfig {
  double amplitude = 1.0;
  double center_frequency = 100e3;  // Hz
  double envelope_width = 50e-6;    // s, standard deviation of the Gaussian window
  double sample_rate = 10e6;        // Hz
  double duration = 1e-3;           // s; the packet is centred at duration / 2
  double noise_sigma = 0.0;         // additive white noise standard deviation

  void validate() const {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw ConfigError("amplitude must be >= 0");
    for (double v : {center_frequency, envelope_width, sample_rate, duration})
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("wavepacket parameters must be > 0");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("noise must be >= 0");
    if (duration * sample_rate < 2.0) throw ConfigError("wavepacket needs at least 2 samples");
  }
};

/// Gaussian-windowed tone burst a exp(-(t - t0)^2 / (2 w^2)) sin(2 pi f (t - t0))
/// plus white noise drawn from its own seeded stream.
inline Waveform synthesize_wavepacket(const WavepacketConfig& cfg, std::uint64_t seed = 0) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration * cfg.sample_rate));
  const double t0 = 0.5 * cfg.duration;
  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.resize(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / cfg.sample_rate - t0;
    const double env = std::exp(-t * t / (2.0 * cfg.envelope_width * cfg.envelope_width));
    double v = cfg.amplitude * env * std::sin(2.0 * kPi * cfg.center_frequency * t);
    if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * normal(rng);
    w.samples[i] = v;
  }
  return w;
}

}  // namespace gwgp
