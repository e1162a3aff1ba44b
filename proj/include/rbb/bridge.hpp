#pragma once

// Brownian bridge with deterministic length r and pinning point z: exact
// pathwise sampling, marginal / finite-dimensional / transition densities,
// and the drift of its semimartingale representation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rbb/errors.hpp"
#include "rbb/gaussian.hpp"
#include "rbb/rng.hpp"

namespace rbb {

struct BridgeSpec {
  double length;  // r > 0
  double pin;     // z

  void validate() const {
    if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("bridge length must be > 0");
    if (!std::isfinite(pin)) throw DomainError("bridge pin must be finite");
  }
};

/// One simulated trajectory with its hidden (length, pin).
struct PathSample {
  static constexpr std::size_t kBeyondGrid = std::numeric_limits<std::size_t>::max();

  std::vector<double> grid;
  std::vector<double> values;
  double realized_length = 0.0;
  double realized_pin = 0.0;
  std::size_t absorb_index = kBeyondGrid;  // first k with grid[k] >= realized_length

  bool absorbed_at(std::size_t k) const { return absorb_index != kBeyondGrid && k >= absorb_index; }
};

inline void validate_grid(std::span<const double> grid) {
  if (grid.empty()) throw InputError("time grid is empty");
  if (grid.front() != 0.0) throw InputError("time grid must start at 0");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw InputError("time grid must be strictly increasing");
  }
}

/// Uniform grid 0, dt, ..., n*dt.
inline std::vector<double> uniform_grid(double t_max, std::size_t n_steps) {
  if (n_steps == 0) throw InputError("grid needs n_steps >= 1");
  if (!(t_max > 0.0)) throw InputError("grid needs t_max > 0");
  std::vector<double> g(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) g[k] = t_max * static_cast<double>(k) / static_cast<double>(n_steps);
  return g;
}

namespace detail {
// Fills `path` on its grid for a bridge of length r pinned at z.
inline void fill_bridge(PathSample& path, double r, double z, RngStream& src) {
  const auto& grid = path.grid;
  path.values.assign(grid.size(), 0.0);
  path.realized_length = r;
  path.realized_pin = z;
  path.absorb_index = PathSample::kBeyondGrid;
  std::size_t k = 1;
  double w = 0.0;
  double t_prev = 0.0;
  std::vector<double>& v = path.values;
  // W on grid points strictly before r, stored temporarily in values.
  for (; k < grid.size() && grid[k] < r; ++k) {
    w += std::sqrt(grid[k] - t_prev) * src.normal();
    t_prev = grid[k];
    v[k] = w;
  }
  // r is inserted into the simulation grid here.
  const double w_r = w + std::sqrt(r - t_prev) * src.normal();
  for (std::size_t j = 1; j < k; ++j) {
    const double s = grid[j] / r;
    v[j] = v[j] - s * w_r + s * z;
  }
  if (k < grid.size()) path.absorb_index = k;
  for (; k < grid.size(); ++k) v[k] = z;
}
}  // namespace detail

/// Exact sample of the bridge on `grid` (values equal the pin for t >= r).
inline PathSample sample_bridge(const BridgeSpec& spec, std::span<const double> grid, RngStream& src) {
  spec.validate();
  validate_grid(grid);
  PathSample p;
  p.grid.assign(grid.begin(), grid.end());
  detail::fill_bridge(p, spec.length, spec.pin, src);
  return p;
}

inline double bridge_marginal_variance(const BridgeSpec& s, double t) { return t * (s.length - t) / s.length; }

/// Density of the bridge at time t, 0 < t < r.
inline double bridge_marginal_pdf(const BridgeSpec& spec, double t, double x) {
  spec.validate();
  if (!(t > 0.0 && t < spec.length)) {
    throw DomainError("bridge_marginal_pdf: need 0 < t < r (marginal is degenerate otherwise)");
  }
  return gauss_pdf(bridge_marginal_variance(spec, t), x, t * spec.pin / spec.length);
}

inline double bridge_marginal_logpdf(const BridgeSpec& spec, double t, double x) {
  spec.validate();
  if (!(t > 0.0 && t < spec.length)) throw DomainError("bridge_marginal_logpdf: need 0 < t < r");
  return gauss_logpdf(bridge_marginal_variance(spec, t), x, t * spec.pin / spec.length);
}

/// log of the joint density of (bridge_{t1}, ..., bridge_{tn}).
inline double bridge_fdd_logpdf(const BridgeSpec& spec, std::span<const double> times, std::span<const double> xs) {
  spec.validate();
  if (times.empty() || times.size() != xs.size()) throw DomainError("bridge_fdd_pdf: times and xs must match");
  double t_prev = 0.0;
  double x_prev = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > t_prev)) throw DomainError("bridge_fdd_pdf: times must be increasing and > 0");
    acc += gauss_logpdf(times[i] - t_prev, xs[i] - x_prev);
    t_prev = times[i];
    x_prev = xs[i];
  }
  if (!(t_prev < spec.length)) throw DomainError("bridge_fdd_pdf: last time must be < r");
  return acc + gauss_logpdf(spec.length - t_prev, spec.pin - x_prev) - gauss_logpdf(spec.length, spec.pin);
}

inline double bridge_fdd_pdf(const BridgeSpec& spec, std::span<const double> times, std::span<const double> xs) {
  return std::exp(bridge_fdd_logpdf(spec, times, xs));
}

namespace detail {
inline void check_transition(const BridgeSpec& spec, double t, double u) {
  spec.validate();
  if (!(t > 0.0 && t < u && u < spec.length)) throw DomainError("bridge transition: need 0 < t < u < r");
}
}  // namespace detail

/// Transition density as p(r-u, z-y) p(u-t, y-x) / p(r-t, z-x).
inline double bridge_transition_pdf(const BridgeSpec& spec, double t, double x, double u, double y) {
  detail::check_transition(spec, t, u);
  const double r = spec.length;
  const double z = spec.pin;
  return std::exp(gauss_logpdf(r - u, z - y) + gauss_logpdf(u - t, y - x) - gauss_logpdf(r - t, z - x));
}

/// Conditional mean and variance of the bridge at u given value x at t.
struct GaussMoments {
  double mean;
  double variance;
};

inline GaussMoments bridge_transition_moments(const BridgeSpec& spec, double t, double x, double u) {
  const double r = spec.length;
  const double w = (r - u) / (r - t);
  return {w * x + (u - t) / (r - t) * spec.pin, w * (u - t)};
}

/// Same kernel in Gaussian mean/variance form.
inline double bridge_transition_pdf_gaussian_form(const BridgeSpec& spec, double t, double x, double u, double y) {
  detail::check_transition(spec, t, u);
  const auto m = bridge_transition_moments(spec, t, x, u);
  return gauss_pdf(m.variance, y, m.mean);
}

/// Drift (z - x) / (r - s) on {s < r}, zero afterwards.
inline double bridge_drift(const BridgeSpec& spec, double s, double x) {
  if (!(s >= 0.0)) throw DomainError("bridge_drift: need s >= 0");
  return s < spec.length ? (spec.pin - x) / (spec.length - s) : 0.0;
}

struct EulerBridgeOptions {
  double drift_cap = 1e8;
  double snap_window = 1e-9;
};

/// Euler-Maruyama for dX = bridge_drift dt + dW on the grid itself; used to
/// cross-check the pathwise construction. Counts capped drift evaluations.
inline PathSample euler_simulate_bridge(const BridgeSpec& spec, std::span<const double> grid, RngStream& src,
                                        const EulerBridgeOptions& opt = {}, std::size_t* capped = nullptr) {
  spec.validate();
  validate_grid(grid);
  PathSample p;
  p.grid.assign(grid.begin(), grid.end());
  p.values.assign(grid.size(), 0.0);
  p.realized_length = spec.length;
  p.realized_pin = spec.pin;
  double x = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double s = grid[k - 1];
    const double h = grid[k] - s;
    if (spec.length - grid[k] < opt.snap_window) {
      x = spec.pin;
      if (p.absorb_index == PathSample::kBeyondGrid) p.absorb_index = k;
    } else {
      double b = bridge_drift(spec, s, x);
      if (std::abs(b) > opt.drift_cap) {
        b = std::copysign(opt.drift_cap, b);
        if (capped) ++*capped;
      }
      x += b * h + std::sqrt(h) * src.normal();
    }
    p.values[k] = x;
  }
  return p;
}

}  // namespace rbb
