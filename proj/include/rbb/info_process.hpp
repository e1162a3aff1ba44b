#pragma once

// Brownian bridge information process: random length, pin at one of two
// levels z1, z2. Transition kernel on atoms plus Lebesgue measure,
// filtering, drift of the semimartingale decomposition and an Euler scheme.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rbb/bridge.hpp"
#include "rbb/distributions.hpp"
#include "rbb/errors.hpp"
#include "rbb/gaussian.hpp"
#include "rbb/quadrature.hpp"
#include "rbb/random_bridge.hpp"
#include "rbb/rng.hpp"

namespace rbb {

struct InfoModel {
  LengthLaw length;
  double z1 = -1.0;
  double z2 = 1.0;
  double p1 = 0.5;
  quad::Options quad{0.0, 1e-10, 2000};

  void validate() const {
    if (!std::isfinite(z1) || !std::isfinite(z2) || z1 == z2) throw InputError("InfoModel: need finite z1 != z2");
    if (!(p1 > 0.0 && p1 < 1.0)) throw InputError("InfoModel: need 0 < p1 < 1");
  }
  double pin(int i) const { return i == 0 ? z1 : z2; }
  double prob(int i) const { return i == 0 ? p1 : 1.0 - p1; }
  /// Index of the pin equal to x, or -1.
  int pin_index(double x) const { return x == z1 ? 0 : (x == z2 ? 1 : -1); }

  RandomBridgeModel as_random_bridge() const {
    return {length, PinLaw::discrete({z1, z2}, {p1, 1.0 - p1}), quad};
  }
};

inline constexpr double kLogUnderflow = -745.0;

/// log phi_s^i(r, x): likelihood ratio of length r and pin z_i given a
/// non-absorbed value x at time s. -inf for r <= s.
inline double log_phi_weight(double z, double s, double r, double x) {
  if (!(r > s)) return kNegInf;
  const double d = r - s;
  const double l = 0.5 * std::log(r / d) - 0.5 * ((z - x) * (z - x) / d - z * z / r);
  return l < kLogUnderflow ? kNegInf : l;
}

inline double log_phi_weight(const InfoModel& m, int i, double s, double r, double x) {
  return log_phi_weight(m.pin(i), s, r, x);
}

inline double phi_weight(const InfoModel& m, int i, double s, double r, double x) {
  const double l = log_phi_weight(m, i, s, r, x);
  return l == kNegInf ? 0.0 : std::exp(l);
}

namespace detail {

/// Panel cuts near r = s + (z_i - x)^2 where the phi-integrand of pin i peaks.
inline std::vector<double> phi_cuts(const InfoModel& m, double s, double x) {
  std::vector<double> cuts;
  for (int i = 0; i < 2; ++i) {
    const double d2 = (m.pin(i) - x) * (m.pin(i) - x);
    for (double c : {0.02, 0.2, 1.0, 5.0}) cuts.push_back(s + c * d2);
    // Interior maximum of the exponent when |z - x| < |z|; it can be very sharp for small s.
    const double a = std::sqrt(d2), b = std::abs(m.pin(i));
    if (s > 0.0 && a < b) {
      const double peak = s * b / (b - a);
      const double sd = std::sqrt(peak * peak * peak / (b * b * (b / a - 1.0)));
      for (double c : {-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0}) {
        if (peak + c * sd > s && std::isfinite(sd)) cuts.push_back(peak + c * sd);
      }
    }
  }
  return cuts;
}

}  // namespace detail

/// log of sum_i p_i * integral over (a, b] of phi_s^i(r, x) P_tau(dr).
inline double log_phi_mass(const InfoModel& m, double s, double x, double a, double b) {
  const auto cuts = detail::phi_cuts(m, s, x);
  const auto res = integrate_tail_log<1>(
      m.length, a, b,
      [&](double r) {
        return std::array<double, 1>{log_add_exp(std::log(m.p1) + log_phi_weight(m, 0, s, r, x),
                                                 std::log1p(-m.p1) + log_phi_weight(m, 1, s, r, x))};
      },
      m.quad, std::span<const double>(cuts));
  return res.log_value(0);
}

/// Per-pin masses p_i * integral over (a, b] of phi_s^i(r, x) P_tau(dr), with a common log scale.
inline ScaledIntegral<2> phi_masses(const InfoModel& m, double s, double x, double a, double b) {
  const auto cuts = detail::phi_cuts(m, s, x);
  return integrate_tail_log<2>(
      m.length, a, b,
      [&](double r) {
        return std::array<double, 2>{std::log(m.p1) + log_phi_weight(m, 0, s, r, x),
                                     std::log1p(-m.p1) + log_phi_weight(m, 1, s, r, x)};
      },
      m.quad, std::span<const double>(cuts));
}

// ---------------------------------------------------------------------------
// Transition kernel

/// Law of xi_u given xi_t on the mixed measure delta_{z1} + delta_{z2} + dy.
struct MixedDensity {
  double atom1 = 0.0;
  double atom2 = 0.0;
  std::function<double(double)> lebesgue;  // empty when the input was absorbed
  double lebesgue_mass_exact = 0.0;        // from the continuation mass, no y-quadrature
  double center = 0.0;                     // location/scale for y-quadrature
  double spread = 1.0;
  std::vector<double> y_cuts;

  bool has_lebesgue() const { return static_cast<bool>(lebesgue); }

  /// Integral of g(y) against the Lebesgue part by adaptive quadrature;
  /// jumps of g belong in extra_cuts.
  template <class G>
  double lebesgue_integral(G&& g, std::span<const double> extra_cuts = {},
                           quad::Options opt = {1e-12, 1e-9, 400}) const {
    if (!has_lebesgue()) return 0.0;
    std::vector<double> cuts = y_cuts;
    cuts.insert(cuts.end(), extra_cuts.begin(), extra_cuts.end());
    cuts.push_back(center - 12.0 * spread);
    cuts.push_back(center + 12.0 * spread);
    const double lo = *std::min_element(cuts.begin(), cuts.end());
    const double hi = *std::max_element(cuts.begin(), cuts.end());
    std::erase_if(cuts, [&](double c) { return c < lo || c > hi || !std::isfinite(c); });
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto f = [&](double y) { return std::array<double, 1>{g(y) * lebesgue(y)}; };
    return quad::integrate<1>(f, std::span<const double>(cuts), opt).value[0];
  }
  double lebesgue_mass() const {
    return lebesgue_integral([](double) { return 1.0; });
  }
  double total_mass() const { return atom1 + atom2 + lebesgue_mass(); }
  template <class G>
  double expectation(G&& g, double z1, double z2, std::span<const double> extra_cuts = {}) const {
    return atom1 * g(z1) + atom2 * g(z2) + lebesgue_integral(g, extra_cuts);
  }
};

/// Transition kernel of xi from (t, x) to time u. x equal to z1 or z2 (bit
/// for bit) means the path is absorbed.
inline MixedDensity info_transition(const InfoModel& m, double t, double x, double u) {
  m.validate();
  if (!(t > 0.0 && u > t)) throw DomainError("info_transition: need 0 < t < u");
  MixedDensity out;
  const int hit = m.pin_index(x);
  if (hit >= 0) {
    (hit == 0 ? out.atom1 : out.atom2) = 1.0;
    return out;
  }
  const double inf = std::numeric_limits<double>::infinity();
  const auto before = phi_masses(m, t, x, t, u);
  const auto after = phi_masses(m, t, x, u, inf);
  const double log_d = log_add_exp(log_add_exp(before.log_value(0), before.log_value(1)),
                                   log_add_exp(after.log_value(0), after.log_value(1)));
  if (!(log_d > kNegInf)) throw InferenceError("info_transition: observation has zero likelihood");
  out.atom1 = std::exp(before.log_value(0) - log_d);
  out.atom2 = std::exp(before.log_value(1) - log_d);
  out.lebesgue_mass_exact = std::exp(log_add_exp(after.log_value(0), after.log_value(1)) - log_d);
  const InfoModel model = m;
  out.lebesgue = [model, t, x, u, log_d](double y) {
    if (model.pin_index(y) >= 0) return 0.0;
    const double l = gauss_logpdf(u - t, y - x) + log_phi_mass(model, u, y, u, std::numeric_limits<double>::infinity());
    return l == kNegInf ? 0.0 : std::exp(l - log_d);
  };
  out.center = x;
  out.spread = std::sqrt(u - t);
  out.y_cuts = {x, m.z1, m.z2, std::min({x, m.z1, m.z2}) - 12.0 * out.spread,
                std::max({x, m.z1, m.z2}) + 12.0 * out.spread};
  return out;
}

// ---------------------------------------------------------------------------
// Filtering

/// Posterior of (tau, Z) given xi_t = x and the absorption status.
inline PosteriorTable info_posterior_table(const InfoModel& m, double t, double x, bool absorbed,
                                           const PosteriorOptions& popt = {}) {
  m.validate();
  if (!(t > 0.0)) throw DomainError("info_posterior: need t > 0");
  PosteriorTable table;
  table.time = t;
  table.observation = x;
  table.absorbed = absorbed;
  const std::span<const double> ucuts(popt.length_cuts);
  if (absorbed) {
    const int i = m.pin_index(x);
    if (i < 0) throw InferenceError("info_posterior: absorbed observation must equal z1 or z2");
    for (const auto& n : length_log_nodes(m.length, 0.0, t, [](double) { return 0.0; }, m.quad, ucuts)) {
      table.entries.push_back({n.x, x, n.log_weight, 0.0});
    }
    detail::normalize(table);
    return table;
  }
  auto cuts = detail::phi_cuts(m, t, x);
  cuts.insert(cuts.end(), popt.length_cuts.begin(), popt.length_cuts.end());
  for (int i = 0; i < 2; ++i) {
    const double lp = std::log(m.prob(i));
    auto shape = [&](double r) { return log_phi_weight(m, i, t, r, x); };
    for (const auto& n : length_log_nodes(m.length, t, std::numeric_limits<double>::infinity(), shape, m.quad,
                                          std::span<const double>(cuts))) {
      table.entries.push_back({n.x, m.pin(i), n.log_weight + lp, 0.0});
    }
  }
  detail::normalize(table);
  return table;
}

/// E[g(tau, Z) | xi_t = x, absorption status].
template <class G>
double info_posterior(const InfoModel& m, double t, double x, bool absorbed, G&& g) {
  return info_posterior_table(m, t, x, absorbed).expectation(g);
}

/// E[g(tau, Z, xi_u) | xi_t = x, absorption status] with a caller-supplied
/// Gaussian expectation for the not-yet-pinned regime.
inline double info_predict_with(const InfoModel& m, double t, double x, bool absorbed, double u,
                                const GaussExpectation& inner, const std::function<double(double, double, double)>& g) {
  if (!(t > 0.0 && u > t)) throw DomainError("info_predict: need 0 < t < u");
  return predict_from_table(info_posterior_table(m, t, x, absorbed, PosteriorOptions{{u}}), u, inner, g);
}

template <class G>
double info_predict(const InfoModel& m, double t, double x, bool absorbed, double u, G g) {
  std::function<double(double, double, double)> gf = g;
  return info_predict_with(m, t, x, absorbed, u, by_quadrature(gf), gf);
}

// ---------------------------------------------------------------------------
// Drift

namespace detail {

/// Pieces of the drift at (s, x) with lengths split at s + h: per pin, the mass
/// on (s, s + h] and on (s + h, inf), and the drift numerator on (s + h, inf).
struct DriftPieces {
  ScaledIntegral<6> v;
  double near(int i) const { return v.value(static_cast<std::size_t>(i)); }
  double far(int i) const { return v.value(2 + static_cast<std::size_t>(i)); }
  double numerator(int i) const { return v.value(4 + static_cast<std::size_t>(i)); }
};

inline DriftPieces drift_pieces(const InfoModel& m, double s, double x, double h) {
  auto cuts = detail::phi_cuts(m, s, x);
  const double split = s + h;
  if (h > 0.0) cuts.push_back(split);
  DriftPieces out;
  out.v = integrate_tail_log<6>(
      m.length, s, std::numeric_limits<double>::infinity(),
      [&](double r) {
        std::array<double, 6> l;
        l.fill(kNegInf);
        for (int i = 0; i < 2; ++i) {
          const double lw = std::log(m.prob(i)) + log_phi_weight(m, i, s, r, x);
          if (r <= split) {
            l[i] = lw;
          } else {
            l[2 + i] = lw;
            const double dz = std::abs(m.pin(i) - x);
            // The sign of the numerator is that of z_i - x, applied afterwards.
            if (dz > 0.0) l[4 + i] = lw + std::log(dz) - std::log(r - s);
          }
        }
        return l;
      },
      m.quad, std::span<const double>(cuts));
  return out;
}

inline double signed_ratio(const InfoModel& m, const DriftPieces& p, double x) {
  // Positive and negative parts are combined in the scaled domain.
  double num = 0.0;
  for (int i = 0; i < 2; ++i) num += (m.pin(i) > x ? 1.0 : -1.0) * p.v.scaled[4 + i];
  const double den = p.v.scaled[2] + p.v.scaled[3];
  if (!std::isfinite(num) || !std::isfinite(den)) {
    throw NumericError("info_drift: drift integral diverges at x=" + std::to_string(x) +
                       " (e.g. s = 0 with a length law of infinite E[1/tau])");
  }
  if (!(den > 0.0)) throw InferenceError("info_drift: zero denominator at x=" + std::to_string(x));
  return num / den;
}

}  // namespace detail

/// Drift of xi at (s, x); zero once absorbed.
inline double info_drift(const InfoModel& m, double s, double x, bool absorbed) {
  if (!(s >= 0.0)) throw DomainError("info_drift: need s >= 0");
  if (absorbed) return 0.0;
  const auto p = detail::drift_pieces(m, s, x, 0.0);
  if (p.v.log_scale == kNegInf) throw InferenceError("info_drift: observation has zero likelihood");
  return detail::signed_ratio(m, p, x);
}

/// Drift field evaluator (s, x, absorbed) -> drift, with an optional scale
/// used to inject deliberate errors in verification.
struct DriftField {
  InfoModel model;
  double scale = 1.0;
  double operator()(double s, double x, bool absorbed) const { return scale * info_drift(model, s, x, absorbed); }
};

/// One Euler step's ingredients: probability that tau falls in (s, s + h]
/// per pin, and the drift conditional on tau > s + h.
struct EulerStep {
  double absorb1 = 0.0;
  double absorb2 = 0.0;
  double drift = 0.0;
};

inline EulerStep euler_step(const InfoModel& m, double s, double x, double h) {
  const auto p = detail::drift_pieces(m, s, x, h);
  if (p.v.log_scale == kNegInf) throw InferenceError("euler_step: observation has zero likelihood");
  const double total = p.v.scaled[0] + p.v.scaled[1] + p.v.scaled[2] + p.v.scaled[3];
  EulerStep e;
  e.absorb1 = p.v.scaled[0] / total;
  e.absorb2 = p.v.scaled[1] / total;
  if (p.v.scaled[2] + p.v.scaled[3] > 0.0) e.drift = detail::signed_ratio(m, p, x);
  return e;
}

struct EulerInfoOptions {
  double drift_cap = 1e8;
  double max_step = 1e-2;
  double drift_scale = 1.0;  // 1 except in mutation checks
  // Internal substeps near s = 0: h <= max(start_min_step, start_ratio * s).
  double start_min_step = 1e-4;
  double start_ratio = 0.2;
};

struct EulerInfoStats {
  std::size_t capped = 0;
};

/// Euler scheme for xi. Each step first absorbs at z_i with the posterior
/// probability that tau falls inside the step, otherwise moves with the drift
/// conditional on survival through the step plus a Gaussian increment. Steps
/// are subdivided near s = 0, where the drift is most singular.
inline PathSample euler_simulate_info(const InfoModel& m, std::span<const double> grid, RngStream& src,
                                      const EulerInfoOptions& opt = {}, EulerInfoStats* stats = nullptr) {
  m.validate();
  validate_grid(grid);
  PathSample p;
  p.grid.assign(grid.begin(), grid.end());
  p.values.assign(grid.size(), 0.0);
  p.absorb_index = PathSample::kBeyondGrid;
  double x = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double s = grid[k - 1];
    const double h = grid[k] - s;
    if (h > opt.max_step * (1.0 + 1e-12)) throw InputError("euler_simulate_info: grid step exceeds max_step");
    if (p.absorb_index != PathSample::kBeyondGrid) {
      p.values[k] = x;
      continue;
    }
    for (double sub = s; sub < grid[k];) {
      const double hs = std::min({grid[k] - sub, std::max(opt.start_min_step, opt.start_ratio * sub)});
      const auto st = euler_step(m, sub, x, hs);
      const double u = src.uniform();
      const double w = src.normal();
      sub = hs == grid[k] - sub ? grid[k] : sub + hs;
      if (u < st.absorb1 + st.absorb2) {
        x = m.pin(u < st.absorb1 ? 0 : 1);
        p.absorb_index = k;
        p.realized_pin = x;
        p.realized_length = sub;
        break;
      }
      double d = opt.drift_scale * st.drift;
      if (std::abs(d) > opt.drift_cap) {
        d = std::copysign(opt.drift_cap, d);
        if (stats) ++stats->capped;
      }
      x += d * hs + std::sqrt(hs) * w;
    }
    p.values[k] = x;
  }
  return p;
}

/// Exact sampler for xi (the random bridge with a two-point pin).
inline PathSample sample_info(const InfoModel& m, std::span<const double> grid, RngStream& src) {
  m.validate();
  return sample_random_bridge(m.as_random_bridge(), grid, src);
}

// ---------------------------------------------------------------------------
// Unconditional law and right-continuity

/// E[g(xi_u)] = F(u) E[g(Z)] + sum_i p_i int_{(u, inf)} E[g(N(u z_i / r, u (r - u) / r))] P_tau(dr).
template <class G>
double unconditional_expectation(const InfoModel& m, double u, G&& g) {
  if (!(u > 0.0)) throw DomainError("unconditional_expectation: need u > 0");
  const double pinned = m.length.cdf(u) * (m.p1 * g(m.z1) + (1.0 - m.p1) * g(m.z2));
  const auto res = integrate_tail_vec<1>(
      m.length, u, std::numeric_limits<double>::infinity(),
      [&](double r) {
        double acc = 0.0;
        for (int i = 0; i < 2; ++i) {
          acc += m.prob(i) * gaussian_expectation(g, u * m.pin(i) / r, u * (r - u) / r);
        }
        return std::array<double, 1>{acc};
      },
      {1e-13, 1e-9, 2000});
  return pinned + res.value[0];
}

struct ContinuityProbe {
  std::vector<double> values;  // E[g(xi_u) | xi_{t_n} = x_n]
  double reference = 0.0;      // value at t*
  double gap = 0.0;            // |values.back() - reference|
};

/// Evaluates t -> E[g(xi_u) | xi_t] along observed points (t_n, x_n, absorbed_n)
/// with t_n decreasing to t_star. When t_star == 0 the reference is the
/// unconditional expectation, which needs P(tau > eps) = 1 for some eps > 0.
template <class G>
ContinuityProbe right_continuity_probe(const InfoModel& m, double u, G g, std::span<const double> ts,
                                       std::span<const double> xs, std::span<const std::uint8_t> absorbed,
                                       double t_star, double x_star, bool absorbed_star) {
  if (ts.size() != xs.size() || ts.size() != absorbed.size() || ts.empty()) {
    throw PreconditionError("right_continuity_probe: need matching nonempty sequences");
  }
  if (!(t_star >= 0.0 && t_star < u)) throw PreconditionError("right_continuity_probe: need 0 <= t* < u");
  for (std::size_t n = 0; n < ts.size(); ++n) {
    if (!(ts[n] > t_star && ts[n] < u)) throw PreconditionError("right_continuity_probe: need t* < t_n < u");
    if (n > 0 && !(ts[n] < ts[n - 1])) throw PreconditionError("right_continuity_probe: t_n must decrease");
  }
  if (t_star == 0.0) {
    double lower = std::numeric_limits<double>::infinity();
    for (const auto& at : m.length.atoms()) lower = std::min(lower, at.time);
    if (m.length.continuous() && m.length.continuous_mass() > 0.0) lower = std::min(lower, m.length.continuous_support().first);
    if (!(lower > 0.0)) throw PreconditionError("right_continuity_probe: t* = 0 needs tau bounded away from 0");
  }
  auto gy = [&g](double, double, double y) { return g(y); };
  ContinuityProbe out;
  for (std::size_t n = 0; n < ts.size(); ++n) {
    out.values.push_back(info_predict(m, ts[n], xs[n], absorbed[n] != 0, u, gy));
  }
  out.reference = t_star == 0.0 ? unconditional_expectation(m, u, g)
                                : info_predict(m, t_star, x_star, absorbed_star, u, gy);
  out.gap = std::abs(out.values.back() - out.reference);
  return out;
}

}  // namespace rbb
