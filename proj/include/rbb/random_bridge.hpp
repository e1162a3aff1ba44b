#pragma once

// Brownian bridge whose length tau and pinning point Z are random and
// independent of the driving Brownian motion: sampling, the posterior of
// (tau, Z) given one observation, predictive laws, the two-observation
// conditional for continuous pins, and the resulting Markov gap.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rbb/bridge.hpp"
#include "rbb/distributions.hpp"
#include "rbb/errors.hpp"
#include "rbb/gaussian.hpp"
#include "rbb/quadrature.hpp"
#include "rbb/rng.hpp"

namespace rbb {

struct RandomBridgeModel {
  LengthLaw length;
  PinLaw pin;
  quad::Options quad{0.0, 1e-10, 2000};
};

/// Child-stream tags: tau, Z and W come from disjoint streams.
enum StreamTag : std::uint64_t { kLengthStream = 1, kPinStream = 2, kNoiseStream = 3 };

/// Draws (tau, Z) and fills `path` (grid already set) with the bridge.
inline void sample_random_bridge_into(const RandomBridgeModel& model, PathSample& path, RngStream& src) {
  auto s_len = src.child(kLengthStream);
  auto s_pin = src.child(kPinStream);
  auto s_noise = src.child(kNoiseStream);
  const double tau = model.length.sample(s_len);
  const double z = model.pin.sample(s_pin);
  detail::fill_bridge(path, tau, z, s_noise);
}

inline PathSample sample_random_bridge(const RandomBridgeModel& model, std::span<const double> grid, RngStream& src) {
  validate_grid(grid);
  PathSample p;
  p.grid.assign(grid.begin(), grid.end());
  sample_random_bridge_into(model, p, src);
  return p;
}

/// Samples on the uniform grid of step dt, extended past t_min until the
/// realized length is reached, so the final value is the pin.
inline PathSample sample_random_bridge_until_absorbed(const RandomBridgeModel& model, double dt, double t_min,
                                                      RngStream& src) {
  if (!(dt > 0.0 && t_min > 0.0)) throw InputError("sample_random_bridge_until_absorbed: need dt > 0 and t_min > 0");
  auto s_len = src.child(kLengthStream);
  auto s_pin = src.child(kPinStream);
  auto s_noise = src.child(kNoiseStream);
  const double tau = model.length.sample(s_len);
  const double z = model.pin.sample(s_pin);
  const auto n = static_cast<std::size_t>(std::ceil(std::max(t_min, tau) / dt));
  PathSample p;
  p.grid = uniform_grid(static_cast<double>(n) * dt, n);
  detail::fill_bridge(p, tau, z, s_noise);
  return p;
}

// ---------------------------------------------------------------------------
// Weighted node sets in log space

/// (point, log-weight) pair of a discretized measure.
struct LogNode {
  double x;
  double log_weight;
};

/// Discretizes exp(log_shape(r)) P_tau(dr) on (a, b]: atoms plus Kronrod
/// nodes adapted to the shape.
template <class LogShape>
std::vector<LogNode> length_log_nodes(const LengthLaw& law, double a, double b, LogShape&& log_shape,
                                      const quad::Options& opt, std::span<const double> cuts = {}) {
  // Scale from atoms and a probe of the continuous part.
  double m = kNegInf;
  for (const auto& at : law.atoms()) {
    if (at.time > a && at.time <= b && at.weight > 0.0) m = std::max(m, log_shape(at.time) + std::log(at.weight));
  }
  const auto tr = detail::tail_range(law, a, b, cuts);
  if (tr.active) {
    auto probe = [&](double v) {
      const double r = tr.anchor + v * v;
      const double d = law.density(r);
      return (d > 0.0 && v > 0.0) ? log_shape(r) + std::log(2.0 * v * d) : kNegInf;
    };
    m = std::max(m, quad::log_scale(probe, tr.vcuts.front(), tr.vcuts.back()));
  }
  if (m == kNegInf) m = 0.0;
  std::vector<LogNode> out;
  const auto nodes = tail_nodes(law, a, b, [&](double r) { return std::exp(log_shape(r) - m); }, opt, cuts);
  out.reserve(nodes.size());
  for (const auto& n : nodes) {
    const double lw = std::log(n.weight) + log_shape(n.x);
    if (lw > kNegInf) out.push_back({n.x, lw});
  }
  return out;
}

namespace detail {

inline std::vector<double> pin_cuts(const PinLaw& pin, double center, double sd) {
  const auto [lo, hi] = pin.support();
  std::vector<double> cuts{lo, hi};
  for (double k : {-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0}) {
    const double c = center + k * sd;
    if (c > lo && c < hi) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

}  // namespace detail

/// Log-scaled vector integral over a continuous pin law of exp(log_k(z)) f(z).
/// `center`/`sd` locate the kernel's peak so narrow kernels are not missed.
template <std::size_t N, class LogK>
ScaledIntegral<N> integrate_pin_log(const PinLaw& pin, LogK&& log_k, double center, double sd,
                                    const quad::Options& opt) {
  ScaledIntegral<N> out;
  const auto cuts = detail::pin_cuts(pin, center, sd);
  auto logf = [&](double z) {
    auto l = log_k(z);
    const double lf = pin.log_density(z);
    for (auto& x : l) x += lf;
    return l;
  };
  double m = kNegInf;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    m = std::max(m, quad::log_scale([&](double z) { return logf(z)[0]; }, cuts[i], cuts[i + 1], 9));
  }
  if (m == kNegInf) return out;
  out.log_scale = m;
  auto f = [&](double z) {
    auto l = logf(z);
    std::array<double, N> y;
    for (std::size_t k = 0; k < N; ++k) y[k] = std::exp(l[k] - m);
    return y;
  };
  const auto res = quad::integrate<N>(f, std::span<const double>(cuts), opt);
  out.scaled = res.value;
  out.error = res.error;
  out.converged = res.converged;
  bool zero = true;
  for (double s : out.scaled) zero = zero && s == 0.0;
  if (zero) out.log_scale = kNegInf;
  return out;
}

template <class LogK>
std::vector<LogNode> pin_log_nodes(const PinLaw& pin, LogK&& log_k, double center, double sd,
                                   const quad::Options& opt) {
  const auto cuts = detail::pin_cuts(pin, center, sd);
  auto logf = [&](double z) { return log_k(z) + pin.log_density(z); };
  double m = kNegInf;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) m = std::max(m, quad::log_scale(logf, cuts[i], cuts[i + 1], 9));
  std::vector<LogNode> out;
  if (m == kNegInf) return out;
  const auto nodes = quad::adaptive_nodes([&](double z) { return std::exp(logf(z) - m); },
                                          std::span<const double>(cuts), opt);
  for (const auto& n : nodes) {
    const double lw = std::log(n.weight) + logf(n.x);
    if (lw > kNegInf) out.push_back({n.x, lw});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Posterior of (tau, Z) given a single observation

struct PosteriorEntry {
  double length;      // r
  double pin;         // z
  double log_weight;  // normalized
  double weight;      // exp(log_weight)
};

struct PosteriorTable {
  double time = 0.0;
  double observation = 0.0;
  std::vector<PosteriorEntry> entries;
  double log_normalizer = kNegInf;  // log of the Bayes denominator
  bool absorbed = false;            // discrete pin hit exactly

  template <class G>
  double expectation(G&& g) const {
    double acc = 0.0;
    for (const auto& e : entries) acc += e.weight * g(e.length, e.pin);
    return acc;
  }
  double total_weight() const {
    return expectation([](double, double) { return 1.0; });
  }
  /// P(tau <= time | observation).
  double prob_absorbed() const {
    const double t = time;
    return expectation([t](double r, double) { return r <= t ? 1.0 : 0.0; });
  }
};

namespace detail {

inline void normalize(PosteriorTable& table) {
  std::vector<double> lw;
  lw.reserve(table.entries.size());
  for (const auto& e : table.entries) lw.push_back(e.log_weight);
  const double z = log_sum_exp(lw);
  if (!(z > kNegInf) || !std::isfinite(z)) {
    throw InferenceError("posterior: observation x=" + std::to_string(table.observation) + " at t=" +
                         std::to_string(table.time) + " has zero likelihood under the model");
  }
  table.log_normalizer = z;
  for (auto& e : table.entries) {
    e.log_weight -= z;
    e.weight = std::exp(e.log_weight);
  }
}

/// log phi_{bridge^{r,z}_t}(x): marginal density of the (r, z)-bridge at t.
inline double log_bridge_marginal(double t, double r, double z, double x) {
  return gauss_logpdf(t * (r - t) / r, x, t * z / r);
}

}  // namespace detail

struct PosteriorOptions {
  std::vector<double> length_cuts;  // forced r panel boundaries (e.g. a later time u)
};

/// Posterior table of (tau, Z) given bridge_t = x.
inline PosteriorTable posterior_tau_z(const RandomBridgeModel& model, double t, double x,
                                      const PosteriorOptions& popt = {}) {
  if (!(t > 0.0)) throw DomainError("posterior_tau_z: need t > 0");
  if (!std::isfinite(x)) throw DomainError("posterior_tau_z: observation must be finite");
  PosteriorTable table;
  table.time = t;
  table.observation = x;
  const auto& law = model.length;
  const auto& opt = model.quad;
  const std::span<const double> cuts(popt.length_cuts);

  if (model.pin.is_discrete()) {
    const auto& d = model.pin.pins();
    const auto hit = std::find(d.points.begin(), d.points.end(), x);
    if (hit != d.points.end()) {
      // Absorbed: tau <= t and Z = x; the length posterior is P_tau restricted to (0, t].
      table.absorbed = true;
      const auto i = static_cast<std::size_t>(std::distance(d.points.begin(), hit));
      for (const auto& n : length_log_nodes(law, 0.0, t, [](double) { return 0.0; }, opt, cuts)) {
        table.entries.push_back({n.x, x, n.log_weight + std::log(d.probs[i]), 0.0});
      }
      detail::normalize(table);
      return table;
    }
    for (std::size_t i = 0; i < d.points.size(); ++i) {
      if (!(d.probs[i] > 0.0)) continue;
      const double zi = d.points[i];
      const double lp = std::log(d.probs[i]);
      auto shape = [&](double r) { return r > t ? detail::log_bridge_marginal(t, r, zi, x) : kNegInf; };
      for (const auto& n : length_log_nodes(law, t, std::numeric_limits<double>::infinity(), shape, opt, cuts)) {
        table.entries.push_back({n.x, zi, n.log_weight + lp, 0.0});
      }
    }
    detail::normalize(table);
    return table;
  }

  // Continuous pin: {tau <= t} puts Z at the observation with weight f(x).
  const double lfx = model.pin.log_density(x);
  if (lfx > kNegInf) {
    for (const auto& n : length_log_nodes(law, 0.0, t, [](double) { return 0.0; }, opt, cuts)) {
      table.entries.push_back({n.x, x, n.log_weight + lfx, 0.0});
    }
  }
  auto kernel = [&](double r) {
    // As a function of z the marginal density is Gaussian with this center/sd.
    return std::pair{r * x / t, std::sqrt(r * (r - t) / t)};
  };
  auto log_pin_mass = [&](double r) {
    if (!(r > t)) return kNegInf;
    const auto [c, s] = kernel(r);
    const auto res = integrate_pin_log<1>(
        model.pin, [&](double z) { return std::array<double, 1>{detail::log_bridge_marginal(t, r, z, x)}; }, c, s, opt);
    return res.log_value(0);
  };
  for (const auto& rn :
       length_log_nodes(law, t, std::numeric_limits<double>::infinity(), log_pin_mass, opt, cuts)) {
    const double r = rn.x;
    const double lw_r = rn.log_weight - log_pin_mass(r);  // P_tau node weight alone
    const auto [c, s] = kernel(r);
    for (const auto& zn :
         pin_log_nodes(model.pin, [&](double z) { return detail::log_bridge_marginal(t, r, z, x); }, c, s, opt)) {
      table.entries.push_back({r, zn.x, lw_r + zn.log_weight, 0.0});
    }
  }
  detail::normalize(table);
  return table;
}

// ---------------------------------------------------------------------------
// Predictive laws

/// E[g(r, z, Y)] for Y ~ N(mean, variance); lets callers plug in closed forms.
using GaussExpectation = std::function<double(double r, double z, double mean, double variance)>;

namespace detail {

// Abrupt changes of h on a coarse scan of [lo, hi], each pinned down by
// bisection. A step between scan points shows up as one increment much
// larger than its neighbours; smooth variation does not.
template <class H>
std::vector<double> jump_points(H& h, double lo, double hi, int scan = 80) {
  std::vector<double> v(scan + 1);
  for (int i = 0; i <= scan; ++i) v[i] = h(lo + (hi - lo) * i / scan);
  const auto [vmin, vmax] = std::minmax_element(v.begin(), v.end());
  const double floor = 1e-12 * (*vmax - *vmin);
  std::vector<double> out;
  if (!(floor > 0.0)) return out;
  auto delta = [&](int i) { return i < 0 || i >= scan ? 0.0 : std::abs(v[i + 1] - v[i]); };
  for (int i = 0; i < scan; ++i) {
    if (!(delta(i) > 4.0 * std::max(delta(i - 1), delta(i + 1)) + floor)) continue;
    double a = lo + (hi - lo) * i / scan, b = lo + (hi - lo) * (i + 1) / scan;
    double fa = v[i], fb = v[i + 1];
    for (int k = 0; k < 60 && b - a > 1e-14 * (1.0 + std::abs(a)); ++k) {
      const double m = 0.5 * (a + b);
      const double fm = h(m);
      if (std::abs(fm - fa) >= std::abs(fb - fm)) {
        b = m;
        fb = fm;
      } else {
        a = m;
        fa = fm;
      }
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

}  // namespace detail

/// E[g(Y)], Y ~ N(mean, variance), by adaptive quadrature on +-10 sd.
/// Jumps of g are located first and become panel edges.
template <class G>
double gaussian_expectation(G&& g, double mean, double variance, double abs_tol = 1e-11) {
  const double sd = std::sqrt(variance);
  if (sd == 0.0) return g(mean);
  auto gw = [&](double w) { return g(mean + sd * w); };
  std::vector<double> cuts{-10.0, -3.0, 0.0, 3.0, 10.0};
  for (double j : detail::jump_points(gw, -10.0, 10.0)) cuts.push_back(j);
  std::sort(cuts.begin(), cuts.end());
  auto f = [&](double w) { return std::array<double, 1>{gw(w) * gauss_pdf(1.0, w)}; };
  return quad::integrate<1>(f, std::span<const double>(cuts), {abs_tol, 1e-10, 400}).value[0];
}

template <class G>
GaussExpectation by_quadrature(G g) {
  return [g](double r, double z, double mean, double var) {
    return gaussian_expectation([&](double y) { return g(r, z, y); }, mean, var);
  };
}

/// E[h(tau, Z) | bridge_t = x]. Discrete pins use the posterior table; for a
/// continuous pin each length node gets an adaptive z-integral that includes h,
/// so h may jump in z. Jumps in r belong in popt.length_cuts.
template <class H>
double posterior_expectation(const RandomBridgeModel& model, double t, double x, H&& h,
                             const PosteriorOptions& popt = {}) {
  if (model.pin.is_discrete()) return posterior_tau_z(model, t, x, popt).expectation(h);
  if (!(t > 0.0)) throw DomainError("posterior_expectation: need t > 0");
  const auto& law = model.length;
  const auto& opt = model.quad;
  const std::span<const double> cuts(popt.length_cuts);
  double num = 0.0;
  std::vector<double> lw;
  std::vector<double> vals;
  const double lfx = model.pin.log_density(x);
  if (lfx > kNegInf) {
    for (const auto& n : length_log_nodes(law, 0.0, t, [](double) { return 0.0; }, opt, cuts)) {
      lw.push_back(n.log_weight + lfx);
      vals.push_back(h(n.x, x));
    }
  }
  auto log_k = [&](double r, double z) { return detail::log_bridge_marginal(t, r, z, x); };
  auto log_pin_mass = [&](double r) {
    if (!(r > t)) return kNegInf;
    const auto res = integrate_pin_log<1>(
        model.pin, [&](double z) { return std::array<double, 1>{log_k(r, z)}; }, r * x / t,
        std::sqrt(r * (r - t) / t), opt);
    return res.log_value(0);
  };
  for (const auto& rn :
       length_log_nodes(law, t, std::numeric_limits<double>::infinity(), log_pin_mass, opt, cuts)) {
    const double r = rn.x;
    const auto res = integrate_pin_log<3>(
        model.pin,
        [&](double z) {
          const double l = log_k(r, z);
          const double v = h(r, z);
          return std::array<double, 3>{l, v > 0.0 ? l + std::log(v) : kNegInf, v < 0.0 ? l + std::log(-v) : kNegInf};
        },
        r * x / t, std::sqrt(r * (r - t) / t), opt);
    if (!(res.scaled[0] > 0.0)) continue;
    lw.push_back(rn.log_weight);
    vals.push_back((res.scaled[1] - res.scaled[2]) / res.scaled[0]);
  }
  const double z = log_sum_exp(lw);
  if (!(z > kNegInf) || !std::isfinite(z)) {
    throw InferenceError("posterior_expectation: observation has zero likelihood");
  }
  for (std::size_t k = 0; k < lw.size(); ++k) num += std::exp(lw[k] - z) * vals[k];
  return num;
}

/// Integrates g(tau, Z, bridge_u) against a posterior table taken at (t, x):
/// lengths r <= u are already pinned at u, longer ones move by the bridge
/// transition. The table must have a length cut at u.
inline double predict_from_table(const PosteriorTable& table, double u, const GaussExpectation& inner,
                                 const std::function<double(double, double, double)>& g) {
  double acc = 0.0;
  for (const auto& e : table.entries) {
    if (e.length <= u) {
      acc += e.weight * g(e.length, e.pin, e.pin);
    } else {
      const auto m = bridge_transition_moments({e.length, e.pin}, table.time, table.observation, u);
      acc += e.weight * inner(e.length, e.pin, m.mean, m.variance);
    }
  }
  return acc;
}

/// E[g(tau, Z, bridge_u) | bridge_t = x] with the inner Gaussian expectation
/// supplied by the caller (closed forms are much cheaper than quadrature).
inline double predict_future_with(const RandomBridgeModel& model, double t, double x, double u,
                                  const GaussExpectation& inner, const std::function<double(double, double, double)>& g) {
  if (!(t > 0.0 && u > t)) throw DomainError("predict_future: need 0 < t < u");
  const PosteriorOptions popt{{u}};
  if (model.pin.is_discrete()) return predict_from_table(posterior_tau_z(model, t, x, popt), u, inner, g);
  auto h = [&](double r, double z) {
    if (r <= u) return g(r, z, z);
    const auto m = bridge_transition_moments({r, z}, t, x, u);
    return inner(r, z, m.mean, m.variance);
  };
  return posterior_expectation(model, t, x, h, popt);
}

/// E[g(tau, Z, bridge_u) | bridge_t = x] for bounded g(r, z, y).
template <class G>
double predict_future(const RandomBridgeModel& model, double t, double x, double u, G g) {
  std::function<double(double, double, double)> gf = g;
  return predict_future_with(model, t, x, u, by_quadrature(gf), gf);
}

// ---------------------------------------------------------------------------
// Two observations, continuous pin

namespace detail {

/// log of p(r - t, z - x) / p(r, z), the pin-likelihood kernel of one observation.
inline double log_pin_kernel(double t, double x, double r, double z) {
  return gauss_logpdf(r - t, z - x) - gauss_logpdf(r, z);
}

inline void require_two_time(const RandomBridgeModel& model, double t1, double t2, double u) {
  if (model.pin.is_discrete()) throw PreconditionError("two_time_conditional: pin law must be absolutely continuous");
  if (!(t1 > 0.0 && t1 < t2 && t2 < u)) throw PreconditionError("two_time_conditional: need 0 < t1 < t2 < u");
  if (model.length.cdf(t1) > 0.0) {
    throw PreconditionError("two_time_conditional: requires P(tau <= t1) = 0; no Bayes formula with atoms on (0, t1]");
  }
}

}  // namespace detail

/// E[g(Z) | bridge^r_t = x] for the bridge with fixed length r and random pin.
template <class G>
double pin_given_observation(const RandomBridgeModel& model, double t, double x, double r, G&& g) {
  const double c = r * x / t;
  const double s = std::sqrt(r * (r - t) / t);
  const auto res = integrate_pin_log<2>(
      model.pin,
      [&](double z) {
        const double l = detail::log_pin_kernel(t, x, r, z);
        const double gz = g(z);
        return std::array<double, 2>{l, gz > 0.0 ? l + std::log(gz) : kNegInf};
      },
      c, s, model.quad);
  // g may be signed; split into positive and negative parts when needed.
  return res.scaled[0] > 0.0 ? res.scaled[1] / res.scaled[0] : 0.0;
}

/// E[g(bridge^r_u) | bridge^r_t = x] for the fixed-length, random-pin bridge.
template <class G>
double future_given_observation(const RandomBridgeModel& model, double t, double x, double u, double r, G&& g) {
  const double c = r * x / t;
  const double s = std::sqrt(r * (r - t) / t);
  const auto res = integrate_pin_log<2>(
      model.pin,
      [&](double z) {
        const double l = detail::log_pin_kernel(t, x, r, z);
        const auto m = bridge_transition_moments({r, z}, t, x, u);
        const double gy = gaussian_expectation(g, m.mean, m.variance);
        return std::array<double, 2>{l, gy > 0.0 ? l + std::log(gy) : kNegInf};
      },
      c, s, model.quad);
  return res.scaled[0] > 0.0 ? res.scaled[1] / res.scaled[0] : 0.0;
}

/// E[g(bridge_u) | bridge_{t1} = x1, bridge_{t2} = x2] for a continuous pin and
/// a length law without mass on (0, t1]. g must be nonnegative and bounded.
template <class G>
double two_time_conditional(const RandomBridgeModel& model, double t1, double t2, double u, double x1, double x2,
                            G g) {
  detail::require_two_time(model, t1, t2, u);
  const auto& law = model.length;
  const auto& opt = model.quad;
  const std::array<double, 2> times{t1, t2};
  const std::array<double, 2> xs{x1, x2};

  // Absorbed between the observations: Z = x2, tau in (t1, t2].
  const double lfx2 = model.pin.log_density(x2);
  double b1 = 0.0;
  if (lfx2 > kNegInf) {
    const auto res = integrate_tail_log<1>(
        law, t1, t2,
        [&](double r) { return std::array<double, 1>{bridge_marginal_logpdf({r, x2}, t1, x1)}; }, opt,
        std::span<const double>());
    b1 = res.value(0) * std::exp(lfx2);
  }
  const double a1 = g(x2) * b1;

  // Joint density of the two observations integrated over the pin.
  auto log_joint = [&](double r) {
    const double c = r * x2 / t2;
    const double s = std::sqrt(r * (r - t2) / t2);
    const auto res = integrate_pin_log<1>(
        model.pin, [&](double z) { return std::array<double, 1>{bridge_fdd_logpdf({r, z}, times, xs)}; }, c, s, opt);
    return res.log_value(0);
  };

  const double inf = std::numeric_limits<double>::infinity();
  double a2 = 0.0;
  double a3 = 0.0;
  double b2 = 0.0;
  const std::array<double, 1> ucut{u};
  for (const auto& n : length_log_nodes(law, t2, inf, log_joint, opt, std::span<const double>(ucut))) {
    const double w = std::exp(n.log_weight);
    b2 += w;
    if (n.x <= u) {
      a2 += w * pin_given_observation(model, t2, x2, n.x, g);  // K_{t2}
    } else {
      a3 += w * future_given_observation(model, t2, x2, u, n.x, g);  // K_{t2,u}
    }
  }
  const double denom = b1 + b2;
  if (!(denom > 0.0)) throw InferenceError("two_time_conditional: observations have zero likelihood");
  return (a1 + a2 + a3) / denom;
}

struct MarkovGap {
  double lhs;  // E[g | two observations]
  double rhs;  // E[g | latest observation]
  double gap;
};

template <class G>
MarkovGap non_markov_gap(const RandomBridgeModel& model, double t1, double t2, double u, double x1, double x2, G g) {
  const double lhs = two_time_conditional(model, t1, t2, u, x1, x2, g);
  const double rhs = predict_future(model, t2, x2, u, [&g](double, double, double y) { return g(y); });
  return {lhs, rhs, std::abs(lhs - rhs)};
}

/// Two-point length law (T1, T2 with mass 1/2 each) and a continuous pin.
template <class G>
MarkovGap non_markov_gap(const PinLaw& pin, double T1, double T2, double t1, double t2, double u, double x1, double x2,
                         G g) {
  if (!(0.0 < t1 && t1 < T1 && T1 < t2 && t2 < T2 && T2 < u)) {
    throw PreconditionError("non_markov_gap: need 0 < t1 < T1 < t2 < T2 < u");
  }
  return non_markov_gap(RandomBridgeModel{LengthLaw::two_point(T1, T2), pin}, t1, t2, u, x1, x2, g);
}

}  // namespace rbb
