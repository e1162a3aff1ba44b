#pragma once

// Laws of the random length (atoms plus an absolutely continuous part) and of
// the pinning point (discrete or continuous), with the tail-integration
// engine used by every posterior formula.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rbb/errors.hpp"
#include "rbb/gaussian.hpp"
#include "rbb/quadrature.hpp"
#include "rbb/rng.hpp"

namespace rbb {

/// Exponential density rate * exp(-rate (r - offset)) on (offset, inf).
struct ExponentialLength {
  double rate;
  double offset = 0.0;
};

struct UniformLength {
  double lo;
  double hi;
};

/// Piecewise-linear density through (knots[k], values[k]); normalized on
/// construction.
struct TableLength {
  std::vector<double> knots;
  std::vector<double> values;
  std::vector<double> cumulative;  // CDF at knots
};

using ContinuousLength = std::variant<ExponentialLength, UniformLength, TableLength>;

class LengthLaw {
 public:
  struct Atom {
    double time;
    double weight;
  };

  static constexpr double kDefaultTailLevel = 1e-10;

  LengthLaw(std::vector<Atom> atoms, std::optional<ContinuousLength> continuous,
            double continuous_mass, double tail_level = kDefaultTailLevel)
      : atoms_(std::move(atoms)),
        continuous_(std::move(continuous)),
        continuous_mass_(continuous ? continuous_mass : 0.0),
        tail_level_(tail_level) {
    validate();
  }

  static LengthLaw exponential(double rate, double offset = 0.0) {
    return {{}, ExponentialLength{rate, offset}, 1.0};
  }
  static LengthLaw two_point(double t1, double t2, double w1 = 0.5) {
    return {{{t1, w1}, {t2, 1.0 - w1}}, std::nullopt, 0.0};
  }
  static LengthLaw point_mass(double t) { return {{{t, 1.0}}, std::nullopt, 0.0}; }
  static LengthLaw uniform(double lo, double hi) { return {{}, UniformLength{lo, hi}, 1.0}; }
  static LengthLaw table(std::vector<double> knots, std::vector<double> values) {
    return {{}, make_table(std::move(knots), std::move(values)), 1.0};
  }
  static LengthLaw atoms_only(std::vector<Atom> atoms) { return {std::move(atoms), std::nullopt, 0.0}; }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<ContinuousLength>& continuous() const { return continuous_; }
  double continuous_mass() const { return continuous_mass_; }
  double tail_level() const { return tail_level_; }

  /// Density of the absolutely continuous part (already scaled by its mass).
  double density(double r) const {
    if (!continuous_) return 0.0;
    return continuous_mass_ * std::visit([r](const auto& c) { return cont_pdf(c, r); }, *continuous_);
  }

  /// P(tau <= t).
  double cdf(double t) const {
    if (!(t > 0.0)) return 0.0;
    double acc = 0.0;
    for (const auto& a : atoms_) {
      if (a.time <= t) acc += a.weight;
    }
    if (continuous_) {
      acc += continuous_mass_ * std::visit([t](const auto& c) { return cont_cdf(c, t); }, *continuous_);
    }
    return std::min(acc, 1.0);
  }

  /// P(tau > t), accurate in the far tail.
  double survival(double t) const {
    double acc = 0.0;
    for (const auto& a : atoms_) {
      if (a.time > t) acc += a.weight;
    }
    if (continuous_) {
      acc += continuous_mass_ * std::visit([t](const auto& c) { return cont_sf(c, t); }, *continuous_);
    }
    return acc;
  }

  double mean() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.time * a.weight;
    if (continuous_) {
      m += continuous_mass_ * std::visit([](const auto& c) { return cont_mean(c); }, *continuous_);
    }
    return m;
  }

  /// Support interval [lo, hi] of the continuous part (hi may be +inf).
  std::pair<double, double> continuous_support() const {
    if (!continuous_) return {0.0, 0.0};
    return std::visit([](const auto& c) { return cont_support(c); }, *continuous_);
  }

  /// Kinks of the continuous density, strictly inside its support.
  std::vector<double> breakpoints() const {
    if (!continuous_) return {};
    if (const auto* t = std::get_if<TableLength>(&*continuous_)) {
      return {t->knots.begin() + 1, t->knots.end() - 1};
    }
    return {};
  }

  /// Upper truncation point for integrals over (a, inf): the conditional
  /// continuous tail beyond it carries relative mass below tail_level.
  double upper_cut(double a) const {
    if (!continuous_) return a;
    const auto [lo, hi] = continuous_support();
    if (std::isfinite(hi)) return hi;
    const auto& e = std::get<ExponentialLength>(*continuous_);
    const double from = std::max(a, lo);
    return from - std::log(tail_level_) / e.rate;
  }

  /// Inverse CDF of the continuous part alone, p in (0, 1).
  double continuous_quantile(double p) const {
    return std::visit([p](const auto& c) { return cont_quantile(c, p); }, *continuous_);
  }

  double sample(RngStream& src) const {
    const double u = src.uniform();
    double acc = 0.0;
    for (const auto& a : atoms_) {
      acc += a.weight;
      if (u < acc) return a.time;
    }
    if (!continuous_) return atoms_.back().time;
    return continuous_quantile(src.uniform());
  }

 private:
  static TableLength make_table(std::vector<double> knots, std::vector<double> values) {
    if (knots.size() < 2 || knots.size() != values.size()) {
      throw InputError("table length law needs >= 2 knots with matching values");
    }
    for (std::size_t k = 0; k < knots.size(); ++k) {
      if (values[k] < 0.0) throw InputError("table length law: negative density value");
      if (k > 0 && !(knots[k] > knots[k - 1])) throw InputError("table length law: knots must increase");
    }
    if (!(knots.front() > 0.0)) throw InputError("table length law: support must be in (0, inf)");
    TableLength t{std::move(knots), std::move(values), {}};
    t.cumulative.assign(t.knots.size(), 0.0);
    for (std::size_t k = 1; k < t.knots.size(); ++k) {
      t.cumulative[k] = t.cumulative[k - 1] + 0.5 * (t.values[k] + t.values[k - 1]) * (t.knots[k] - t.knots[k - 1]);
    }
    const double total = t.cumulative.back();
    if (!(total > 0.0)) throw InputError("table length law: zero total mass");
    for (auto& v : t.values) v /= total;
    for (auto& c : t.cumulative) c /= total;
    return t;
  }

  void validate() const {
    double mass = continuous_mass_;
    for (const auto& a : atoms_) {
      if (!(a.time > 0.0) || !std::isfinite(a.time)) {
        throw InputError("length law: atoms must be strictly positive and finite");
      }
      if (a.weight < 0.0) throw InputError("length law: negative atom weight");
      mass += a.weight;
    }
    if (std::abs(mass - 1.0) > 1e-12) {
      throw InputError("length law: total mass " + std::to_string(mass) + " != 1");
    }
    if (atoms_.empty() && !continuous_) throw InputError("length law: empty");
    if (!(tail_level_ > 0.0 && tail_level_ < 1e-3)) throw InputError("length law: tail level outside (0, 1e-3)");
    if (continuous_) {
      std::visit([](const auto& c) { check(c); }, *continuous_);
    }
  }

  static void check(const ExponentialLength& e) {
    if (!(e.rate > 0.0) || !(e.offset >= 0.0)) throw InputError("exponential length: rate > 0, offset >= 0 required");
  }
  static void check(const UniformLength& u) {
    if (!(u.lo >= 0.0 && u.hi > u.lo)) throw InputError("uniform length: need 0 <= lo < hi");
  }
  static void check(const TableLength&) {}

  static double cont_pdf(const ExponentialLength& e, double r) {
    return r > e.offset ? e.rate * std::exp(-e.rate * (r - e.offset)) : 0.0;
  }
  static double cont_cdf(const ExponentialLength& e, double t) {
    return t > e.offset ? -std::expm1(-e.rate * (t - e.offset)) : 0.0;
  }
  static double cont_sf(const ExponentialLength& e, double t) {
    return t > e.offset ? std::exp(-e.rate * (t - e.offset)) : 1.0;
  }
  static double cont_mean(const ExponentialLength& e) { return e.offset + 1.0 / e.rate; }
  static std::pair<double, double> cont_support(const ExponentialLength& e) {
    return {e.offset, std::numeric_limits<double>::infinity()};
  }
  static double cont_quantile(const ExponentialLength& e, double p) { return e.offset - std::log1p(-p) / e.rate; }

  static double cont_pdf(const UniformLength& u, double r) { return (r > u.lo && r < u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; }
  static double cont_cdf(const UniformLength& u, double t) { return std::clamp((t - u.lo) / (u.hi - u.lo), 0.0, 1.0); }
  static double cont_sf(const UniformLength& u, double t) { return 1.0 - cont_cdf(u, t); }
  static double cont_mean(const UniformLength& u) { return 0.5 * (u.lo + u.hi); }
  static std::pair<double, double> cont_support(const UniformLength& u) { return {u.lo, u.hi}; }
  static double cont_quantile(const UniformLength& u, double p) { return u.lo + p * (u.hi - u.lo); }

  static std::size_t segment(const TableLength& t, double r) {
    const auto it = std::upper_bound(t.knots.begin(), t.knots.end(), r);
    const auto k = static_cast<std::size_t>(std::distance(t.knots.begin(), it));
    return std::clamp<std::size_t>(k, 1, t.knots.size() - 1) - 1;
  }
  static double cont_pdf(const TableLength& t, double r) {
    if (r <= t.knots.front() || r >= t.knots.back()) return 0.0;
    const auto k = segment(t, r);
    const double w = (r - t.knots[k]) / (t.knots[k + 1] - t.knots[k]);
    return t.values[k] + w * (t.values[k + 1] - t.values[k]);
  }
  static double cont_cdf(const TableLength& t, double x) {
    if (x <= t.knots.front()) return 0.0;
    if (x >= t.knots.back()) return 1.0;
    const auto k = segment(t, x);
    return t.cumulative[k] + 0.5 * (t.values[k] + cont_pdf(t, x)) * (x - t.knots[k]);
  }
  static double cont_sf(const TableLength& t, double x) { return 1.0 - cont_cdf(t, x); }
  static double cont_mean(const TableLength& t) {
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < t.knots.size(); ++k) {
      const double a = t.knots[k], b = t.knots[k + 1], fa = t.values[k], fb = t.values[k + 1];
      // exact integral of r * (linear density) over [a, b]
      const double slope = (fb - fa) / (b - a);
      const double c0 = fa - slope * a;
      m += c0 * (b * b - a * a) / 2.0 + slope * (b * b * b - a * a * a) / 3.0;
    }
    return m;
  }
  static std::pair<double, double> cont_support(const TableLength& t) { return {t.knots.front(), t.knots.back()}; }
  static double cont_quantile(const TableLength& t, double p) {
    const auto it = std::upper_bound(t.cumulative.begin(), t.cumulative.end(), p);
    auto k = static_cast<std::size_t>(std::distance(t.cumulative.begin(), it));
    k = std::clamp<std::size_t>(k, 1, t.knots.size() - 1) - 1;
    const double h = t.knots[k + 1] - t.knots[k];
    const double fa = t.values[k];
    const double slope = (t.values[k + 1] - fa) / h;
    const double need = p - t.cumulative[k];
    // fa * d + slope * d^2 / 2 = need
    double d;
    if (std::abs(slope) < 1e-14) {
      d = fa > 0.0 ? need / fa : 0.0;
    } else {
      const double disc = std::max(0.0, fa * fa + 2.0 * slope * need);
      d = 2.0 * need / (fa + std::sqrt(disc));
    }
    return t.knots[k] + std::clamp(d, 0.0, h);
  }

  std::vector<Atom> atoms_;
  std::optional<ContinuousLength> continuous_;
  double continuous_mass_;
  double tail_level_;
};

inline double length_cdf(const LengthLaw& law, double t) { return law.cdf(t); }

// ---------------------------------------------------------------------------
// Pinning point

struct DiscretePins {
  std::vector<double> points;
  std::vector<double> probs;
};

struct GaussianPin {
  double mean;
  double sd;
  double support_sds = 8.0;
};

struct UniformPin {
  double lo;
  double hi;
};

class PinLaw {
 public:
  using Variant = std::variant<DiscretePins, GaussianPin, UniformPin>;

  explicit PinLaw(Variant v) : v_(std::move(v)) { validate(); }

  static PinLaw discrete(std::vector<double> points, std::vector<double> probs) {
    return PinLaw(DiscretePins{std::move(points), std::move(probs)});
  }
  static PinLaw binomial(int n, double p) {
    std::vector<double> pts, probs;
    for (int k = 0; k <= n; ++k) {
      pts.push_back(k);
      probs.push_back(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) *
                      std::pow(p, k) * std::pow(1.0 - p, n - k));
    }
    const double s = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (auto& q : probs) q /= s;
    return discrete(std::move(pts), std::move(probs));
  }
  static PinLaw gaussian(double mean, double sd) { return PinLaw(GaussianPin{mean, sd}); }
  static PinLaw uniform(double lo, double hi) { return PinLaw(UniformPin{lo, hi}); }

  bool is_discrete() const { return std::holds_alternative<DiscretePins>(v_); }
  const DiscretePins& pins() const { return std::get<DiscretePins>(v_); }
  const Variant& variant() const { return v_; }

  /// Density of a continuous pin law.
  double density(double z) const {
    if (const auto* g = std::get_if<GaussianPin>(&v_)) return gauss_pdf(g->sd * g->sd, z, g->mean);
    if (const auto* u = std::get_if<UniformPin>(&v_)) return (z >= u->lo && z <= u->hi) ? 1.0 / (u->hi - u->lo) : 0.0;
    throw DomainError("PinLaw::density on a discrete law");
  }
  double log_density(double z) const {
    if (const auto* g = std::get_if<GaussianPin>(&v_)) return gauss_logpdf(g->sd * g->sd, z, g->mean);
    const double d = density(z);
    return d > 0.0 ? std::log(d) : kNegInf;
  }

  /// Integration range for continuous pins.
  std::pair<double, double> support() const {
    if (const auto* g = std::get_if<GaussianPin>(&v_)) {
      return {g->mean - g->support_sds * g->sd, g->mean + g->support_sds * g->sd};
    }
    if (const auto* u = std::get_if<UniformPin>(&v_)) return {u->lo, u->hi};
    const auto& d = std::get<DiscretePins>(v_);
    return {*std::min_element(d.points.begin(), d.points.end()), *std::max_element(d.points.begin(), d.points.end())};
  }

  double cdf(double z) const {
    if (const auto* g = std::get_if<GaussianPin>(&v_)) return normal_cdf((z - g->mean) / g->sd);
    if (const auto* u = std::get_if<UniformPin>(&v_)) return std::clamp((z - u->lo) / (u->hi - u->lo), 0.0, 1.0);
    const auto& d = std::get<DiscretePins>(v_);
    double acc = 0.0;
    for (std::size_t i = 0; i < d.points.size(); ++i) {
      if (d.points[i] <= z) acc += d.probs[i];
    }
    return acc;
  }

  double mean() const {
    if (const auto* g = std::get_if<GaussianPin>(&v_)) return g->mean;
    if (const auto* u = std::get_if<UniformPin>(&v_)) return 0.5 * (u->lo + u->hi);
    const auto& d = std::get<DiscretePins>(v_);
    return std::inner_product(d.points.begin(), d.points.end(), d.probs.begin(), 0.0);
  }

  double sample(RngStream& src) const {
    if (const auto* g = std::get_if<GaussianPin>(&v_)) return src.normal(g->mean, g->sd);
    if (const auto* u = std::get_if<UniformPin>(&v_)) return u->lo + (u->hi - u->lo) * src.uniform();
    const auto& d = std::get<DiscretePins>(v_);
    const double x = src.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < d.points.size(); ++i) {
      acc += d.probs[i];
      if (x < acc) return d.points[i];
    }
    return d.points.back();
  }

 private:
  void validate() const {
    if (const auto* d = std::get_if<DiscretePins>(&v_)) {
      if (d->points.empty() || d->points.size() != d->probs.size()) {
        throw InputError("discrete pins: points and probs must be non-empty and equal length");
      }
      double s = 0.0;
      for (double p : d->probs) {
        if (!(p >= 0.0)) throw InputError("discrete pins: negative probability");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-12) throw InputError("discrete pins: probabilities sum to " + std::to_string(s));
      auto sorted = d->points;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InputError("discrete pins: points must be distinct");
      }
    } else if (const auto* g = std::get_if<GaussianPin>(&v_)) {
      if (!(g->sd > 0.0)) throw InputError("gaussian pin: sd must be > 0");
    } else if (const auto* u = std::get_if<UniformPin>(&v_)) {
      if (!(u->hi > u->lo)) throw InputError("uniform pin: need lo < hi");
    }
  }

  Variant v_;
};

// ---------------------------------------------------------------------------
// Tail integration: sum over atoms in (a, b] plus quadrature of the
// continuous part. The continuous part is integrated in v with r = a + v^2,
// which absorbs (r - a)^(-1/2) endpoint singularities.

template <std::size_t N>
struct ScaledIntegral {
  double log_scale = kNegInf;         // integral[k] = exp(log_scale) * scaled[k]
  std::array<double, N> scaled{};
  std::array<double, N> error{};      // on the scaled values
  bool converged = true;

  double value(std::size_t k = 0) const {
    return log_scale == kNegInf ? 0.0 : std::exp(log_scale) * scaled[k];
  }
  double log_value(std::size_t k = 0) const {
    return scaled[k] > 0.0 ? log_scale + std::log(scaled[k]) : kNegInf;
  }
};

namespace detail {

struct TailRange {
  bool active = false;
  double anchor = 0.0;  // r = anchor + v^2
  std::vector<double> vcuts;
};

inline TailRange tail_range(const LengthLaw& law, double a, double b, std::span<const double> extra_cuts) {
  TailRange tr;
  if (!law.continuous() || law.continuous_mass() <= 0.0) return tr;
  const auto [lo, hi] = law.continuous_support();
  const double from = std::max(a, lo);
  const double to = std::min({b, hi, law.upper_cut(a)});
  if (!(to > from)) return tr;
  tr.active = true;
  tr.anchor = from;
  tr.vcuts.push_back(0.0);
  auto add = [&](double r) {
    if (r > from && r < to) tr.vcuts.push_back(std::sqrt(r - from));
  };
  for (double k : law.breakpoints()) add(k);
  for (double k : extra_cuts) add(k);
  tr.vcuts.push_back(std::sqrt(to - from));
  std::sort(tr.vcuts.begin(), tr.vcuts.end());
  tr.vcuts.erase(std::unique(tr.vcuts.begin(), tr.vcuts.end()), tr.vcuts.end());
  return tr;
}

}  // namespace detail

/// Integrates exp(log_h(r)) against P_tau over (a, b] in log-scaled form.
/// log_h returns std::array<double, N> of log-integrands; the largest one sets
/// the scale. extra_cuts are r-values where panel boundaries are forced.
template <std::size_t N, class LogH>
ScaledIntegral<N> integrate_tail_log(const LengthLaw& law, double a, double b, LogH&& log_h,
                                     const quad::Options& opt = {}, std::span<const double> extra_cuts = {}) {
  ScaledIntegral<N> out;
  const auto tr = detail::tail_range(law, a, b, extra_cuts);
  // scale
  double m = kNegInf;
  for (const auto& at : law.atoms()) {
    if (at.time > a && at.time <= b && at.weight > 0.0) {
      for (double l : log_h(at.time)) m = std::max(m, l + std::log(at.weight));
    }
  }
  auto log_cont = [&](double v) {
    const double r = tr.anchor + v * v;
    const double d = law.density(r);
    auto l = log_h(r);
    const double lj = (d > 0.0 && v > 0.0) ? std::log(2.0 * v * d) : kNegInf;
    for (auto& x : l) x += lj;
    return l;
  };
  if (tr.active) {
    auto top = [&](double v) {
      const auto l = log_cont(v);
      return *std::max_element(l.begin(), l.end());
    };
    m = std::max(m, quad::log_scale(top, tr.vcuts.front(), tr.vcuts.back()));
  }
  if (m == kNegInf || !std::isfinite(m)) {
    if (m == kNegInf) {
      // Probes found nothing; fall back to an unscaled pass.
      m = 0.0;
    } else {
      throw NumericError("integrate_tail_log: non-finite log scale");
    }
  }
  for (int attempt = 0;; ++attempt) {
    out = ScaledIntegral<N>{};
    out.log_scale = m;
    for (const auto& at : law.atoms()) {
      if (at.time > a && at.time <= b && at.weight > 0.0) {
        const auto l = log_h(at.time);
        for (std::size_t k = 0; k < N; ++k) out.scaled[k] += at.weight * std::exp(l[k] - m);
      }
    }
    double seen = m;
    if (tr.active) {
      auto f = [&](double v) {
        auto l = log_cont(v);
        std::array<double, N> y;
        for (std::size_t k = 0; k < N; ++k) {
          if (!std::isnan(l[k])) seen = std::max(seen, l[k]);
          y[k] = std::exp(l[k] - m);
        }
        return y;
      };
      const auto res = quad::integrate<N>(f, std::span<const double>(tr.vcuts), opt);
      for (std::size_t k = 0; k < N; ++k) {
        out.scaled[k] += res.value[k];
        out.error[k] += res.error[k];
      }
      out.converged = res.converged;
    }
    // A peak narrower than the probe spacing can overflow the first pass.
    if (seen <= m + 1.0 || !std::isfinite(seen) || attempt == 3) break;
    m = seen;
  }
  bool all_zero = true;
  for (double s : out.scaled) all_zero = all_zero && s == 0.0;
  if (all_zero) out.log_scale = kNegInf;
  return out;
}

/// Plain (linear-scale) vector integral of h against P_tau over (a, b].
template <std::size_t N, class H>
quad::Result<N> integrate_tail_vec(const LengthLaw& law, double a, double b, H&& h, const quad::Options& opt = {},
                                   std::span<const double> extra_cuts = {}) {
  quad::Result<N> out;
  out.converged = true;
  for (const auto& at : law.atoms()) {
    if (at.time > a && at.time <= b) {
      const auto v = h(at.time);
      for (std::size_t k = 0; k < N; ++k) out.value[k] += at.weight * v[k];
    }
  }
  const auto tr = detail::tail_range(law, a, b, extra_cuts);
  if (tr.active) {
    auto f = [&](double v) {
      const double r = tr.anchor + v * v;
      const double w = 2.0 * v * law.density(r);
      auto y = std::array<double, N>{};
      if (w == 0.0) return y;
      y = h(r);
      for (auto& x : y) x *= w;
      return y;
    };
    const auto res = quad::integrate<N>(f, std::span<const double>(tr.vcuts), opt);
    for (std::size_t k = 0; k < N; ++k) {
      out.value[k] += res.value[k];
      out.error[k] += res.error[k];
    }
    out.panels = res.panels;
    out.evaluations = res.evaluations;
    out.converged = res.converged;
  }
  return out;
}

struct TailIntegral {
  double value;
  double error;  // absolute error estimate of the quadrature part
};

/// integral over (a, inf) of h(r) P_tau(dr); relative error target 1e-8
/// unless overridden. Throws NumericError when quadrature does not converge.
template <class H>
TailIntegral integrate_tail(const LengthLaw& law, double a, H&& h, quad::Options opt = {1e-14, 1e-8, 4000}) {
  auto hv = [&h](double r) { return std::array<double, 1>{h(r)}; };
  const auto res = integrate_tail_vec<1>(law, a, std::numeric_limits<double>::infinity(), hv, opt);
  if (!res.converged) {
    throw NumericError("integrate_tail: quadrature did not converge (non-integrable integrand?) " + quad::describe(res));
  }
  return {res.value[0], res.error[0]};
}

/// Composite rule for integrals against P_tau over (a, b]: atoms keep their
/// weights, the continuous part contributes Kronrod nodes adapted to shape(r).
template <class Shape>
std::vector<quad::Node> tail_nodes(const LengthLaw& law, double a, double b, Shape&& shape, const quad::Options& opt,
                                   std::span<const double> extra_cuts = {}) {
  std::vector<quad::Node> nodes;
  for (const auto& at : law.atoms()) {
    if (at.time > a && at.time <= b && at.weight > 0.0) nodes.push_back({at.time, at.weight});
  }
  const auto tr = detail::tail_range(law, a, b, extra_cuts);
  if (tr.active) {
    auto f = [&](double v) {
      const double r = tr.anchor + v * v;
      return 2.0 * v * law.density(r) * shape(r);
    };
    for (const auto& n : quad::adaptive_nodes(f, std::span<const double>(tr.vcuts), opt)) {
      const double r = tr.anchor + n.x * n.x;
      const double w = n.weight * 2.0 * n.x * law.density(r);
      if (w > 0.0) nodes.push_back({r, w});
    }
  }
  return nodes;
}

}  // namespace rbb
