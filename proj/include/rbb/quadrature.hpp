#pragma once

// Adaptive Gauss-Kronrod (7/15) integration with vector-valued integrands.
//
// Integrands returning std::array<double, N> share abscissae, so a ratio of
// two integrals (a posterior mean) costs one pass. Error estimates follow the
// QUADPACK qk15 heuristic component-wise; the panel with the largest error
// norm is bisected until the global estimate meets the tolerance.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rbb/errors.hpp"

namespace rbb::quad {

struct Options {
  double abs_tol = 0.0;
  double rel_tol = 1e-10;
  int max_panels = 2000;
};

template <std::size_t N>
struct Result {
  std::array<double, N> value{};
  std::array<double, N> error{};
  int panels = 0;
  int evaluations = 0;
  bool converged = false;
};

/// One abscissa of a composite rule: integral ~= sum(weight * f(x)).
struct Node {
  double x;
  double weight;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Panel {
  double a;
  double b;
  std::array<double, N> value;
  std::array<double, N> error;
  double norm;
};

template <std::size_t N, class F>
Panel<N> gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<std::array<double, N>, 15> fv;
  fv[7] = f(center);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv[j] = f(center - dx);
    fv[14 - j] = f(center + dx);
  }
  Panel<N> p{a, b, {}, {}, 0.0};
  for (std::size_t k = 0; k < N; ++k) {
    double resk = kWgk[7] * fv[7][k];
    double resg = kWg[3] * fv[7][k];
    double resabs = std::abs(resk);
    for (int j = 0; j < 7; ++j) {
      const double s = fv[j][k] + fv[14 - j][k];
      resk += kWgk[j] * s;
      resabs += kWgk[j] * (std::abs(fv[j][k]) + std::abs(fv[14 - j][k]));
      if (j % 2 == 1) resg += kWg[j / 2] * s;
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fv[7][k] - mean);
    for (int j = 0; j < 7; ++j) {
      resasc += kWgk[j] * (std::abs(fv[j][k] - mean) + std::abs(fv[14 - j][k] - mean));
    }
    resk *= half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((resk - resg * half));
    if (resasc != 0.0 && err != 0.0) {
      err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
      err = std::max(50.0 * kEps * resabs, err);
    }
    if (!std::isfinite(resk)) err = std::numeric_limits<double>::infinity();
    p.value[k] = resk;
    p.error[k] = err;
    p.norm = std::max(p.norm, err);
  }
  return p;
}

inline bool by_norm(const auto& l, const auto& r) { return l.norm < r.norm; }

template <std::size_t N, class F>
std::vector<Panel<N>> refine(F& f, std::span<const double> cuts, const Options& opt,
                             Result<N>& out) {
  std::vector<Panel<N>> heap;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) heap.push_back(gk15<N>(f, cuts[i], cuts[i + 1]));
  }
  std::make_heap(heap.begin(), heap.end(), by_norm<Panel<N>, Panel<N>>);
  out.evaluations = 15 * static_cast<int>(heap.size());

  auto totals = [&] {
    std::array<double, N> v{};
    std::array<double, N> e{};
    for (const auto& p : heap) {
      for (std::size_t k = 0; k < N; ++k) {
        v[k] += p.value[k];
        e[k] += p.error[k];
      }
    }
    out.value = v;
    out.error = e;
  };

  while (true) {
    totals();
    double scale = 0.0;
    double err = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      scale = std::max(scale, std::abs(out.value[k]));
      err = std::max(err, out.error[k]);
    }
    if (heap.empty() || err <= std::max(opt.abs_tol, opt.rel_tol * scale)) {
      out.converged = std::isfinite(err);
      break;
    }
    if (static_cast<int>(heap.size()) >= opt.max_panels) {
      out.converged = false;
      break;
    }
    std::pop_heap(heap.begin(), heap.end(), by_norm<Panel<N>, Panel<N>>);
    const Panel<N> worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Panel at floating-point resolution; keep it and stop refining.
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), by_norm<Panel<N>, Panel<N>>);
      totals();
      out.converged = false;
      break;
    }
    heap.push_back(gk15<N>(f, worst.a, mid));
    std::push_heap(heap.begin(), heap.end(), by_norm<Panel<N>, Panel<N>>);
    heap.push_back(gk15<N>(f, mid, worst.b));
    std::push_heap(heap.begin(), heap.end(), by_norm<Panel<N>, Panel<N>>);
    out.evaluations += 30;
  }
  out.panels = static_cast<int>(heap.size());
  return heap;
}

}  // namespace detail

/// Integrates a vector-valued f over [cuts.front(), cuts.back()], with
/// panel boundaries forced at every interior cut.
template <std::size_t N, class F>
Result<N> integrate(F&& f, std::span<const double> cuts, const Options& opt = {}) {
  Result<N> out;
  if (cuts.size() < 2) return out;
  detail::refine<N>(f, cuts, opt, out);
  return out;
}

template <std::size_t N, class F>
Result<N> integrate(F&& f, double a, double b, const Options& opt = {}) {
  const std::array<double, 2> cuts{a, b};
  return integrate<N>(f, std::span<const double>(cuts), opt);
}

/// Scalar convenience form.
template <class F>
Result<1> integrate_scalar(F&& f, double a, double b, const Options& opt = {}) {
  auto g = [&f](double x) { return std::array<double, 1>{f(x)}; };
  return integrate<1>(g, a, b, opt);
}

/// Composite rule adapted to f: the Kronrod abscissae of the final panels.
/// Any g resembling f in shape is integrated by sum(w * g(x)).
template <class F>
std::vector<Node> adaptive_nodes(F&& f, std::span<const double> cuts, const Options& opt = {}) {
  auto g = [&f](double x) { return std::array<double, 1>{f(x)}; };
  Result<1> res;
  std::vector<Node> nodes;
  if (cuts.size() < 2) return nodes;
  const auto panels = detail::refine<1>(g, cuts, opt, res);
  nodes.reserve(panels.size() * 15);
  for (const auto& p : panels) {
    const double c = 0.5 * (p.a + p.b);
    const double h = 0.5 * (p.b - p.a);
    nodes.push_back({c, h * detail::kWgk[7]});
    for (int j = 0; j < 7; ++j) {
      nodes.push_back({c - h * detail::kXgk[j], h * detail::kWgk[j]});
      nodes.push_back({c + h * detail::kXgk[j], h * detail::kWgk[j]});
    }
  }
  std::sort(nodes.begin(), nodes.end(), [](const Node& l, const Node& r) { return l.x < r.x; });
  return nodes;
}

/// Largest value of log_f on a probe grid over (a, b); used to rescale
/// integrands spanning hundreds of orders of magnitude before exponentiating.
template <class F>
double log_scale(F&& log_f, double a, double b, int probes = 33) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < probes; ++i) {
    const double u = (i + 0.5) / probes;
    m = std::max(m, log_f(a + (b - a) * u));
    // Geometric probes crowd the lower endpoint where peaks hide.
    m = std::max(m, log_f(a + (b - a) * std::pow(2.0, -(i + 1.0) * 40.0 / probes)));
  }
  return m;
}

template <std::size_t N>
std::string describe(const Result<N>& r) {
  std::ostringstream os;
  os << "panels=" << r.panels << " evaluations=" << r.evaluations << " value=[";
  for (std::size_t k = 0; k < N; ++k) os << (k ? "," : "") << r.value[k];
  os << "] error=[";
  for (std::size_t k = 0; k < N; ++k) os << (k ? "," : "") << r.error[k];
  os << "]";
  return os.str();
}

}  // namespace rbb::quad
