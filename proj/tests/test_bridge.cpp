#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "rbb/bridge.hpp"
#include "rbb/errors.hpp"
#include "rbb/quadrature.hpp"
#include "rbb/rng.hpp"
#include "rbb/stats.hpp"

namespace {

using namespace rbb;

// Joint Gaussian density of (zeta_{t_1}, ..., zeta_{t_n}) from the bridge
// covariance s (r - t) / r, evaluated with a Cholesky factorization.
double mvn_bridge_density(const BridgeSpec& b, const std::vector<double>& ts, const std::vector<double>& xs) {
  const auto n = static_cast<Eigen::Index>(ts.size());
  Eigen::MatrixXd cov(n, n);
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i) = xs[i] - ts[i] * b.pin / b.length;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double s = std::min(ts[i], ts[j]), t = std::max(ts[i], ts[j]);
      cov(i, j) = s * (b.length - t) / b.length;
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd w = llt.matrixL().solve(d);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return std::exp(-0.5 * w.squaredNorm() - 0.5 * logdet - 0.5 * n * std::log(2.0 * std::numbers::pi));
}

TEST(SampleBridge, PinIdentityAndStart) {
  const BridgeSpec b{1.0, 0.0};
  const auto grid = uniform_grid(2.0, 8);
  auto src = rng_stream(1, 0);
  for (int i = 0; i < 100; ++i) {
    const auto p = sample_bridge(b, grid, src);
    EXPECT_EQ(p.values[0], 0.0);
    EXPECT_EQ(p.values[4], 0.0);  // t = 1 = r
    EXPECT_EQ(p.absorb_index, 4u);
  }
  const BridgeSpec b5{1.0, 5.0};
  const std::vector<double> g{0.0, 0.3, 0.95, 1.0, 1.2, 3.0};
  const auto p = sample_bridge(b5, g, src);
  for (std::size_t k = 3; k < g.size(); ++k) EXPECT_EQ(p.values[k], 5.0);
  EXPECT_TRUE(p.absorbed_at(3));
  EXPECT_FALSE(p.absorbed_at(2));
}

TEST(SampleBridge, PinHitWhenLengthIsNotAGridPoint) {
  const BridgeSpec b{0.77, -2.0};
  const auto grid = uniform_grid(1.0, 10);
  auto src = rng_stream(2, 0);
  const auto p = sample_bridge(b, grid, src);
  EXPECT_EQ(p.absorb_index, 8u);
  for (std::size_t k = 8; k < grid.size(); ++k) EXPECT_EQ(p.values[k], -2.0);
  EXPECT_NE(p.values[7], -2.0);
}

TEST(SampleBridge, MarginalVarianceAtMidpoint) {
  const BridgeSpec b{1.0, 0.0};
  const std::vector<double> grid{0.0, 0.5};
  const int n = 100000;
  stats::Moments m;
  auto src = rng_stream(11, 0);
  for (int i = 0; i < n; ++i) m.add(sample_bridge(b, grid, src).values[1]);
  EXPECT_NEAR(m.variance(), 0.25, 3.0 * std::sqrt(2.0 * 0.25 * 0.25 / n));
}

TEST(SampleBridge, CovarianceMatchesBridgeKernel) {
  const BridgeSpec b{2.0, 1.5};
  const double s = 0.5, t = 1.4;
  const std::vector<double> grid{0.0, s, t};
  stats::Moments prod;
  for (std::size_t i = 0; i < 100000; ++i) {
    auto src = rng_stream(12, i);
    const auto p = sample_bridge(b, grid, src);
    prod.add((p.values[1] - s * b.pin / b.length) * (p.values[2] - t * b.pin / b.length));
  }
  EXPECT_NEAR(prod.mean(), s * (b.length - t) / b.length, 3.0 * prod.stderr_mean());
}

TEST(SampleBridge, GridValidation) {
  const BridgeSpec b{1.0, 0.0};
  auto src = rng_stream(1, 1);
  EXPECT_THROW(sample_bridge(b, std::vector<double>{}, src), InputError);
  EXPECT_THROW(sample_bridge(b, std::vector<double>{0.1, 0.2}, src), InputError);
  EXPECT_THROW(sample_bridge(b, std::vector<double>{0.0, 0.2, 0.2}, src), InputError);
  EXPECT_THROW(sample_bridge(BridgeSpec{0.0, 1.0}, std::vector<double>{0.0, 1.0}, src), DomainError);
  EXPECT_THROW(uniform_grid(1.0, 0), InputError);
}

TEST(BridgeMarginal, ClosedFormValues) {
  EXPECT_NEAR(bridge_marginal_pdf({1.0, 0.0}, 0.5, 0.0), 0.7978845608, 1e-10);
  EXPECT_NEAR(bridge_marginal_pdf({1.0, 1.0}, 0.5, 0.5), 0.7978845608, 1e-10);
}

TEST(BridgeMarginal, Normalized) {
  const auto res = quad::integrate_scalar([](double x) { return bridge_marginal_pdf({2.0, -1.0}, 0.5, x); }, -8.0, 8.0);
  EXPECT_NEAR(res.value[0], 1.0, 1e-8);
}

TEST(BridgeMarginal, DegenerateTimesAreDomainErrors) {
  EXPECT_THROW(bridge_marginal_pdf({1.0, 0.0}, 0.0, 0.0), DomainError);
  EXPECT_THROW(bridge_marginal_pdf({1.0, 0.0}, 1.0, 0.0), DomainError);
  EXPECT_THROW(bridge_marginal_pdf({1.0, 0.0}, 1.5, 0.0), DomainError);
}

TEST(BridgeFdd, SinglePointIsTheMarginal) {
  for (double x : {-1.0, 0.2, 2.5}) {
    const double a = bridge_fdd_pdf({1.5, 0.7}, std::vector<double>{0.6}, std::vector<double>{x});
    const double m = bridge_marginal_pdf({1.5, 0.7}, 0.6, x);
    EXPECT_NEAR(a, m, 1e-12 * m);
  }
}

TEST(BridgeFdd, ChainRule) {
  const BridgeSpec b{1.0, 0.0};
  const double joint = bridge_fdd_pdf(b, std::vector<double>{0.3, 0.6}, std::vector<double>{0.1, -0.2});
  const double chain = bridge_marginal_pdf(b, 0.3, 0.1) * bridge_transition_pdf(b, 0.3, 0.1, 0.6, -0.2);
  EXPECT_NEAR(joint, chain, 1e-12 * chain);
}

TEST(BridgeFdd, MatchesMultivariateNormalOracle) {
  const BridgeSpec b{2.5, -1.2};
  const std::vector<double> ts{0.2, 0.9, 1.7, 2.4};
  const std::vector<double> xs{0.1, -0.4, -0.6, -1.1};
  const double oracle = mvn_bridge_density(b, ts, xs);
  EXPECT_NEAR(bridge_fdd_pdf(b, ts, xs), oracle, 1e-10 * oracle);
}

TEST(BridgeFdd, MatchesKernelDensityEstimate) {
  const BridgeSpec b{1.0, 0.0};
  const double t1 = 0.3, t2 = 0.6, x1 = 0.1, x2 = -0.2, h = 0.04;
  const std::vector<double> grid{0.0, t1, t2};
  const std::size_t n = 1000000;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto src = rng_stream(21, i);
    const auto p = sample_bridge(b, grid, src);
    if (std::abs(p.values[1] - x1) < h && std::abs(p.values[2] - x2) < h) ++hits;
  }
  const double area = 4.0 * h * h;
  const double q = static_cast<double>(hits) / n;
  const double est = q / area;
  const double se = std::sqrt(q * (1.0 - q) / n) / area;
  EXPECT_NEAR(est, bridge_fdd_pdf(b, std::vector<double>{t1, t2}, std::vector<double>{x1, x2}), 3.0 * se);
}

TEST(BridgeFdd, InputErrors) {
  const BridgeSpec b{1.0, 0.0};
  EXPECT_THROW(bridge_fdd_pdf(b, std::vector<double>{0.5, 0.4}, std::vector<double>{0.0, 0.0}), DomainError);
  EXPECT_THROW(bridge_fdd_pdf(b, std::vector<double>{0.5, 1.0}, std::vector<double>{0.0, 0.0}), DomainError);
  EXPECT_THROW(bridge_fdd_pdf(b, std::vector<double>{0.5}, std::vector<double>{0.0, 0.0}), DomainError);
}

TEST(BridgeTransition, TwoFormsAgree) {
  const BridgeSpec b{1.0, 0.0};
  const double p1 = bridge_transition_pdf(b, 0.25, 0.1, 0.5, 0.2);
  const double p2 = bridge_transition_pdf_gaussian_form(b, 0.25, 0.1, 0.5, 0.2);
  EXPECT_NEAR(p1, p2, 1e-12 * p2);
}

TEST(BridgeTransition, Normalized) {
  const BridgeSpec b{1.0, 0.0};
  const auto res =
      quad::integrate_scalar([&](double y) { return bridge_transition_pdf(b, 0.25, 0.1, 0.5, y); }, -8.0, 8.0);
  EXPECT_NEAR(res.value[0], 1.0, 1e-8);
}

TEST(BridgeTransition, ConditionalMean) {
  const BridgeSpec b{1.0, 2.0};
  const auto res =
      quad::integrate_scalar([&](double y) { return y * bridge_transition_pdf(b, 0.5, 0.0, 0.75, y); }, -8.0, 10.0);
  EXPECT_NEAR(res.value[0], 1.0, 1e-6);
  const auto m = bridge_transition_moments(b, 0.5, 0.0, 0.75);
  EXPECT_NEAR(m.mean, 1.0, 1e-15);
  EXPECT_NEAR(m.variance, 0.125, 1e-15);
}

TEST(BridgeTransition, ChapmanKolmogorov) {
  const BridgeSpec b{3.0, 1.0};
  const double t = 0.4, s = 1.1, u = 2.2, x = -0.3, y = 0.9;
  const auto res = quad::integrate_scalar(
      [&](double w) { return bridge_transition_pdf(b, t, x, s, w) * bridge_transition_pdf(b, s, w, u, y); }, -12.0,
      12.0);
  EXPECT_NEAR(res.value[0], bridge_transition_pdf(b, t, x, u, y), 1e-10);
}

TEST(BridgeTransition, OrderingViolationsAreDomainErrors) {
  const BridgeSpec b{1.0, 0.0};
  EXPECT_THROW(bridge_transition_pdf(b, 0.5, 0.0, 0.5, 0.0), DomainError);
  EXPECT_THROW(bridge_transition_pdf(b, 0.5, 0.0, 1.0, 0.0), DomainError);
  EXPECT_THROW(bridge_transition_pdf(b, 0.0, 0.0, 0.5, 0.0), DomainError);
}

TEST(BridgeDrift, DirectValues) {
  EXPECT_EQ(bridge_drift({2.0, 1.0}, 1.0, 0.0), 1.0);
  EXPECT_EQ(bridge_drift({2.0, 1.0}, 3.0, 7.0), 0.0);
  EXPECT_THROW(bridge_drift({2.0, 1.0}, -1.0, 0.0), DomainError);
}

TEST(BridgeDrift, FiniteDifferenceOracle) {
  const BridgeSpec b{1.0, 0.0};
  const double s = 0.5, x = 0.4, delta = 1e-3, eps = 0.02;
  const std::vector<double> grid{0.0, s, s + delta};
  stats::Moments m;
  for (std::size_t i = 0; i < 4000000; ++i) {
    auto src = rng_stream(31, i);
    const auto p = sample_bridge(b, grid, src);
    if (std::abs(p.values[1] - x) < eps) m.add((p.values[2] - p.values[1]) / delta);
  }
  EXPECT_NEAR(m.mean(), bridge_drift(b, s, x), 3.0 * m.stderr_mean());
  EXPECT_DOUBLE_EQ(bridge_drift(b, s, x), -0.8);
}

TEST(EulerBridge, MarginalsMatchExactConstruction) {
  const BridgeSpec b{1.0, 0.5};
  const auto grid = uniform_grid(1.2, 600);
  const std::size_t idx = 250;  // t = 0.5
  std::vector<double> exact, euler;
  std::size_t capped = 0;
  for (std::size_t i = 0; i < 10000; ++i) {
    auto s1 = rng_stream(41, i);
    auto s2 = rng_stream(42, i);
    exact.push_back(sample_bridge(b, grid, s1).values[idx]);
    const auto e = euler_simulate_bridge(b, grid, s2, {}, &capped);
    euler.push_back(e.values[idx]);
    ASSERT_EQ(e.values.back(), 0.5);
  }
  EXPECT_GE(stats::ks_two_sample(exact, euler).p_value, 0.01);
  EXPECT_EQ(capped, 0u);
}

TEST(EulerBridge, DriftCapIsCounted) {
  const BridgeSpec b{1.0, 1e9};
  const std::vector<double> grid{0.0, 0.5, 0.75};
  auto src = rng_stream(1, 2);
  std::size_t capped = 0;
  const auto p = euler_simulate_bridge(b, grid, src, {}, &capped);
  EXPECT_EQ(capped, 2u);
  EXPECT_TRUE(std::isfinite(p.values.back()));
}

}  // namespace
