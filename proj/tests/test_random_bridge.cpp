#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "rbb/errors.hpp"
#include "rbb/random_bridge.hpp"
#include "rbb/stats.hpp"
#include "rbb/verification.hpp"

namespace {

using namespace rbb;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Gaussian vector (zeta_{s_1}, ..., zeta_{s_n}) of the bridge with fixed
// length T and pin Z ~ N(mu, sigma^2); times s >= T stand for Z itself.
struct GaussVec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

GaussVec fixed_length_gaussian(double T, double mu, double sigma, const std::vector<double>& s) {
  const auto n = static_cast<Eigen::Index>(s.size());
  GaussVec g{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  auto frac = [&](double t) { return std::min(t, T) / T; };
  for (Eigen::Index i = 0; i < n; ++i) {
    g.mean(i) = frac(s[i]) * mu;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = std::min(s[i], T), b = std::min(s[j], T);
      const double brownian = std::min(a, b) - a * b / T;  // bridge from 0 to 0 over [0, T]
      g.cov(i, j) = brownian + frac(s[i]) * frac(s[j]) * sigma * sigma;
    }
  }
  return g;
}

// Density of the observed block and conditional law of the last coordinate.
struct Conditioned {
  double density;
  double mean;
  double variance;
};

Conditioned condition_last(const GaussVec& g, const Eigen::VectorXd& x) {
  const auto n = g.mean.size();
  const auto k = n - 1;
  const Eigen::MatrixXd soo = g.cov.topLeftCorner(k, k);
  const Eigen::VectorXd sok = g.cov.topRightCorner(k, 1);
  const Eigen::LLT<Eigen::MatrixXd> llt(soo);
  const Eigen::VectorXd d = x - g.mean.head(k);
  const Eigen::VectorXd alpha = llt.solve(d);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double dens = std::exp(-0.5 * d.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(k) * std::log(2.0 * std::numbers::pi));
  return {dens, g.mean(k) + sok.dot(alpha), g.cov(k, k) - sok.dot(llt.solve(sok))};
}

double prob_positive(double mean, double var) {
  return var <= 1e-300 ? (mean > 0.0 ? 1.0 : 0.0) : 0.5 * std::erfc(-mean / std::sqrt(2.0 * var));
}

double step(double y) { return y > 0.0 ? 1.0 : 0.0; }

// E[1{zeta_u > 0} | zeta_{t1} = x1, zeta_{t2} = x2] and E[... | zeta_{t2} = x2]
// for tau uniform on {T1, T2}, T1 < t2 < T2 < u, standard normal pin.
std::pair<double, double> gap_oracle(double T1, double T2, double t1, double t2, double u, double x1, double x2) {
  const double fz = std::exp(-0.5 * x2 * x2) / std::sqrt(2.0 * std::numbers::pi);
  // tau = T1: already pinned at t2, so Z = x2.
  const double bridge_var = t1 * (T1 - t1) / T1;
  const double d1 = fz * std::exp(-0.5 * std::pow(x1 - t1 * x2 / T1, 2) / bridge_var) /
                    std::sqrt(2.0 * std::numbers::pi * bridge_var);
  // tau = T2: Z = zeta_u, Gaussian given the observations.
  const auto g2 = fixed_length_gaussian(T2, 0.0, 1.0, {t1, t2, u});
  const auto c2 = condition_last(g2, Eigen::Vector2d(x1, x2));
  const double lhs = (d1 * step(x2) + c2.density * prob_positive(c2.mean, c2.variance)) / (d1 + c2.density);
  const auto g2b = fixed_length_gaussian(T2, 0.0, 1.0, {t2, u});
  const auto c2b = condition_last(g2b, Eigen::VectorXd::Constant(1, x2));
  const double rhs = (fz * step(x2) + c2b.density * prob_positive(c2b.mean, c2b.variance)) / (fz + c2b.density);
  return {lhs, rhs};
}

RandomBridgeModel fig2_like() { return {LengthLaw::exponential(0.1), PinLaw::discrete({-4.0, 4.0}, {0.3, 0.7})}; }

TEST(SampleRandomBridge, StartsAtZeroAndEndsAtPin) {
  const auto m = RandomBridgeModel{LengthLaw::exponential(0.1), PinLaw::gaussian(0.0, 1.0)};
  const auto grid = uniform_grid(50.0, 500);
  for (std::size_t i = 0; i < 200; ++i) {
    auto src = rng_stream(5, i);
    const auto p = sample_random_bridge(m, grid, src);
    ASSERT_EQ(p.values[0], 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      ASSERT_EQ(p.absorbed_at(k), grid[k] >= p.realized_length);
      if (p.absorbed_at(k)) ASSERT_EQ(p.values[k], p.realized_pin);
    }
  }
}

TEST(SampleRandomBridge, SymmetricModelHasZeroMean) {
  const RandomBridgeModel m{LengthLaw::exponential(0.1), PinLaw::discrete({-4.0, 4.0}, {0.5, 0.5})};
  const std::vector<double> grid{0.0, 3.0};
  stats::Moments mom;
  for (std::size_t i = 0; i < 100000; ++i) {
    auto src = rng_stream(6, i);
    mom.add(sample_random_bridge(m, grid, src).values[1]);
  }
  EXPECT_NEAR(mom.mean(), 0.0, 3.0 * mom.stderr_mean());
}

TEST(SampleRandomBridge, ModificationFrequency) {
  const auto m = fig2_like();
  const std::vector<double> grid{0.0, 10.0};
  int hits = 0;
  for (std::size_t i = 0; i < 100000; ++i) {
    auto src = rng_stream(7, i);
    const auto p = sample_random_bridge(m, grid, src);
    hits += p.values[1] == p.realized_pin;
  }
  EXPECT_NEAR(hits / 1e5, 0.6321, 0.0046);
}

TEST(SampleRandomBridge, UntilAbsorbedEndsAtPin) {
  const auto m = fig2_like();
  for (std::size_t i = 0; i < 200; ++i) {
    auto src = rng_stream(8, i);
    const auto p = sample_random_bridge_until_absorbed(m, 0.05, 1.0, src);
    ASSERT_EQ(p.values.back(), p.realized_pin);
    ASSERT_GE(p.grid.back(), std::max(1.0, p.realized_length) - 1e-12);
  }
}

TEST(PosteriorTauZ, AbsorbedObservationIsCertain) {
  const auto table = posterior_tau_z(fig2_like(), 10.0, 4.0);
  EXPECT_TRUE(table.absorbed);
  EXPECT_NEAR(table.prob_absorbed(), 1.0, 1e-12);
  EXPECT_NEAR(table.expectation([](double, double z) { return z; }), 4.0, 1e-12);
}

TEST(PosteriorTauZ, ContinuousPinMatchesClosedForm) {
  const double lam = 0.1;
  const RandomBridgeModel m{LengthLaw::exponential(lam), PinLaw::gaussian(0.0, 1.0)};
  for (double t : {0.5, 3.0, 12.0}) {
    for (double x : {-1.5, 0.0, 0.4, 2.0}) {
      const double fx = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
      // Given tau = r > t the observation is N(0, t(r - t)/r + t^2/r^2).
      auto q = [&](double r) {
        const double v = t * (r - t) / r + t * t / (r * r);
        return std::exp(-0.5 * x * x / v) / std::sqrt(2.0 * std::numbers::pi * v) * lam * std::exp(-lam * r);
      };
      const double tail = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(q, t, kInf, 20, 1e-14);
      const double absorbed = fx * (1.0 - std::exp(-lam * t));
      const double expected = absorbed / (absorbed + tail);
      const double got = posterior_tau_z(m, t, x).prob_absorbed();
      EXPECT_NEAR(got, expected, 1e-8) << "t=" << t << " x=" << x;
      EXPECT_GT(got, 0.0);
      EXPECT_LT(got, 1.0);
    }
  }
}

TEST(PosteriorTauZ, Normalized) {
  const std::vector<RandomBridgeModel> models{
      fig2_like(),
      {LengthLaw::two_point(1.0, 2.0), PinLaw::gaussian(0.0, 1.0)},
      {LengthLaw::uniform(0.5, 4.0), PinLaw::binomial(3, 0.5)},
      {LengthLaw::exponential(0.5), PinLaw::uniform(-1.0, 2.0)}};
  for (const auto& m : models) {
    for (double t : {0.3, 1.5, 3.5}) {
      EXPECT_NEAR(posterior_tau_z(m, t, 0.37).total_weight(), 1.0, 1e-10);
    }
  }
}

TEST(PosteriorTauZ, PinMeanMatchesBinnedMonteCarlo) {
  const auto m = fig2_like();
  const double t = 5.0, x = 1.0;
  verify::ConditioningSpec spec{{t}, {{x, 0.1, false}}};
  const auto mc = verify::mc_conditional(
      m, spec, [](const PathSample& p) { return p.realized_pin; }, 1000000, 99);
  const double exact = posterior_tau_z(m, t, x).expectation([](double, double z) { return z; });
  EXPECT_NEAR(mc.estimate[0], exact, 3.0 * mc.stderr_[0]);
}

TEST(PosteriorTauZ, DomainErrors) {
  EXPECT_THROW(posterior_tau_z(fig2_like(), 0.0, 0.0), DomainError);
  EXPECT_THROW(posterior_tau_z(fig2_like(), -1.0, 0.0), DomainError);
}

TEST(GaussianExpectation, IndicatorNearPanelEdges) {
  auto ind = [](double y) { return y > 0.0 ? 1.0 : 0.0; };
  for (int i = 0; i <= 2000; ++i) {
    const double m = -5.0 + 10.0 * i / 2000.0;
    ASSERT_NEAR(gaussian_expectation(ind, m, 1.0), 0.5 * std::erfc(-m / std::sqrt(2.0)), 1e-10) << "mean=" << m;
  }
  auto band = [](double y) { return std::abs(y - 0.3) < 0.2 ? 1.0 : 0.0; };
  const double exact = 0.5 * (std::erf(0.5 / std::sqrt(2.0)) - std::erf(0.1 / std::sqrt(2.0)));
  EXPECT_NEAR(gaussian_expectation(band, 0.0, 1.0), exact, 1e-10);
}

TEST(PredictFuture, ConstantIsOne) {
  for (const auto& m : {fig2_like(), RandomBridgeModel{LengthLaw::two_point(1.0, 2.0), PinLaw::gaussian(0.0, 1.0)}}) {
    EXPECT_NEAR(predict_future(m, 0.5, 0.2, 3.0, [](double, double, double) { return 1.0; }), 1.0, 1e-8);
  }
}

TEST(PredictFuture, SymmetricModelHasZeroMean) {
  const RandomBridgeModel m{LengthLaw::exponential(0.1), PinLaw::discrete({-4.0, 4.0}, {0.5, 0.5})};
  EXPECT_NEAR(predict_future(m, 2.0, 0.0, 5.0, [](double, double, double y) { return y; }), 0.0, 1e-9);
}

TEST(PredictFuture, MatchesBinnedMonteCarloForContinuousPin) {
  const RandomBridgeModel m{LengthLaw::two_point(1.0, 2.0), PinLaw::gaussian(0.0, 1.0)};
  const double t = 0.5, x = 0.3, u = 1.5;
  verify::ConditioningSpec spec{{t, u}, {{x, 0.05, false}}};
  const auto mc = verify::mc_conditional(
      m, spec, [](const PathSample& p) { return p.values[2]; }, 1000000, 17);
  const double exact = predict_future(m, t, x, u, [](double, double, double y) { return y; });
  EXPECT_NEAR(mc.estimate[0], exact, 3.0 * mc.stderr_[0]);
}

TEST(PredictFuture, ContinuousAsHorizonShrinks) {
  auto g = [](double r, double z, double y) { return std::sin(y) + z * r / (1.0 + r); };
  for (const auto& m : {fig2_like(), RandomBridgeModel{LengthLaw::exponential(0.2), PinLaw::gaussian(0.5, 1.0)}}) {
    const double t = 2.0, x = 0.7;
    const double limit = posterior_tau_z(m, t, x).expectation([&](double r, double z) { return g(r, z, x); });
    EXPECT_NEAR(predict_future(m, t, x, t + 1e-4, g), limit, 1e-3);
  }
}

TEST(TwoTimeConditional, ConstantIsOne) {
  const RandomBridgeModel m{LengthLaw::two_point(1.0, 2.0), PinLaw::gaussian(0.0, 1.0)};
  EXPECT_NEAR(two_time_conditional(m, 0.5, 1.5, 2.5, 0.8, 0.3, [](double) { return 1.0; }), 1.0, 1e-8);
}

TEST(TwoTimeConditional, DeterministicLengthIsMarkov) {
  const double T = 3.0, t1 = 0.5, t2 = 1.5, u = 2.5, x1 = 0.8, x2 = 0.3;
  const RandomBridgeModel m{LengthLaw::point_mass(T), PinLaw::gaussian(0.0, 1.0)};
  const double two = two_time_conditional(m, t1, t2, u, x1, x2, step);
  const auto c = condition_last(fixed_length_gaussian(T, 0.0, 1.0, {t2, u}), Eigen::VectorXd::Constant(1, x2));
  EXPECT_NEAR(two, prob_positive(c.mean, c.variance), 1e-8);
  const auto c12 = condition_last(fixed_length_gaussian(T, 0.0, 1.0, {t1, t2, u}), Eigen::Vector2d(x1, x2));
  EXPECT_NEAR(two, prob_positive(c12.mean, c12.variance), 1e-8);
}

TEST(TwoTimeConditional, Preconditions) {
  const RandomBridgeModel discrete{LengthLaw::two_point(1.0, 2.0), PinLaw::binomial(3, 0.5)};
  EXPECT_THROW(two_time_conditional(discrete, 0.5, 1.5, 2.5, 0.0, 0.0, step), PreconditionError);
  const RandomBridgeModel early{LengthLaw::two_point(0.4, 2.0), PinLaw::gaussian(0.0, 1.0)};
  EXPECT_THROW(two_time_conditional(early, 0.5, 1.5, 2.5, 0.0, 0.0, step), PreconditionError);
  EXPECT_THROW(non_markov_gap(PinLaw::gaussian(0.0, 1.0), 1.0, 2.0, 1.5, 0.5, 2.5, 0.0, 0.0, step),
               PreconditionError);
}

TEST(NonMarkovGap, MatchesGaussianConditioningOracle) {
  const auto pin = PinLaw::gaussian(0.0, 1.0);
  for (const auto& [x1, x2] : std::vector<std::pair<double, double>>{{0.8, 0.3}, {-0.7, 0.3}, {0.1, -0.5}}) {
    const auto gap = non_markov_gap(pin, 1.0, 2.0, 0.5, 1.5, 2.5, x1, x2, step);
    const auto [lhs, rhs] = gap_oracle(1.0, 2.0, 0.5, 1.5, 2.5, x1, x2);
    EXPECT_NEAR(gap.lhs, lhs, 1e-8) << x1 << "," << x2;
    EXPECT_NEAR(gap.rhs, rhs, 1e-8) << x1 << "," << x2;
    EXPECT_NEAR(gap.gap, std::abs(lhs - rhs), 1e-8);
  }
}

TEST(NonMarkovGap, FrozenReferenceValues) {
  // Computed independently by Gaussian conditioning in double precision.
  const auto pin = PinLaw::gaussian(0.0, 1.0);
  const auto a = non_markov_gap(pin, 1.0, 2.0, 0.5, 1.5, 2.5, 0.8, 0.3, step);
  EXPECT_NEAR(a.lhs, 0.8243184044355147, 1e-8);
  EXPECT_NEAR(a.rhs, 0.8213391548291124, 1e-8);
  const auto b = non_markov_gap(pin, 1.0, 2.0, 0.5, 1.5, 2.5, -0.7, 0.3, step);
  EXPECT_NEAR(b.lhs, 0.7916705133425594, 1e-8);
}

TEST(NonMarkovGap, VanishesForDeterministicLength) {
  const RandomBridgeModel m{LengthLaw::point_mass(2.0), PinLaw::gaussian(0.0, 1.0)};
  EXPECT_LT(non_markov_gap(m, 0.5, 1.5, 2.5, 0.8, 0.3, step).gap, 1e-8);
}

TEST(NonMarkovGap, PositiveAcrossFirstObservations) {
  const auto pin = PinLaw::gaussian(0.0, 1.0);
  for (double x1 : {-2.0, -1.0, -0.5, 0.0, 0.1, 0.5, 1.0, 2.0}) {
    const double g = non_markov_gap(pin, 1.0, 2.0, 0.5, 1.5, 2.5, x1, 0.3, step).gap;
    RecordProperty(("gap_x1_" + std::to_string(x1)).c_str(), std::to_string(g));
    EXPECT_GT(g, 1e-4) << "x1=" << x1;
  }
}

}  // namespace
