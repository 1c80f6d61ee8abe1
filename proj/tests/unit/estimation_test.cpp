#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "moneystat/estimation.hpp"

using namespace moneystat;

namespace {

std::vector<double> exp_draws(double t, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::exponential_distribution<double> d(1.0 / t);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

std::vector<double> pareto_draws(double gamma, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = std::pow(1.0 - u(gen), -1.0 / gamma);
  return v;
}

}  // namespace

TEST(FitShiftedExponential, Examples) {
  const std::vector<double> a{1, 2, 3};
  const auto fa = fit_shifted_exponential(a, 0.0);
  EXPECT_DOUBLE_EQ(fa.t_hat, 2.0);
  EXPECT_DOUBLE_EQ(fa.stderr_t, 2.0 / std::sqrt(3.0));
  EXPECT_TRUE(std::isnan(fa.ks_d));
  const std::vector<double> b{0, 1, 5};
  EXPECT_DOUBLE_EQ(fit_shifted_exponential(b, -1.0).t_hat, 3.0);
  const auto draws = exp_draws(5.0, 100000, 3);
  EXPECT_NEAR(fit_shifted_exponential(draws, 0.0).t_hat, 5.0, 0.05);
}

TEST(FitShiftedExponential, Errors) {
  const std::vector<double> one{1.0};
  const std::vector<double> flat{2.0, 2.0, 2.0};
  const std::vector<double> below{1.0, -2.0};
  EXPECT_THROW(fit_shifted_exponential(one, 0.0), std::invalid_argument);
  EXPECT_THROW(fit_shifted_exponential(flat, 0.0), std::invalid_argument);
  EXPECT_THROW(fit_shifted_exponential(below, 0.0), std::invalid_argument);
}

TEST(FitShiftedExponential, StderrCoversTruth) {
  int inside = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto f = fit_shifted_exponential(exp_draws(3.0, 10000, 100 + r), 0.0);
    if (std::abs(f.t_hat - 3.0) < 4.0 * f.stderr_t) ++inside;
  }
  EXPECT_GE(inside, 198);
}

TEST(KsStatistic, QuantileConstructionIsTight) {
  const std::size_t n = 500;
  const double t = 2.0;
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = -t * std::log1p(-(i + 0.5) / n);
  EXPECT_LE(ks_statistic_exponential(q, 0.0, t).statistic, 0.5 / n + 1e-12);
}

TEST(KsStatistic, PointMassFails) {
  const std::vector<double> atom(50, 3.0);
  const auto r = ks_statistic_exponential(atom, 1.0, 2.0);
  EXPECT_NEAR(r.statistic, std::max(1.0 - std::exp(-1.0), std::exp(-1.0)), 1e-12);
  EXPECT_FALSE(r.pass_1pct);
}

TEST(KsStatistic, PassRateOnExactDraws) {
  int pass = 0;
  for (std::uint64_t r = 0; r < 100; ++r) pass += ks_statistic_exponential(exp_draws(5.0, 10000, r), 0.0, 5.0).pass_1pct;
  EXPECT_GE(pass, 98);
}

TEST(KsStatistic, Errors) {
  EXPECT_THROW(ks_statistic_exponential(std::vector<double>{}, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ks_statistic_exponential(std::vector<double>(5, 1.0), 0.0, 1.0), std::invalid_argument);
}

TEST(HillTailIndex, ExactParetoData) {
  const auto v = pareto_draws(2.0, 100000, 8);
  EXPECT_NEAR(hill_tail_index(v, 1000), 2.0, 0.1);
  std::vector<double> scaled(v);
  for (auto& x : scaled) x *= 7.5;
  EXPECT_NEAR(hill_tail_index(scaled, 1000), hill_tail_index(v, 1000), 1e-9);
  const double g = hill_tail_index(v, default_hill_k(v.size()));
  EXPECT_LT(std::abs(g - 2.0) / 2.0, 0.05);
}

TEST(HillTailIndex, Errors) {
  const std::vector<double> flat(100, 4.0);
  EXPECT_THROW(hill_tail_index(flat, 10), std::invalid_argument);
  const auto v = pareto_draws(2.0, 100, 1);
  EXPECT_THROW(hill_tail_index(v, 100), std::invalid_argument);
  EXPECT_THROW(hill_tail_index(v, 0), std::invalid_argument);
  EXPECT_EQ(default_hill_k(1000), 100u);
}

TEST(Histogram, FixedWidth) {
  const std::vector<double> v{0.0, 1.0};
  const auto h = histogram(v, Binning::fixed(1.0));
  ASSERT_EQ(h.bins.size(), 2u);
  EXPECT_DOUBLE_EQ(h.bins[0].density, 0.5);
  EXPECT_DOUBLE_EQ(h.bins[1].density, 0.5);
  EXPECT_THROW(histogram(std::vector<double>{}, Binning::fixed(1.0)), std::invalid_argument);
  std::ostringstream out;
  write_histogram_tsv(h, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "bin_left\tbin_right\tdensity");
}

TEST(Histogram, ExponentialDensityWithinPoissonBands) {
  const std::size_t n = 1000000;
  const auto v = exp_draws(1.0, n, 2);
  const double w = 0.1;
  const auto h = histogram(v, Binning::fixed(w));
  int checked = 0;
  for (const auto& b : h.bins) {
    if (b.right > 5.0) break;
    const double p = std::exp(-b.left) - std::exp(-b.right);
    const double expected = p * n;
    const double sigma = std::sqrt(expected);
    EXPECT_LT(std::abs(static_cast<double>(b.count) - expected), 4.0 * sigma) << b.left;
    ++checked;
  }
  EXPECT_GT(checked, 40);
  EXPECT_GT(histogram(v, Binning::freedman_diaconis()).bins.size(), 10u);
}

TEST(ThermoResiduals, CreditMarketAllBelowTolerance) {
  const auto spec = ModelSpec::credit_market(100, 1000.0);
  const auto r = finite_diff_thermo_residuals(spec, 2.0, 1000.0);
  EXPECT_EQ(r.residuals.size(), 6u);
  EXPECT_LT(r.max(), 1e-6);
  ASSERT_NE(r.find("pressure_from_entropy"), nullptr);
}

TEST(ThermoResiduals, CombinedGrid) {
  const auto spec = ModelSpec::combined(10, 2.0);
  double worst = 0.0;
  for (double t : {0.5, 1.0, 2.0, 5.0, 20.0}) {
    for (double d : {0.0, 0.5, 1.0, 2.0, 10.0}) {
      auto s = spec;
      s.overdraft = d;
      worst = std::max(worst, finite_diff_thermo_residuals(s, t, 0.0).max());
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(ThermoResiduals, CashOnlyEntropyFromFreeEnergy) {
  const auto r = finite_diff_thermo_residuals(ModelSpec::cash_only(1), 1.0, 1.0);
  EXPECT_LT(r.find("entropy_from_free_energy")->value, 1e-9);
  EXPECT_EQ(r.find("nonexistent"), nullptr);
}
