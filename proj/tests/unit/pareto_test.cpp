#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "moneystat/estimation.hpp"
#include "moneystat/pareto.hpp"

using namespace moneystat;

namespace {

// Single-agent integrals over u = ln(I/J) with weight e^{-E/T}, E = t_max ln(I/t_max).
struct Quadrature {
  double ln_z = 0.0;
  double mean_energy = 0.0;
};

Quadrature integrate_one_agent(const ParetoSpec& s, double t) {
  const double a = s.t_max / t;
  const double upper = 60.0 / (a - 1.0);
  const int n = 400000;
  const double h = upper / n;
  double z = 0.0, ez = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = i * h;
    const double ln_inc = std::log(s.floor) + u;
    const double e = s.t_max * (ln_inc - std::log(s.t_max));
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double f = std::exp(ln_inc - e / t);  // dI = I du
    z += w * f;
    ez += w * f * e;
  }
  z *= h / 3.0;
  ez *= h / 3.0;
  return {std::log(s.volume * z), ez / z};
}

double oracle_entropy(const ParetoSpec& s, double t) {
  const auto q = integrate_one_agent(s, t);
  const double n = static_cast<double>(s.n_agents);
  return n * (q.ln_z + q.mean_energy / t) - std::lgamma(n + 1.0);
}

}  // namespace

TEST(ParetoAnalytic, LogPartitionAtExponentTwo) {
  const ParetoSpec s{1, 2.0, 2.0, 1.0};
  EXPECT_DOUBLE_EQ(pareto_exponent(s, 1.0), 2.0);
  EXPECT_NEAR(pareto_log_partition(s, 1.0), std::log(2.0), 1e-14);
  EXPECT_NEAR(pareto_log_partition(s, 1.0), integrate_one_agent(s, 1.0).ln_z, 1e-9);
}

TEST(ParetoAnalytic, EntropyAndMeanAgainstQuadrature) {
  const ParetoSpec s{1, 1.0, 2.0, 1.0};
  EXPECT_NEAR(pareto_entropy(s, 1.0), 2.0, 1e-12);
  EXPECT_NEAR(pareto_entropy(s, 1.0), oracle_entropy(s, 1.0), 1e-8);
  const auto q = integrate_one_agent(s, 1.0);
  EXPECT_NEAR(pareto_mean_log_income(s, 1.0), q.mean_energy, 1e-8);
  EXPECT_NEAR(pareto_mean_log_income(s, 1.0), 2.0 - 2.0 * std::log(2.0), 1e-12);

  for (const ParetoSpec& g : {ParetoSpec{7, 0.5, 3.0, 2.5}, ParetoSpec{40, 3.0, 10.0, 0.2}}) {
    for (double frac : {0.1, 0.4, 0.8}) {
      const double t = frac * g.t_max;
      EXPECT_NEAR(pareto_entropy(g, t), oracle_entropy(g, t), 1e-7 * std::max(1.0, std::abs(oracle_entropy(g, t))));
    }
  }
}

TEST(ParetoAnalytic, MeanLogIncomeApproximation) {
  const ParetoSpec s{1, 1.0, 100.0, 1.0};
  const double excess = pareto_mean_log_income(s, 1.0) - s.t_max * std::log(s.floor / s.t_max);
  EXPECT_LT(std::abs(excess - 1.0), 0.011);
}

TEST(ParetoAnalytic, DivergenceAtTmax) {
  const ParetoSpec s{1, 1.0, 2.0, 1.0};
  EXPECT_THROW(pareto_log_partition(s, 2.0), ModelError);
  EXPECT_THROW(pareto_entropy(s, 3.0), ModelError);
  EXPECT_THROW(pareto_exponent(s, 0.0), ModelError);
  EXPECT_THROW(validate(ParetoSpec{1, 0.0, 1.0, 1.0}), ModelError);
}

TEST(ParetoAnalytic, MatchedTemperatureInvertsMeanLogRatio) {
  const ParetoSpec s{10, 1.0, 5.0, 1.0};
  for (double theta : {0.1, 1.0, 4.0}) {
    const double t = pareto_matched_temperature(s, theta);
    EXPECT_NEAR(pareto_mean_log_ratio(s, t), theta, 1e-12);
  }
}

TEST(ParetoSampling, Quantile) {
  EXPECT_DOUBLE_EQ(pareto_quantile(1.5, 3.0, 0.75), 3.0);
  EXPECT_DOUBLE_EQ(pareto_quantile(1.5, 3.0, 0.0), 1.5);
  EXPECT_THROW(pareto_quantile(1.0, 1.0, 0.5), ModelError);
  EXPECT_THROW(pareto_quantile(1.0, 2.0, 1.0), std::domain_error);
}

TEST(ParetoSampling, HillRecoversTail) {
  const ParetoSpec s{1, 1.0, 3.0, 1.0};
  const auto v = pareto_direct_sample(s, 1.0, 100000, 17);
  const double g = hill_tail_index(v, default_hill_k(v.size()));
  EXPECT_LT(std::abs(g - 2.0) / 2.0, 0.05);
  EXPECT_EQ(pareto_direct_sample(s, 1.0, 10, 5), pareto_direct_sample(s, 1.0, 10, 5));
}

TEST(ParetoExchange, Examples) {
  const auto r = exchange_pair(2.0, 3.0, 1.5, 1.0);
  ASSERT_TRUE(r);
  EXPECT_DOUBLE_EQ(r->first, 3.0);
  EXPECT_DOUBLE_EQ(r->second, 2.0);
  EXPECT_FALSE(exchange_pair(2.0, 1.2, 1.5, 1.0));
  EXPECT_FALSE(exchange_pair(2.0, 3.0, 0.0, 1.0));
  const auto keep = exchange_pair(2.0, 3.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(keep->first * keep->second, 6.0);
}

TEST(ParetoChain, ConservesLogIncomeAndFloor) {
  const ParetoSpec s{200, 2.0, 4.0, 1.0};
  ParetoChainParams p;
  p.theta = 0.5;
  p.steps = 400000;
  p.seed = 3;
  p.audit_every = 1000;
  const auto run = run_pareto_chain(s, p);
  EXPECT_LT(run.max_relative_drift, 1e-12);
  EXPECT_NEAR(run.y_final, run.y_initial, 1e-9 * std::abs(run.y_initial));
  for (double v : run.samples.values) EXPECT_GE(v, s.floor);
  EXPECT_EQ(run.samples.rows(), (p.steps - 100 * 200) / 200 * 200);
  p.steps = 100;
  EXPECT_THROW(run_pareto_chain(s, p), std::invalid_argument);
}

TEST(ParetoChain, StationaryLogRatiosAreExponential) {
  const ParetoSpec s{500, 1.0, 4.0, 1.0};
  ParetoChainParams p;
  p.theta = 0.5;
  p.steps = 2000000;
  p.seed = 11;
  const auto run = run_pareto_chain(s, p);
  std::vector<double> z;
  const std::size_t last = run.samples.snapshot_steps.size() - 1;
  for (std::size_t i = 0; i < 500; ++i) z.push_back(std::log(run.samples.values[last * 500 + i] / s.floor));
  EXPECT_TRUE(ks_statistic_exponential(z, 0.0, 0.5).pass_1pct);
}

TEST(TransitionScan, ResponseValuesAndMonotonicity) {
  const ParetoSpec s{1, 1.0, 2.0, 1.0};
  EXPECT_NEAR(pareto_entropy_response(s, 1.0), 4.0, 1e-12);
  EXPECT_NEAR(pareto_entropy_response(s, 1e-9), 1.0, 1e-6);
  std::vector<double> grid;
  for (int i = 1; i < 20; ++i) grid.push_back(0.1 * i);
  const auto rows = transition_scan(s, grid);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i].t_ds_dt, rows[i - 1].t_ds_dt);
  for (const auto& r : rows) {
    const double h = 1e-5 * std::min(r.temperature, s.t_max - r.temperature);
    const double fd = r.temperature * (oracle_entropy(s, r.temperature + h) - oracle_entropy(s, r.temperature - h)) / (2 * h);
    EXPECT_NEAR(r.t_ds_dt, fd, 1e-4 * r.t_ds_dt);
  }
  EXPECT_THROW(transition_scan(s, std::vector<double>{2.0}), ModelError);
  std::ostringstream out;
  write_transition_tsv(rows, out);
  EXPECT_EQ(out.str().substr(0, 10), "T\tS\tTdSdT\n");
}
