#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "moneystat/dynamics.hpp"
#include "moneystat/rng.hpp"

namespace moneystat {

/// Conserved log-income ensemble: p(I) ~ (t_max / I)^a on [J, inf), a = t_max / T.
struct ParetoSpec {
  std::int64_t n_agents = 1;
  double floor = 1.0;  // J
  double t_max = 1.0;
  double volume = 1.0;
};

void validate(const ParetoSpec& spec);

/// a = t_max / T. Throws ModelError unless 0 < T < t_max.
double pareto_exponent(const ParetoSpec& spec, double temperature);

/// ln Z = N lnz - ln N!, lnz = a ln t_max - (a-1) ln J - ln(a-1) + ln V.
double pareto_log_partition(const ParetoSpec& spec, double temperature);

/// S = N [ln(JVT) + 1 - ln(t_max - T) + T/(t_max - T)] - ln N!.
double pareto_entropy(const ParetoSpec& spec, double temperature);

/// Ybar / N = T + t_max ln(J/t_max) + T^2/(t_max - T), the mean of
/// t_max ln(I / t_max) per agent.
double pareto_mean_log_income(const ParetoSpec& spec, double temperature);

/// T dS/dT of the whole system.
double pareto_entropy_response(const ParetoSpec& spec, double temperature);

/// Canonical mean of ln(I/J): T / (t_max - T).
double pareto_mean_log_ratio(const ParetoSpec& spec, double temperature);

/// Temperature whose canonical mean of ln(I/J) equals theta.
double pareto_matched_temperature(const ParetoSpec& spec, double theta);

/// I = J (1-u)^(-1/(a-1)).
double pareto_quantile(double floor, double a, double u);

/// n inverse-CDF draws at temperature T; throws ModelError when a <= 1.
std::vector<double> pareto_direct_sample(const ParetoSpec& spec, double temperature, std::size_t n,
                                         std::uint64_t seed);

/// Multiplicative exchange I_j * f, I_k / f. Returns nullopt when either
/// income would fall below the floor.
std::optional<std::pair<double, double>> exchange_pair(double first, double second, double factor,
                                                       double floor);

/// One reshuffle of z = ln(I/J) between a random pair. Works on log ratios
/// so the pair sum (and so Y) is preserved to rounding.
EventRecord pareto_pair_step(std::vector<double>& log_ratios, Rng& rng);

struct ParetoChainParams {
  double theta = 1.0;  // initial ln(I/J) of every agent
  std::uint64_t steps = 0;
  std::optional<std::uint64_t> burn_in;  // default 100 N
  std::optional<std::uint64_t> thin;     // default N
  std::uint64_t seed = 0;
  std::uint64_t audit_every = 100000;
};

struct ParetoRun {
  SampleSet samples;  // coordinate "income"
  double y_initial = 0.0;
  double y_final = 0.0;
  double max_relative_drift = 0.0;  // of Y = sum ln I over the audits
  double theta = 0.0;               // mean ln(I/J), conserved
};

ParetoRun run_pareto_chain(const ParetoSpec& spec, const ParetoChainParams& params);

struct TransitionRow {
  double temperature = 0.0;
  double entropy = 0.0;
  double t_ds_dt = 0.0;
};

/// Throws ModelError if any grid point lies outside (0, t_max).
std::vector<TransitionRow> transition_scan(const ParetoSpec& spec, std::span<const double> grid);

/// Rows of `T\tS\tTdSdT`.
void write_transition_tsv(const std::vector<TransitionRow>& rows, std::ostream& out);

}  // namespace moneystat
