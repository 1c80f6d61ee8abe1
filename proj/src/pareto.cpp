#include "moneystat/pareto.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "moneystat/model.hpp"

namespace moneystat {

namespace {

double log_factorial(double n) { return std::lgamma(n + 1.0); }

double compensated_sum(const std::vector<double>& v) {
  double sum = 0.0;
  double c = 0.0;
  for (double x : v) {
    const double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

void check_temperature(const ParetoSpec& spec, double t) {
  validate(spec);
  if (!(t > 0.0)) throw ModelError("Pareto temperature must be > 0");
  if (!(t < spec.t_max)) {
    throw ModelError("Pareto partition function diverges for T >= t_max (T = " + std::to_string(t) +
                     ", t_max = " + std::to_string(spec.t_max) + ")");
  }
}

void put(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void validate(const ParetoSpec& spec) {
  if (spec.n_agents < 1) throw ModelError("n_agents must be >= 1");
  if (!(spec.floor > 0.0)) throw ModelError("income floor J must be > 0");
  if (!(spec.t_max > 0.0)) throw ModelError("t_max must be > 0");
  if (!(spec.volume > 0.0)) throw ModelError("volume must be > 0");
}

double pareto_exponent(const ParetoSpec& spec, double temperature) {
  check_temperature(spec, temperature);
  return spec.t_max / temperature;
}

double pareto_log_partition(const ParetoSpec& spec, double temperature) {
  const double a = pareto_exponent(spec, temperature);
  const double n = static_cast<double>(spec.n_agents);
  const double lnz = a * std::log(spec.t_max) - (a - 1.0) * std::log(spec.floor) - std::log(a - 1.0) +
                     std::log(spec.volume);
  return n * lnz - log_factorial(n);
}

double pareto_entropy(const ParetoSpec& spec, double temperature) {
  check_temperature(spec, temperature);
  const double t = temperature;
  const double gap = spec.t_max - t;
  const double n = static_cast<double>(spec.n_agents);
  const double per_agent = std::log(spec.floor * spec.volume * t) + 1.0 - std::log(gap) + t / gap;
  return n * per_agent - log_factorial(n);
}

double pareto_mean_log_income(const ParetoSpec& spec, double temperature) {
  check_temperature(spec, temperature);
  const double t = temperature;
  return t + spec.t_max * std::log(spec.floor / spec.t_max) + t * t / (spec.t_max - t);
}

double pareto_entropy_response(const ParetoSpec& spec, double temperature) {
  check_temperature(spec, temperature);
  const double t = temperature;
  const double gap = spec.t_max - t;
  const double per_agent = 1.0 + t / gap + t * spec.t_max / (gap * gap);
  return static_cast<double>(spec.n_agents) * per_agent;
}

double pareto_mean_log_ratio(const ParetoSpec& spec, double temperature) {
  check_temperature(spec, temperature);
  return temperature / (spec.t_max - temperature);
}

double pareto_matched_temperature(const ParetoSpec& spec, double theta) {
  validate(spec);
  if (!(theta > 0.0)) throw ModelError("mean log ratio must be > 0");
  return spec.t_max * theta / (1.0 + theta);
}

double pareto_quantile(double floor, double a, double u) {
  if (!(a > 1.0)) throw ModelError("Pareto sampling needs a > 1");
  if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("quantile level must lie in [0, 1)");
  return floor * std::pow(1.0 - u, -1.0 / (a - 1.0));
}

std::vector<double> pareto_direct_sample(const ParetoSpec& spec, double temperature, std::size_t n,
                                         std::uint64_t seed) {
  const double a = pareto_exponent(spec, temperature);
  if (!(a > 1.0)) throw ModelError("Pareto sampling needs a > 1");
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = pareto_quantile(spec.floor, a, rng.uniform());
  return out;
}

std::optional<std::pair<double, double>> exchange_pair(double first, double second, double factor,
                                                       double floor) {
  if (!(factor > 0.0)) return std::nullopt;
  const double a = first * factor;
  const double b = second / factor;
  if (a < floor || b < floor) return std::nullopt;
  return std::make_pair(a, b);
}

EventRecord pareto_pair_step(std::vector<double>& log_ratios, Rng& rng) {
  const auto [j, k] = rng.distinct_pair(log_ratios.size());
  const auto [a, b] = reshuffle_pair(log_ratios[j], log_ratios[k], rng.uniform());
  EventRecord rec{EventKind::PairReshuffle, false, j, k, a - log_ratios[j]};
  if (a < 0.0 || b < 0.0) return rec;
  log_ratios[j] = a;
  log_ratios[k] = b;
  rec.accepted = true;
  return rec;
}

ParetoRun run_pareto_chain(const ParetoSpec& spec, const ParetoChainParams& params) {
  validate(spec);
  if (spec.n_agents < 2) throw ModelError("pairwise dynamics needs at least two agents");
  if (!(params.theta > 0.0)) throw ModelError("theta must be > 0");
  const auto n = static_cast<std::uint64_t>(spec.n_agents);
  const std::uint64_t burn_in = params.burn_in.value_or(100 * n);
  const std::uint64_t thin = params.thin.value_or(n);
  if (params.steps <= burn_in) throw std::invalid_argument("steps must exceed burn_in");
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");
  if (params.audit_every < 1) throw std::invalid_argument("audit_every must be >= 1");

  std::vector<double> z(n, params.theta);
  const double n_log_j = static_cast<double>(n) * std::log(spec.floor);
  auto total_y = [&] { return n_log_j + compensated_sum(z); };

  ParetoRun run;
  run.theta = params.theta;
  run.y_initial = total_y();
  const double scale = std::max(std::abs(run.y_initial), static_cast<double>(n) * params.theta);

  SampleSet& out = run.samples;
  out.meta.seed = params.seed;
  out.meta.kernel = "log-income-pair-reshuffle";
  out.meta.steps = params.steps;
  out.meta.burn_in = burn_in;
  out.meta.thin = thin;
  out.meta.model.n_agents = spec.n_agents;
  out.coord_names = {"income"};
  out.units_per_snapshot = n;
  const std::uint64_t snapshots = (params.steps - burn_in) / thin;
  out.snapshot_steps.reserve(snapshots);
  out.values.reserve(snapshots * n);

  auto audit = [&] {
    ++out.meta.audit.audits;
    const double drift = std::abs(total_y() - run.y_initial) / scale;
    run.max_relative_drift = std::max(run.max_relative_drift, drift);
  };

  Rng rng(mix64(params.seed));
  std::uint64_t next_record = burn_in + thin;
  std::uint64_t next_audit = params.audit_every;
  for (std::uint64_t event = 1; event <= params.steps; ++event) {
    if (pareto_pair_step(z, rng).accepted) ++out.meta.accepted_events;
    if (event == next_record) {
      if (out.snapshot_steps.size() < snapshots) {
        out.snapshot_steps.push_back(event);
        for (double zi : z) out.values.push_back(spec.floor * std::exp(zi));
      }
      next_record += thin;
    }
    if (event == next_audit) {
      audit();
      next_audit += params.audit_every;
    }
  }
  if (params.steps % params.audit_every != 0) audit();
  run.y_final = total_y();
  out.meta.audit.max_relative_drift = run.max_relative_drift;
  return run;
}

std::vector<TransitionRow> transition_scan(const ParetoSpec& spec, std::span<const double> grid) {
  validate(spec);
  std::vector<TransitionRow> rows;
  rows.reserve(grid.size());
  for (double t : grid) {
    if (!(t > 0.0 && t < spec.t_max)) {
      throw ModelError("scan point T = " + std::to_string(t) + " outside (0, t_max)");
    }
    rows.push_back({t, pareto_entropy(spec, t), pareto_entropy_response(spec, t)});
  }
  return rows;
}

void write_transition_tsv(const std::vector<TransitionRow>& rows, std::ostream& out) {
  out << "T\tS\tTdSdT\n";
  for (const auto& r : rows) {
    put(out, r.temperature);
    out << '\t';
    put(out, r.entropy);
    out << '\t';
    put(out, r.t_ds_dt);
    out << '\n';
  }
}

}  // namespace moneystat
