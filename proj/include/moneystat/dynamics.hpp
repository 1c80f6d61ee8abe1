#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moneystat/model.hpp"
#include "moneystat/rng.hpp"

namespace moneystat {

enum class InitPolicy { Equal, UniformRandom };

InitPolicy parse_policy(std::string_view name);
std::string_view policy_name(InitPolicy policy);

/// Grid on which credit-market amounts live. Every value is an integer
/// multiple of it, so sums and differences below 2^33 are exact in double.
inline constexpr double kCreditQuantum = 0x1.0p-20;

/// Per-agent state of one chain. Which vectors are populated depends on the
/// model kind:
///   cash         CashOnly, Combined, Restricted, CreditMarket
///   accounts     Overdraft, Combined, Restricted (one per agent),
///                MultiAccount (one per account), MultiAsset (agent-major N*I)
///   assets, liabilities, net_position    CreditMarket
struct Population {
  ModelSpec model;
  std::vector<double> cash;
  std::vector<double> accounts;
  std::vector<double> account_floors;  // lower bound of each entry of `accounts`
  std::vector<double> assets;
  std::vector<double> liabilities;
  std::vector<double> net_position;
  double conserved_total = 0.0;

  [[nodiscard]] std::size_t n_agents() const { return static_cast<std::size_t>(model.n_agents); }
  /// Compensated sum of the model's conserved money.
  [[nodiscard]] double conserved_sum() const;
  /// Scale for relative drift: max(|total|, sum of |shifted coordinates|).
  [[nodiscard]] double drift_scale() const;
  [[nodiscard]] double credit_total() const;
  /// Throws std::logic_error naming the first violated per-agent bound.
  void check_bounds() const;
};

Population init_population(const ModelSpec& spec, InitPolicy policy, double total,
                           std::uint64_t seed);

enum class EventKind {
  PairReshuffle,
  Resplit,
  Lend,
  Repay,
  AssetRefinance,
  LiabilityRefinance,
};

std::string_view event_name(EventKind kind);

struct EventRecord {
  EventKind kind = EventKind::PairReshuffle;
  bool accepted = false;
  std::size_t first = 0;
  std::size_t second = 0;
  double amount = 0.0;
};

/// Uniform reshuffle of a pair total: (u s, s - u s).
std::pair<double, double> reshuffle_pair(double a, double b, double u);

/// Apply one pairwise event in place. Infeasible proposals are rejected and
/// leave the population untouched.
EventRecord step(Population& pop, Rng& rng);

/// Credit-market primitives. Both return false (and change nothing) when
/// infeasible. `amount` must lie on the kCreditQuantum grid.
bool lend(Population& pop, std::size_t lender, std::size_t borrower, double amount);
bool repay(Population& pop, std::size_t debtor, std::size_t creditor, double amount);

/// Raise total credit from its current value to `target` through lending
/// events between random pairs.
void create_credit(Population& pop, double target, Rng& rng);

struct ChainParams {
  InitPolicy policy = InitPolicy::Equal;
  double total = 0.0;   // conserved money; M0 for CreditMarket
  double credit = 0.0;  // CreditMarket: total outstanding credit m
  std::uint64_t steps = 0;
  std::optional<std::uint64_t> burn_in;  // default 100 N
  std::optional<std::uint64_t> thin;     // default N
  std::uint64_t seed = 0;
  std::uint64_t audit_every = 100000;
};

struct ConservationAudit {
  std::uint64_t audits = 0;
  double max_relative_drift = 0.0;
  bool accounting_exact = true;  // CreditMarket identities bit-exact at every audit
};

struct SampleMeta {
  std::uint64_t seed = 0;
  std::string kernel;
  std::uint64_t steps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t thin = 1;
  ModelSpec model;
  std::uint64_t accepted_events = 0;
  ConservationAudit audit;
};

/// Thinned equilibrium samples. `values` is snapshot-major, then unit
/// (agent, or account for MultiAccount), then coordinate.
struct SampleSet {
  SampleMeta meta;
  std::vector<std::string> coord_names;
  std::size_t units_per_snapshot = 0;
  std::vector<std::uint64_t> snapshot_steps;
  std::vector<double> values;

  [[nodiscard]] std::size_t rows() const { return snapshot_steps.size() * units_per_snapshot; }
  /// All recorded values of one coordinate, pooled over snapshots and units.
  [[nodiscard]] std::vector<double> coordinate(std::string_view name) const;
  /// Values of one coordinate in a single snapshot.
  [[nodiscard]] std::vector<double> snapshot(std::size_t index, std::string_view name) const;
};

std::string kernel_name(ModelKind kind);
std::vector<std::string> coordinate_names(const ModelSpec& spec);

std::uint64_t default_burn_in(const ModelSpec& spec);
std::uint64_t default_thin(const ModelSpec& spec);

SampleSet run_chain(const ModelSpec& spec, const ChainParams& params);

/// Run from an existing population; `params.policy`, `total` and `credit` are
/// ignored. The population is left in its final state.
SampleSet run_chain_from(Population& pop, const ChainParams& params);

/// Free expansion of a cash-only population into a larger credit volume.
/// Coordinates are untouched; only the declared volume changes.
Population free_expansion(const Population& pop, double new_volume_y);

/// CSV with header `step,agent,coord_name,value`.
void write_samples_csv(const SampleSet& samples, std::ostream& out);

}  // namespace moneystat
