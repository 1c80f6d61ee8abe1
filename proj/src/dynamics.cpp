#include "moneystat/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace moneystat {

namespace {

// Largest magnitude for which the credit grid stays exact in double.
constexpr double kCreditGridLimit = 0x1.0p33;

double neumaier_sum(const std::vector<double>& v) {
  double sum = 0.0;
  double c = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

double abs_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double quantize_down(double v) { return std::floor(v / kCreditQuantum) * kCreditQuantum; }

bool on_credit_grid(double v) {
  return std::abs(v) < kCreditGridLimit && std::floor(v / kCreditQuantum) * kCreditQuantum == v;
}

// Nonnegative shares of `total` drawn uniformly from the simplex.
std::vector<double> random_shares(std::size_t n, double total, Rng& rng) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& x : w) {
    x = -std::log1p(-rng.uniform());
    sum += x;
  }
  double assigned = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    w[i] = total * (w[i] / sum);
    assigned += w[i];
  }
  w[n - 1] = std::max(0.0, total - assigned);
  return w;
}

[[noreturn]] void infeasible(const std::string& what) {
  throw ModelError("infeasible initial total: " + what);
}

// --- kernels ---------------------------------------------------------------

EventRecord cash_pair(std::vector<double>& x, Rng& rng) {
  const auto [j, k] = rng.distinct_pair(x.size());
  const auto [a, b] = reshuffle_pair(x[j], x[k], rng.uniform());
  EventRecord ev{EventKind::PairReshuffle, false, j, k, a - x[j]};
  if (b < 0.0) return ev;
  x[j] = a;
  x[k] = b;
  ev.accepted = true;
  return ev;
}

// Pair reshuffle of the shifted coordinates y - floor over any two entries.
EventRecord floored_pair(std::vector<double>& y, const std::vector<double>& floors,
                         std::size_t j, std::size_t k, double u) {
  const double sy = y[j] + y[k];
  const double s = sy - floors[j] - floors[k];
  const double yj = floors[j] + u * s;
  const double yk = sy - yj;
  EventRecord ev{EventKind::PairReshuffle, false, j, k, yj - y[j]};
  if (yj < floors[j] || yk < floors[k]) return ev;
  y[j] = yj;
  y[k] = yk;
  ev.accepted = true;
  return ev;
}

EventRecord accounts_pair(Population& pop, Rng& rng) {
  const auto [j, k] = rng.distinct_pair(pop.accounts.size());
  return floored_pair(pop.accounts, pop.account_floors, j, k, rng.uniform());
}

// Cash payment between two agents, or conversion between cash and account
// within one agent.
EventRecord cash_account_step(Population& pop, Rng& rng, bool credit_allowed) {
  if (rng.coin()) return cash_pair(pop.cash, rng);
  const std::size_t i = rng.below(pop.cash.size());
  const double d = pop.model.overdraft;
  const double m = pop.cash[i] + pop.accounts[i];
  const double hi = credit_allowed ? m : std::min(0.0, m);
  const double y = -d + rng.uniform() * (hi + d);
  const double x = m - y;
  EventRecord ev{EventKind::Resplit, false, i, i, y - pop.accounts[i]};
  if (x < 0.0 || y < -d || y > hi) return ev;
  pop.cash[i] = x;
  pop.accounts[i] = y;
  ev.accepted = true;
  return ev;
}

EventRecord multi_asset_step(Population& pop, Rng& rng) {
  const auto classes = static_cast<std::size_t>(pop.model.asset_classes);
  const std::size_t n = pop.n_agents();
  auto& y = pop.accounts;
  if (classes == 1 || rng.coin()) {
    const std::size_t c = classes == 1 ? 0 : rng.below(classes);
    const auto [j, k] = rng.distinct_pair(n);
    const std::size_t a = j * classes + c;
    const std::size_t b = k * classes + c;
    const auto [ya, yb] = reshuffle_pair(y[a], y[b], rng.uniform());
    EventRecord ev{EventKind::PairReshuffle, false, j, k, ya - y[a]};
    if (yb < 0.0) return ev;
    y[a] = ya;
    y[b] = yb;
    ev.accepted = true;
    return ev;
  }
  const std::size_t i = rng.below(n);
  const auto [c1, c2] = rng.distinct_pair(classes);
  const std::size_t a = i * classes + c1;
  const std::size_t b = i * classes + c2;
  const auto [ya, yb] = reshuffle_pair(y[a], y[b], rng.uniform());
  EventRecord ev{EventKind::Resplit, false, i, i, ya - y[a]};
  if (yb < 0.0) return ev;
  y[a] = ya;
  y[b] = yb;
  ev.accepted = true;
  return ev;
}

// Refinancing moves: a lend and a repay of equal size composed so that total
// credit is unchanged. Asset side: j sells part of its claims to k for cash.
// Liability side: k assumes part of j's debt and receives the cash for it.
EventRecord credit_step(Population& pop, Rng& rng) {
  const auto [j, k] = rng.distinct_pair(pop.n_agents());
  auto& x = pop.cash;
  const bool asset_side = rng.coin();
  auto& book = asset_side ? pop.assets : pop.liabilities;
  const double s = book[j] + book[k];
  const double bj = quantize_down(rng.uniform() * s);
  const double bk = s - bj;
  const double delta = bj - book[j];
  const double xj = asset_side ? x[j] - delta : x[j] + delta;
  const double xk = asset_side ? x[k] + delta : x[k] - delta;
  EventRecord ev{asset_side ? EventKind::AssetRefinance : EventKind::LiabilityRefinance, false, j,
                 k, delta};
  if (xj < 0.0 || xk < 0.0 || bk < 0.0) return ev;
  book[j] = bj;
  book[k] = bk;
  x[j] = xj;
  x[k] = xk;
  ev.accepted = true;
  return ev;
}

}  // namespace

InitPolicy parse_policy(std::string_view name) {
  if (name == "equal") return InitPolicy::Equal;
  if (name == "uniform-random") return InitPolicy::UniformRandom;
  throw ModelError("unknown init policy '" + std::string(name) + "'");
}

std::string_view policy_name(InitPolicy policy) {
  return policy == InitPolicy::Equal ? "equal" : "uniform-random";
}

std::string_view event_name(EventKind kind) {
  switch (kind) {
    case EventKind::PairReshuffle: return "pair-reshuffle";
    case EventKind::Resplit: return "resplit";
    case EventKind::Lend: return "lend";
    case EventKind::Repay: return "repay";
    case EventKind::AssetRefinance: return "asset-refinance";
    case EventKind::LiabilityRefinance: return "liability-refinance";
  }
  return "unknown";
}

double Population::conserved_sum() const {
  switch (model.kind) {
    case ModelKind::CashOnly:
    case ModelKind::CreditMarket:
      return neumaier_sum(cash);
    case ModelKind::Overdraft:
    case ModelKind::MultiAccount:
    case ModelKind::MultiAsset:
      return neumaier_sum(accounts);
    case ModelKind::Combined:
    case ModelKind::Restricted: {
      std::vector<double> all(cash);
      all.insert(all.end(), accounts.begin(), accounts.end());
      return neumaier_sum(all);
    }
  }
  return 0.0;
}

double Population::drift_scale() const {
  return std::max({std::abs(conserved_total), abs_sum(cash) + abs_sum(accounts),
                   std::numeric_limits<double>::min()});
}

double Population::credit_total() const { return neumaier_sum(assets); }

void Population::check_bounds() const {
  for (std::size_t i = 0; i < cash.size(); ++i) {
    if (!(cash[i] >= 0.0)) throw std::logic_error("cash below zero at agent " + std::to_string(i));
  }
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    if (!(accounts[i] >= account_floors[i])) {
      throw std::logic_error("account below its floor at index " + std::to_string(i));
    }
    if (model.kind == ModelKind::Restricted && accounts[i] > 0.0) {
      throw std::logic_error("restricted account above zero at agent " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < assets.size(); ++i) {
    if (!(assets[i] >= 0.0 && liabilities[i] >= 0.0)) {
      throw std::logic_error("negative credit position at agent " + std::to_string(i));
    }
  }
}

std::pair<double, double> reshuffle_pair(double a, double b, double u) {
  const double s = a + b;
  const double first = u * s;
  return {first, s - first};
}

Population init_population(const ModelSpec& spec, InitPolicy policy, double total,
                           std::uint64_t seed) {
  validate(spec);
  if (!std::isfinite(total)) infeasible("total must be finite");
  Rng rng(seed);
  Population pop;
  pop.model = spec;
  pop.conserved_total = total;
  const std::size_t n = pop.n_agents();
  const double nd = static_cast<double>(n);
  const double d = spec.overdraft;
  const bool equal = policy == InitPolicy::Equal;

  switch (spec.kind) {
    case ModelKind::CashOnly:
      if (!(total > 0.0)) infeasible("cash total must be > 0");
      pop.cash = equal ? std::vector<double>(n, total / nd) : random_shares(n, total, rng);
      break;

    case ModelKind::Overdraft:
    case ModelKind::MultiAccount: {
      if (spec.kind == ModelKind::Overdraft) {
        pop.account_floors.assign(n, -d);
      } else {
        for (double dij : spec.account_overdrafts) pop.account_floors.push_back(-dij);
      }
      const std::size_t r = pop.account_floors.size();
      const double shifted = total + spec.total_overdraft();
      if (!(shifted > 0.0)) infeasible("account total must exceed minus the summed overdrafts");
      if (r < 2) infeasible("pair exchange needs at least two accounts");
      std::vector<double> z = equal ? std::vector<double>(r, shifted / static_cast<double>(r))
                                    : random_shares(r, shifted, rng);
      pop.accounts.resize(r);
      for (std::size_t a = 0; a < r; ++a) pop.accounts[a] = z[a] + pop.account_floors[a];
      break;
    }

    case ModelKind::Combined: {
      const double shifted = total + nd * d;
      if (!(shifted > 0.0)) infeasible("money total must exceed -N d");
      pop.cash.resize(n);
      pop.accounts.resize(n);
      pop.account_floors.assign(n, -d);
      std::vector<double> z = equal ? std::vector<double>(2 * n, shifted / (2.0 * nd))
                                    : random_shares(2 * n, shifted, rng);
      for (std::size_t i = 0; i < n; ++i) {
        pop.cash[i] = z[2 * i];
        pop.accounts[i] = z[2 * i + 1] - d;
      }
      break;
    }

    case ModelKind::Restricted: {
      const double shifted = total + nd * d;
      if (!(shifted > 0.0)) infeasible("money total must exceed -N d");
      pop.cash.resize(n);
      pop.accounts.resize(n);
      pop.account_floors.assign(n, -d);
      std::vector<double> w = equal ? std::vector<double>(n, shifted / nd)
                                    : random_shares(n, shifted, rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double m = w[i] - d;
        const double hi = std::min(0.0, m);
        const double y = equal ? std::clamp(-0.5 * d, -d, hi) : -d + rng.uniform() * (hi + d);
        pop.accounts[i] = y;
        pop.cash[i] = std::max(0.0, m - y);
      }
      break;
    }

    case ModelKind::CreditMarket: {
      if (!(total > 0.0)) infeasible("monetary base must be > 0");
      if (!on_credit_grid(total)) infeasible("monetary base must be a multiple of 2^-20 below 2^33");
      if (total != spec.volume_x) infeasible("total must equal the monetary base volume_x");
      const auto units = static_cast<std::uint64_t>(total / kCreditQuantum);
      std::vector<std::uint64_t> share(n, units / n);
      if (equal) {
        for (std::size_t i = 0; i < units % n; ++i) ++share[i];
      } else {
        std::vector<double> w = random_shares(n, static_cast<double>(units), rng);
        std::uint64_t assigned = 0;
        for (std::size_t i = 0; i < n; ++i) {
          share[i] = static_cast<std::uint64_t>(std::floor(w[i]));
          assigned += share[i];
        }
        for (std::size_t i = 0; assigned < units; i = (i + 1) % n, ++assigned) ++share[i];
      }
      pop.cash.resize(n);
      for (std::size_t i = 0; i < n; ++i) pop.cash[i] = static_cast<double>(share[i]) * kCreditQuantum;
      pop.assets.assign(n, 0.0);
      pop.liabilities.assign(n, 0.0);
      pop.net_position = pop.cash;
      break;
    }

    case ModelKind::MultiAsset: {
      if (!(total > 0.0)) infeasible("asset total must be > 0");
      const std::size_t cells = n * static_cast<std::size_t>(spec.asset_classes);
      if (cells < 2) infeasible("pair exchange needs at least two coordinates");
      pop.accounts = equal ? std::vector<double>(cells, total / static_cast<double>(cells))
                           : random_shares(cells, total, rng);
      pop.account_floors.assign(cells, 0.0);
      break;
    }
  }
  if (n < 2 && spec.kind != ModelKind::MultiAccount && spec.kind != ModelKind::MultiAsset) {
    infeasible("pair exchange needs at least two agents");
  }
  pop.check_bounds();
  return pop;
}

EventRecord step(Population& pop, Rng& rng) {
  switch (pop.model.kind) {
    case ModelKind::CashOnly:
      return cash_pair(pop.cash, rng);
    case ModelKind::Overdraft:
    case ModelKind::MultiAccount:
      return accounts_pair(pop, rng);
    case ModelKind::Combined:
      return cash_account_step(pop, rng, true);
    case ModelKind::Restricted:
      return cash_account_step(pop, rng, false);
    case ModelKind::CreditMarket:
      return credit_step(pop, rng);
    case ModelKind::MultiAsset:
      return multi_asset_step(pop, rng);
  }
  throw ModelError("unhandled model kind");
}

bool lend(Population& pop, std::size_t lender, std::size_t borrower, double amount) {
  if (pop.model.kind != ModelKind::CreditMarket) throw ModelError("lend needs a CreditMarket population");
  if (lender == borrower || !(amount > 0.0) || !on_credit_grid(amount)) return false;
  if (pop.cash[lender] < amount) return false;
  pop.cash[lender] -= amount;
  pop.assets[lender] += amount;
  pop.cash[borrower] += amount;
  pop.liabilities[borrower] += amount;
  return true;
}

bool repay(Population& pop, std::size_t debtor, std::size_t creditor, double amount) {
  if (pop.model.kind != ModelKind::CreditMarket) throw ModelError("repay needs a CreditMarket population");
  if (debtor == creditor || !(amount > 0.0) || !on_credit_grid(amount)) return false;
  if (pop.liabilities[debtor] < amount || pop.assets[creditor] < amount ||
      pop.cash[debtor] < amount) {
    return false;
  }
  pop.liabilities[debtor] -= amount;
  pop.cash[debtor] -= amount;
  pop.assets[creditor] -= amount;
  pop.cash[creditor] += amount;
  return true;
}

void create_credit(Population& pop, double target, Rng& rng) {
  if (pop.model.kind != ModelKind::CreditMarket) throw ModelError("credit creation needs a CreditMarket population");
  if (!on_credit_grid(target)) throw ModelError("credit target must be a multiple of 2^-20 below 2^33");
  double remaining = target - pop.credit_total();
  if (remaining < 0.0) throw ModelError("credit target below the outstanding credit");
  const std::uint64_t max_attempts = 1000000 + 1000 * pop.n_agents();
  for (std::uint64_t attempt = 0; remaining > 0.0; ++attempt) {
    if (attempt >= max_attempts) throw ModelError("credit target not reachable by lending");
    const auto [j, k] = rng.distinct_pair(pop.n_agents());
    const double amount = std::min(quantize_down(rng.uniform() * pop.cash[j]), remaining);
    if (amount > 0.0 && lend(pop, j, k, amount)) remaining -= amount;
  }
}

std::string kernel_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::CashOnly: return "uniform-pair-reshuffle";
    case ModelKind::Overdraft:
    case ModelKind::MultiAccount: return "shifted-pair-reshuffle";
    case ModelKind::Combined: return "cash-payment+account-resplit";
    case ModelKind::Restricted: return "cash-payment+restricted-resplit";
    case ModelKind::CreditMarket: return "credit-refinance";
    case ModelKind::MultiAsset: return "class-pair-reshuffle+class-resplit";
  }
  return "unknown";
}

std::vector<std::string> coordinate_names(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::CashOnly: return {"x"};
    case ModelKind::Overdraft:
    case ModelKind::MultiAccount: return {"z"};
    case ModelKind::Combined:
    case ModelKind::Restricted: return {"x", "y"};
    case ModelKind::CreditMarket: return {"assets", "liabilities"};
    case ModelKind::MultiAsset: {
      std::vector<std::string> names;
      for (int c = 0; c < spec.asset_classes; ++c) names.push_back("y" + std::to_string(c));
      return names;
    }
  }
  return {};
}

std::uint64_t default_burn_in(const ModelSpec& spec) {
  return 100 * static_cast<std::uint64_t>(spec.n_agents);
}

std::uint64_t default_thin(const ModelSpec& spec) {
  return static_cast<std::uint64_t>(spec.n_agents);
}

SampleSet run_chain(const ModelSpec& spec, const ChainParams& params) {
  Population pop = init_population(spec, params.policy, params.total, params.seed);
  if (spec.kind == ModelKind::CreditMarket) {
    Rng credit_rng(mix64(params.seed ^ 0x63726564697400ULL));
    create_credit(pop, params.credit, credit_rng);
  }
  return run_chain_from(pop, params);
}

SampleSet run_chain_from(Population& pop, const ChainParams& params) {
  const ModelSpec& spec = pop.model;
  const std::uint64_t burn_in = params.burn_in.value_or(default_burn_in(spec));
  const std::uint64_t thin = params.thin.value_or(default_thin(spec));
  if (params.steps <= burn_in) throw std::invalid_argument("steps must exceed burn_in");
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");
  if (params.audit_every < 1) throw std::invalid_argument("audit_every must be >= 1");

  SampleSet out;
  out.meta = {params.seed, kernel_name(spec.kind), params.steps, burn_in, thin, spec, 0, {}};
  out.coord_names = coordinate_names(spec);
  const bool per_account = spec.kind == ModelKind::MultiAccount;
  out.units_per_snapshot = per_account ? pop.accounts.size() : pop.n_agents();
  const std::uint64_t snapshots = (params.steps - burn_in) / thin;
  out.snapshot_steps.reserve(snapshots);
  out.values.reserve(snapshots * out.units_per_snapshot * out.coord_names.size());

  const double d = spec.overdraft;
  const auto classes = static_cast<std::size_t>(spec.asset_classes);
  auto record = [&](std::uint64_t event) {
    out.snapshot_steps.push_back(event);
    for (std::size_t u = 0; u < out.units_per_snapshot; ++u) {
      switch (spec.kind) {
        case ModelKind::CashOnly:
          out.values.push_back(pop.cash[u]);
          break;
        case ModelKind::Overdraft:
          out.values.push_back(pop.accounts[u] + d);
          break;
        case ModelKind::MultiAccount:
          out.values.push_back(pop.accounts[u] - pop.account_floors[u]);
          break;
        case ModelKind::Combined:
        case ModelKind::Restricted:
          out.values.push_back(pop.cash[u]);
          out.values.push_back(pop.accounts[u]);
          break;
        case ModelKind::CreditMarket:
          out.values.push_back(pop.assets[u]);
          out.values.push_back(pop.liabilities[u]);
          break;
        case ModelKind::MultiAsset:
          for (std::size_t c = 0; c < classes; ++c) out.values.push_back(pop.accounts[u * classes + c]);
          break;
      }
    }
  };

  const bool credit = spec.kind == ModelKind::CreditMarket;
  const double credit_at_start = credit ? pop.credit_total() : 0.0;
  ConservationAudit& audit = out.meta.audit;
  auto run_audit = [&] {
    ++audit.audits;
    const double drift = std::abs(pop.conserved_sum() - pop.conserved_total) / pop.drift_scale();
    audit.max_relative_drift = std::max(audit.max_relative_drift, drift);
    if (credit) {
      double cash = 0.0;
      double assets = 0.0;
      double liabilities = 0.0;
      for (std::size_t i = 0; i < pop.n_agents(); ++i) {
        cash += pop.cash[i];
        assets += pop.assets[i];
        liabilities += pop.liabilities[i];
        if (pop.cash[i] + pop.assets[i] - pop.liabilities[i] != pop.net_position[i]) {
          audit.accounting_exact = false;
        }
      }
      if (cash != pop.conserved_total || assets - liabilities != 0.0 || assets != credit_at_start) {
        audit.accounting_exact = false;
      }
    }
  };

  Rng rng(mix64(params.seed));
  std::uint64_t next_record = burn_in + thin;
  std::uint64_t next_audit = params.audit_every;
  for (std::uint64_t event = 1; event <= params.steps; ++event) {
    if (step(pop, rng).accepted) ++out.meta.accepted_events;
    if (event == next_record) {
      if (out.snapshot_steps.size() < snapshots) record(event);
      next_record += thin;
    }
    if (event == next_audit) {
      run_audit();
      next_audit += params.audit_every;
    }
  }
  if (params.steps % params.audit_every != 0) run_audit();
  return out;
}

std::vector<double> SampleSet::coordinate(std::string_view name) const {
  const auto it = std::find(coord_names.begin(), coord_names.end(), name);
  if (it == coord_names.end()) throw std::invalid_argument("no coordinate named " + std::string(name));
  const auto c = static_cast<std::size_t>(it - coord_names.begin());
  const std::size_t stride = coord_names.size();
  std::vector<double> out;
  out.reserve(rows());
  for (std::size_t r = 0; r < rows(); ++r) out.push_back(values[r * stride + c]);
  return out;
}

std::vector<double> SampleSet::snapshot(std::size_t index, std::string_view name) const {
  if (index >= snapshot_steps.size()) throw std::out_of_range("snapshot index out of range");
  const auto it = std::find(coord_names.begin(), coord_names.end(), name);
  if (it == coord_names.end()) throw std::invalid_argument("no coordinate named " + std::string(name));
  const auto c = static_cast<std::size_t>(it - coord_names.begin());
  const std::size_t stride = coord_names.size();
  std::vector<double> out(units_per_snapshot);
  for (std::size_t u = 0; u < units_per_snapshot; ++u) {
    out[u] = values[(index * units_per_snapshot + u) * stride + c];
  }
  return out;
}

Population free_expansion(const Population& pop, double new_volume_y) {
  if (pop.model.kind != ModelKind::CashOnly) throw ModelError("free expansion is defined for CashOnly populations");
  if (!(new_volume_y >= pop.model.volume_y)) {
    throw ModelError("free expansion needs a volume at least as large as the current one");
  }
  Population out = pop;
  out.model.volume_y = new_volume_y;
  return out;
}

void write_samples_csv(const SampleSet& samples, std::ostream& out) {
  out << "step,agent,coord_name,value\n";
  const std::size_t stride = samples.coord_names.size();
  char buf[64];
  for (std::size_t s = 0; s < samples.snapshot_steps.size(); ++s) {
    for (std::size_t u = 0; u < samples.units_per_snapshot; ++u) {
      for (std::size_t c = 0; c < stride; ++c) {
        const double v = samples.values[(s * samples.units_per_snapshot + u) * stride + c];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        out << samples.snapshot_steps[s] << ',' << u << ',' << samples.coord_names[c] << ',';
        out.write(buf, res.ptr - buf);
        out << '\n';
      }
    }
  }
}

}  // namespace moneystat
