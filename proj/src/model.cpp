#include "moneystat/model.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <utility>

namespace moneystat {

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 7> kKindNames{{
    {ModelKind::CashOnly, "CashOnly"},
    {ModelKind::Overdraft, "Overdraft"},
    {ModelKind::MultiAccount, "MultiAccount"},
    {ModelKind::Combined, "Combined"},
    {ModelKind::Restricted, "Restricted"},
    {ModelKind::CreditMarket, "CreditMarket"},
    {ModelKind::MultiAsset, "MultiAsset"},
}};

void require(bool ok, const std::string& what) {
  if (!ok) throw ModelError(what);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::string_view kind_name(ModelKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

ModelKind parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw ModelError("unknown model kind '" + std::string(name) + "'");
}

bool has_volume(ModelKind kind) {
  switch (kind) {
    case ModelKind::CashOnly:
    case ModelKind::Overdraft:
    case ModelKind::MultiAccount:
    case ModelKind::CreditMarket:
      return true;
    default:
      return false;
  }
}

ModelSpec ModelSpec::cash_only(std::int64_t n, double volume_y) {
  ModelSpec s;
  s.kind = ModelKind::CashOnly;
  s.n_agents = n;
  s.volume_y = volume_y;
  return s;
}

ModelSpec ModelSpec::overdraft_model(std::int64_t n, double d, double volume_x) {
  ModelSpec s;
  s.kind = ModelKind::Overdraft;
  s.n_agents = n;
  s.overdraft = d;
  s.volume_x = volume_x;
  return s;
}

ModelSpec ModelSpec::multi_account(std::vector<int> accounts, std::vector<double> overdrafts,
                                   double volume_x) {
  ModelSpec s;
  s.kind = ModelKind::MultiAccount;
  s.n_agents = static_cast<std::int64_t>(accounts.size());
  s.accounts_per_agent = std::move(accounts);
  s.account_overdrafts = std::move(overdrafts);
  s.volume_x = volume_x;
  return s;
}

ModelSpec ModelSpec::combined(std::int64_t n, double d) {
  ModelSpec s;
  s.kind = ModelKind::Combined;
  s.n_agents = n;
  s.overdraft = d;
  return s;
}

ModelSpec ModelSpec::restricted(std::int64_t n, double d) {
  ModelSpec s;
  s.kind = ModelKind::Restricted;
  s.n_agents = n;
  s.overdraft = d;
  return s;
}

ModelSpec ModelSpec::credit_market(std::int64_t n, double monetary_base) {
  ModelSpec s;
  s.kind = ModelKind::CreditMarket;
  s.n_agents = n;
  s.volume_x = monetary_base;
  s.q0 = 0.0;
  return s;
}

ModelSpec ModelSpec::multi_asset(std::int64_t n, int classes) {
  ModelSpec s;
  s.kind = ModelKind::MultiAsset;
  s.n_agents = n;
  s.asset_classes = classes;
  return s;
}

std::int64_t ModelSpec::total_accounts() const {
  if (kind != ModelKind::MultiAccount) return n_agents;
  return std::accumulate(accounts_per_agent.begin(), accounts_per_agent.end(), std::int64_t{0});
}

double ModelSpec::total_overdraft() const {
  if (kind == ModelKind::MultiAccount) {
    return std::accumulate(account_overdrafts.begin(), account_overdrafts.end(), 0.0);
  }
  return static_cast<double>(n_agents) * overdraft;
}

std::optional<double> ModelSpec::volume() const {
  switch (kind) {
    case ModelKind::CashOnly:
      return volume_y;
    case ModelKind::Overdraft:
    case ModelKind::MultiAccount:
    case ModelKind::CreditMarket:
      return volume_x;
    default:
      return std::nullopt;
  }
}

void validate(const ModelSpec& spec) {
  require(spec.n_agents >= 1, "n_agents must be >= 1");
  switch (spec.kind) {
    case ModelKind::CashOnly:
      require(positive_finite(spec.volume_y), "volume_y must be > 0");
      break;
    case ModelKind::Overdraft:
      require(positive_finite(spec.volume_x), "volume_x must be > 0");
      require(std::isfinite(spec.overdraft) && spec.overdraft >= 0.0, "overdraft must be >= 0");
      break;
    case ModelKind::MultiAccount: {
      require(positive_finite(spec.volume_x), "volume_x must be > 0");
      require(!spec.accounts_per_agent.empty(), "accounts_per_agent must list every agent");
      require(static_cast<std::int64_t>(spec.accounts_per_agent.size()) == spec.n_agents,
              "accounts_per_agent must have n_agents entries");
      for (int r : spec.accounts_per_agent) require(r >= 1, "each agent needs >= 1 account");
      require(static_cast<std::int64_t>(spec.account_overdrafts.size()) == spec.total_accounts(),
              "account_overdrafts must have one entry per account");
      for (double d : spec.account_overdrafts) {
        require(std::isfinite(d) && d >= 0.0, "account overdrafts must be >= 0");
      }
      break;
    }
    case ModelKind::Combined:
      require(std::isfinite(spec.overdraft) && spec.overdraft >= 0.0, "overdraft must be >= 0");
      break;
    case ModelKind::Restricted:
      require(std::isfinite(spec.overdraft) && spec.overdraft >= 0.0, "overdraft must be >= 0");
      require(spec.overdraft > 0.0, "Restricted model with d = 0 has no configurations (Z = 0)");
      break;
    case ModelKind::CreditMarket:
      require(positive_finite(spec.volume_x), "monetary base volume_x must be > 0");
      require(spec.q0 == 0.0, "CreditMarket requires q0 = 0 (closed credit system)");
      break;
    case ModelKind::MultiAsset:
      require(spec.asset_classes >= 1, "asset_classes must be >= 1");
      break;
  }
}

}  // namespace moneystat
