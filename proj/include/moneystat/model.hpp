#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace moneystat {

/// Raised when a model description violates its invariants or an operation is
/// asked for something the model does not define.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ModelKind {
  CashOnly,      // M = sum x_i, x_i >= 0
  Overdraft,     // M = sum y_i, y_i >= -d
  MultiAccount,  // M = sum_ij y_ij, y_ij >= -d_ij
  Combined,      // M = sum (x_i + y_i), y_i >= -d
  Restricted,    // M = sum (x_i + y_i), y_i in [-d, 0]
  CreditMarket,  // M = sum credit_i, sum x_i = M0 fixed
  MultiAsset,    // M = sum_ij y_ij over I asset classes
};

std::string_view kind_name(ModelKind kind);
ModelKind parse_kind(std::string_view name);

/// Whether the model's partition function carries a volume factor, so that
/// pressure is defined.
bool has_volume(ModelKind kind);

struct ModelSpec {
  ModelKind kind = ModelKind::CashOnly;
  std::int64_t n_agents = 1;
  double overdraft = 0.0;
  std::vector<int> accounts_per_agent;     // MultiAccount: r_i
  std::vector<double> account_overdrafts;  // MultiAccount: d_ij, agent-major
  int asset_classes = 1;                   // MultiAsset
  double volume_y = 1.0;
  double volume_x = 1.0;  // CreditMarket: the monetary base M0
  double q0 = 0.0;

  static ModelSpec cash_only(std::int64_t n, double volume_y = 1.0);
  static ModelSpec overdraft_model(std::int64_t n, double d, double volume_x = 1.0);
  static ModelSpec multi_account(std::vector<int> accounts, std::vector<double> overdrafts,
                                 double volume_x = 1.0);
  static ModelSpec combined(std::int64_t n, double d);
  static ModelSpec restricted(std::int64_t n, double d);
  static ModelSpec credit_market(std::int64_t n, double monetary_base);
  static ModelSpec multi_asset(std::int64_t n, int classes);

  /// Total number of accounts R (MultiAccount), otherwise N.
  [[nodiscard]] std::int64_t total_accounts() const;
  [[nodiscard]] double total_overdraft() const;
  /// V_y for CashOnly, V_x for Overdraft/MultiAccount/CreditMarket.
  [[nodiscard]] std::optional<double> volume() const;
};

/// Throws ModelError on any invariant violation.
void validate(const ModelSpec& spec);

/// Thermodynamic bundle at one operating point. Pressure, volume and chemical
/// potential are absent where the model does not define them.
struct ThermoState {
  double temperature = 0.0;
  double mean_money = 0.0;
  double entropy = 0.0;
  double free_energy = 0.0;
  std::optional<double> pressure;
  std::optional<double> volume;
  double n_agents = 0.0;
  std::optional<double> chemical_potential;
};

}  // namespace moneystat
