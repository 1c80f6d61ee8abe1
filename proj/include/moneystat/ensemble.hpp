#pragma once

#include "moneystat/model.hpp"

namespace moneystat {

/// Closed-form economic temperature as a function of the conserved money.
///
/// `m_or_q0` is the mean total money m for CashOnly, Combined, CreditMarket
/// and MultiAsset, and the account total Q0 for Overdraft and MultiAccount.
/// Restricted has no closed form; use invert_temperature_restricted.
double temperature_closed_form(const ModelSpec& spec, double m_or_q0);

/// ln Z of the canonical ensemble at temperature T.
double log_partition(const ModelSpec& spec, double temperature);

/// Same as log_partition with the volume and agent count relaxed to
/// continuous parameters. `volume` is ignored by models without one.
double log_partition_at(const ModelSpec& spec, double temperature, double volume,
                        double n_agents);

/// Full thermodynamic state from hand-derived closed forms.
ThermoState thermo_state(const ModelSpec& spec, double temperature);

ThermoState thermo_state_at(const ModelSpec& spec, double temperature, double volume,
                            double n_agents);

/// S = N (ln m + ln V_y) - ln N! for the cash-only microcanonical shell.
double microcanonical_entropy(const ModelSpec& spec, double money);

/// Mean total money of the Restricted model at temperature T. Accepts d = 0
/// through the small-d/T limit m = N T.
double mean_money_restricted(const ModelSpec& spec, double temperature);

/// Inverse of mean_money_restricted by bracketing and bisection, 1e-10 relative.
double invert_temperature_restricted(const ModelSpec& spec, double money);

}  // namespace moneystat
