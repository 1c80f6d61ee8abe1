#include "moneystat/ensemble.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace moneystat {

namespace {

// Below this d/T the Restricted expressions switch to their series form.
constexpr double kRestrictedSeriesThreshold = 1e-8;

void require_temperature(double t) {
  if (!(std::isfinite(t) && t > 0.0)) {
    throw std::domain_error("temperature must be finite and > 0, got " + std::to_string(t));
  }
}

// ln(e^u - 1) without overflow for large u.
double log_expm1(double u) {
  if (u > 30.0) return u + std::log1p(-std::exp(-u));
  return std::log(std::expm1(u));
}

// d / (1 - e^{-d/T}), the mean |y| offset term of the Restricted model.
double restricted_offset(double d, double t) { return d / -std::expm1(-d / t); }

double resolve_volume(const ModelSpec& spec, double volume) {
  if (!has_volume(spec.kind)) return 0.0;
  if (!(std::isfinite(volume) && volume > 0.0)) {
    throw std::domain_error("volume must be finite and > 0");
  }
  return volume;
}

}  // namespace

double temperature_closed_form(const ModelSpec& spec, double m_or_q0) {
  validate(spec);
  const double n = static_cast<double>(spec.n_agents);
  double t = 0.0;
  switch (spec.kind) {
    case ModelKind::CashOnly:
    case ModelKind::CreditMarket:
      t = m_or_q0 / n;
      break;
    case ModelKind::Overdraft:
      t = m_or_q0 / n + spec.overdraft;
      break;
    case ModelKind::MultiAccount: {
      const double r = static_cast<double>(spec.total_accounts());
      t = m_or_q0 / r + spec.total_overdraft() / r;
      break;
    }
    case ModelKind::Combined:
      t = 0.5 * (m_or_q0 / n + spec.overdraft);
      break;
    case ModelKind::MultiAsset:
      t = m_or_q0 / (n * spec.asset_classes);
      break;
    case ModelKind::Restricted:
      throw ModelError("Restricted model has no closed-form temperature; "
                       "use invert_temperature_restricted");
  }
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw ModelError("parameters give a non-positive temperature (" + std::to_string(t) + ")");
  }
  return t;
}

double log_partition(const ModelSpec& spec, double temperature) {
  validate(spec);
  return log_partition_at(spec, temperature, spec.volume().value_or(0.0),
                          static_cast<double>(spec.n_agents));
}

double log_partition_at(const ModelSpec& spec, double t, double volume, double n) {
  require_temperature(t);
  const double v = resolve_volume(spec, volume);
  const double d = spec.overdraft;
  switch (spec.kind) {
    case ModelKind::CashOnly:
    case ModelKind::CreditMarket:
      return n * (std::log(v) + std::log(t));
    case ModelKind::Overdraft:
      return n * (std::log(v) + std::log(t) + d / t);
    case ModelKind::MultiAccount: {
      const double r = static_cast<double>(spec.total_accounts());
      return n * std::log(v) + r * std::log(t) + spec.total_overdraft() / t;
    }
    case ModelKind::Combined:
      return 2.0 * n * std::log(t) + n * d / t;
    case ModelKind::Restricted: {
      const double l = log_expm1(d / t);
      if (!std::isfinite(l)) throw ModelError("Restricted model is degenerate: e^{d/T} - 1 underflows");
      return 2.0 * n * std::log(t) + n * l;
    }
    case ModelKind::MultiAsset:
      return n * spec.asset_classes * std::log(t);
  }
  throw ModelError("unhandled model kind");
}

ThermoState thermo_state(const ModelSpec& spec, double temperature) {
  validate(spec);
  return thermo_state_at(spec, temperature, spec.volume().value_or(0.0),
                         static_cast<double>(spec.n_agents));
}

ThermoState thermo_state_at(const ModelSpec& spec, double t, double volume, double n) {
  const double ln_z = log_partition_at(spec, t, volume, n);
  const double v = resolve_volume(spec, volume);
  const double d = spec.overdraft;
  const double ln_t = std::log(t);

  ThermoState st;
  st.temperature = t;
  st.n_agents = n;
  st.free_energy = -t * ln_z;

  switch (spec.kind) {
    case ModelKind::CashOnly:
    case ModelKind::CreditMarket:
    case ModelKind::Overdraft: {
      const double ln_vt = std::log(v) + ln_t;
      const double shift = spec.kind == ModelKind::Overdraft ? d : 0.0;
      st.entropy = n * ln_vt + n;
      st.mean_money = n * t - n * shift;
      st.pressure = n * t / v;
      st.volume = v;
      st.chemical_potential = -t * ln_vt - shift;
      break;
    }
    case ModelKind::MultiAccount: {
      const double r = static_cast<double>(spec.total_accounts());
      st.entropy = n * std::log(v) + r * ln_t + r;
      st.mean_money = r * t - spec.total_overdraft();
      st.pressure = n * t / v;
      st.volume = v;
      // Adding an agent also adds accounts; no single-valued dF/dN.
      break;
    }
    case ModelKind::Combined:
      st.entropy = 2.0 * n * ln_t + 2.0 * n;
      st.mean_money = 2.0 * n * t - n * d;
      st.chemical_potential = -2.0 * t * ln_t - d;
      break;
    case ModelKind::Restricted: {
      const double u = d / t;
      const double l = log_expm1(u);
      const double offset = restricted_offset(d, t);
      st.entropy = 2.0 * n * ln_t + 2.0 * n + n * l - n * offset / t;
      st.mean_money = 2.0 * n * t - n * offset;
      st.chemical_potential = -2.0 * t * ln_t - t * l;
      break;
    }
    case ModelKind::MultiAsset: {
      const double k = static_cast<double>(spec.asset_classes);
      st.entropy = n * k * ln_t + n * k;
      st.mean_money = n * k * t;
      st.chemical_potential = -t * k * ln_t;
      break;
    }
  }
  return st;
}

double microcanonical_entropy(const ModelSpec& spec, double money) {
  if (spec.kind != ModelKind::CashOnly) {
    throw ModelError("microcanonical entropy is defined for the CashOnly model");
  }
  validate(spec);
  if (!(money > 0.0)) throw std::domain_error("money must be > 0");
  const double n = static_cast<double>(spec.n_agents);
  return n * (std::log(money) + std::log(spec.volume_y)) - std::lgamma(n + 1.0);
}

double mean_money_restricted(const ModelSpec& spec, double temperature) {
  if (spec.kind != ModelKind::Restricted) throw ModelError("expected a Restricted model");
  if (spec.n_agents < 1) throw ModelError("n_agents must be >= 1");
  if (!(spec.overdraft >= 0.0)) throw ModelError("overdraft must be >= 0");
  require_temperature(temperature);
  const double n = static_cast<double>(spec.n_agents);
  const double d = spec.overdraft;
  if (d / temperature < kRestrictedSeriesThreshold) {
    // d e^u/(e^u - 1) = T + d/2 + O(d^2/T)
    return n * temperature - 0.5 * n * d;
  }
  return 2.0 * n * temperature - n * restricted_offset(d, temperature);
}

double invert_temperature_restricted(const ModelSpec& spec, double money) {
  if (spec.kind != ModelKind::Restricted) throw ModelError("expected a Restricted model");
  if (!(spec.overdraft >= 0.0)) throw ModelError("overdraft must be >= 0");
  const double n = static_cast<double>(spec.n_agents);
  const double d = spec.overdraft;
  if (d == 0.0) {
    if (!(money > 0.0)) throw ModelError("money must be > 0 when d = 0");
    return money / n;
  }
  if (!std::isfinite(money)) throw std::domain_error("money must be finite");

  auto residual = [&](double t) { return mean_money_restricted(spec, t) - money; };

  double lo = d;
  double hi = d;
  double f_lo = residual(lo);
  for (int i = 0; i < 2000 && f_lo > 0.0; ++i) {
    lo *= 0.5;
    if (lo < std::numeric_limits<double>::min()) break;
    f_lo = residual(lo);
  }
  double f_hi = residual(hi);
  for (int i = 0; i < 2000 && f_hi < 0.0; ++i) {
    hi *= 2.0;
    if (!std::isfinite(hi)) break;
    f_hi = residual(hi);
  }
  if (!(f_lo <= 0.0 && f_hi >= 0.0)) {
    throw ModelError("money " + std::to_string(money) +
                     " is outside the attainable range for this Restricted model");
  }
  if (lo <= hi && f_lo > f_hi) throw std::logic_error("mean money is not increasing in T");

  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (residual(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace moneystat
