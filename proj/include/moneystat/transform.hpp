#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "moneystat/dynamics.hpp"
#include "moneystat/model.hpp"

namespace moneystat {

enum class SegmentKind { Isothermal, Adiabatic, Isochoric, FreeExpansion };

/// One leg of a process in the (T, V) plane. Free expansion is the only
/// irreversible leg: T is unchanged, no credit flows and no work is done.
struct Segment {
  SegmentKind kind = SegmentKind::Isothermal;
  double t_start = 0.0;
  double t_end = 0.0;
  double v_start = 0.0;
  double v_end = 0.0;

  static Segment isothermal(double t, double v_start, double v_end);
  static Segment isochoric(double v, double t_start, double t_end);
  static Segment free_expansion(double t, double v_start, double v_end);
};

struct ProcessPath {
  ModelSpec model;
  std::vector<Segment> segments;

  /// Append an adiabatic leg from the current end state to `v_end`.
  ProcessPath& adiabatic_to(double v_end);
  ProcessPath& then(const Segment& s);
  [[nodiscard]] bool closed(double tol = 1e-12) const;
};

/// Throws ModelError if the model has no volume, a volume is non-positive or
/// adjacent segments do not share their endpoint states.
void validate_path(const ProcessPath& path);

/// L from adaptive quadrature together with the closed-form value.
struct PathIntegral {
  double quadrature = 0.0;
  double closed_form = 0.0;
};

/// L = integral of P dV along the path.
PathIntegral work_along_path(const ProcessPath& path);

/// C = integral of T dS along a quasi-static path. Throws ModelError on a
/// free-expansion leg.
PathIntegral credit_along_path(const ProcessPath& path);

struct AdiabatResult {
  double t_end = 0.0;
  double v_end = 0.0;
  double entropy_start = 0.0;
  double entropy_end = 0.0;
  double delta_money = 0.0;
  double work = 0.0;             // integral of P dV along the adiabat
  double energy_residual = 0.0;  // |dm + L| / scale
};

/// End state with S(T', V_end) = S(T, V).
AdiabatResult adiabat_solve(const ModelSpec& spec, double t, double v, double v_end);

struct CycleReport {
  double work_l = 0.0;
  double credit_in_ch = 0.0;   // credit absorbed at the hot side (> 0)
  double credit_out_cc = 0.0;  // credit released at the cold side (< 0)
  double delta_s_hot = 0.0;
  double eta = 0.0;
  double carnot_eta = 0.0;
  double net_credit = 0.0;
  double work_closed_form = 0.0;
};

/// Analysis of a closed path; free-expansion legs contribute no work or credit.
CycleReport analyze_cycle(const ProcessPath& path);

/// Isothermal T_h V1->V2, adiabat to T_c, isothermal back, adiabat home.
/// Throws std::logic_error if eta differs from 1 - T_c/T_h or L from
/// (T_h - T_c) dS by more than 1e-9.
CycleReport carnot_cycle(const ModelSpec& spec, double t_hot, double t_cold, double v1, double v2);

/// The Carnot path itself, for tabulation.
ProcessPath carnot_path(const ModelSpec& spec, double t_hot, double t_cold, double v1, double v2);

/// Same cycle with the hot isothermal leg preceded by a free expansion from
/// v1 to v_free (v1 < v_free < v2).
ProcessPath carnot_path_with_free_expansion(const ModelSpec& spec, double t_hot, double t_cold,
                                            double v1, double v_free, double v2);

struct PolicyVerdict {
  double credit_ratio = 0.0;       // |C_c| / |C_h|
  double temperature_ratio = 0.0;  // T_c / T_h
  bool temperature_bound = false;  // credit_ratio >= temperature_ratio
  std::optional<double> money_ratio;
  std::optional<bool> money_bound;
};

/// Bound check on the policy performance. Comparisons allow 1e-9 relative slack
/// so that a reversible cycle sits on the bound.
PolicyVerdict policy_bound_check(double c_cold, double c_hot, double t_cold, double t_hot,
                                 std::optional<double> m_cold = std::nullopt,
                                 std::optional<double> m_hot = std::nullopt);

struct ReserveState {
  double money = 0.0;
  double temperature = 0.0;
};

/// m = (1/r - 1) V and T = m / N.
ReserveState fractional_reserve(double r, double base, double n_agents);

/// Base V' that keeps T fixed when the reserve ratio changes from r to r'.
/// Throws std::logic_error if V' - V = V'/r' - V/r fails by more than 1e-9.
double isothermal_base(double r, double base, double r_new);

struct GibbsDuhemResidual {
  double gibbs_duhem = 0.0;             // S dT - V dP + N dmu
  double gibbs_duhem_relative = 0.0;
  double first_principle = 0.0;         // T dS - dm - P dV + mu dN
  double first_principle_relative = 0.0;
};

/// Finite increments (dT, dV, dN) evaluated centrally around (T, V, N).
GibbsDuhemResidual gibbs_duhem_residual(const ModelSpec& spec, double t, double v, double n,
                                        double dt, double dv, double dn);

struct ExpansionAudit {
  double delta_money = 0.0;
  double delta_temperature = 0.0;
  double delta_entropy = 0.0;
  double expected_delta_entropy = 0.0;  // N ln(V'/V)
  double clausius_integral = 0.0;       // integral of dC/T, zero for an isolated system
  bool ok = false;
};

ExpansionAudit spontaneous_expansion_audit(const Population& before, const Population& after);

/// TSV rows `V\tT\tP\tS` sampled along the path.
void write_path_tsv(const ProcessPath& path, std::ostream& out, int points_per_segment = 32);

}  // namespace moneystat
