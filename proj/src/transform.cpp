#include "moneystat/transform.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "moneystat/ensemble.hpp"

namespace moneystat {

namespace {

constexpr double kQuadratureTol = 1e-12;
constexpr double kContinuityTol = 1e-9;

ThermoState state_at(const ModelSpec& spec, double t, double v) {
  return thermo_state_at(spec, t, v, static_cast<double>(spec.n_agents));
}

double entropy_at(const ModelSpec& spec, double t, double v) { return state_at(spec, t, v).entropy; }

template <class F>
double bisect_increasing(F&& f, double lo, double hi) {
  for (int i = 0; i < 400 && f(lo) > 0.0; ++i) lo *= 0.5;
  for (int i = 0; i < 400 && f(hi) < 0.0; ++i) hi *= 2.0;
  if (!(f(lo) <= 0.0 && f(hi) >= 0.0)) throw ModelError("isentropic state is not reachable");
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Temperature at volume v on the isentrope of entropy s.
double isentropic_temperature(const ModelSpec& spec, double s, double v, double t_guess) {
  return bisect_increasing([&](double t) { return entropy_at(spec, t, v) - s; }, 0.5 * t_guess,
                           2.0 * t_guess);
}

// Volume at temperature t on the isentrope of entropy s.
double isentropic_volume(const ModelSpec& spec, double s, double t, double v_guess) {
  return bisect_increasing([&](double v) { return entropy_at(spec, t, v) - s; }, 0.5 * v_guess,
                           2.0 * v_guess);
}

template <class F>
double integrate(F&& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, kQuadratureTol);
}

void require_volume_model(const ModelSpec& spec) {
  validate(spec);
  if (!has_volume(spec.kind)) {
    throw ModelError("process paths need a model with a volume; " + std::string(kind_name(spec.kind)) +
                     " has none");
  }
}

bool close_to(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

// Temperature along a segment as a function of volume (isochoric legs are
// parametrized by T instead and never call this).
double segment_temperature(const ModelSpec& spec, const Segment& seg, double v) {
  if (seg.kind == SegmentKind::Adiabatic) {
    const double s = entropy_at(spec, seg.t_start, seg.v_start);
    return isentropic_temperature(spec, s, v, seg.t_start);
  }
  return seg.t_start;
}

struct SegmentFlows {
  PathIntegral work;
  PathIntegral credit;
};

SegmentFlows segment_flows(const ModelSpec& spec, const Segment& seg) {
  SegmentFlows f;
  const auto st0 = state_at(spec, seg.t_start, seg.v_start);
  const auto st1 = state_at(spec, seg.t_end, seg.v_end);
  switch (seg.kind) {
    case SegmentKind::Isothermal: {
      f.work.quadrature = integrate(
          [&](double v) { return *state_at(spec, seg.t_start, v).pressure; }, seg.v_start, seg.v_end);
      f.work.closed_form = static_cast<double>(spec.n_agents) * seg.t_start *
                           std::log(seg.v_end / seg.v_start);
      // dS = (dS/dV)_T dV on an isotherm.
      const double t = seg.t_start;
      f.credit.quadrature = integrate(
          [&](double v) {
            const double hv = 1e-6 * v;
            return t * (entropy_at(spec, t, v + hv) - entropy_at(spec, t, v - hv)) / (2.0 * hv);
          },
          seg.v_start, seg.v_end);
      f.credit.closed_form = t * (st1.entropy - st0.entropy);
      break;
    }
    case SegmentKind::Adiabatic:
      f.work.quadrature = integrate(
          [&](double v) { return *state_at(spec, segment_temperature(spec, seg, v), v).pressure; },
          seg.v_start, seg.v_end);
      f.work.closed_form = -(st1.mean_money - st0.mean_money);
      break;
    case SegmentKind::Isochoric: {
      const double v = seg.v_start;
      f.credit.quadrature = integrate(
          [&](double t) {
            const double ht = 1e-6 * t;
            return t * (entropy_at(spec, t + ht, v) - entropy_at(spec, t - ht, v)) / (2.0 * ht);
          },
          seg.t_start, seg.t_end);
      f.credit.closed_form = st1.mean_money - st0.mean_money;
      break;
    }
    case SegmentKind::FreeExpansion:
      break;
  }
  return f;
}

void put(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

Segment Segment::isothermal(double t, double v_start, double v_end) {
  return {SegmentKind::Isothermal, t, t, v_start, v_end};
}

Segment Segment::isochoric(double v, double t_start, double t_end) {
  return {SegmentKind::Isochoric, t_start, t_end, v, v};
}

Segment Segment::free_expansion(double t, double v_start, double v_end) {
  return {SegmentKind::FreeExpansion, t, t, v_start, v_end};
}

ProcessPath& ProcessPath::adiabatic_to(double v_end) {
  if (segments.empty()) throw ModelError("adiabatic leg needs a preceding state");
  const Segment& last = segments.back();
  const AdiabatResult r = adiabat_solve(model, last.t_end, last.v_end, v_end);
  segments.push_back({SegmentKind::Adiabatic, last.t_end, r.t_end, last.v_end, v_end});
  return *this;
}

ProcessPath& ProcessPath::then(const Segment& s) {
  segments.push_back(s);
  return *this;
}

bool ProcessPath::closed(double tol) const {
  if (segments.empty()) return false;
  return close_to(segments.front().t_start, segments.back().t_end, tol) &&
         close_to(segments.front().v_start, segments.back().v_end, tol);
}

void validate_path(const ProcessPath& path) {
  require_volume_model(path.model);
  if (path.segments.empty()) throw ModelError("process path has no segments");
  for (std::size_t i = 0; i < path.segments.size(); ++i) {
    const Segment& s = path.segments[i];
    if (!(s.v_start > 0.0 && s.v_end > 0.0)) throw ModelError("volumes along a path must be > 0");
    if (!(s.t_start > 0.0 && s.t_end > 0.0)) throw ModelError("temperatures along a path must be > 0");
    if (s.kind == SegmentKind::Isothermal && s.t_start != s.t_end) {
      throw ModelError("isothermal segment changes temperature");
    }
    if (s.kind == SegmentKind::Isochoric && s.v_start != s.v_end) {
      throw ModelError("isochoric segment changes volume");
    }
    if (s.kind == SegmentKind::FreeExpansion && !(s.v_end >= s.v_start && s.t_start == s.t_end)) {
      throw ModelError("free expansion must keep T and not shrink V");
    }
    if (s.kind == SegmentKind::Adiabatic) {
      const double s0 = entropy_at(path.model, s.t_start, s.v_start);
      const double s1 = entropy_at(path.model, s.t_end, s.v_end);
      if (!close_to(s0, s1, kContinuityTol) && std::abs(s0 - s1) > kContinuityTol) {
        throw ModelError("adiabatic segment does not conserve entropy");
      }
    }
    if (i > 0) {
      const Segment& p = path.segments[i - 1];
      if (!close_to(p.t_end, s.t_start, kContinuityTol) || !close_to(p.v_end, s.v_start, kContinuityTol)) {
        throw ModelError("segments " + std::to_string(i - 1) + " and " + std::to_string(i) +
                         " do not share an endpoint");
      }
    }
  }
}

PathIntegral work_along_path(const ProcessPath& path) {
  validate_path(path);
  PathIntegral total;
  for (const auto& seg : path.segments) {
    const auto f = segment_flows(path.model, seg);
    total.quadrature += f.work.quadrature;
    total.closed_form += f.work.closed_form;
  }
  return total;
}

PathIntegral credit_along_path(const ProcessPath& path) {
  validate_path(path);
  PathIntegral total;
  for (const auto& seg : path.segments) {
    if (seg.kind == SegmentKind::FreeExpansion) {
      throw ModelError("credit integral is undefined on a free-expansion (non-quasi-static) leg");
    }
    const auto f = segment_flows(path.model, seg);
    total.quadrature += f.credit.quadrature;
    total.closed_form += f.credit.closed_form;
  }
  return total;
}

AdiabatResult adiabat_solve(const ModelSpec& spec, double t, double v, double v_end) {
  require_volume_model(spec);
  if (!(t > 0.0 && v > 0.0)) throw ModelError("adiabat start state must have T > 0 and V > 0");
  if (!(v_end > 0.0)) throw ModelError("adiabat target volume must be > 0");
  AdiabatResult r;
  r.v_end = v_end;
  r.entropy_start = entropy_at(spec, t, v);
  r.t_end = v_end == v ? t : isentropic_temperature(spec, r.entropy_start, v_end, t * v / v_end);
  r.entropy_end = entropy_at(spec, r.t_end, v_end);
  r.delta_money = state_at(spec, r.t_end, v_end).mean_money - state_at(spec, t, v).mean_money;
  const Segment seg{SegmentKind::Adiabatic, t, r.t_end, v, v_end};
  r.work = integrate([&](double vv) { return *state_at(spec, segment_temperature(spec, seg, vv), vv).pressure; },
                     v, v_end);
  const double scale = std::max(std::abs(r.delta_money), std::abs(r.work));
  r.energy_residual = scale > 0.0 ? std::abs(r.delta_money + r.work) / scale : 0.0;
  return r;
}

CycleReport analyze_cycle(const ProcessPath& path) {
  validate_path(path);
  if (!path.closed(kContinuityTol)) throw ModelError("cycle analysis needs a closed path");
  CycleReport rep;
  double t_min = path.segments.front().t_start;
  double t_max = t_min;
  for (const auto& seg : path.segments) {
    t_min = std::min({t_min, seg.t_start, seg.t_end});
    t_max = std::max({t_max, seg.t_start, seg.t_end});
  }
  for (const auto& seg : path.segments) {
    const auto f = segment_flows(path.model, seg);
    rep.work_l += f.work.quadrature;
    rep.work_closed_form += f.work.closed_form;
    const double c = f.credit.quadrature;
    rep.net_credit += c;
    if (c > 0.0) {
      rep.credit_in_ch += c;
    } else {
      rep.credit_out_cc += c;
    }
    if (seg.kind == SegmentKind::Isothermal && seg.t_start == t_max) {
      rep.delta_s_hot += f.credit.closed_form / t_max;
    }
  }
  rep.eta = rep.credit_in_ch != 0.0 ? rep.work_l / std::abs(rep.credit_in_ch) : 0.0;
  rep.carnot_eta = 1.0 - t_min / t_max;
  return rep;
}

ProcessPath carnot_path(const ModelSpec& spec, double t_hot, double t_cold, double v1, double v2) {
  require_volume_model(spec);
  if (!(t_hot > t_cold && t_cold > 0.0)) throw ModelError("Carnot cycle needs T_h > T_c > 0");
  if (!(v2 > v1 && v1 > 0.0)) throw ModelError("Carnot cycle needs V2 > V1 > 0");
  const double s_low = entropy_at(spec, t_hot, v1);
  const double s_high = entropy_at(spec, t_hot, v2);
  const double v3 = isentropic_volume(spec, s_high, t_cold, v2 * t_hot / t_cold);
  const double v4 = isentropic_volume(spec, s_low, t_cold, v1 * t_hot / t_cold);
  ProcessPath path{spec, {}};
  path.then(Segment::isothermal(t_hot, v1, v2)).adiabatic_to(v3);
  path.then(Segment::isothermal(t_cold, v3, v4)).adiabatic_to(v1);
  // Pin the closing temperature; the bisection leaves it within rounding of T_h.
  path.segments.back().t_end = t_hot;
  return path;
}

ProcessPath carnot_path_with_free_expansion(const ModelSpec& spec, double t_hot, double t_cold,
                                            double v1, double v_free, double v2) {
  if (!(v1 < v_free && v_free < v2)) throw ModelError("free-expansion leg needs V1 < V_free < V2");
  ProcessPath path = carnot_path(spec, t_hot, t_cold, v1, v2);
  path.segments.front() = Segment::isothermal(t_hot, v_free, v2);
  path.segments.insert(path.segments.begin(), Segment::free_expansion(t_hot, v1, v_free));
  return path;
}

CycleReport carnot_cycle(const ModelSpec& spec, double t_hot, double t_cold, double v1, double v2) {
  const ProcessPath path = carnot_path(spec, t_hot, t_cold, v1, v2);
  CycleReport rep = analyze_cycle(path);
  const double ds = entropy_at(spec, t_hot, v2) - entropy_at(spec, t_hot, v1);
  const double l_expected = (t_hot - t_cold) * ds;
  if (!close_to(rep.eta, rep.carnot_eta, 1e-9)) {
    throw std::logic_error("Carnot efficiency " + std::to_string(rep.eta) + " differs from 1 - Tc/Th");
  }
  if (!close_to(rep.work_l, l_expected, 1e-9)) {
    throw std::logic_error("Carnot work differs from (Th - Tc) dS");
  }
  return rep;
}

PolicyVerdict policy_bound_check(double c_cold, double c_hot, double t_cold, double t_hot,
                                 std::optional<double> m_cold, std::optional<double> m_hot) {
  if (c_hot == 0.0) throw ModelError("hot-side credit must be non-zero");
  if (!(t_cold > 0.0 && t_hot > 0.0)) throw ModelError("temperatures must be > 0");
  constexpr double slack = 1e-9;
  PolicyVerdict v;
  v.credit_ratio = std::abs(c_cold) / std::abs(c_hot);
  v.temperature_ratio = t_cold / t_hot;
  v.temperature_bound = v.credit_ratio >= v.temperature_ratio * (1.0 - slack);
  if (m_cold && m_hot) {
    if (*m_hot == 0.0) throw ModelError("hot-side money must be non-zero");
    v.money_ratio = *m_cold / *m_hot;
    v.money_bound = v.credit_ratio >= *v.money_ratio * (1.0 - slack);
  }
  return v;
}

ReserveState fractional_reserve(double r, double base, double n_agents) {
  if (!(r > 0.0 && r < 1.0)) throw ModelError("reserve ratio must lie in (0, 1)");
  if (!(n_agents > 0.0)) throw ModelError("n_agents must be > 0");
  ReserveState s;
  s.money = (1.0 / r - 1.0) * base;
  s.temperature = s.money / n_agents;
  return s;
}

double isothermal_base(double r, double base, double r_new) {
  if (!(r > 0.0 && r < 1.0) || !(r_new > 0.0 && r_new < 1.0)) {
    throw ModelError("reserve ratios must lie in (0, 1)");
  }
  const double v_new = base * (1.0 / r - 1.0) / (1.0 / r_new - 1.0);
  const double lhs = v_new - base;
  const double rhs = v_new / r_new - base / r;
  const double scale = std::max({std::abs(base / r), std::abs(v_new / r_new), 1e-300});
  if (std::abs(lhs - rhs) > 1e-9 * scale) {
    throw std::logic_error("isothermal reserve identity V' - V = V'/r' - V/r violated");
  }
  return v_new;
}

GibbsDuhemResidual gibbs_duhem_residual(const ModelSpec& spec, double t, double v, double n,
                                        double dt, double dv, double dn) {
  validate(spec);
  const bool vol = has_volume(spec.kind);
  const double vv = vol ? v : 0.0;
  const double dvv = vol ? dv : 0.0;
  const ThermoState c = thermo_state_at(spec, t, vv, n);
  if (!c.chemical_potential) {
    throw ModelError(std::string(kind_name(spec.kind)) + " does not define a chemical potential");
  }
  const ThermoState a = thermo_state_at(spec, t - 0.5 * dt, vv - 0.5 * dvv, n - 0.5 * dn);
  const ThermoState b = thermo_state_at(spec, t + 0.5 * dt, vv + 0.5 * dvv, n + 0.5 * dn);

  const double d_mu = *b.chemical_potential - *a.chemical_potential;
  const double d_p = vol ? *b.pressure - *a.pressure : 0.0;
  const double p = vol ? *c.pressure : 0.0;
  const double mu = *c.chemical_potential;

  GibbsDuhemResidual r;
  const double gd_terms[] = {c.entropy * dt, -vv * d_p, n * d_mu};
  const double fp_terms[] = {t * (b.entropy - a.entropy), -(b.mean_money - a.mean_money), -p * dvv,
                             mu * dn};
  double gd_scale = 0.0;
  double fp_scale = 0.0;
  for (double x : gd_terms) {
    r.gibbs_duhem += x;
    gd_scale += std::abs(x);
  }
  for (double x : fp_terms) {
    r.first_principle += x;
    fp_scale += std::abs(x);
  }
  r.gibbs_duhem_relative = gd_scale > 0.0 ? std::abs(r.gibbs_duhem) / gd_scale : 0.0;
  r.first_principle_relative = fp_scale > 0.0 ? std::abs(r.first_principle) / fp_scale : 0.0;
  return r;
}

ExpansionAudit spontaneous_expansion_audit(const Population& before, const Population& after) {
  if (before.model.kind != ModelKind::CashOnly || after.model.kind != ModelKind::CashOnly) {
    throw ModelError("expansion audit needs CashOnly populations");
  }
  ExpansionAudit a;
  const double n = static_cast<double>(before.model.n_agents);
  const double m0 = before.conserved_sum();
  const double m1 = after.conserved_sum();
  a.delta_money = m1 - m0;
  a.delta_temperature = m1 / n - m0 / n;
  a.delta_entropy = microcanonical_entropy(after.model, m1) - microcanonical_entropy(before.model, m0);
  a.expected_delta_entropy = n * std::log(after.model.volume_y / before.model.volume_y);
  a.clausius_integral = 0.0;
  const bool expanded = after.model.volume_y > before.model.volume_y;
  const double tol = 1e-9 * std::max(1.0, std::abs(a.expected_delta_entropy));
  a.ok = a.delta_money == 0.0 && a.delta_temperature == 0.0 &&
         std::abs(a.delta_entropy - a.expected_delta_entropy) <= tol &&
         (expanded ? a.delta_entropy > a.clausius_integral : a.delta_entropy == 0.0);
  return a;
}

void write_path_tsv(const ProcessPath& path, std::ostream& out, int points_per_segment) {
  validate_path(path);
  if (points_per_segment < 2) throw std::invalid_argument("need at least two points per segment");
  out << "V\tT\tP\tS\n";
  for (const auto& seg : path.segments) {
    for (int i = 0; i < points_per_segment; ++i) {
      const double f = static_cast<double>(i) / (points_per_segment - 1);
      double v = seg.v_start + f * (seg.v_end - seg.v_start);
      double t = 0.0;
      if (seg.kind == SegmentKind::Isochoric) {
        v = seg.v_start;
        t = seg.t_start + f * (seg.t_end - seg.t_start);
      } else {
        t = segment_temperature(path.model, seg, v);
      }
      const ThermoState st = state_at(path.model, t, v);
      put(out, v);
      out << '\t';
      put(out, t);
      out << '\t';
      put(out, *st.pressure);
      out << '\t';
      put(out, st.entropy);
      out << '\n';
    }
  }
}

}  // namespace moneystat
