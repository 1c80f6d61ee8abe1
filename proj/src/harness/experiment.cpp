#include "moneystat/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "moneystat/ensemble.hpp"
#include "moneystat/estimation.hpp"
#include "moneystat/transform.hpp"

namespace moneystat::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Runs task(i) for i in [0, count) on up to `threads` workers. The first
// exception by index is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::vector<std::exception_ptr> errors(count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double mean_of(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

double rel_err(double approx, double exact) {
  return std::abs(approx - exact) / std::max(std::abs(exact), 1e-300);
}

std::vector<std::string> fit_coordinates(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::CashOnly:
    case ModelKind::Combined:
    case ModelKind::Restricted:
      return {"x"};
    case ModelKind::Overdraft:
    case ModelKind::MultiAccount:
      return {"z"};
    case ModelKind::CreditMarket:
      return {"assets"};
    case ModelKind::MultiAsset:
      return coordinate_names(spec);
  }
  return {};
}

std::vector<double> pooled(const SampleSet& s, const std::vector<std::string>& coords) {
  std::vector<double> out;
  out.reserve(s.rows() * coords.size());
  for (const auto& c : coords) {
    const auto v = s.coordinate(c);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::vector<double> final_snapshot(const SampleSet& s, const std::vector<std::string>& coords) {
  std::vector<double> out;
  const std::size_t last = s.snapshot_steps.size() - 1;
  for (const auto& c : coords) {
    const auto v = s.snapshot(last, c);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

SampleSet last_snapshots(const SampleSet& s, std::uint64_t keep) {
  SampleSet out;
  out.meta = s.meta;
  out.coord_names = s.coord_names;
  out.units_per_snapshot = s.units_per_snapshot;
  const std::size_t total = s.snapshot_steps.size();
  const std::size_t first = total - std::min<std::size_t>(total, keep);
  const std::size_t width = s.units_per_snapshot * s.coord_names.size();
  out.snapshot_steps.assign(s.snapshot_steps.begin() + static_cast<std::ptrdiff_t>(first), s.snapshot_steps.end());
  out.values.assign(s.values.begin() + static_cast<std::ptrdiff_t>(first * width), s.values.end());
  return out;
}

json fit_json(const FitReport& f) {
  return {{"t_hat", f.t_hat}, {"stderr_t", f.stderr_t}, {"floor", f.floor}, {"n", f.n},
          {"ks_d", f.ks_d}, {"ks_pass_1pct", f.ks_pass_1pct}};
}

json ks_json(const KsResult& k, std::size_t n, const std::string& sample) {
  return {{"statistic", k.statistic}, {"critical", k.critical}, {"pass_1pct", k.pass_1pct}, {"n", n},
          {"sample", sample}};
}

// Bulk outputs a pipeline wants written next to report.json.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
  std::vector<std::uint64_t> seeds;
};

Binning binning_for(const ReportOptions& opt) {
  return opt.histogram_width ? Binning::fixed(*opt.histogram_width) : Binning::freedman_diaconis();
}

// --- simulate ---------------------------------------------------------------

json simulate(const ExperimentConfig& cfg, Artifacts* art) {
  ModelSpec spec = *cfg.model;
  const double n = static_cast<double>(spec.n_agents);

  ChainParams base;
  base.policy = cfg.initial.policy;
  base.steps = cfg.kernel.steps;
  base.burn_in = cfg.kernel.burn_in;
  base.thin = cfg.kernel.thin;
  base.audit_every = cfg.kernel.audit_every;

  double t_closed = 0.0;
  if (spec.kind == ModelKind::CreditMarket) {
    base.total = spec.volume_x;
    if (cfg.initial.total && *cfg.initial.total != spec.volume_x) {
      throw ConfigError("config.initial: CreditMarket total must equal the monetary base volume_x");
    }
    const double credit = cfg.initial.credit ? *cfg.initial.credit : n * *cfg.initial.temperature;
    base.credit = std::floor(credit / kCreditQuantum) * kCreditQuantum;
    t_closed = temperature_closed_form(spec, base.credit);
  } else if (cfg.initial.temperature) {
    base.total = total_for_temperature(spec, *cfg.initial.temperature);
    t_closed = *cfg.initial.temperature;
  } else {
    base.total = *cfg.initial.total;
    t_closed = spec.kind == ModelKind::Restricted ? invert_temperature_restricted(spec, base.total)
                                                  : temperature_closed_form(spec, base.total);
  }

  const auto coords = fit_coordinates(spec);
  const std::size_t replicas = cfg.replicas;
  std::vector<json> rows(replicas);
  std::vector<double> t_hats(replicas);
  std::vector<char> ks_pass(replicas);
  SampleSet kept;
  std::vector<double> kept_pool;
  art->seeds.resize(replicas);
  for (std::size_t i = 0; i < replicas; ++i) art->seeds[i] = derive_seed(cfg.seed, i);

  parallel_for(replicas, cfg.threads, [&](std::size_t i) {
    ChainParams p = base;
    p.seed = art->seeds[i];
    SampleSet s = run_chain(spec, p);
    if (s.snapshot_steps.empty()) throw ConfigError("config.kernel: no snapshots recorded; raise steps or lower thin");
    std::vector<double> pool = pooled(s, coords);
    const FitReport fit = fit_shifted_exponential(pool, 0.0);
    const std::vector<double> ks_sample = cfg.report.ks_final_snapshot ? final_snapshot(s, coords) : pool;
    const KsResult ks = ks_statistic_exponential(ks_sample, 0.0, t_closed);

    json row = {{"index", i},
                {"seed", p.seed},
                {"snapshots", s.snapshot_steps.size()},
                {"accepted_events", s.meta.accepted_events},
                {"fit", fit_json(fit)},
                {"ks", ks_json(ks, ks_sample.size(), cfg.report.ks_final_snapshot ? "final-snapshot" : "pooled")},
                {"audit",
                 {{"audits", s.meta.audit.audits},
                  {"max_relative_drift", s.meta.audit.max_relative_drift},
                  {"accounting_exact", s.meta.audit.accounting_exact}}}};
    if (spec.kind == ModelKind::Restricted) {
      const double m = mean_of(s.coordinate("x")) + mean_of(s.coordinate("y"));
      const double t_inv = invert_temperature_restricted(spec, m * n);
      row["restricted"] = {{"mean_money_per_agent", m},
                           {"inverted_temperature", t_inv},
                           {"inverted_vs_fit_relative", rel_err(t_inv, fit.t_hat)}};
    }
    if (spec.kind == ModelKind::MultiAsset) {
      json per_class = json::array();
      for (const auto& c : coords) per_class.push_back(fit_shifted_exponential(s.coordinate(c), 0.0).t_hat);
      row["class_t_hat"] = per_class;
    }
    rows[i] = std::move(row);
    t_hats[i] = fit.t_hat;
    ks_pass[i] = ks.pass_1pct ? 1 : 0;
    if (i == 0) {
      kept = last_snapshots(s, cfg.outputs.sample_snapshots);
      if (cfg.outputs.histogram) kept_pool = std::move(pool);
    }
  });

  json summary;
  summary["temperature_closed_form"] = t_closed;
  summary["fit_coordinates"] = coords;
  summary["t_hat_mean"] = mean_of(t_hats);
  summary["t_hat_relative_error"] = rel_err(mean_of(t_hats), t_closed);
  double worst = 0.0;
  for (double t : t_hats) worst = std::max(worst, rel_err(t, t_closed));
  summary["t_hat_max_relative_error"] = worst;
  const auto passes = static_cast<std::size_t>(std::count(ks_pass.begin(), ks_pass.end(), 1));
  summary["ks_pass_count"] = passes;
  summary["ks_pass_fraction"] = static_cast<double>(passes) / static_cast<double>(replicas);
  double drift = 0.0;
  bool exact = true;
  for (const auto& r : rows) {
    drift = std::max(drift, r["audit"]["max_relative_drift"].get<double>());
    exact = exact && r["audit"]["accounting_exact"].get<bool>();
  }
  summary["max_relative_drift"] = drift;
  summary["accounting_exact"] = exact;
  if (spec.kind == ModelKind::Restricted) {
    double m = 0.0;
    double worst_inv = 0.0;
    for (const auto& r : rows) {
      m += r["restricted"]["mean_money_per_agent"].get<double>();
      worst_inv = std::max(worst_inv, r["restricted"]["inverted_vs_fit_relative"].get<double>());
    }
    m /= static_cast<double>(replicas);
    const double m_theory = mean_money_restricted(spec, t_closed) / n;
    summary["mean_money_per_agent"] = m;
    summary["mean_money_closed_form"] = m_theory;
    summary["mean_money_relative_error"] = rel_err(m, m_theory);
    summary["inverted_vs_fit_max_relative"] = worst_inv;
  }

  if (cfg.outputs.samples) {
    std::ostringstream csv;
    write_samples_csv(kept, csv);
    art->files.emplace_back("samples.csv", csv.str());
  }
  if (cfg.outputs.histogram) {
    std::ostringstream tsv;
    write_histogram_tsv(histogram(kept_pool, binning_for(cfg.report)), tsv);
    art->files.emplace_back("histogram.tsv", tsv.str());
  }

  json kernel = {{"name", kernel_name(spec.kind)},
                 {"steps", base.steps},
                 {"burn_in", base.burn_in.value_or(default_burn_in(spec))},
                 {"thin", base.thin.value_or(default_thin(spec))},
                 {"audit_every", base.audit_every}};
  json init = {{"policy", std::string(policy_name(base.policy))}, {"total", base.total}};
  if (spec.kind == ModelKind::CreditMarket) init["credit"] = base.credit;
  return {{"kernel", kernel}, {"initial", init}, {"replicas", rows}, {"summary", summary}};
}

// --- analytic ---------------------------------------------------------------

void set_volume(ModelSpec& spec, double v) {
  if (spec.kind == ModelKind::CashOnly) {
    spec.volume_y = v;
  } else {
    spec.volume_x = v;
  }
}

void put_tsv(std::ostream& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out << '\t';
    first = false;
    json j = v;
    out << j.dump();
  }
  out << '\n';
}

json analytic(const ExperimentConfig& cfg, Artifacts* art) {
  const ModelSpec& model = *cfg.model;
  const bool vol = has_volume(model.kind);
  const std::vector<double> volumes = vol ? cfg.analytic.volumes : std::vector<double>{0.0};
  std::vector<double> ns = cfg.analytic.n_values;
  if (ns.empty() || model.kind == ModelKind::MultiAccount) ns = {static_cast<double>(model.n_agents)};
  for (double n : ns) {
    if (std::floor(n) != n || n < 1.0) throw ConfigError("config.analytic: n_values must be integers >= 1");
  }

  const double h = cfg.analytic.fd_step;
  json points = json::array();
  std::map<std::string, double> worst;
  double gd_worst = 0.0;
  double fp_worst = 0.0;
  bool gd_defined = false;
  std::ostringstream tsv;
  tsv << "T\tV\tN\tS\tm\tF\tP\tmu\n";
  for (double n : ns) {
    ModelSpec spec = model;
    spec.n_agents = static_cast<std::int64_t>(n);
    for (double v : volumes) {
      if (vol) set_volume(spec, v);
      for (double t : cfg.analytic.temperatures) {
        const ThermoState st = thermo_state_at(spec, t, v, n);
        const ResidualSet res = finite_diff_thermo_residuals(spec, t, v, h);
        json pt = {{"T", t}, {"N", n}, {"S", st.entropy}, {"m", st.mean_money}, {"F", st.free_energy}};
        if (vol) pt["V"] = v;
        if (st.pressure) pt["P"] = *st.pressure;
        if (st.chemical_potential) pt["mu"] = *st.chemical_potential;
        json r;
        for (const auto& x : res.residuals) {
          r[x.name] = x.value;
          worst[x.name] = std::max(worst[x.name], x.value);
        }
        if (st.chemical_potential) {
          const GibbsDuhemResidual gd = gibbs_duhem_residual(spec, t, v, n, h * t, h * v, h * n);
          r["gibbs_duhem"] = gd.gibbs_duhem_relative;
          r["first_principle"] = gd.first_principle_relative;
          gd_worst = std::max(gd_worst, gd.gibbs_duhem_relative);
          fp_worst = std::max(fp_worst, gd.first_principle_relative);
          gd_defined = true;
        }
        pt["residuals"] = r;
        points.push_back(pt);
        put_tsv(tsv, {t, v, n, st.entropy, st.mean_money, st.free_energy, st.pressure.value_or(NAN),
                      st.chemical_potential.value_or(NAN)});
      }
    }
  }
  json summary;
  double all = 0.0;
  for (const auto& [name, value] : worst) {
    summary["max_" + name] = value;
    all = std::max(all, value);
  }
  if (gd_defined) {
    summary["max_gibbs_duhem"] = gd_worst;
    summary["max_first_principle"] = fp_worst;
    all = std::max({all, gd_worst, fp_worst});
  }
  summary["max_residual"] = all;
  summary["points"] = points.size();
  art->files.emplace_back("analytic_grid.tsv", tsv.str());
  return {{"points", points}, {"summary", summary}};
}

// --- transform --------------------------------------------------------------

json cycle_json(const CycleReport& c) {
  return {{"delta_s_hot", c.delta_s_hot},   {"work_l", c.work_l},
          {"work_closed_form", c.work_closed_form}, {"credit_in_ch", c.credit_in_ch},
          {"credit_out_cc", c.credit_out_cc}, {"net_credit", c.net_credit},
          {"eta", c.eta},                   {"carnot_eta", c.carnot_eta}};
}

json transform(const ExperimentConfig& cfg, Artifacts* art) {
  const ModelSpec& spec = *cfg.model;
  const TransformOptions& o = cfg.transform;
  json out;

  const ProcessPath path = carnot_path(spec, o.t_hot, o.t_cold, o.v1, o.v2);
  json carnot = cycle_json(analyze_cycle(path));
  try {
    carnot_cycle(spec, o.t_hot, o.t_cold, o.v1, o.v2);
    carnot["verified"] = true;
  } catch (const std::logic_error& e) {
    carnot["verified"] = false;
    carnot["verification_error"] = e.what();
  }
  carnot["eta_minus_carnot"] = carnot["eta"].get<double>() - carnot["carnot_eta"].get<double>();
  const double ds = thermo_state_at(spec, o.t_hot, o.v2, static_cast<double>(spec.n_agents)).entropy -
                    thermo_state_at(spec, o.t_hot, o.v1, static_cast<double>(spec.n_agents)).entropy;
  carnot["delta_s"] = ds;
  out["carnot"] = carnot;
  {
    std::ostringstream tsv;
    write_path_tsv(path, tsv, o.path_points);
    art->files.emplace_back("carnot_path.tsv", tsv.str());
  }

  const AdiabatResult ad = adiabat_solve(spec, o.t_hot, o.v2, path.segments[1].v_end);
  out["adiabat"] = {{"t_end", ad.t_end},           {"v_end", ad.v_end},
                    {"entropy_start", ad.entropy_start}, {"entropy_end", ad.entropy_end},
                    {"delta_money", ad.delta_money}, {"work", ad.work},
                    {"energy_residual", ad.energy_residual}};

  if (o.v_free) {
    const ProcessPath fe = carnot_path_with_free_expansion(spec, o.t_hot, o.t_cold, o.v1, *o.v_free, o.v2);
    const CycleReport c = analyze_cycle(fe);
    json j = cycle_json(c);
    j["eta_below_carnot"] = c.eta < c.carnot_eta;
    const double n = static_cast<double>(spec.n_agents);
    const double m_hot = thermo_state_at(spec, o.t_hot, o.v1, n).mean_money;
    const double m_cold = thermo_state_at(spec, o.t_cold, o.v1, n).mean_money;
    const PolicyVerdict pv = policy_bound_check(c.credit_out_cc, c.credit_in_ch, o.t_cold, o.t_hot, m_cold, m_hot);
    j["policy"] = {{"credit_ratio", pv.credit_ratio},
                   {"temperature_ratio", pv.temperature_ratio},
                   {"temperature_bound", pv.temperature_bound},
                   {"money_ratio", *pv.money_ratio},
                   {"money_bound", *pv.money_bound}};
    out["free_expansion_cycle"] = j;
    std::ostringstream tsv;
    write_path_tsv(fe, tsv, o.path_points);
    art->files.emplace_back("free_expansion_path.tsv", tsv.str());
  }

  if (o.reserve_ratio) {
    const double r = *o.reserve_ratio;
    const double r2 = *o.reserve_ratio_new;
    const double n = static_cast<double>(spec.n_agents);
    const double v_new = isothermal_base(r, o.reserve_base, r2);
    const ReserveState before = fractional_reserve(r, o.reserve_base, n);
    const ReserveState after = fractional_reserve(r2, v_new, n);
    const double lhs = v_new - o.reserve_base;
    const double rhs = v_new / r2 - o.reserve_base / r;
    out["fractional_reserve"] = {
        {"r", r},
        {"r_new", r2},
        {"base", o.reserve_base},
        {"base_new", v_new},
        {"money", before.money},
        {"money_new", after.money},
        {"temperature", before.temperature},
        {"temperature_new", after.temperature},
        {"identity_lhs", lhs},
        {"identity_rhs", rhs},
        {"identity_residual",
         std::abs(lhs - rhs) / std::max({std::abs(o.reserve_base / r), std::abs(v_new / r2), 1e-300})}};
  }
  return out;
}

// --- pareto -----------------------------------------------------------------

json pareto(const ExperimentConfig& cfg, Artifacts* art) {
  const ParetoOptions& o = *cfg.pareto;
  const ParetoSpec& spec = o.spec;
  const double t = o.temperature;
  const double n = static_cast<double>(spec.n_agents);
  json out;

  // Analytic values and finite differences of ln Z.
  const double ln_z = pareto_log_partition(spec, t);
  const double s = pareto_entropy(spec, t);
  const double y = pareto_mean_log_income(spec, t);
  const double h = 1e-5 * std::min(t, spec.t_max - t);
  const double dlnz = (pareto_log_partition(spec, t + h) - pareto_log_partition(spec, t - h)) / (2.0 * h);
  const double s_fd = ln_z + t * dlnz;
  const double y_fd = (-t * ln_z + t * s_fd) / n;
  const double t43 = y - spec.t_max * std::log(spec.floor / spec.t_max);
  out["analytic"] = {{"temperature", t},
                     {"exponent_a", pareto_exponent(spec, t)},
                     {"log_partition", ln_z},
                     {"entropy", s},
                     {"mean_log_income", y},
                     {"entropy_fd", s_fd},
                     {"mean_log_income_fd", y_fd},
                     {"entropy_fd_residual", std::abs(s_fd - s) / std::max(std::abs(s), n)},
                     {"mean_log_income_fd_residual", std::abs(y_fd - y) / std::max(std::abs(y), t)},
                     {"approx_temperature", t43},
                     {"approx_temperature_relative_error", rel_err(t43, t)},
                     {"t_ds_dt", pareto_entropy_response(spec, t)}};

  // Direct sampler.
  const std::uint64_t direct_seed = derive_seed(cfg.seed, 0);
  art->seeds.push_back(direct_seed);
  const auto incomes = pareto_direct_sample(spec, t, o.direct_samples, direct_seed);
  const double a = pareto_exponent(spec, t);
  long double neg_log_p = 0.0L;
  long double energy = 0.0L;
  for (double inc : incomes) {
    neg_log_p -= std::log((a - 1.0) / spec.floor) - a * std::log(inc / spec.floor);
    energy += spec.t_max * std::log(inc / spec.t_max);
  }
  const double m = static_cast<double>(incomes.size());
  const double s_mc = n * (static_cast<double>(neg_log_p) / m + std::log(spec.volume)) - std::lgamma(n + 1.0);
  const double y_mc = static_cast<double>(energy) / m;
  const std::size_t k = o.hill_k ? *o.hill_k : default_hill_k(incomes.size());
  const double gamma = hill_tail_index(incomes, k);
  out["direct"] = {{"samples", incomes.size()},
                   {"seed", direct_seed},
                   {"mc_entropy", s_mc},
                   {"mc_entropy_relative_error", rel_err(s_mc, s)},
                   {"mc_mean_log_income", y_mc},
                   {"mc_mean_log_income_relative_error", rel_err(y_mc, y)},
                   {"hill_k", k},
                   {"hill_index", gamma},
                   {"expected_index", a - 1.0},
                   {"hill_relative_error", rel_err(gamma, a - 1.0)}};
  {
    std::vector<double> z(incomes.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::log(incomes[i] / spec.floor);
    std::ostringstream tsv;
    write_histogram_tsv(histogram(z, binning_for(cfg.report)), tsv);
    art->files.emplace_back("log_income_histogram.tsv", tsv.str());
  }

  SampleSet kept;
  if (o.theta) {
    ParetoChainParams p;
    p.theta = *o.theta;
    p.steps = cfg.kernel.steps;
    p.burn_in = cfg.kernel.burn_in;
    p.thin = cfg.kernel.thin;
    p.audit_every = cfg.kernel.audit_every;
    p.seed = derive_seed(cfg.seed, 1);
    art->seeds.push_back(p.seed);
    const ParetoRun run = run_pareto_chain(spec, p);
    if (run.samples.snapshot_steps.empty()) throw ConfigError("config.kernel: no snapshots recorded");
    const auto pool = run.samples.coordinate("income");
    const std::size_t kd = o.hill_k ? *o.hill_k : default_hill_k(pool.size());
    const double g = hill_tail_index(pool, kd);
    const double expected = 1.0 / run.theta;
    const double t_match = pareto_matched_temperature(spec, run.theta);
    out["dynamics"] = {{"theta", run.theta},
                       {"seed", p.seed},
                       {"steps", p.steps},
                       {"snapshots", run.samples.snapshot_steps.size()},
                       {"accepted_events", run.samples.meta.accepted_events},
                       {"y_initial", run.y_initial},
                       {"y_final", run.y_final},
                       {"y_max_relative_drift", run.max_relative_drift},
                       {"matched_temperature", t_match},
                       {"matched_exponent_a", spec.t_max / t_match},
                       {"hill_k", kd},
                       {"hill_index", g},
                       {"expected_index", expected},
                       {"hill_relative_error", rel_err(g, expected)}};
    kept = last_snapshots(run.samples, cfg.outputs.sample_snapshots);
  }
  if (cfg.outputs.samples) {
    if (kept.snapshot_steps.empty()) {
      kept.coord_names = {"income"};
      kept.units_per_snapshot = std::min<std::size_t>(incomes.size(), 10000);
      kept.snapshot_steps = {0};
      kept.values.assign(incomes.begin(), incomes.begin() + static_cast<std::ptrdiff_t>(kept.units_per_snapshot));
    }
    std::ostringstream csv;
    write_samples_csv(kept, csv);
    art->files.emplace_back("samples.csv", csv.str());
  }

  std::vector<double> grid = o.scan;
  if (grid.empty()) {
    for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i * spec.t_max);
  }
  std::sort(grid.begin(), grid.end());
  const auto rows = transition_scan(spec, grid);
  bool increasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    increasing = increasing && rows[i].t_ds_dt > rows[i - 1].t_ds_dt && rows[i].temperature > rows[i - 1].temperature;
  }
  const double mid = pareto_entropy_response(spec, 0.5 * spec.t_max);
  const double near = pareto_entropy_response(spec, 0.99 * spec.t_max);
  out["scan"] = {{"points", rows.size()},
                 {"strictly_increasing", increasing},
                 {"t_ds_dt_mid", mid},
                 {"t_ds_dt_near_max", near},
                 {"divergence_ratio", near / mid},
                 {"entropy_mid", pareto_entropy(spec, 0.5 * spec.t_max)},
                 {"entropy_near_max", pareto_entropy(spec, 0.99 * spec.t_max)}};
  std::ostringstream tsv;
  write_transition_tsv(rows, tsv);
  art->files.emplace_back("transition_scan.tsv", tsv.str());
  return out;
}

json build(const ExperimentConfig& cfg, Artifacts* art) {
  json report;
  report["pipeline"] = pipeline_name(cfg.pipeline);
  if (!cfg.name.empty()) report["name"] = cfg.name;
  report["version"] = kVersion;
  report["seed"] = cfg.seed;
  if (cfg.model) report["model"] = model_to_json(*cfg.model);
  try {
    switch (cfg.pipeline) {
      case Pipeline::Analytic: report.update(analytic(cfg, art)); break;
      case Pipeline::Simulate: report.update(simulate(cfg, art)); break;
      case Pipeline::Transform: report.update(transform(cfg, art)); break;
      case Pipeline::Pareto: report.update(pareto(cfg, art)); break;
    }
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }
  return report;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

json RunManifest::to_json() const {
  json files_j = json::array();
  for (const auto& f : files) files_j.push_back({{"name", f.name}, {"sha256", f.sha256}});
  return {{"version", version}, {"config", config}, {"replica_seeds", replica_seeds}, {"files", files_j}};
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-256 init failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char two[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(two, sizeof two, "%02x", md[i]);
    hex += two;
  }
  return hex;
}

json build_report(const ExperimentConfig& config) {
  Artifacts art;
  return build(config, &art);
}

RunManifest run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  Artifacts art;
  RunManifest m;
  m.report = build(config, &art);
  m.config = config.source;
  m.replica_seeds = art.seeds;
  m.directory = out_dir;

  fs::create_directories(out_dir);
  write_text(out_dir / "report.json", m.report.dump(2) + "\n");
  for (const auto& [name, text] : art.files) write_text(out_dir / name, text);

  std::vector<std::string> names{"report.json"};
  for (const auto& f : art.files) names.push_back(f.first);
  std::sort(names.begin(), names.end());
  for (const auto& name : names) m.files.push_back({name, sha256_file(out_dir / name)});
  write_text(out_dir / "manifest.json", m.to_json().dump(2) + "\n");
  return m;
}

std::vector<RunManifest> run_sweep(const ExperimentConfig& config, const fs::path& out_dir) {
  if (!config.sweep) throw ConfigError("config has no 'sweep' block");
  const SweepSpec& sw = *config.sweep;
  json base = config.source;
  base.erase("sweep");
  std::vector<json> docs;
  std::vector<json> labels;
  if (sw.seeds) {
    for (std::uint64_t i = 0; i < *sw.seeds; ++i) {
      json d = base;
      d["seed"] = config.seed + i;
      docs.push_back(d);
      labels.push_back(config.seed + i);
    }
  } else {
    json::json_pointer ptr;
    try {
      ptr = json::json_pointer(*sw.pointer);
    } catch (const json::exception& e) {
      throw ConfigError("config.sweep: bad pointer: " + std::string(e.what()));
    }
    if (!base.contains(ptr)) throw ConfigError("config.sweep: pointer " + *sw.pointer + " names no config field");
    for (const auto& v : sw.values) {
      json d = base;
      d[ptr] = v;
      docs.push_back(d);
      labels.push_back(v);
    }
  }

  std::vector<ExperimentConfig> points;
  for (const auto& d : docs) points.push_back(parse_config(d));
  const unsigned hw = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  const bool outer = hw > 1 && points.size() > 1;
  if (outer) {
    for (auto& p : points) p.threads = 1;
  }
  std::vector<RunManifest> manifests(points.size());
  char dir[32];
  parallel_for(points.size(), outer ? hw : 1, [&](std::size_t i) {
    char local[32];
    std::snprintf(local, sizeof local, "point_%03zu", i);
    manifests[i] = run_experiment(points[i], out_dir / local);
  });

  json entries = json::array();
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    std::snprintf(dir, sizeof dir, "point_%03zu", i);
    entries.push_back({{"index", i},
                       {"directory", dir},
                       {"value", labels[i]},
                       {"seed", points[i].seed},
                       {"replica_seeds", manifests[i].replica_seeds},
                       {"manifest_sha256", sha256_file(out_dir / dir / "manifest.json")}});
  }
  json top = {{"version", kVersion}, {"config", config.source}, {"points", entries}};
  if (sw.pointer) top["parameter"] = *sw.pointer;
  fs::create_directories(out_dir);
  write_text(out_dir / "manifest.json", top.dump(2) + "\n");
  return manifests;
}

bool CheckResult::ok() const {
  return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass; });
}

CheckResult compare_report(const json& report, const std::vector<Expectation>& expectations,
                           double tolerance_scale) {
  if (!(tolerance_scale >= 0.0)) throw ConfigError("tolerance scale must be >= 0");
  CheckResult out;
  for (const auto& e : expectations) {
    json::json_pointer ptr;
    try {
      ptr = json::json_pointer(e.field);
    } catch (const json::exception& ex) {
      throw ConfigError("bad field pointer '" + e.field + "': " + ex.what());
    }
    if (!report.contains(ptr)) throw ConfigError("unknown report field '" + e.field + "'");
    const json& actual = report.at(ptr);
    CheckLine line;
    line.field = e.field;
    std::ostringstream detail;
    if (e.value.is_number()) {
      if (!actual.is_number()) {
        line.pass = false;
        detail << "expected a number, found " << actual.dump();
      } else {
        const double want = e.value.get<double>();
        const double got = actual.get<double>();
        const double tol = e.tolerance * tolerance_scale;
        const double diff = std::abs(got - want);
        const double allowed = e.relative ? tol * std::abs(want) : tol;
        line.pass = diff <= allowed;
        detail << "value " << json(got).dump() << " expected " << json(want).dump() << " tolerance "
               << json(tol).dump() << (e.relative ? " relative" : " absolute");
        if (e.relative && want != 0.0) detail << " (off by " << json(diff / std::abs(want)).dump() << ")";
      }
    } else {
      line.pass = actual == e.value;
      detail << "value " << actual.dump() << " expected " << e.value.dump();
    }
    line.detail = detail.str();
    out.lines.push_back(std::move(line));
  }
  return out;
}

}  // namespace moneystat::harness
