#include "moneystat/harness/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "moneystat/ensemble.hpp"

namespace moneystat::harness {

using nlohmann::json;

namespace {

// Reads fields of one JSON object and rejects any key left unread.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("must be an object");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(where_ + ": " + what); }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    if (!has(key)) fail("missing required field '" + key + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail("'" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail("'" + key + "' must be finite");
    return x;
  }

  std::uint64_t count(const std::string& key) {
    const json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    // 1e7 style literals are accepted when they are exact integers.
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (x >= 0.0 && x < 0x1.0p63 && std::floor(x) == x) return static_cast<std::uint64_t>(x);
    }
    fail("'" + key + "' must be a non-negative integer");
  }

  bool boolean(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_boolean()) fail("'" + key + "' must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail("'" + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) fail("'" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail("'" + key + "' must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  Fields object(const std::string& key) { return Fields(raw(key), where_ + "." + key); }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) fail("unknown field '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

ModelSpec parse_model(Fields f) {
  ModelSpec s;
  try {
    s.kind = parse_kind(f.string("kind"));
  } catch (const ModelError& e) {
    f.fail(e.what());
  }
  const std::uint64_t n = f.count("n_agents");
  if (n > static_cast<std::uint64_t>(INT64_MAX)) f.fail("n_agents too large");
  s.n_agents = static_cast<std::int64_t>(n);
  if (f.has("overdraft")) s.overdraft = f.number("overdraft");
  if (f.has("asset_classes")) {
    const std::uint64_t c = f.count("asset_classes");
    if (c > 1000000) f.fail("asset_classes too large");
    s.asset_classes = static_cast<int>(c);
  }
  if (f.has("volume_y")) s.volume_y = f.number("volume_y");
  if (f.has("volume_x")) s.volume_x = f.number("volume_x");
  if (f.has("monetary_base")) s.volume_x = f.number("monetary_base");
  if (f.has("q0")) s.q0 = f.number("q0");
  if (f.has("accounts_per_agent")) {
    for (double r : f.numbers("accounts_per_agent")) {
      if (r < 1.0 || std::floor(r) != r || r > 1e6) f.fail("accounts_per_agent entries must be integers >= 1");
      s.accounts_per_agent.push_back(static_cast<int>(r));
    }
  }
  if (f.has("account_overdrafts")) s.account_overdrafts = f.numbers("account_overdrafts");
  f.finish();
  try {
    validate(s);
  } catch (const ModelError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return s;
}

ParetoOptions parse_pareto(Fields f) {
  ParetoOptions p;
  p.spec.n_agents = static_cast<std::int64_t>(f.count("n_agents"));
  p.spec.floor = f.number("floor");
  p.spec.t_max = f.number("t_max");
  if (f.has("volume")) p.spec.volume = f.number("volume");
  if (f.has("temperature")) p.temperature = f.number("temperature");
  if (f.has("direct_samples")) p.direct_samples = f.count("direct_samples");
  if (f.has("hill_k")) p.hill_k = f.count("hill_k");
  if (f.has("theta")) p.theta = f.number("theta");
  if (f.has("scan")) p.scan = f.numbers("scan");
  f.finish();
  try {
    validate(p.spec);
    pareto_exponent(p.spec, p.temperature);
    if (p.theta && !(*p.theta > 0.0)) throw ModelError("theta must be > 0");
    for (double t : p.scan) {
      if (!(t > 0.0 && t < p.spec.t_max)) throw ModelError("scan points must lie in (0, t_max)");
    }
  } catch (const ModelError& e) {
    throw ConfigError(std::string("pareto: ") + e.what());
  }
  if (p.direct_samples < 10) f.fail("direct_samples must be >= 10");
  return p;
}

Expectation parse_expectation(const json& j, std::size_t index) {
  Fields f(j, "expectations[" + std::to_string(index) + "]");
  Expectation e;
  e.field = f.string("field");
  if (e.field.empty() || e.field.front() != '/') f.fail("'field' must be a JSON pointer such as /summary/t_hat");
  e.value = f.raw("value");
  if (!e.value.is_number() && !e.value.is_boolean() && !e.value.is_string()) {
    f.fail("'value' must be a number, boolean or string");
  }
  if (f.has("tolerance")) {
    e.tolerance = f.number("tolerance");
    if (e.tolerance < 0.0) f.fail("'tolerance' must be >= 0");
  }
  if (f.has("mode")) {
    const std::string mode = f.string("mode");
    if (mode == "relative") {
      e.relative = true;
    } else if (mode == "absolute") {
      e.relative = false;
    } else {
      f.fail("'mode' must be relative or absolute");
    }
  }
  f.finish();
  return e;
}

}  // namespace

std::string pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::Analytic: return "analytic";
    case Pipeline::Simulate: return "simulate";
    case Pipeline::Transform: return "transform";
    case Pipeline::Pareto: return "pareto";
  }
  return "unknown";
}

Pipeline parse_pipeline(const std::string& name) {
  if (name == "analytic") return Pipeline::Analytic;
  if (name == "simulate") return Pipeline::Simulate;
  if (name == "transform") return Pipeline::Transform;
  if (name == "pareto") return Pipeline::Pareto;
  throw ConfigError("unknown pipeline '" + name + "'");
}

std::vector<Expectation> parse_expectations(const json& doc) {
  const json* arr = &doc;
  if (doc.is_object()) {
    Fields f(doc, "expectations file");
    arr = &f.raw("expectations");
    f.finish();
  }
  if (!arr->is_array()) throw ConfigError("expectations must be an array");
  std::vector<Expectation> out;
  for (std::size_t i = 0; i < arr->size(); ++i) out.push_back(parse_expectation((*arr)[i], i));
  return out;
}

ExperimentConfig parse_config(const json& doc) {
  Fields f(doc, "config");
  ExperimentConfig c;
  c.source = doc;
  c.pipeline = parse_pipeline(f.string("pipeline"));
  if (f.has("name")) c.name = f.string("name");
  if (f.has("model")) c.model = parse_model(f.object("model"));
  if (f.has("seed")) c.seed = f.count("seed");
  if (f.has("replicas")) c.replicas = f.count("replicas");
  if (c.replicas < 1) f.fail("replicas must be >= 1");
  if (f.has("threads")) c.threads = static_cast<unsigned>(f.count("threads"));

  if (f.has("initial")) {
    Fields g = f.object("initial");
    if (g.has("policy")) {
      try {
        c.initial.policy = parse_policy(g.string("policy"));
      } catch (const std::exception& e) {
        g.fail(e.what());
      }
    }
    if (g.has("total")) c.initial.total = g.number("total");
    if (g.has("temperature")) c.initial.temperature = g.number("temperature");
    if (g.has("credit")) c.initial.credit = g.number("credit");
    if (c.initial.total && c.initial.temperature) g.fail("give either 'total' or 'temperature', not both");
    g.finish();
  }
  if (f.has("kernel")) {
    Fields g = f.object("kernel");
    c.kernel.steps = g.count("steps");
    if (g.has("burn_in")) c.kernel.burn_in = g.count("burn_in");
    if (g.has("thin")) c.kernel.thin = g.count("thin");
    if (g.has("audit_every")) c.kernel.audit_every = g.count("audit_every");
    if (c.kernel.thin && *c.kernel.thin < 1) g.fail("thin must be >= 1");
    if (c.kernel.audit_every < 1) g.fail("audit_every must be >= 1");
    g.finish();
  }
  if (f.has("outputs")) {
    Fields g = f.object("outputs");
    if (g.has("directory")) c.outputs.directory = g.string("directory");
    if (g.has("samples")) c.outputs.samples = g.boolean("samples");
    if (g.has("sample_snapshots")) c.outputs.sample_snapshots = g.count("sample_snapshots");
    if (g.has("histogram")) c.outputs.histogram = g.boolean("histogram");
    g.finish();
  }
  if (f.has("report")) {
    Fields g = f.object("report");
    if (g.has("ks_sample")) {
      const std::string k = g.string("ks_sample");
      if (k != "final-snapshot" && k != "pooled") g.fail("ks_sample must be final-snapshot or pooled");
      c.report.ks_final_snapshot = k == "final-snapshot";
    }
    if (g.has("histogram_width")) {
      c.report.histogram_width = g.number("histogram_width");
      if (!(*c.report.histogram_width > 0.0)) g.fail("histogram_width must be > 0");
    }
    g.finish();
  }
  if (f.has("analytic")) {
    Fields g = f.object("analytic");
    if (g.has("temperatures")) c.analytic.temperatures = g.numbers("temperatures");
    if (g.has("volumes")) c.analytic.volumes = g.numbers("volumes");
    if (g.has("n_values")) c.analytic.n_values = g.numbers("n_values");
    if (g.has("fd_step")) c.analytic.fd_step = g.number("fd_step");
    for (double t : c.analytic.temperatures) {
      if (!(t > 0.0)) g.fail("temperatures must be > 0");
    }
    for (double v : c.analytic.volumes) {
      if (!(v > 0.0)) g.fail("volumes must be > 0");
    }
    for (double n : c.analytic.n_values) {
      if (!(n > 0.0)) g.fail("n_values must be > 0");
    }
    if (c.analytic.temperatures.empty() || c.analytic.volumes.empty()) g.fail("grids must be non-empty");
    if (!(c.analytic.fd_step > 0.0 && c.analytic.fd_step < 0.1)) g.fail("fd_step must lie in (0, 0.1)");
    g.finish();
  }
  if (f.has("transform")) {
    Fields g = f.object("transform");
    auto& t = c.transform;
    if (g.has("t_hot")) t.t_hot = g.number("t_hot");
    if (g.has("t_cold")) t.t_cold = g.number("t_cold");
    if (g.has("v1")) t.v1 = g.number("v1");
    if (g.has("v2")) t.v2 = g.number("v2");
    if (g.has("v_free")) t.v_free = g.number("v_free");
    if (g.has("reserve_ratio")) t.reserve_ratio = g.number("reserve_ratio");
    if (g.has("reserve_ratio_new")) t.reserve_ratio_new = g.number("reserve_ratio_new");
    if (g.has("reserve_base")) t.reserve_base = g.number("reserve_base");
    if (g.has("path_points")) t.path_points = static_cast<int>(g.count("path_points"));
    if (!(t.t_hot > t.t_cold && t.t_cold > 0.0)) g.fail("need t_hot > t_cold > 0");
    if (!(t.v2 > t.v1 && t.v1 > 0.0)) g.fail("need v2 > v1 > 0");
    if (t.v_free && !(*t.v_free > t.v1 && *t.v_free < t.v2)) g.fail("need v1 < v_free < v2");
    if (t.reserve_ratio.has_value() != t.reserve_ratio_new.has_value()) {
      g.fail("reserve_ratio and reserve_ratio_new go together");
    }
    if (t.path_points < 2 || t.path_points > 100000) g.fail("path_points must lie in [2, 100000]");
    g.finish();
  }
  if (f.has("pareto")) c.pareto = parse_pareto(f.object("pareto"));
  if (f.has("expectations")) c.expectations = parse_expectations(f.raw("expectations"));
  if (f.has("sweep")) {
    Fields g = f.object("sweep");
    SweepSpec s;
    if (g.has("pointer")) {
      s.pointer = g.string("pointer");
      const json& vals = g.raw("values");
      if (!vals.is_array() || vals.empty()) g.fail("'values' must be a non-empty array");
      s.values.assign(vals.begin(), vals.end());
    }
    if (g.has("seeds")) s.seeds = g.count("seeds");
    if (s.pointer.has_value() == s.seeds.has_value()) g.fail("give exactly one of 'pointer' or 'seeds'");
    if (s.seeds && *s.seeds < 1) g.fail("seeds must be >= 1");
    c.sweep = std::move(s);
    g.finish();
  }
  f.finish();

  // Pipeline-specific requirements.
  switch (c.pipeline) {
    case Pipeline::Analytic:
    case Pipeline::Transform:
      if (!c.model) f.fail("pipeline " + pipeline_name(c.pipeline) + " needs a 'model'");
      break;
    case Pipeline::Simulate:
      if (!c.model) f.fail("pipeline simulate needs a 'model'");
      if (!c.initial.total && !c.initial.temperature) f.fail("initial needs 'total' or 'temperature'");
      if (c.kernel.steps == 0) f.fail("pipeline simulate needs kernel.steps");
      if (c.model->kind == ModelKind::CreditMarket && !c.initial.credit && !c.initial.temperature) {
        f.fail("CreditMarket needs initial.credit or initial.temperature");
      }
      if (c.model->kind == ModelKind::Restricted && c.initial.temperature) {
        try {
          total_for_temperature(*c.model, *c.initial.temperature);
        } catch (const ModelError& e) {
          f.fail(e.what());
        }
      }
      break;
    case Pipeline::Pareto:
      if (!c.pareto) f.fail("pipeline pareto needs a 'pareto' block");
      if (c.pareto->theta && c.kernel.steps == 0) f.fail("pareto dynamics needs kernel.steps");
      break;
  }
  if (c.transform.reserve_ratio) {
    for (double r : {*c.transform.reserve_ratio, *c.transform.reserve_ratio_new}) {
      if (!(r > 0.0 && r < 1.0)) throw ConfigError("config.transform: reserve ratios must lie in (0, 1)");
    }
  }
  if (c.pipeline == Pipeline::Transform && !has_volume(c.model->kind)) {
    throw ConfigError("config.model: transform pipeline needs a model with a volume");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json model_to_json(const ModelSpec& spec) {
  json j;
  j["kind"] = std::string(kind_name(spec.kind));
  j["n_agents"] = spec.n_agents;
  switch (spec.kind) {
    case ModelKind::CashOnly:
      j["volume_y"] = spec.volume_y;
      break;
    case ModelKind::Overdraft:
      j["overdraft"] = spec.overdraft;
      j["volume_x"] = spec.volume_x;
      break;
    case ModelKind::MultiAccount:
      j["accounts_per_agent"] = spec.accounts_per_agent;
      j["account_overdrafts"] = spec.account_overdrafts;
      j["volume_x"] = spec.volume_x;
      break;
    case ModelKind::Combined:
    case ModelKind::Restricted:
      j["overdraft"] = spec.overdraft;
      break;
    case ModelKind::CreditMarket:
      j["volume_x"] = spec.volume_x;
      break;
    case ModelKind::MultiAsset:
      j["asset_classes"] = spec.asset_classes;
      break;
  }
  return j;
}

double total_for_temperature(const ModelSpec& spec, double t) {
  validate(spec);
  if (!(t > 0.0)) throw ModelError("temperature must be > 0");
  const double n = static_cast<double>(spec.n_agents);
  switch (spec.kind) {
    case ModelKind::CashOnly:
    case ModelKind::CreditMarket:
      return n * t;
    case ModelKind::Overdraft:
      return n * (t - spec.overdraft);
    case ModelKind::MultiAccount:
      return static_cast<double>(spec.total_accounts()) * t - spec.total_overdraft();
    case ModelKind::Combined:
      return n * (2.0 * t - spec.overdraft);
    case ModelKind::Restricted:
      return mean_money_restricted(spec, t);
    case ModelKind::MultiAsset:
      return n * spec.asset_classes * t;
  }
  throw ModelError("unhandled model kind");
}

std::filesystem::path resolve_output_dir(const std::string& directory) {
  std::filesystem::path p(directory);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv(kOutRootEnv); root != nullptr && *root != '\0') {
    return std::filesystem::path(root) / p;
  }
  return std::filesystem::current_path() / p;
}

}  // namespace moneystat::harness
