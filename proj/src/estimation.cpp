#include "moneystat/estimation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "moneystat/ensemble.hpp"

namespace moneystat {

namespace {

double mean_of(std::span<const double> v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

// Linear-interpolated quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double relative(double approx, double exact, double scale) {
  return std::abs(approx - exact) / std::max(std::abs(exact), scale);
}

void put_double(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

FitReport fit_shifted_exponential(std::span<const double> samples, double floor) {
  if (samples.size() < 2) throw std::invalid_argument("exponential fit needs at least two samples");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo < floor) throw std::invalid_argument("sample below the declared floor");
  if (*lo == *hi) throw std::invalid_argument("degenerate sample: all values equal");

  FitReport r;
  r.floor = floor;
  r.n = samples.size();
  r.t_hat = mean_of(samples) - floor;
  r.stderr_t = r.t_hat / std::sqrt(static_cast<double>(r.n));
  if (r.n >= 10) {
    const KsResult ks = ks_statistic_exponential(samples, floor, r.t_hat);
    r.ks_d = ks.statistic;
    r.ks_pass_1pct = ks.pass_1pct;
  } else {
    r.ks_d = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

KsResult ks_statistic_exponential(std::span<const double> samples, double floor, double temperature) {
  if (samples.empty()) throw std::invalid_argument("KS statistic of an empty sample");
  if (samples.size() < 10) throw std::invalid_argument("KS statistic needs at least 10 samples");
  if (!(temperature > 0.0)) throw std::domain_error("temperature must be > 0");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double x = sorted[i] - floor;
    const double f = x <= 0.0 ? 0.0 : -std::expm1(-x / temperature);
    const double di = static_cast<double>(i);
    d = std::max({d, (di + 1.0) / n - f, f - di / n});
  }
  KsResult r;
  r.statistic = d;
  r.critical = kKsCritical1pct / std::sqrt(n);
  r.pass_1pct = d < r.critical;
  return r;
}

double hill_tail_index(std::span<const double> samples, std::size_t k) {
  const std::size_t n = samples.size();
  if (k == 0 || k >= n) throw std::invalid_argument("Hill estimator needs 0 < k < n");
  std::vector<double> v(samples.begin(), samples.end());
  // v[k] becomes the (k+1)-th largest, v[0..k) the top k.
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(), std::greater<>());
  const double threshold = v[k];
  if (!(threshold > 0.0)) throw std::invalid_argument("Hill estimator needs positive order statistics");
  long double sum = 0.0L;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(v[i] / threshold);
  if (!(sum > 0.0L)) throw std::invalid_argument("Hill estimator on constant upper tail");
  return static_cast<double>(static_cast<long double>(k) / sum);
}

std::size_t default_hill_k(std::size_t n) {
  const double c = std::cbrt(static_cast<double>(n));
  return static_cast<std::size_t>(std::floor(c * c + 1e-9));
}

Histogram histogram(std::span<const double> samples, const Binning& binning) {
  if (samples.empty()) throw std::invalid_argument("histogram of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();

  double width = binning.width;
  if (binning.mode == Binning::Mode::FreedmanDiaconis) {
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
    if (!(width > 0.0)) throw std::invalid_argument("Freedman-Diaconis width is zero (IQR = 0)");
  }
  if (!(width > 0.0) || !std::isfinite(width)) throw std::invalid_argument("bin width must be > 0");
  const double span = (hi - lo) / width;
  if (span > 1e7) throw std::invalid_argument("bin width too small for the sample range");

  const auto nbins = static_cast<std::size_t>(std::floor(span)) + 1;
  Histogram h;
  h.n = sorted.size();
  h.bins.resize(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    h.bins[b].left = lo + static_cast<double>(b) * width;
    h.bins[b].right = lo + static_cast<double>(b + 1) * width;
  }
  for (double x : sorted) {
    auto b = static_cast<std::size_t>(std::floor((x - lo) / width));
    b = std::min(b, nbins - 1);
    ++h.bins[b].count;
  }
  for (auto& bin : h.bins) {
    bin.density = static_cast<double>(bin.count) / (static_cast<double>(h.n) * width);
  }
  return h;
}

void write_histogram_tsv(const Histogram& h, std::ostream& out) {
  out << "bin_left\tbin_right\tdensity\n";
  for (const auto& b : h.bins) {
    put_double(out, b.left);
    out << '\t';
    put_double(out, b.right);
    out << '\t';
    put_double(out, b.density);
    out << '\n';
  }
}

double ResidualSet::max() const {
  double m = 0.0;
  for (const auto& r : residuals) m = std::max(m, r.value);
  return m;
}

const Residual* ResidualSet::find(const std::string& name) const {
  for (const auto& r : residuals) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

ResidualSet finite_diff_thermo_residuals(const ModelSpec& spec, double t, double volume, double h) {
  validate(spec);
  if (!(h > 0.0 && h < 0.1)) throw std::invalid_argument("relative step must be in (0, 0.1)");
  const double n = static_cast<double>(spec.n_agents);
  const bool with_volume = has_volume(spec.kind);
  const double v = with_volume ? volume : 0.0;
  auto at = [&](double tt, double vv, double nn) { return thermo_state_at(spec, tt, vv, nn); };

  const ThermoState c = at(t, v, n);
  const double dt = h * t;
  const ThermoState tp = at(t + dt, v, n);
  const ThermoState tm = at(t - dt, v, n);
  const double s_t = (tp.entropy - tm.entropy) / (2.0 * dt);
  const double m_t = (tp.mean_money - tm.mean_money) / (2.0 * dt);

  ResidualSet out;
  const double ds_dm = (tp.entropy - tm.entropy) / (tp.mean_money - tm.mean_money);
  out.residuals.push_back({"inverse_temperature", relative(1.0 / ds_dm, t, t)});
  out.residuals.push_back({"entropy_from_free_energy",
                           relative(-(tp.free_energy - tm.free_energy) / (2.0 * dt), c.entropy, n)});

  if (with_volume && c.pressure) {
    const double dv = h * v;
    const ThermoState vp = at(t, v + dv, n);
    const ThermoState vm = at(t, v - dv, n);
    const double s_v = (vp.entropy - vm.entropy) / (2.0 * dv);
    const double m_v = (vp.mean_money - vm.mean_money) / (2.0 * dv);
    const double ds_dv_fixed_m = s_v - s_t * m_v / m_t;
    const double p = *c.pressure;
    out.residuals.push_back({"pressure_from_entropy", relative(t * ds_dv_fixed_m, p, 0.0)});
    out.residuals.push_back(
        {"pressure_from_free_energy", relative(-(vp.free_energy - vm.free_energy) / (2.0 * dv), p, 0.0)});
  }

  if (c.chemical_potential) {
    const double mu = *c.chemical_potential;
    const double dn = h * n;
    const ThermoState np = at(t, v, n + dn);
    const ThermoState nm = at(t, v, n - dn);
    out.residuals.push_back(
        {"mu_from_free_energy", relative((np.free_energy - nm.free_energy) / (2.0 * dn), mu, t)});

    // Temperature at which S(T, V, N') equals the reference entropy.
    auto isentropic_t = [&](double nn) {
      auto f = [&](double tt) { return at(tt, v, nn).entropy - c.entropy; };
      double lo = 0.5 * t;
      double hi = 2.0 * t;
      for (int i = 0; i < 200 && f(lo) > 0.0; ++i) lo *= 0.5;
      for (int i = 0; i < 200 && f(hi) < 0.0; ++i) hi *= 2.0;
      for (int i = 0; i < 300; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (f(mid) < 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    };
    const double m_plus = at(isentropic_t(n + dn), v, n + dn).mean_money;
    const double m_minus = at(isentropic_t(n - dn), v, n - dn).mean_money;
    out.residuals.push_back(
        {"mu_from_money_fixed_entropy", relative((m_plus - m_minus) / (2.0 * dn), mu, t)});
  }
  return out;
}

}  // namespace moneystat
