#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "moneystat/model.hpp"

namespace moneystat {

/// Asymptotic Kolmogorov-Smirnov constant at the 1% level. Used unchanged
/// when T is estimated from the same data, which makes the test conservative.
inline constexpr double kKsCritical1pct = 1.63;

struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;
  bool pass_1pct = false;
};

struct FitReport {
  double t_hat = 0.0;
  double stderr_t = 0.0;
  double floor = 0.0;
  std::size_t n = 0;
  double ks_d = 0.0;  // against the fitted law; NaN below 10 samples
  bool ks_pass_1pct = false;
};

/// MLE of the shifted exponential with known floor: t_hat = mean - floor.
FitReport fit_shifted_exponential(std::span<const double> samples, double floor);

/// D = sup |F_emp - F|, F(x) = 1 - exp(-(x - floor)/T), against 1.63/sqrt(n).
KsResult ks_statistic_exponential(std::span<const double> samples, double floor, double temperature);

/// Hill estimator of the tail index from the top k order statistics.
double hill_tail_index(std::span<const double> samples, std::size_t k);

/// floor(n^{2/3}).
std::size_t default_hill_k(std::size_t n);

struct Binning {
  enum class Mode { FreedmanDiaconis, Fixed };
  Mode mode = Mode::FreedmanDiaconis;
  double width = 0.0;

  static Binning freedman_diaconis() { return {}; }
  static Binning fixed(double w) { return {Mode::Fixed, w}; }
};

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
  double density = 0.0;
};

struct Histogram {
  std::vector<HistogramBin> bins;
  std::size_t n = 0;
};

/// Bins start at min(samples); the last bin is closed on the right.
Histogram histogram(std::span<const double> samples, const Binning& binning);

/// Rows of `bin_left\tbin_right\tdensity`.
void write_histogram_tsv(const Histogram& h, std::ostream& out);

struct Residual {
  std::string name;
  double value = 0.0;  // relative residual
};

struct ResidualSet {
  std::vector<Residual> residuals;
  [[nodiscard]] double max() const;
  [[nodiscard]] const Residual* find(const std::string& name) const;
};

/// Central-difference checks of the closed-form thermodynamics at (T, V, N):
///   inverse_temperature          1/T   = dS/dm            (V, N fixed)
///   pressure_from_entropy        P/T   = dS/dV            (m, N fixed)
///   entropy_from_free_energy     S     = -dF/dT
///   pressure_from_free_energy    P     = -dF/dV
///   mu_from_free_energy          mu    = dF/dN            (N continuous)
///   mu_from_money_fixed_entropy  mu    = dm/dN            (S, V fixed)
/// Entries the model does not define are omitted. `h` is the relative step.
ResidualSet finite_diff_thermo_residuals(const ModelSpec& spec, double temperature, double volume,
                                         double h = 1e-5);

}  // namespace moneystat
