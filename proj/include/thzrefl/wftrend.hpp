#pragma once

// Weighted sub-band fitting with trend regression.
//
// The training band is cut into sub-bands of width delta_f. Bands are fitted
// in ascending frequency with Levenberg-Marquardt in log10-parameter space;
// each band starts from an inverse-error weighted blend of the fits of up to
// W preceding bands. Finally lg p is regressed on band-center frequency.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thzrefl/dataset.hpp"
#include "thzrefl/error.hpp"
#include "thzrefl/lm.hpp"
#include "thzrefl/models.hpp"

namespace thzrefl {

struct SubBand {
  int index = 0;  // 1-based
  double f_lo = 0.0;
  double f_hi = 0.0;
  double f_center = 0.0;
};

/// I = ceil((f_end - f_start) / delta_f) contiguous bands; the last one is
/// truncated at f_end.
inline std::vector<SubBand> partition_bands(double f_start, double f_end, double delta_f) {
  if (!(delta_f > 0.0)) throw DomainError("partition_bands: delta_f must be positive");
  if (!(f_end > f_start)) throw DomainError("partition_bands: empty frequency range");
  const double ratio = (f_end - f_start) / delta_f;
  // absorb representation error so 100/10 does not become 11 bands
  const double nearest = std::round(ratio);
  const double count_real =
      std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio) ? nearest : std::ceil(ratio);
  const int count = std::max(1, static_cast<int>(count_real));
  std::vector<SubBand> bands;
  bands.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double lo = f_start + i * delta_f;
    const double hi = i + 1 == count ? f_end : f_start + (i + 1) * delta_f;
    bands.push_back({i + 1, lo, hi, 0.5 * (lo + hi)});
  }
  return bands;
}

/// Position (0-based) of the band containing f; bands are half-open except
/// the last, which includes f_end. Returns -1 outside the tiling.
inline int band_of(std::span<const SubBand> bands, double f_ghz) {
  if (bands.empty() || f_ghz < bands.front().f_lo || f_ghz > bands.back().f_hi) return -1;
  for (std::size_t i = 0; i + 1 < bands.size(); ++i) {
    if (f_ghz < bands[i].f_hi) return static_cast<int>(i);
  }
  return static_cast<int>(bands.size()) - 1;
}

struct BandFit {
  SubBand band;
  std::vector<double> log10_params;
  std::vector<double> init;  // starting point handed to LM
  double rmse = 0.0;
  bool converged = false;
  int iterations = 0;
  std::size_t sample_count = 0;
  lm::Termination termination = lm::Termination::MaxIterations;
};

/// Which data a window member is scored on when weighting initializers.
enum class InitScoring { CurrentBand, OwnBand };

struct WfTrendConfig {
  double delta_f_ghz = 10.0;
  int window = 3;
  lm::LMConfig lm;
  std::optional<std::vector<double>> global_init;  // default: the model's
  InitScoring scoring = InitScoring::CurrentBand;
  bool weighted_regression = false;
  bool scan_first_band = true;
  double scan_halfwidth_dex = 1.0;
  double scan_step_dex = 0.002;

  void validate() const {
    if (!(delta_f_ghz > 0.0)) throw DomainError("WfTrendConfig: delta_f must be positive");
    if (window < 1) throw DomainError("WfTrendConfig: window must be >= 1");
    if (scan_first_band && (!(scan_halfwidth_dex >= 0.0) || !(scan_step_dex > 0.0))) {
      throw DomainError("WfTrendConfig: invalid scan settings");
    }
    lm.validate();
  }
};

/// Sum of squared prediction errors of fixed parameters on samples.
template <ModelFamily M>
double sum_squared_error(const M& model, std::span<const double> x,
                         std::span<const MeasurementSample> samples) {
  double acc = 0.0;
  for (const auto& s : samples) {
    const double e = model.predict(s.f_ghz, s.theta_deg, x) - s.gamma;
    acc += e * e;
  }
  return acc;
}

struct WeightedInit {
  std::vector<double> init;
  std::vector<double> weights;  // one per window member, sums to 1 (empty if none)
  std::vector<double> errors;   // eps_j
};

/// Start of the sliding window for 0-based band i: max(0, i - W).
inline int window_start(int i, int W) { return std::max(0, i - W); }

/// Quality-weighted initializer from the fits inside the window.
///
/// eps_j is the squared error of fit j on the current band's samples
/// (CurrentBand) or on its own band (OwnBand, from its stored rmse); the
/// weights are (1/eps_j) normalized. A member with eps_j < 1e-12 takes the
/// full weight, shared evenly among such members. An empty window yields
/// `global_init`.
template <ModelFamily M>
WeightedInit weighted_init(std::span<const BandFit> window_fits,
                           std::span<const MeasurementSample> band_samples, const M& model,
                           const std::vector<double>& global_init,
                           InitScoring scoring = InitScoring::CurrentBand) {
  WeightedInit out;
  if (window_fits.empty()) {
    out.init = global_init;
    return out;
  }
  const std::size_t n = window_fits.size();
  out.errors.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const BandFit& fit = window_fits[j];
    if (scoring == InitScoring::CurrentBand) {
      try {
        out.errors[j] = sum_squared_error(model, fit.log10_params, band_samples);
      } catch (const Error&) {
        out.errors[j] = std::numeric_limits<double>::infinity();
      }
    } else {
      out.errors[j] = fit.rmse * fit.rmse * static_cast<double>(fit.sample_count);
    }
  }

  out.weights.assign(n, 0.0);
  std::size_t exact = 0;
  for (double e : out.errors) exact += e < 1e-12 ? 1 : 0;
  if (exact > 0) {
    for (std::size_t j = 0; j < n; ++j) {
      if (out.errors[j] < 1e-12) out.weights[j] = 1.0 / static_cast<double>(exact);
    }
  } else {
    double total = 0.0;
    for (double e : out.errors) total += 1.0 / e;
    if (!(total > 0.0)) {  // every member unusable
      out.weights.assign(n, 1.0 / static_cast<double>(n));
    } else {
      for (std::size_t j = 0; j < n; ++j) out.weights[j] = (1.0 / out.errors[j]) / total;
    }
  }

  out.init.assign(window_fits.front().log10_params.size(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < out.init.size(); ++l) {
      out.init[l] += out.weights[j] * window_fits[j].log10_params[l];
    }
  }
  return out;
}

/// Moves one slot of `init` along a grid to the lowest-error point. Used on
/// the first band, where slab fringes make the landscape multi-modal.
template <ModelFamily M>
std::vector<double> scan_initialization(const M& model, std::vector<double> init,
                                        std::span<const MeasurementSample> samples,
                                        double halfwidth_dex, double step_dex) {
  const int slot = model.scan_slot();
  const double center = init[slot];
  const int steps = static_cast<int>(std::floor(halfwidth_dex / step_dex + 1e-9));
  double best_value = center;
  double best_error = std::numeric_limits<double>::infinity();
  std::vector<double> x = init;
  for (int s = -steps; s <= steps; ++s) {
    x[slot] = center + s * step_dex;
    double err;
    try {
      err = sum_squared_error(model, x, samples);
    } catch (const Error&) {
      continue;
    }
    if (err < best_error) {
      best_error = err;
      best_value = x[slot];
    }
  }
  init[slot] = best_value;
  return init;
}

/// LM fit of one band in log10-parameter space.
template <ModelFamily M>
BandFit fit_band(std::span<const MeasurementSample> samples, const std::vector<double>& init,
                 const M& model, const lm::LMConfig& config, SubBand band = {}) {
  const int n = model.size();
  if (static_cast<int>(samples.size()) < n) {
    throw UnderdeterminedError("band " + std::to_string(band.index) + " has " +
                               std::to_string(samples.size()) + " samples for " +
                               std::to_string(n) + " parameters");
  }
  if (static_cast<int>(init.size()) != n) throw DomainError("fit_band: init has wrong size");

  auto residuals = [&](const lm::Vector& x) {
    lm::Vector r(static_cast<Eigen::Index>(samples.size()));
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] =
          model.predict(samples[i].f_ghz, samples[i].theta_deg, xs) - samples[i].gamma;
    }
    return r;
  };

  const lm::Vector x0 = Eigen::Map<const lm::Vector>(init.data(), n);
  const lm::FitResult res = lm::levenberg_marquardt(residuals, x0, config);

  BandFit out;
  out.band = band;
  out.log10_params.assign(res.params.data(), res.params.data() + n);
  out.init = init;
  out.rmse = res.rmse;
  out.converged = res.converged;
  out.iterations = res.iterations;
  out.sample_count = samples.size();
  out.termination = res.termination;
  return out;
}

struct TrendRegression {
  LogTrend trend;
  std::vector<double> residual_rms;  // per slot, in log10 units
  std::vector<int> used_bands;       // 1-based indices of the fits used
};

/// Regresses lg p on band-center frequency (in the model's unit) over the
/// converged fits. Slots the model marks as frequency independent, and every
/// slot when `flat` is set, get k = 0 and b = mean lg p.
template <ModelFamily M>
TrendRegression trend_regression(std::span<const BandFit> fits, const M& model,
                                 bool weighted = false, bool flat = false) {
  std::vector<const BandFit*> used;
  for (const auto& f : fits) {
    if (f.converged) used.push_back(&f);
  }
  const int n = model.size();
  bool needs_slope = false;
  for (int l = 0; l < n; ++l) needs_slope = needs_slope || model.sloped(l);
  if (used.empty()) throw InsufficientBandsError("trend_regression: no converged band fits");
  if (!flat && needs_slope && used.size() < 2) {
    throw InsufficientBandsError("trend_regression: need at least 2 converged band fits, have " +
                                 std::to_string(used.size()));
  }

  const std::size_t m = used.size();
  std::vector<double> x(m), w(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = model.unit.from_ghz(used[i]->band.f_center);
    w[i] = weighted ? 1.0 / std::max(used[i]->rmse, 1e-15) : 1.0;
  }
  double sw = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
  }
  const double xbar = sx / sw;

  TrendRegression out;
  out.trend.unit = model.unit;
  out.trend.k.assign(n, 0.0);
  out.trend.b.assign(n, 0.0);
  out.residual_rms.assign(n, 0.0);
  for (const auto* f : used) out.used_bands.push_back(f->band.index);

  for (int l = 0; l < n; ++l) {
    double sy = 0.0;
    for (std::size_t i = 0; i < m; ++i) sy += w[i] * used[i]->log10_params[l];
    const double ybar = sy / sw;
    double k = 0.0;
    if (!flat && model.sloped(l)) {
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double dx = x[i] - xbar;
        sxy += w[i] * dx * (used[i]->log10_params[l] - ybar);
        sxx += w[i] * dx * dx;
      }
      k = sxy / sxx;
    }
    const double b = flat || !model.sloped(l) ? ybar : ybar - k * xbar;
    out.trend.k[l] = k;
    out.trend.b[l] = b;
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = used[i]->log10_params[l] - (k * x[i] + b);
      ss += e * e;
    }
    out.residual_rms[l] = std::sqrt(ss / static_cast<double>(m));
  }
  return out;
}

struct TrendFit {
  LogTrend trend;
  std::vector<BandFit> bands;
  std::vector<WeightedInit> inits;
  std::vector<double> regression_rms;
  std::vector<int> excluded_bands;  // 1-based, non-converged
  bool single_band = false;
};

/// Runs the whole sub-band procedure on training samples.
template <ModelFamily M>
TrendFit wf_trend(std::span<const MeasurementSample> train, const M& model,
                  const WfTrendConfig& config = {}) {
  config.validate();
  if (train.empty()) throw IngestionError("wf_trend: no training samples");

  const auto [lo_it, hi_it] = std::minmax_element(
      train.begin(), train.end(),
      [](const MeasurementSample& a, const MeasurementSample& b) { return a.f_ghz < b.f_ghz; });
  const double f_start = lo_it->f_ghz;
  const double f_end = hi_it->f_ghz;
  const std::vector<SubBand> bands = partition_bands(f_start, f_end, config.delta_f_ghz);

  std::vector<std::vector<MeasurementSample>> per_band(bands.size());
  for (const auto& s : train) per_band[static_cast<std::size_t>(band_of(bands, s.f_ghz))].push_back(s);

  const std::vector<double> global = config.global_init.value_or(model.default_init());
  if (static_cast<int>(global.size()) != model.size()) {
    throw DomainError("wf_trend: global init has wrong size");
  }

  TrendFit out;
  out.single_band = bands.size() == 1;
  for (std::size_t i = 0; i < bands.size(); ++i) {
    std::vector<BandFit> window;
    for (int j = window_start(static_cast<int>(i), config.window); j < static_cast<int>(i); ++j) {
      if (out.bands[static_cast<std::size_t>(j)].converged) {
        window.push_back(out.bands[static_cast<std::size_t>(j)]);
      }
    }
    WeightedInit start = weighted_init<M>(window, per_band[i], model, global, config.scoring);
    if (window.empty() && config.scan_first_band &&
        static_cast<int>(per_band[i].size()) >= model.size()) {
      start.init = scan_initialization(model, start.init, per_band[i], config.scan_halfwidth_dex,
                                       config.scan_step_dex);
    }
    out.bands.push_back(fit_band<M>(per_band[i], start.init, model, config.lm, bands[i]));
    out.inits.push_back(std::move(start));
    if (!out.bands.back().converged) out.excluded_bands.push_back(bands[i].index);
  }

  TrendRegression reg = trend_regression<M>(out.bands, model, config.weighted_regression,
                                            out.single_band);
  out.trend = std::move(reg.trend);
  out.regression_rms = std::move(reg.residual_rms);
  return out;
}

}  // namespace thzrefl
