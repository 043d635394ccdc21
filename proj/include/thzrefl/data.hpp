#pragma once

// Measurement ingestion (metal-reference ratio), stratified splitting,
// synthetic data, frequency/angle grids, and the built-in material table.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "thzrefl/dataset.hpp"
#include "thzrefl/error.hpp"
#include "thzrefl/physics.hpp"
#include "thzrefl/rng.hpp"
#include "thzrefl/wftrend.hpp"

namespace thzrefl {

// --- ratio method -----------------------------------------------------------

struct SweepRecord {
  double f_ghz = 0.0;
  double s21_mag = 0.0;  // linear scale
};

/// Magnitude sweep at one incidence angle.
struct AngleSweep {
  double theta_deg = 0.0;
  std::vector<SweepRecord> points;
};

struct RatioResult {
  std::vector<MeasurementSample> samples;
  std::size_t dropped_below_floor = 0;
  std::size_t dropped_outliers = 0;
};

inline constexpr double kDefaultNoiseFloor = 1e-7;
inline constexpr double kGridTolerance = 1e-6;  // GHz

/// gamma = |S21_material| / |S21_reference| point by point. Sweeps are
/// matched by angle; frequencies must agree within 1e-6 GHz. Points whose
/// reference magnitude is under `noise_floor` or whose ratio exceeds the
/// outlier gate are dropped and counted.
inline RatioResult ratio_reflection(const std::vector<AngleSweep>& material,
                                    const std::vector<AngleSweep>& reference,
                                    double noise_floor = kDefaultNoiseFloor) {
  if (material.size() != reference.size()) {
    throw IngestionError("ratio_reflection: material has " + std::to_string(material.size()) +
                         " angles, reference has " + std::to_string(reference.size()));
  }
  RatioResult out;
  for (const AngleSweep& mat : material) {
    auto ref = std::find_if(reference.begin(), reference.end(), [&](const AngleSweep& r) {
      return std::abs(r.theta_deg - mat.theta_deg) <= 1e-9;
    });
    if (ref == reference.end()) {
      throw IngestionError("ratio_reflection: no reference sweep at " +
                           std::to_string(mat.theta_deg) + " deg");
    }
    if (ref->points.size() != mat.points.size()) {
      throw IngestionError("ratio_reflection: grid length mismatch at " +
                           std::to_string(mat.theta_deg) + " deg");
    }
    for (std::size_t i = 0; i < mat.points.size(); ++i) {
      const SweepRecord& m = mat.points[i];
      const SweepRecord& r = ref->points[i];
      if (std::abs(m.f_ghz - r.f_ghz) > kGridTolerance) {
        throw IngestionError("ratio_reflection: frequency grids differ at " +
                             std::to_string(m.f_ghz) + " GHz");
      }
      if (i > 0 && !(m.f_ghz > mat.points[i - 1].f_ghz)) {
        throw IngestionError("ratio_reflection: frequencies must increase within a sweep");
      }
      if (!(m.s21_mag >= 0.0) || !(r.s21_mag >= 0.0)) {
        throw IngestionError("ratio_reflection: negative magnitude");
      }
      if (r.s21_mag < noise_floor) {
        ++out.dropped_below_floor;
        continue;
      }
      const double gamma = m.s21_mag / r.s21_mag;
      if (gamma > kOutlierGamma) {
        ++out.dropped_outliers;
        continue;
      }
      out.samples.push_back({m.f_ghz, mat.theta_deg, gamma});
    }
  }
  if (out.samples.empty()) throw IngestionError("ratio_reflection: every sample was dropped");
  return out;
}

// --- stratified split -------------------------------------------------------

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;  // into the input samples, ascending
  std::vector<std::size_t> test_indices;
  std::size_t small_strata = 0;  // cells with < 2 samples, kept whole in train
};

/// Splits by (sub-band x angle) cell. Each cell of size c contributes
/// round(fraction * c) samples to train, chosen by ranking the samples on a
/// seeded counter-based hash of their index.
inline SplitResult stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed,
                                    double delta_f_ghz = 10.0) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DomainError("stratified_split: train fraction must lie in (0, 1)");
  }
  ds.validate();
  double f_lo = ds.samples.front().f_ghz, f_hi = f_lo;
  for (const auto& s : ds.samples) {
    f_lo = std::min(f_lo, s.f_ghz);
    f_hi = std::max(f_hi, s.f_ghz);
  }
  std::vector<SubBand> bands;
  if (f_hi > f_lo) bands = partition_bands(f_lo, f_hi, delta_f_ghz);

  std::map<std::pair<int, double>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const int band = bands.empty() ? 0 : band_of(bands, ds.samples[i].f_ghz);
    cells[{band, ds.samples[i].theta_deg}].push_back(i);
  }

  const CounterRng rng(seed);
  SplitResult out;
  std::vector<char> in_train(ds.samples.size(), 0);
  for (auto& [key, members] : cells) {
    if (members.size() < 2) {
      ++out.small_strata;
      for (std::size_t i : members) in_train[i] = 1;
      continue;
    }
    const auto take = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(members.size()) + 0.5));
    std::vector<std::pair<std::uint64_t, std::size_t>> ranked;
    ranked.reserve(members.size());
    for (std::size_t i : members) ranked.emplace_back(rng.bits(i), i);
    std::sort(ranked.begin(), ranked.end());
    for (std::size_t r = 0; r < take && r < ranked.size(); ++r) in_train[ranked[r].second] = 1;
  }

  out.train = ds;
  out.test = ds;
  out.train.samples.clear();
  out.test.samples.clear();
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    if (in_train[i]) {
      out.train.samples.push_back(ds.samples[i]);
      out.train_indices.push_back(i);
    } else {
      out.test.samples.push_back(ds.samples[i]);
      out.test_indices.push_back(i);
    }
  }
  return out;
}

// --- grids ------------------------------------------------------------------

/// Inclusive arithmetic grid; the end point is kept when it lies on the grid
/// within 1e-9 of a step.
inline std::vector<double> make_grid(double start, double step, double end) {
  if (!(step > 0.0) || !(end >= start)) {
    throw DomainError("grid: need step > 0 and end >= start");
  }
  const double span = (end - start) / step;
  const double whole = std::round(span);
  if (std::abs(span - whole) <= 1e-9 * std::max(1.0, span)) {
    // end lies on the grid: interpolate so both end points are exact
    const auto intervals = static_cast<std::size_t>(whole);
    std::vector<double> g(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
      g[i] = intervals == 0 ? start
                            : start + (end - start) * static_cast<double>(i) /
                                          static_cast<double>(intervals);
    }
    return g;
  }
  const auto count = static_cast<std::size_t>(std::floor(span)) + 1;
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = start + static_cast<double>(i) * step;
  return g;
}

/// Parses "start:step:end" or a single value.
inline std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t colon = spec.find(':', pos);
    const std::string token = spec.substr(pos, colon == std::string::npos ? std::string::npos
                                                                          : colon - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw DomainError("grid: cannot parse '" + spec + "'");
    }
    if (used != token.size()) throw DomainError("grid: cannot parse '" + spec + "'");
    parts.push_back(v);
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw DomainError("grid: expected start:step:end, got '" + spec + "'");
  return make_grid(parts[0], parts[1], parts[2]);
}

/// 300-400 GHz in 1200 steps (1201 points).
inline std::vector<double> default_frequency_grid() { return make_grid(300.0, 100.0 / 1200.0, 400.0); }

/// 10 to 80 degrees in 10 degree steps.
inline std::vector<double> default_angle_grid() { return make_grid(10.0, 10.0, 80.0); }

// --- material table ---------------------------------------------------------

struct MaterialRecord {
  std::string name;
  MaterialClass cls = MaterialClass::NonMetal;
  double thickness_m = 0.0;  // nominal sample thickness
  TrendParams trend;
  double reference_rmse = 0.0;
  double reference_bound90 = 0.0;

  friend bool operator==(const MaterialRecord&, const MaterialRecord&) = default;
};

namespace detail {

inline MaterialRecord non_metal_row(std::string name, double thickness_m, double b1, double k2,
                                    double b2, double k3, double b3, double k4, double b4,
                                    double rmse, double bound90) {
  TrendParams t{MaterialClass::NonMetal, {0.0, k2, k3, k4}, {b1, b2, b3, b4}, kTHz};
  return {std::move(name), MaterialClass::NonMetal, thickness_m, t, rmse, bound90};
}

inline MaterialRecord metal_row(std::string name, double thickness_m, double b1, double b2,
                                double b4, double rmse, double bound90) {
  TrendParams t{MaterialClass::Metal, {0.0, 0.0, 0.0, 0.0}, {b1, b2, 0.0, b4}, kTHz};
  return {std::move(name), MaterialClass::Metal, thickness_m, t, rmse, bound90};
}

inline std::string fold(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace detail

/// Fitted trend rows for the nine measured materials, 300-400 GHz, TE. The
/// trend frequency is in THz. Thicknesses are nominal values for the sample
/// types, not measured ones.
inline const std::vector<MaterialRecord>& builtin_materials() {
  static const std::vector<MaterialRecord> rows = {
      detail::non_metal_row("Glass", 0.005, -14.7072, -0.1444, 2.9835, 0.0767, 3.0687, 0.0684,
                            -2.4791, 0.0050, 0.0098),
      detail::non_metal_row("Wooden Board", 0.018, -14.3572, -0.2067, 2.8802, 0.0969, 3.0588,
                            0.0655, -2.4679, 0.0047, 0.0097),
      detail::non_metal_row("PVC", 0.003, -14.5305, -0.1218, 2.8488, 0.1210, 2.9848, 0.1042,
                            -2.5683, 0.0034, 0.0060),
      detail::non_metal_row("Gypsum", 0.0095, -14.0106, -0.2054, 3.1136, 0.0930, 3.0711, 0.1016,
                            -2.5586, 0.0062, 0.0114),
      detail::non_metal_row("Acrylic", 0.003, -14.4616, -0.2664, 3.1406, 0.1188, 2.9599, 0.1855,
                            -2.7820, 0.0076, 0.0129),
      detail::non_metal_row("Tile", 0.008, -14.6197, -0.0943, 2.5385, 0.1776, 2.7872, 0.1444,
                            -2.5832, 0.0057, 0.0118),
      detail::non_metal_row("Concrete", 0.040, -13.9350, -0.0710, 2.4141, 0.2143, 2.6463, 0.1726,
                            -2.6662, 0.0078, 0.0146),
      detail::metal_row("Aluminum", 0.002, -14.8545, 4.3966, -1.0000, 0.0018, 0.0016),
      detail::metal_row("Stainless steel", 0.001, -15.0567, 4.4962, -1.0056, 0.0013, 0.0015),
  };
  return rows;
}

/// Case-, space- and dash-insensitive lookup; "Acrylic sheet" aliases Acrylic.
inline const MaterialRecord& builtin_material(const std::string& name) {
  std::string key = detail::fold(name);
  if (key == "acrylicsheet") key = "acrylic";
  for (const auto& row : builtin_materials()) {
    if (detail::fold(row.name) == key) return row;
  }
  std::string valid;
  for (const auto& row : builtin_materials()) {
    if (!valid.empty()) valid += ", ";
    valid += row.name;
  }
  throw UnknownMaterialError("unknown material '" + name + "'; valid names: " + valid);
}

// --- synthesis --------------------------------------------------------------

/// Forward-model samples (angle-major, then frequency) with additive
/// Gaussian noise, clamped at zero.
inline Dataset synthesize_dataset(const MaterialRecord& material, double d_m,
                                  const std::vector<double>& f_grid,
                                  const std::vector<double>& theta_grid, double noise_sigma,
                                  std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) throw DomainError("synthesize_dataset: noise must be >= 0");
  if (!(d_m > 0.0)) throw DomainError("synthesize_dataset: thickness must be positive");
  Dataset ds;
  ds.material = material.name;
  ds.thickness_m = d_m;
  ds.cls = material.cls;
  ds.provenance = "synthetic";
  ds.samples.reserve(f_grid.size() * theta_grid.size());
  const CounterRng rng(seed);
  std::uint64_t counter = 0;
  for (double theta : theta_grid) {
    for (double f : f_grid) {
      const double clean = sli_epld({f, theta, d_m}, trend_to_subband(material.trend, f));
      double gamma = clean;
      if (noise_sigma > 0.0) gamma = std::max(0.0, clean + noise_sigma * rng.normal(counter));
      ++counter;
      ds.samples.push_back({f, theta, gamma});
    }
  }
  return ds;
}

}  // namespace thzrefl
