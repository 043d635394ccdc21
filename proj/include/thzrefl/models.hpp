#pragma once

// Fittable model families. Every family is parameterized by log10 values so
// positivity holds by construction, and each parameter either follows a
// log-linear trend in frequency or is frequency independent.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "thzrefl/physics.hpp"

namespace thzrefl {

/// Log-linear trend lg x_i = k_i f + b_i over a model's parameter slots,
/// with f in `unit`.
struct LogTrend {
  std::vector<double> k;
  std::vector<double> b;
  FrequencyUnit unit = kTHz;

  std::vector<double> at(double f_ghz) const {
    const double f = unit.from_ghz(f_ghz);
    std::vector<double> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = k[i] * f + b[i];
    return out;
  }
};

/// SLI-EPLD family. Slots: non-metal (p1, p2, p3, p4); metal (p1, p2, p4).
struct EpldModel {
  MaterialClass cls = MaterialClass::NonMetal;
  double thickness_m = 0.0;
  FrequencyUnit unit = kTHz;

  int size() const { return cls == MaterialClass::Metal ? 3 : 4; }

  /// p-index (0-based, p1 = 0) of a slot.
  int p_index(int slot) const { return cls == MaterialClass::Metal && slot == 2 ? 3 : slot; }

  bool sloped(int slot) const { return cls == MaterialClass::NonMetal && slot > 0; }

  /// Slot swept when refining the global initialization (p2 sets |eta - 1|).
  int scan_slot() const { return 1; }

  std::vector<double> default_init() const {
    if (cls == MaterialClass::Metal) return {-15.0, 4.45, -1.0};
    return {-14.5, 2.9, 3.0, -2.6};
  }

  std::vector<std::string> names() const {
    if (cls == MaterialClass::Metal) return {"p1", "p2", "p4"};
    return {"p1", "p2", "p3", "p4"};
  }

  SubBandParams params(std::span<const double> log10p) const {
    auto p = [&](int slot) { return detail::pow10_checked(log10p[slot]); };
    if (cls == MaterialClass::Metal) return SubBandParams::metal(p(0), p(1), p(2), unit);
    return SubBandParams::non_metal(p(0), p(1), p(2), p(3), unit);
  }

  double predict(double f_ghz, double theta_deg, std::span<const double> log10p) const {
    return sli_epld({f_ghz, theta_deg, thickness_m}, params(log10p));
  }

  /// Converts a fitted slot trend to the p1..p4 trend representation.
  TrendParams to_trend_params(const LogTrend& t) const {
    TrendParams out;
    out.cls = cls;
    out.unit = t.unit;
    for (int slot = 0; slot < size(); ++slot) {
      out.k[p_index(slot)] = t.k[slot];
      out.b[p_index(slot)] = t.b[slot];
    }
    return out;
  }

  LogTrend from_trend_params(const TrendParams& t) const {
    LogTrend out;
    out.unit = t.unit;
    for (int slot = 0; slot < size(); ++slot) {
      out.k.push_back(t.k[p_index(slot)]);
      out.b.push_back(t.b[p_index(slot)]);
    }
    return out;
  }
};

/// Classical SLI model with the empirical permittivity. Slots:
/// lg(eps_r - 1), lg(sigma / (S/m)).
struct EmpiricalModel {
  double thickness_m = 0.0;
  FrequencyUnit unit = kTHz;

  int size() const { return 2; }
  bool sloped(int) const { return true; }
  int scan_slot() const { return 0; }
  std::vector<double> default_init() const { return {0.0, -2.0}; }
  std::vector<std::string> names() const { return {"eps_r-1", "sigma"}; }

  double eps_r(std::span<const double> x) const { return 1.0 + detail::pow10_checked(x[0]); }
  double sigma(std::span<const double> x) const { return detail::pow10_checked(x[1]); }

  double predict(double f_ghz, double theta_deg, std::span<const double> x) const {
    return sli_baseline({f_ghz, theta_deg, thickness_m}, eps_r(x), sigma(x));
  }
};

template <class M>
concept ModelFamily = requires(const M& m, std::span<const double> x) {
  { m.size() } -> std::convertible_to<int>;
  { m.sloped(0) } -> std::convertible_to<bool>;
  { m.scan_slot() } -> std::convertible_to<int>;
  { m.default_init() } -> std::convertible_to<std::vector<double>>;
  { m.names() } -> std::convertible_to<std::vector<std::string>>;
  { m.predict(1.0, 0.0, x) } -> std::convertible_to<double>;
  { m.unit } -> std::convertible_to<FrequencyUnit>;
};

/// Evaluates a fitted trend of any family at one point.
template <ModelFamily M>
double predict_trend(const M& model, const LogTrend& trend, double f_ghz, double theta_deg) {
  const std::vector<double> x = trend.at(f_ghz);
  return model.predict(f_ghz, theta_deg, x);
}

}  // namespace thzrefl
