#pragma once

// Closed-form reflection physics: permittivity models, TE Fresnel
// reflection, single-layer (slab) interference, roughness loss, and the
// composed SLI-EPLD reflection magnitude.
//
// Sign convention: fields vary as e^{+j omega t}, so a passive medium has
// Im(eta) <= 0 and the transmitted wave uses the root with Im <= 0.
// All public frequencies are in GHz. Fitted dispersion parameters (p1..p4)
// are defined against a model frequency unit, see FrequencyUnit.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "thzrefl/error.hpp"
#include "thzrefl/specfun.hpp"

namespace thzrefl {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;            // m/s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m

enum class MaterialClass { Metal, NonMetal };

inline const char* to_string(MaterialClass cls) {
  return cls == MaterialClass::Metal ? "metal" : "non-metal";
}

inline MaterialClass material_class_from_string(const std::string& s) {
  if (s == "metal" || s == "Metal") return MaterialClass::Metal;
  if (s == "non-metal" || s == "nonmetal" || s == "NonMetal" || s == "non_metal") {
    return MaterialClass::NonMetal;
  }
  throw DomainError("unknown material class '" + s + "' (expected metal or non-metal)");
}

/// Frequency unit the dispersion parameters are expressed in: the model
/// sees f / ghz_per_unit. GHz (1) and THz (1000) are the two in use.
struct FrequencyUnit {
  double ghz_per_unit = 1.0;

  double from_ghz(double f_ghz) const { return f_ghz / ghz_per_unit; }
  friend bool operator==(const FrequencyUnit&, const FrequencyUnit&) = default;
};

inline constexpr FrequencyUnit kGHz{1.0};
inline constexpr FrequencyUnit kTHz{1000.0};

/// Macroscopic parameter vector of one sub-band.
///   p1  roughness scale (unit^-2)
///   p2  oscillator / plasma strength
///   p3  resonance term, non-metals only
///   p4  f^2 coefficient (non-metal) or damping (metal)
struct SubBandParams {
  MaterialClass cls = MaterialClass::NonMetal;
  double p1 = 0.0;
  double p2 = 0.0;
  std::optional<double> p3;
  double p4 = 0.0;
  FrequencyUnit unit = kGHz;

  static SubBandParams non_metal(double p1, double p2, double p3, double p4,
                                 FrequencyUnit unit = kGHz) {
    return {MaterialClass::NonMetal, p1, p2, p3, p4, unit};
  }
  static SubBandParams metal(double p1, double p2, double p4, FrequencyUnit unit = kGHz) {
    return {MaterialClass::Metal, p1, p2, std::nullopt, p4, unit};
  }

  void validate() const {
    if (cls == MaterialClass::NonMetal && !p3) {
      throw DomainError("non-metal sub-band parameters require p3");
    }
    if (cls == MaterialClass::Metal && p3) {
      throw DomainError("metal sub-band parameters must not carry p3");
    }
    if (!(p1 >= 0.0) || !(p2 >= 0.0) || !(p4 > 0.0) || (p3 && !(*p3 > 0.0))) {
      throw DomainError("sub-band parameters must be positive");
    }
  }
};

struct IncidenceInput {
  double f_ghz = 0.0;
  double theta_deg = 0.0;
  double d_m = 0.0;

  void validate() const {
    if (!(f_ghz > 0.0)) throw DomainError("frequency must be positive");
    if (!(theta_deg >= 0.0 && theta_deg < 90.0)) {
      throw DomainError("incidence angle must lie in [0, 90) degrees");
    }
    if (!(d_m > 0.0)) throw DomainError("thickness must be positive");
  }
};

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline double wavelength_m(double f_ghz) { return kSpeedOfLight / (f_ghz * 1e9); }

// --- permittivity -----------------------------------------------------------

/// eps_r - j sigma / (2 pi f eps0), f converted to Hz.
inline Complex permittivity_empirical(double eps_r, double sigma, double f_ghz) {
  if (!(f_ghz > 0.0)) throw DomainError("permittivity_empirical: frequency must be positive");
  if (!(eps_r >= 1.0) || !(sigma >= 0.0)) {
    throw DomainError("permittivity_empirical: need eps_r >= 1 and sigma >= 0");
  }
  const double f_hz = f_ghz * 1e9;
  return {eps_r, -sigma / (2.0 * std::numbers::pi * f_hz * kVacuumPermittivity)};
}

/// Parameterized Lorentz oscillator: 1 + p2 / (p3 - p4 f^2 + j f).
inline Complex permittivity_lorentz(const SubBandParams& p, double f_ghz) {
  if (p.cls != MaterialClass::NonMetal || !p.p3) {
    throw DomainError("permittivity_lorentz: non-metal parameters required");
  }
  const double f = p.unit.from_ghz(f_ghz);
  return 1.0 + p.p2 / Complex(*p.p3 - p.p4 * f * f, f);
}

/// Parameterized Drude free-electron form: 1 - p2 / (p4 - j f).
inline Complex permittivity_drude(const SubBandParams& p, double f_ghz) {
  if (p.cls != MaterialClass::Metal) {
    throw DomainError("permittivity_drude: metal parameters required");
  }
  const double f = p.unit.from_ghz(f_ghz);
  return 1.0 - p.p2 / Complex(p.p4, -f);
}

inline Complex permittivity(const SubBandParams& p, double f_ghz) {
  return p.cls == MaterialClass::Metal ? permittivity_drude(p, f_ghz)
                                       : permittivity_lorentz(p, f_ghz);
}

// --- slab reflection --------------------------------------------------------

namespace detail {

inline Complex transverse_root(Complex eta, double theta_deg) {
  const double s = std::sin(deg_to_rad(theta_deg));
  return specfun::complex_sqrt_lossy(eta - s * s);
}

inline void check_angle(double theta_deg) {
  if (!(theta_deg >= 0.0 && theta_deg < 90.0)) {
    throw DomainError("incidence angle must lie in [0, 90) degrees");
  }
}

}  // namespace detail

/// TE Fresnel coefficient of a half-space with relative permittivity eta.
inline Complex fresnel_te(Complex eta, double theta_deg) {
  detail::check_angle(theta_deg);
  const double c = std::cos(deg_to_rad(theta_deg));
  const Complex root = detail::transverse_root(eta, theta_deg);
  const Complex den = c + root;
  if (std::abs(den) < 1e-300) throw DegenerateError("fresnel_te: vanishing denominator");
  return (c - root) / den;
}

/// Slab phase thickness q = (2 pi d / lambda) sqrt(eta - sin^2 theta).
inline Complex phase_thickness(Complex eta, double theta_deg, double d_m, double lambda_m) {
  return (2.0 * std::numbers::pi * d_m / lambda_m) * detail::transverse_root(eta, theta_deg);
}

inline Complex phase_thickness(Complex eta, const IncidenceInput& inc) {
  inc.validate();
  return phase_thickness(eta, inc.theta_deg, inc.d_m, wavelength_m(inc.f_ghz));
}

/// |R (1 - e^{-j2q}) / (1 - R^2 e^{-j2q})|
inline double sli_magnitude(Complex R, Complex q) {
  const Complex e = std::exp(Complex(0.0, -2.0) * q);
  const Complex den = 1.0 - R * R * e;
  if (std::abs(den) < 1e-300) throw DegenerateError("sli_magnitude: vanishing denominator");
  return std::abs(R * (1.0 - e) / den);
}

/// Specular roughness loss e^{-x} I0(x), x = p1 f^2 cos^2 theta, with f in
/// the unit p1 was fitted against.
inline double roughness_factor(double p1, double f_ghz, double theta_deg,
                               FrequencyUnit unit = kGHz) {
  if (!(p1 >= 0.0)) throw DomainError("roughness_factor: p1 must be non-negative");
  const double f = unit.from_ghz(f_ghz);
  const double c = std::cos(deg_to_rad(theta_deg));
  return specfun::bessel_i0_scaled(p1 * f * f * c * c);
}

namespace detail {

inline double checked_magnitude(double gamma, const char* who) {
  if (!(gamma >= 0.0 && gamma <= 1.0 + 1e-12)) {
    throw std::logic_error(std::string(who) + ": reflection magnitude left [0, 1]");
  }
  return gamma;
}

inline double slab_reflection(Complex eta, const IncidenceInput& inc) {
  const Complex R = fresnel_te(eta, inc.theta_deg);
  const Complex q = phase_thickness(eta, inc);
  return sli_magnitude(R, q);
}

}  // namespace detail

/// Full SLI-EPLD reflection magnitude.
inline double sli_epld(const IncidenceInput& inc, const SubBandParams& p) {
  inc.validate();
  p.validate();
  const Complex eta = permittivity(p, inc.f_ghz);
  const double rho = roughness_factor(p.p1, inc.f_ghz, inc.theta_deg, p.unit);
  return detail::checked_magnitude(rho * detail::slab_reflection(eta, inc), "sli_epld");
}

/// Classical single-layer interference model with the empirical permittivity.
inline double sli_baseline(const IncidenceInput& inc, double eps_r, double sigma) {
  inc.validate();
  const Complex eta = permittivity_empirical(eps_r, sigma, inc.f_ghz);
  return detail::checked_magnitude(detail::slab_reflection(eta, inc), "sli_baseline");
}

// --- log-linear trend -------------------------------------------------------

/// Slopes and intercepts of lg p_l = k_l f + b_l, l = 1..4 (stored 0-based).
/// k[0] is always 0. Metals use no p3 (index 2 ignored) and have zero k for
/// p2 and p4.
struct TrendParams {
  MaterialClass cls = MaterialClass::NonMetal;
  std::array<double, 4> k{};
  std::array<double, 4> b{};
  FrequencyUnit unit = kGHz;

  bool has(int l) const { return l != 2 || cls == MaterialClass::NonMetal; }

  friend bool operator==(const TrendParams&, const TrendParams&) = default;
};

namespace detail {

inline double pow10_checked(double exponent) {
  if (!(std::abs(exponent) <= 300.0)) {
    throw OverflowError("trend exponent out of range: " + std::to_string(exponent));
  }
  return std::pow(10.0, exponent);
}

}  // namespace detail

/// Evaluates the trend map at one frequency.
inline SubBandParams trend_to_subband(const std::array<double, 4>& K,
                                      const std::array<double, 4>& B, MaterialClass cls,
                                      double f_ghz, FrequencyUnit unit = kGHz) {
  if (!(f_ghz > 0.0)) throw DomainError("trend_to_subband: frequency must be positive");
  if (K[0] != 0.0) throw DomainError("trend_to_subband: k1 must be zero");
  if (cls == MaterialClass::Metal && (K[1] != 0.0 || K[3] != 0.0)) {
    throw DomainError("trend_to_subband: metal p2/p4 slopes must be zero");
  }
  const double f = unit.from_ghz(f_ghz);
  auto at = [&](int l) { return detail::pow10_checked(K[l] * f + B[l]); };
  if (cls == MaterialClass::Metal) return SubBandParams::metal(at(0), at(1), at(3), unit);
  return SubBandParams::non_metal(at(0), at(1), at(2), at(3), unit);
}

inline SubBandParams trend_to_subband(const TrendParams& t, double f_ghz) {
  return trend_to_subband(t.k, t.b, t.cls, f_ghz, t.unit);
}

}  // namespace thzrefl
