#pragma once

#include <string>
#include <vector>

#include "thzrefl/error.hpp"
#include "thzrefl/physics.hpp"

namespace thzrefl {

/// Measured reflection magnitudes above this are treated as outliers.
inline constexpr double kOutlierGamma = 1.5;

/// One (frequency, incidence angle, reflection magnitude) observation.
struct MeasurementSample {
  double f_ghz = 0.0;
  double theta_deg = 0.0;
  double gamma = 0.0;

  friend bool operator==(const MeasurementSample&, const MeasurementSample&) = default;
};

struct Dataset {
  std::vector<MeasurementSample> samples;
  std::string material;
  double thickness_m = 0.0;
  MaterialClass cls = MaterialClass::NonMetal;
  std::string provenance;

  void validate() const {
    if (samples.empty()) throw IngestionError("dataset '" + material + "' is empty");
    if (!(thickness_m > 0.0)) throw DomainError("dataset thickness must be positive");
  }
};

}  // namespace thzrefl
