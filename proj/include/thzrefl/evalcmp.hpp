#pragma once

// Error metrics and side-by-side model comparison on a shared test set.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thzrefl/dataset.hpp"
#include "thzrefl/error.hpp"

namespace thzrefl {

namespace detail {

inline void check_pair(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) {
    throw LengthMismatchError("predictions and truths differ in length (" +
                              std::to_string(predictions.size()) + " vs " +
                              std::to_string(truths.size()) + ")");
  }
  if (predictions.empty()) throw LengthMismatchError("empty prediction set");
}

}  // namespace detail

inline double rmse(std::span<const double> predictions, std::span<const double> truths) {
  detail::check_pair(predictions, truths);
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - truths[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(predictions.size()));
}

/// Empirical CDF of absolute errors with midpoint plotting positions
/// (i - 0.5) / m.
struct ErrorCdf {
  std::vector<double> errors;  // ascending
  std::vector<double> probabilities;
};

inline ErrorCdf abs_error_cdf(std::span<const double> predictions, std::span<const double> truths) {
  detail::check_pair(predictions, truths);
  ErrorCdf cdf;
  const std::size_t m = predictions.size();
  cdf.errors.resize(m);
  for (std::size_t i = 0; i < m; ++i) cdf.errors[i] = std::abs(predictions[i] - truths[i]);
  std::sort(cdf.errors.begin(), cdf.errors.end());
  cdf.probabilities.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    cdf.probabilities[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
  }
  return cdf;
}

/// Smallest error e with P(|err| <= e) >= level: the ceil(level * m)-th
/// order statistic.
inline double confidence_bound(const ErrorCdf& cdf, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence_bound: level must lie in (0, 1)");
  if (cdf.errors.empty()) throw LengthMismatchError("confidence_bound: empty CDF");
  const double m = static_cast<double>(cdf.errors.size());
  auto rank = static_cast<std::size_t>(std::ceil(level * m - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, cdf.errors.size());
  return cdf.errors[rank - 1];
}

using Predictor = std::function<double(const MeasurementSample&)>;

struct ModelEntry {
  std::string name;
  Predictor predict;
};

struct ModelScore {
  std::string name;
  bool ok = false;
  std::string error;  // set when the predictor failed
  double rmse = 0.0;
  double bound = 0.0;
  std::size_t count = 0;
  std::map<double, double> rmse_by_angle;
  std::vector<double> predictions;
};

struct ComparisonReport {
  double level = 0.9;
  std::vector<double> truths;
  std::vector<ModelScore> rows;  // input order
};

/// Scores every predictor on the same test samples. A predictor that throws
/// is reported with its error; the others are still scored.
inline ComparisonReport compare_models(const Dataset& test, const std::vector<ModelEntry>& entries,
                                       double level = 0.9) {
  if (entries.empty()) throw DomainError("compare_models: need at least one model");
  if (test.samples.empty()) throw IngestionError("compare_models: empty test set");
  ComparisonReport report;
  report.level = level;
  report.truths.reserve(test.samples.size());
  for (const auto& s : test.samples) report.truths.push_back(s.gamma);

  for (const auto& entry : entries) {
    ModelScore score;
    score.name = entry.name;
    try {
      score.predictions.reserve(test.samples.size());
      for (const auto& s : test.samples) score.predictions.push_back(entry.predict(s));
      score.rmse = rmse(score.predictions, report.truths);
      score.bound = confidence_bound(abs_error_cdf(score.predictions, report.truths), level);
      score.count = score.predictions.size();
      std::map<double, std::pair<double, std::size_t>> acc;
      for (std::size_t i = 0; i < test.samples.size(); ++i) {
        const double e = score.predictions[i] - report.truths[i];
        auto& [ss, n] = acc[test.samples[i].theta_deg];
        ss += e * e;
        ++n;
      }
      for (const auto& [theta, a] : acc) {
        score.rmse_by_angle[theta] = std::sqrt(a.first / static_cast<double>(a.second));
      }
      score.ok = true;
    } catch (const std::exception& ex) {
      score.ok = false;
      score.error = ex.what();
      score.predictions.clear();
    }
    report.rows.push_back(std::move(score));
  }
  return report;
}

inline nlohmann::json report_to_json(const ComparisonReport& report) {
  nlohmann::json j;
  j["schema"] = "thzrefl-report/1";
  j["quantile"] = "ceiling order statistic";
  j["level"] = report.level;
  j["samples"] = report.truths.size();
  j["models"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["name"] = row.name;
    r["ok"] = row.ok;
    if (row.ok) {
      r["rmse"] = row.rmse;
      r["bound"] = row.bound;
      r["count"] = row.count;
      nlohmann::json angles = nlohmann::json::array();
      for (const auto& [theta, e] : row.rmse_by_angle) {
        angles.push_back({{"angle_deg", theta}, {"rmse", e}});
      }
      r["rmse_by_angle"] = angles;
    } else {
      r["error"] = row.error;
    }
    j["models"].push_back(r);
  }
  return j;
}

inline std::string report_to_text(const ComparisonReport& report) {
  std::ostringstream os;
  std::size_t width = 5;
  for (const auto& row : report.rows) width = std::max(width, row.name.size());
  const int pct = static_cast<int>(std::lround(report.level * 100.0));
  os << std::left << std::setw(static_cast<int>(width)) << "model" << "  " << std::right
     << std::setw(10) << "rmse" << "  " << std::setw(10) << ("bound" + std::to_string(pct))
     << "  " << std::setw(8) << "n" << '\n';
  for (const auto& row : report.rows) {
    os << std::left << std::setw(static_cast<int>(width)) << row.name << "  " << std::right;
    if (row.ok) {
      os << std::fixed << std::setprecision(6) << std::setw(10) << row.rmse << "  "
         << std::setw(10) << row.bound << "  " << std::setw(8) << row.count;
    } else {
      os << "failed: " << row.error;
    }
    os << '\n';
  }
  return os.str();
}

/// Two-column CSV (abs_error, probability) for plotting.
inline std::string cdf_to_csv(const ErrorCdf& cdf) {
  std::ostringstream os;
  os << "# schema: thzrefl-cdf/1\n" << "abs_error,probability\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < cdf.errors.size(); ++i) {
    os << cdf.errors[i] << ',' << cdf.probabilities[i] << '\n';
  }
  return os.str();
}

}  // namespace thzrefl
