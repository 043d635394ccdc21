#pragma once

// CSV ingestion/export and structured-text (JSON) serialization.
//
// Sample CSV:   freq_ghz,angle_deg,gamma     (pre-ratioed reflection)
// Sweep CSV:    freq_ghz,angle_deg,s21_mag   (raw magnitude, paired files)
// Columns may come in any order; extra columns (e.g. phase) are ignored.
// Lines starting with '#' are comments. Written files start with a
// "# schema: ..." line.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thzrefl/data.hpp"
#include "thzrefl/dataset.hpp"
#include "thzrefl/error.hpp"
#include "thzrefl/models.hpp"
#include "thzrefl/physics.hpp"

namespace thzrefl::io {

inline constexpr const char* kSamplesSchema = "thzrefl-samples/1";
inline constexpr const char* kTrendSchema = "thzrefl-trend/1";
inline constexpr const char* kMaterialsSchema = "thzrefl-materials/1";

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& text, std::size_t line_no, const std::string& column) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw IngestionError("line " + std::to_string(line_no) + ": column '" + column +
                         "' is not a number: '" + text + "'");
  }
  return v;
}

/// Reads a CSV with the given required columns; returns rows of those
/// columns in the requested order.
inline std::vector<std::vector<double>> read_columns(std::istream& in,
                                                     const std::vector<std::string>& required) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    header = split_csv(t);
    break;
  }
  if (header.empty()) throw IngestionError("CSV has no header line");
  std::vector<std::size_t> pos;
  for (const auto& name : required) {
    std::size_t found = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) found = i;
    }
    if (found == header.size()) {
      std::string got;
      for (const auto& h : header) got += (got.empty() ? "" : ",") + h;
      throw IngestionError("CSV is missing column '" + name + "' (header: " + got + ")");
    }
    pos.push_back(found);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split_csv(t);
    if (cells.size() != header.size()) {
      throw IngestionError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(pos.size());
    for (std::size_t c = 0; c < pos.size(); ++c) {
      row.push_back(parse_number(cells[pos[c]], line_no, required[c]));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

struct SampleReadResult {
  std::vector<MeasurementSample> samples;
  std::size_t dropped_outliers = 0;
};

/// Reads pre-ratioed samples; gamma above the outlier gate is dropped.
inline SampleReadResult read_samples_csv(std::istream& in) {
  SampleReadResult out;
  for (const auto& row : detail::read_columns(in, {"freq_ghz", "angle_deg", "gamma"})) {
    if (!(row[2] >= 0.0)) throw IngestionError("negative reflection magnitude in CSV");
    if (row[2] > kOutlierGamma) {
      ++out.dropped_outliers;
      continue;
    }
    out.samples.push_back({row[0], row[1], row[2]});
  }
  if (out.samples.empty()) throw IngestionError("CSV contains no usable samples");
  return out;
}

inline SampleReadResult read_samples_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_samples_csv(in);
}

/// Reads a raw magnitude sweep file, grouping rows by angle in order of first
/// appearance.
inline std::vector<AngleSweep> read_sweeps_csv(std::istream& in) {
  std::vector<AngleSweep> sweeps;
  for (const auto& row : detail::read_columns(in, {"freq_ghz", "angle_deg", "s21_mag"})) {
    auto it = std::find_if(sweeps.begin(), sweeps.end(),
                           [&](const AngleSweep& s) { return s.theta_deg == row[1]; });
    if (it == sweeps.end()) {
      sweeps.push_back({row[1], {}});
      it = std::prev(sweeps.end());
    }
    it->points.push_back({row[0], row[2]});
  }
  if (sweeps.empty()) throw IngestionError("sweep CSV contains no rows");
  return sweeps;
}

inline std::vector<AngleSweep> read_sweeps_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_sweeps_csv(in);
}

inline void write_samples_csv(std::ostream& out, const std::vector<MeasurementSample>& samples) {
  out << "# schema: " << kSamplesSchema << '\n' << "freq_ghz,angle_deg,gamma\n";
  for (const auto& s : samples) {
    out << format_double(s.f_ghz) << ',' << format_double(s.theta_deg) << ','
        << format_double(s.gamma) << '\n';
  }
}

// --- JSON -------------------------------------------------------------------

inline nlohmann::json to_json(const TrendParams& t) {
  nlohmann::json j;
  j["class"] = to_string(t.cls);
  j["trend_unit_ghz"] = t.unit.ghz_per_unit;
  nlohmann::json k = nlohmann::json::array(), b = nlohmann::json::array();
  for (int l = 0; l < 4; ++l) {
    if (t.has(l)) {
      k.push_back(t.k[l]);
      b.push_back(t.b[l]);
    } else {
      k.push_back(nullptr);
      b.push_back(nullptr);
    }
  }
  j["k"] = k;
  j["b"] = b;
  return j;
}

inline TrendParams trend_params_from_json(const nlohmann::json& j) {
  try {
    TrendParams t;
    t.cls = material_class_from_string(j.at("class").get<std::string>());
    t.unit = FrequencyUnit{j.at("trend_unit_ghz").get<double>()};
    const auto& k = j.at("k");
    const auto& b = j.at("b");
    if (k.size() != 4 || b.size() != 4) throw IngestionError("trend needs 4 k and 4 b entries");
    for (int l = 0; l < 4; ++l) {
      if (!t.has(l)) continue;
      t.k[l] = k.at(l).get<double>();
      t.b[l] = b.at(l).get<double>();
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("malformed trend parameters: ") + e.what());
  }
}

inline nlohmann::json to_json(const MaterialRecord& m) {
  nlohmann::json j = to_json(m.trend);
  j["name"] = m.name;
  j["thickness_m"] = m.thickness_m;
  j["reference_rmse"] = m.reference_rmse;
  j["reference_bound90"] = m.reference_bound90;
  return j;
}

inline MaterialRecord material_from_json(const nlohmann::json& j) {
  try {
    MaterialRecord m;
    m.trend = trend_params_from_json(j);
    m.cls = m.trend.cls;
    m.name = j.at("name").get<std::string>();
    m.thickness_m = j.at("thickness_m").get<double>();
    m.reference_rmse = j.at("reference_rmse").get<double>();
    m.reference_bound90 = j.at("reference_bound90").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("malformed material record: ") + e.what());
  }
}

inline nlohmann::json materials_to_json(const std::vector<MaterialRecord>& rows) {
  nlohmann::json j;
  j["schema"] = kMaterialsSchema;
  j["materials"] = nlohmann::json::array();
  for (const auto& r : rows) j["materials"].push_back(to_json(r));
  return j;
}

enum class ModelKind { Epld, Empirical };

inline const char* to_string(ModelKind k) { return k == ModelKind::Epld ? "sli-epld" : "sli-empirical"; }

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "sli-epld" || s == "epld") return ModelKind::Epld;
  if (s == "sli-empirical" || s == "empirical") return ModelKind::Empirical;
  throw DomainError("unknown model '" + s + "' (expected sli-epld or sli-empirical)");
}

/// A fitted (or tabulated) model ready for prediction.
struct TrendFile {
  ModelKind kind = ModelKind::Epld;
  MaterialClass cls = MaterialClass::NonMetal;
  std::string material;
  double thickness_m = 0.0;
  LogTrend trend;  // slot-based, see models.hpp

  EpldModel epld() const { return {cls, thickness_m, trend.unit}; }
  EmpiricalModel empirical() const { return {thickness_m, trend.unit}; }

  double predict(double f_ghz, double theta_deg) const {
    return kind == ModelKind::Epld ? predict_trend(epld(), trend, f_ghz, theta_deg)
                                   : predict_trend(empirical(), trend, f_ghz, theta_deg);
  }

  static TrendFile from_material(const MaterialRecord& m, std::optional<double> thickness = {}) {
    TrendFile t;
    t.kind = ModelKind::Epld;
    t.cls = m.cls;
    t.material = m.name;
    t.thickness_m = thickness.value_or(m.thickness_m);
    t.trend = t.epld().from_trend_params(m.trend);
    return t;
  }
};

inline nlohmann::json to_json(const TrendFile& t) {
  nlohmann::json j;
  j["schema"] = kTrendSchema;
  j["model"] = to_string(t.kind);
  j["material"] = t.material;
  j["thickness_m"] = t.thickness_m;
  if (t.kind == ModelKind::Epld) {
    const nlohmann::json p = to_json(t.epld().to_trend_params(t.trend));
    j["class"] = p["class"];
    j["trend_unit_ghz"] = p["trend_unit_ghz"];
    j["k"] = p["k"];
    j["b"] = p["b"];
    j["parameters"] = {"p1", "p2", "p3", "p4"};
  } else {
    j["class"] = to_string(t.cls);
    j["trend_unit_ghz"] = t.trend.unit.ghz_per_unit;
    j["k"] = t.trend.k;
    j["b"] = t.trend.b;
    j["parameters"] = {"eps_r-1", "sigma"};
  }
  return j;
}

inline TrendFile trend_file_from_json(const nlohmann::json& j) {
  try {
    if (j.value("schema", "") != kTrendSchema) {
      throw IngestionError("unsupported trend file schema '" + j.value("schema", "") + "'");
    }
    TrendFile t;
    t.kind = model_kind_from_string(j.at("model").get<std::string>());
    t.material = j.value("material", "");
    t.thickness_m = j.at("thickness_m").get<double>();
    if (t.kind == ModelKind::Epld) {
      const TrendParams p = trend_params_from_json(j);
      t.cls = p.cls;
      t.trend = t.epld().from_trend_params(p);
    } else {
      t.cls = material_class_from_string(j.at("class").get<std::string>());
      t.trend.unit = FrequencyUnit{j.at("trend_unit_ghz").get<double>()};
      t.trend.k = j.at("k").get<std::vector<double>>();
      t.trend.b = j.at("b").get<std::vector<double>>();
      if (t.trend.k.size() != 2 || t.trend.b.size() != 2) {
        throw IngestionError("empirical trend needs 2 k and 2 b entries");
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("malformed trend file: ") + e.what());
  } catch (const DomainError& e) {
    throw IngestionError(std::string("malformed trend file: ") + e.what());
  }
}

inline TrendFile read_trend_file(const std::string& path) {
  auto in = detail::open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("'" + path + "' is not valid JSON: " + e.what());
  }
  return trend_file_from_json(j);
}

}  // namespace thzrefl::io
