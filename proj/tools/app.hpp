#pragma once

// Command implementations behind the `thzrefl` executable. Kept out of the
// header-only library because they do file I/O; the CLI and the tests link
// this directly.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace thzrefl::app {

enum ExitCode : int { kOk = 0, kUsage = 2, kIngestion = 3, kFitFailure = 4, kInternal = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kManifestSchema = "thzrefl-manifest/1";
inline constexpr const char* kRtTableSchema = "thzrefl-rt-table/1";
inline constexpr const char* kBandsSchema = "thzrefl-bands/1";

struct FitOptions {
  std::vector<std::string> inputs;  // pre-ratioed sample CSVs
  std::string material_sweeps;      // or a raw sweep pair
  std::string reference_sweeps;
  std::string material_class = "non-metal";
  std::string material_name;
  std::optional<double> thickness_m;
  std::string model = "sli-epld";
  double delta_f_ghz = 10.0;
  int window = 3;
  std::uint64_t seed = 1;
  double train_frac = 0.6;
  bool weighted_regression = false;
  std::string out_dir = "thzrefl-fit";
};

struct PredictOptions {
  std::string material;
  std::string params;  // trend file
  std::optional<double> thickness_m;
  std::string freq_ghz = "350";
  std::string angle_deg = "30";
  std::string output;  // empty: stdout
  std::string out_dir = ".";
};

struct EvalOptions {
  std::vector<std::string> params;  // one or more trend files
  std::string test;
  double level = 0.9;
  std::string out_dir = "thzrefl-eval";
};

struct SynthOptions {
  std::string material;
  std::optional<double> thickness_m;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string freq_grid = "300:0.0833333333333333:400";
  std::string angle_grid = "10:10:80";
  std::string output;  // empty: stdout
  std::string out_dir = ".";
};

struct ExportOptions {
  std::string material;
  std::string params;
  std::optional<double> thickness_m;
  std::string format = "rt-table";
  std::string freq_grid = "300:1:400";
  std::string angle_grid = "10:10:80";
  std::string output;
  std::string out_dir = ".";
};

struct MaterialsOptions {
  bool json = false;
  std::string out_dir = ".";
};

// Each command writes its primary output, then `manifest.json`-style run
// record, and returns an exit code. Errors are mapped to codes by run().
int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err);
int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err);
int cmd_export(const ExportOptions& o, std::ostream& out, std::ostream& err);
int cmd_materials(const MaterialsOptions& o, std::ostream& out, std::ostream& err);

nlohmann::json to_json(const FitOptions& o);
nlohmann::json to_json(const PredictOptions& o);
nlohmann::json to_json(const EvalOptions& o);
nlohmann::json to_json(const SynthOptions& o);
nlohmann::json to_json(const ExportOptions& o);
nlohmann::json to_json(const MaterialsOptions& o);

/// Runs `body`, translating library exceptions into exit codes and a one-line
/// message on `err`.
template <class F>
int run(F&& body, std::ostream& err);

int exit_code_for(const std::exception& e);

template <class F>
int run(F&& body, std::ostream& err) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace thzrefl::app
