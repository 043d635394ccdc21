#include "app.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "thzrefl/thzrefl.hpp"

namespace fs = std::filesystem;

namespace thzrefl::app {

namespace {

constexpr const char* kToolVersion = "0.1.0";

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + p.string() + "'");
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
}

// The manifest echoes the resolved options and lists outputs; no timestamps
// or host data so that reruns are byte-identical.
void write_manifest(const std::string& out_dir, const std::string& command,
                    const nlohmann::json& config, const nlohmann::json& outputs,
                    const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json m;
  m["schema"] = kManifestSchema;
  m["tool_version"] = kToolVersion;
  m["command"] = command;
  m["config"] = config;
  m["outputs"] = outputs;
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  const fs::path dir = ensure_dir(out_dir);
  const std::string name = command == "fit" || command == "eval" ? "manifest.json"
                                                                 : command + ".manifest.json";
  write_text(dir / name, m.dump(2) + "\n");
}

std::vector<double> grid_arg(const std::string& spec, const char* flag) {
  try {
    return parse_grid(spec);
  } catch (const DomainError& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

io::TrendFile resolve_model(const std::string& material, const std::string& params,
                            std::optional<double> thickness) {
  if (material.empty() == params.empty()) {
    throw UsageError("give exactly one of --material or --params");
  }
  if (!material.empty()) {
    if (thickness && !(*thickness > 0.0)) throw UsageError("--thickness-m must be positive");
    return io::TrendFile::from_material(builtin_material(material), thickness);
  }
  io::TrendFile t = io::read_trend_file(params);
  if (thickness) {
    if (!(*thickness > 0.0)) throw UsageError("--thickness-m must be positive");
    t.thickness_m = *thickness;
  }
  return t;
}

// Predictions for an (angle-major, frequency-minor) grid, matching the
// sample order of synthetic datasets.
std::vector<MeasurementSample> predict_grid(const io::TrendFile& model,
                                            const std::vector<double>& freqs,
                                            const std::vector<double>& angles) {
  std::vector<MeasurementSample> rows;
  rows.reserve(freqs.size() * angles.size());
  for (double th : angles) {
    for (double f : freqs) rows.push_back({f, th, model.predict(f, th)});
  }
  return rows;
}

template <ModelFamily M>
void write_band_table(std::ostream& os, const TrendFit& fit, const M& model) {
  os << "# schema: " << kBandsSchema << '\n';
  os << "band,f_lo_ghz,f_hi_ghz,f_center_ghz,samples,converged,termination,iterations,rmse";
  for (const auto& n : model.names()) os << ",lg_" << n;
  os << '\n';
  for (const auto& b : fit.bands) {
    os << b.band.index << ',' << io::format_double(b.band.f_lo) << ','
       << io::format_double(b.band.f_hi) << ',' << io::format_double(b.band.f_center) << ','
       << b.sample_count << ',' << (b.converged ? 1 : 0) << ',' << lm::to_string(b.termination)
       << ',' << b.iterations << ',' << io::format_double(b.rmse);
    for (double v : b.log10_params) os << ',' << io::format_double(v);
    os << '\n';
  }
}

std::vector<MeasurementSample> load_fit_samples(const FitOptions& o, std::ostream& err) {
  const bool raw = !o.material_sweeps.empty() || !o.reference_sweeps.empty();
  if (raw && !o.inputs.empty()) throw UsageError("give either --input or a sweep pair, not both");
  if (raw) {
    if (o.material_sweeps.empty() || o.reference_sweeps.empty()) {
      throw UsageError("--material-sweeps and --reference-sweeps go together");
    }
    RatioResult r = ratio_reflection(io::read_sweeps_csv(o.material_sweeps),
                                     io::read_sweeps_csv(o.reference_sweeps));
    if (r.dropped_below_floor + r.dropped_outliers > 0) {
      err << "note: dropped " << r.dropped_below_floor << " points below the noise floor and "
          << r.dropped_outliers << " outliers\n";
    }
    return std::move(r.samples);
  }
  if (o.inputs.empty()) throw UsageError("no input data (--input or a sweep pair)");
  std::vector<MeasurementSample> all;
  for (const auto& path : o.inputs) {
    io::SampleReadResult r = io::read_samples_csv(path);
    if (r.dropped_outliers > 0) {
      err << "note: " << path << ": dropped " << r.dropped_outliers << " outliers\n";
    }
    all.insert(all.end(), r.samples.begin(), r.samples.end());
  }
  return all;
}

template <ModelFamily M>
io::TrendFile run_fit(const M& model, const SplitResult& split, const WfTrendConfig& cfg,
                      const FitOptions& o, MaterialClass cls, const fs::path& dir,
                      io::ModelKind kind, std::ostream& err) {
  const TrendFit fit =
      wf_trend(std::span<const MeasurementSample>(split.train.samples), model, cfg);
  if (fit.single_band) {
    err << "warning: --delta-f " << o.delta_f_ghz
        << " GHz covers the whole frequency span; fitted a single band with frequency-flat "
           "parameters\n";
  }
  for (int b : fit.excluded_bands) {
    err << "warning: band " << b << " did not converge and was left out of the regression\n";
  }
  std::ostringstream bands;
  write_band_table(bands, fit, model);
  write_text(dir / "bands.csv", bands.str());

  io::TrendFile t;
  t.kind = kind;
  t.cls = cls;
  t.material = o.material_name;
  t.thickness_m = *o.thickness_m;
  t.trend = fit.trend;
  return t;
}

std::string samples_to_string(const std::vector<MeasurementSample>& s) {
  std::ostringstream os;
  io::write_samples_csv(os, s);
  return os.str();
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kUsage;
  if (dynamic_cast<const IngestionError*>(&e)) return kIngestion;
  if (dynamic_cast<const UnknownMaterialError*>(&e)) return kUsage;
  if (dynamic_cast<const LengthMismatchError*>(&e)) return kIngestion;
  if (dynamic_cast<const UnderdeterminedError*>(&e) ||
      dynamic_cast<const InsufficientBandsError*>(&e) || dynamic_cast<const SingularError*>(&e)) {
    return kFitFailure;
  }
  return kInternal;
}

// --- option echo ------------------------------------------------------------

namespace {
nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
}  // namespace

nlohmann::json to_json(const FitOptions& o) {
  return {{"input", o.inputs},
          {"material-sweeps", o.material_sweeps},
          {"reference-sweeps", o.reference_sweeps},
          {"material-class", o.material_class},
          {"material", o.material_name},
          {"thickness-m", opt(o.thickness_m)},
          {"model", o.model},
          {"delta-f", o.delta_f_ghz},
          {"window", o.window},
          {"seed", o.seed},
          {"train-frac", o.train_frac},
          {"weighted-regression", o.weighted_regression},
          {"out-dir", o.out_dir}};
}

nlohmann::json to_json(const PredictOptions& o) {
  return {{"material", o.material}, {"params", o.params},       {"thickness-m", opt(o.thickness_m)},
          {"freq-ghz", o.freq_ghz}, {"angle-deg", o.angle_deg}, {"output", o.output},
          {"out-dir", o.out_dir}};
}

nlohmann::json to_json(const EvalOptions& o) {
  return {{"params", o.params}, {"test", o.test}, {"level", o.level}, {"out-dir", o.out_dir}};
}

nlohmann::json to_json(const SynthOptions& o) {
  return {{"material", o.material},     {"thickness-m", opt(o.thickness_m)},
          {"noise", o.noise},           {"seed", o.seed},
          {"freq-grid", o.freq_grid},   {"angle-grid", o.angle_grid},
          {"output", o.output},         {"out-dir", o.out_dir}};
}

nlohmann::json to_json(const ExportOptions& o) {
  return {{"material", o.material},   {"params", o.params},          {"thickness-m", opt(o.thickness_m)},
          {"format", o.format},       {"freq-grid", o.freq_grid},    {"angle-grid", o.angle_grid},
          {"output", o.output},       {"out-dir", o.out_dir}};
}

nlohmann::json to_json(const MaterialsOptions& o) {
  return {{"json", o.json}, {"out-dir", o.out_dir}};
}

// --- commands ---------------------------------------------------------------

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  if (!o.thickness_m) throw UsageError("--thickness-m is required");
  if (!(*o.thickness_m > 0.0)) throw UsageError("--thickness-m must be positive");
  if (!(o.delta_f_ghz > 0.0)) throw UsageError("--delta-f must be positive");
  if (o.window < 1) throw UsageError("--window must be >= 1");
  if (!(o.train_frac > 0.0 && o.train_frac < 1.0)) throw UsageError("--train-frac must lie in (0, 1)");
  MaterialClass cls;
  io::ModelKind kind;
  try {
    cls = material_class_from_string(o.material_class);
    kind = io::model_kind_from_string(o.model);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }

  Dataset ds;
  ds.samples = load_fit_samples(o, err);
  ds.material = o.material_name;
  ds.thickness_m = *o.thickness_m;
  ds.cls = cls;
  ds.provenance = "measured";
  const SplitResult split = stratified_split(ds, o.train_frac, o.seed, o.delta_f_ghz);

  WfTrendConfig cfg;
  cfg.delta_f_ghz = o.delta_f_ghz;
  cfg.window = o.window;
  cfg.weighted_regression = o.weighted_regression;

  const fs::path dir = ensure_dir(o.out_dir);
  const io::TrendFile trend =
      kind == io::ModelKind::Epld
          ? run_fit(EpldModel{cls, *o.thickness_m, kTHz}, split, cfg, o, cls, dir, kind, err)
          : run_fit(EmpiricalModel{*o.thickness_m, kTHz}, split, cfg, o, cls, dir, kind, err);

  write_text(dir / "trend.json", io::to_json(trend).dump(2) + "\n");
  write_text(dir / "train.csv", samples_to_string(split.train.samples));
  write_text(dir / "test.csv", samples_to_string(split.test.samples));
  write_manifest(o.out_dir, "fit", to_json(o),
                 {"trend.json", "bands.csv", "train.csv", "test.csv"},
                 {{"split",
                   {{"train", split.train.samples.size()},
                    {"test", split.test.samples.size()},
                    {"small_strata", split.small_strata}}}});
  out << "fitted " << split.train.samples.size() << " training samples; trend written to "
      << (dir / "trend.json").string() << '\n';
  return kOk;
}

int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream& /*err*/) {
  const io::TrendFile model = resolve_model(o.material, o.params, o.thickness_m);
  const auto freqs = grid_arg(o.freq_ghz, "--freq-ghz");
  const auto angles = grid_arg(o.angle_deg, "--angle-deg");
  const std::string text = samples_to_string(predict_grid(model, freqs, angles));
  if (o.output.empty()) {
    out << text;
  } else {
    write_text(o.output, text);
  }
  write_manifest(o.out_dir, "predict", to_json(o),
                 o.output.empty() ? nlohmann::json::array({"<stdout>"}) : nlohmann::json::array({o.output}));
  return kOk;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& /*err*/) {
  if (o.params.empty()) throw UsageError("--params is required");
  if (o.test.empty()) throw UsageError("--test is required");
  if (!(o.level > 0.0 && o.level < 1.0)) throw UsageError("--level must lie in (0, 1)");
  Dataset test;
  test.samples = io::read_samples_csv(o.test).samples;

  std::vector<ModelEntry> entries;
  std::vector<io::TrendFile> models;
  models.reserve(o.params.size());
  for (const auto& p : o.params) models.push_back(io::read_trend_file(p));
  for (std::size_t i = 0; i < models.size(); ++i) {
    const io::TrendFile* m = &models[i];
    std::string name = io::to_string(m->kind);
    if (models.size() > 1) name += " [" + std::to_string(i + 1) + "] " + fs::path(o.params[i]).filename().string();
    entries.push_back({name, [m](const MeasurementSample& s) { return m->predict(s.f_ghz, s.theta_deg); }});
  }
  const ComparisonReport report = compare_models(test, entries, o.level);

  const fs::path dir = ensure_dir(o.out_dir);
  write_text(dir / "report.json", report_to_json(report).dump(2) + "\n");
  nlohmann::json outputs = {"report.json"};
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (!report.rows[i].ok) continue;
    const std::string name = report.rows.size() == 1 ? "cdf.csv" : "cdf_" + std::to_string(i + 1) + ".csv";
    write_text(dir / name, cdf_to_csv(abs_error_cdf(report.rows[i].predictions, report.truths)));
    outputs.push_back(name);
  }
  write_manifest(o.out_dir, "eval", to_json(o), outputs);
  out << report_to_text(report);
  for (const auto& row : report.rows) {
    if (!row.ok) return kInternal;
  }
  return kOk;
}

int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& /*err*/) {
  if (o.material.empty()) throw UsageError("--material is required");
  if (!(o.noise >= 0.0)) throw UsageError("--noise must be >= 0");
  const MaterialRecord& m = builtin_material(o.material);
  const double d = o.thickness_m.value_or(m.thickness_m);
  if (!(d > 0.0)) throw UsageError("--thickness-m must be positive");
  const Dataset ds = synthesize_dataset(m, d, grid_arg(o.freq_grid, "--freq-grid"),
                                        grid_arg(o.angle_grid, "--angle-grid"), o.noise, o.seed);
  const std::string text = samples_to_string(ds.samples);
  if (o.output.empty()) {
    out << text;
  } else {
    write_text(o.output, text);
  }
  write_manifest(o.out_dir, "synth", to_json(o),
                 o.output.empty() ? nlohmann::json::array({"<stdout>"}) : nlohmann::json::array({o.output}),
                 {{"rows", ds.samples.size()}});
  return kOk;
}

int cmd_export(const ExportOptions& o, std::ostream& out, std::ostream& /*err*/) {
  const io::TrendFile model = resolve_model(o.material, o.params, o.thickness_m);
  const auto freqs = grid_arg(o.freq_grid, "--freq-grid");
  const auto angles = grid_arg(o.angle_grid, "--angle-grid");
  std::ostringstream os;
  if (o.format == "rt-table") {
    // Frequency rows x angle columns; cell values use the same formatting as
    // `predict`, so the two agree exactly.
    os << "# schema: " << kRtTableSchema << '\n';
    os << "# material: " << model.material << '\n';
    os << "# model: " << io::to_string(model.kind) << '\n';
    os << "# thickness_m: " << io::format_double(model.thickness_m) << '\n';
    os << "freq_ghz";
    for (double th : angles) os << ",theta_" << io::format_double(th);
    os << '\n';
    for (double f : freqs) {
      os << io::format_double(f);
      for (double th : angles) os << ',' << io::format_double(model.predict(f, th));
      os << '\n';
    }
  } else if (o.format == "csv") {
    io::write_samples_csv(os, predict_grid(model, freqs, angles));
  } else {
    throw UsageError("unknown --format '" + o.format + "' (expected rt-table or csv)");
  }
  if (o.output.empty()) {
    out << os.str();
  } else {
    write_text(o.output, os.str());
  }
  write_manifest(o.out_dir, "export", to_json(o),
                 o.output.empty() ? nlohmann::json::array({"<stdout>"}) : nlohmann::json::array({o.output}),
                 {{"rows", freqs.size()}, {"columns", angles.size()}});
  return kOk;
}

int cmd_materials(const MaterialsOptions& o, std::ostream& out, std::ostream& /*err*/) {
  const auto& rows = builtin_materials();
  if (o.json) {
    out << io::materials_to_json(rows).dump(2) << '\n';
  } else {
    out << "# schema: " << io::kMaterialsSchema << '\n';
    out << std::left << std::setw(16) << "material" << std::setw(10) << "class" << std::right
        << std::setw(9) << "b1" << std::setw(9) << "k2" << std::setw(9) << "b2" << std::setw(9)
        << "k3" << std::setw(9) << "b3" << std::setw(9) << "k4" << std::setw(9) << "b4"
        << std::setw(8) << "rmse" << std::setw(8) << "bnd90" << std::setw(9) << "d_mm" << '\n';
    for (const auto& m : rows) {
      out << std::left << std::setw(16) << m.name << std::setw(10) << to_string(m.cls) << std::right
          << std::fixed << std::setprecision(4) << std::setw(9) << m.trend.b[0];
      for (int l = 1; l < 4; ++l) {
        if (m.trend.has(l)) {
          out << std::setw(9) << m.trend.k[l] << std::setw(9) << m.trend.b[l];
        } else {
          out << std::setw(9) << "-" << std::setw(9) << "-";
        }
      }
      out << std::setw(8) << m.reference_rmse << std::setw(8) << m.reference_bound90
          << std::setprecision(1) << std::setw(9) << m.thickness_m * 1e3 << '\n';
    }
    out.unsetf(std::ios::fixed);
  }
  write_manifest(o.out_dir, "materials", to_json(o), nlohmann::json::array({"<stdout>"}),
                 {{"rows", rows.size()}});
  return kOk;
}

}  // namespace thzrefl::app
