// thzrefl: fit, evaluate and export terahertz reflection models.

#include <iostream>

#include "CLI11.hpp"
#include "app.hpp"

using namespace thzrefl::app;

namespace {

void add_out_dir(CLI::App* cmd, std::string& dir, const char* what) {
  cmd->add_option("--out-dir", dir, what)->capture_default_str();
}

void add_model_source(CLI::App* cmd, std::string& material, std::string& params,
                      std::optional<double>& thickness) {
  auto* m = cmd->add_option("--material", material, "built-in material name");
  auto* p = cmd->add_option("--params", params, "trend file written by `fit`");
  m->excludes(p);
  cmd->add_option("--thickness-m", thickness, "override sample thickness [m]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Terahertz reflection model fitting (SLI-EPLD) and export"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a TOML/INI file");
  app.set_version_flag("--version", "thzrefl 0.1.0");

  FitOptions fit;
  auto* c_fit = app.add_subcommand("fit", "fit per-band parameters and their frequency trend");
  c_fit->add_option("--input,-i", fit.inputs, "pre-ratioed CSV (freq_ghz,angle_deg,gamma); repeatable");
  c_fit->add_option("--material-sweeps", fit.material_sweeps, "raw material sweep CSV (freq_ghz,angle_deg,s21_mag)");
  c_fit->add_option("--reference-sweeps", fit.reference_sweeps, "raw metal-reference sweep CSV");
  c_fit->add_option("--material-class", fit.material_class, "non-metal | metal")->capture_default_str();
  c_fit->add_option("--material-name", fit.material_name, "label stored in the trend file");
  c_fit->add_option("--thickness-m", fit.thickness_m, "sample thickness [m]");
  c_fit->add_option("--model", fit.model, "sli-epld | sli-empirical")->capture_default_str();
  c_fit->add_option("--delta-f", fit.delta_f_ghz, "sub-band width [GHz]")->capture_default_str();
  c_fit->add_option("--window", fit.window, "sliding-window length")->capture_default_str();
  c_fit->add_option("--seed", fit.seed, "train/test split seed")->envname("THZREFL_SEED")->capture_default_str();
  c_fit->add_option("--train-frac", fit.train_frac, "training fraction")->capture_default_str();
  c_fit->add_flag("--weighted-regression", fit.weighted_regression, "weight bands by 1/rmse in the trend regression");
  add_out_dir(c_fit, fit.out_dir, "directory for trend.json, bands.csv, splits and manifest");

  PredictOptions pred;
  auto* c_pred = app.add_subcommand("predict", "evaluate reflection magnitude");
  add_model_source(c_pred, pred.material, pred.params, pred.thickness_m);
  c_pred->add_option("--freq-ghz", pred.freq_ghz, "value or start:step:end")->capture_default_str();
  c_pred->add_option("--angle-deg", pred.angle_deg, "value or start:step:end")->capture_default_str();
  c_pred->add_option("--output,-o", pred.output, "CSV path (default: stdout)");
  add_out_dir(c_pred, pred.out_dir, "directory for the run manifest");

  EvalOptions ev;
  auto* c_eval = app.add_subcommand("eval", "score one or more trend files on a test CSV");
  c_eval->add_option("--params", ev.params, "trend file; repeat to compare models")->required();
  c_eval->add_option("--test", ev.test, "test CSV (freq_ghz,angle_deg,gamma)")->required();
  c_eval->add_option("--level", ev.level, "confidence level of the error bound")->capture_default_str();
  add_out_dir(c_eval, ev.out_dir, "directory for report.json, cdf.csv and manifest");

  SynthOptions syn;
  auto* c_syn = app.add_subcommand("synth", "generate a synthetic dataset from a built-in material");
  c_syn->add_option("--material", syn.material, "built-in material name")->required();
  c_syn->add_option("--thickness-m", syn.thickness_m, "override sample thickness [m]");
  c_syn->add_option("--noise", syn.noise, "Gaussian noise sigma")->capture_default_str();
  c_syn->add_option("--seed", syn.seed, "noise seed")->envname("THZREFL_SEED")->capture_default_str();
  c_syn->add_option("--freq-grid", syn.freq_grid, "start:step:end [GHz]")->capture_default_str();
  c_syn->add_option("--angle-grid", syn.angle_grid, "start:step:end [deg]")->capture_default_str();
  c_syn->add_option("--output,-o", syn.output, "CSV path (default: stdout)");
  add_out_dir(c_syn, syn.out_dir, "directory for the run manifest");

  ExportOptions exp;
  auto* c_exp = app.add_subcommand("export", "write a frequency x angle lookup table");
  add_model_source(c_exp, exp.material, exp.params, exp.thickness_m);
  c_exp->add_option("--format", exp.format, "rt-table | csv")->capture_default_str();
  c_exp->add_option("--freq-grid", exp.freq_grid, "start:step:end [GHz]")->capture_default_str();
  c_exp->add_option("--angle-grid", exp.angle_grid, "start:step:end [deg]")->capture_default_str();
  c_exp->add_option("--output,-o", exp.output, "output path (default: stdout)");
  add_out_dir(c_exp, exp.out_dir, "directory for the run manifest");

  MaterialsOptions mats;
  auto* c_mat = app.add_subcommand("materials", "list the built-in material table");
  c_mat->add_flag("--json", mats.json, "emit JSON instead of a text table");
  add_out_dir(c_mat, mats.out_dir, "directory for the run manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  auto& out = std::cout;
  auto& err = std::cerr;
  if (*c_fit) return run([&] { return cmd_fit(fit, out, err); }, err);
  if (*c_pred) return run([&] { return cmd_predict(pred, out, err); }, err);
  if (*c_eval) return run([&] { return cmd_eval(ev, out, err); }, err);
  if (*c_syn) return run([&] { return cmd_synth(syn, out, err); }, err);
  if (*c_exp) return run([&] { return cmd_export(exp, out, err); }, err);
  if (*c_mat) return run([&] { return cmd_materials(mats, out, err); }, err);
  return kUsage;
}
