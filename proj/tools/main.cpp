// residkit command-line front end: residuals, calibrate, power, diagnose,
// simulate. Every command writes a manifest.json (version, seed, input
// digests) next to its outputs and echoes it to stdout.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "residkit/calibration.hpp"
#include "residkit/diagnostics.hpp"
#include "residkit/errors.hpp"
#include "residkit/io.hpp"
#include "residkit/residuals.hpp"
#include "residkit/simulation.hpp"

namespace fs = std::filesystem;
using namespace residkit;

namespace {

const char* kVersion = "0.1.0";

TestSide parse_side(const std::string& s) {
  if (s == "right") return TestSide::Right;
  if (s == "left") return TestSide::Left;
  if (s == "two") return TestSide::TwoSided;
  throw ParseError("unknown side '" + s + "' (expected right|left|two)");
}

Correction parse_correction(const std::string& s) {
  if (s == "none") return Correction::None;
  if (s == "bonferroni") return Correction::Bonferroni;
  if (s == "bh") return Correction::BH;
  throw ParseError("unknown correction '" + s + "' (expected none|bonferroni|bh)");
}

struct Manifest {
  std::vector<std::string> command;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  bool has_seed = false;

  void add_input(const std::string& path) { inputs.emplace_back(path, file_digest(path)); }

  ordered_json to_json() const {
    ordered_json j;
    j["tool"] = "residkit";
    j["version"] = kVersion;
    j["command"] = command;
    if (has_seed) j["seed"] = seed;
    ordered_json ins = ordered_json::array();
    for (const auto& [path, digest] : inputs) {
      ordered_json e;
      e["path"] = path;
      e["digest"] = digest;
      ins.push_back(std::move(e));
    }
    j["inputs"] = std::move(ins);
    j["outputs"] = outputs;
    return j;
  }
};

void emit_manifest(Manifest& m, const fs::path& out_dir) {
  std::string text = m.to_json().dump(2) + "\n";
  write_file((out_dir / "manifest.json").string(), text);
  std::cout << text;
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

int cmd_residuals(const std::string& obs_path, const std::string& dists_path,
                  double trunc_bound, const std::string& out, const std::string& format) {
  auto obs = load_obs_csv(obs_path);
  auto dists = load_dists(dists_path);
  auto batch = batch_residuals(obs, dists, trunc_bound);

  fs::path dir = prepare_out_dir(out);
  Manifest m;
  m.command = {"residuals", obs_path, dists_path};
  m.add_input(obs_path);
  m.add_input(dists_path);

  std::string res_name = format == "json" ? "residuals.json" : "residuals.csv";
  if (format == "json")
    write_file((dir / res_name).string(), residuals_to_json(batch.records).dump(2) + "\n");
  else
    write_file((dir / res_name).string(), residuals_to_csv(batch.records));

  std::size_t n_trunc = 0;
  for (const auto& r : batch.records)
    if (r.r_star_truncated || r.r_ddag_truncated) ++n_trunc;
  ordered_json summary;
  summary["n_observations"] = obs.size();
  summary["n_records"] = batch.records.size();
  summary["n_truncated"] = n_trunc;
  summary["trunc_bound"] = round10(trunc_bound);
  ordered_json errs = ordered_json::array();
  for (const auto& e : batch.errors) {
    ordered_json o;
    o["unit_id"] = e.unit_id;
    o["error"] = e.message;
    errs.push_back(std::move(o));
  }
  summary["errors"] = std::move(errs);
  write_file((dir / "summary.json").string(), summary.dump(2) + "\n");

  m.outputs = {res_name, "summary.json"};
  emit_manifest(m, dir);
  return batch.errors.empty() ? 0 : 2;
}

int cmd_calibrate(const std::string& f_spec, const std::string& d_spec, double alpha,
                  const std::string& side, const std::string& out) {
  PredictiveDistribution f = load_dist_spec(f_spec);
  PredictiveDistribution d = load_dist_spec(d_spec);
  TestSpec spec{parse_side(side), alpha};
  CalibrationReport rep = full_report(f, d, spec);

  fs::path dir = prepare_out_dir(out);
  write_file((dir / "report.json").string(),
             calibration_report_to_json(rep, spec, f, d).dump(2) + "\n");
  Manifest m;
  m.command = {"calibrate", f_spec, d_spec, "--alpha", fmt10(alpha), "--side", side};
  if (f_spec.front() != '{') m.add_input(f_spec);
  if (d_spec.front() != '{') m.add_input(d_spec);
  m.outputs = {"report.json"};
  emit_manifest(m, dir);
  return 0;
}

int cmd_power(const std::string& f_spec, const std::string& d_spec, double alpha,
              const std::string& side, const std::string& out) {
  PredictiveDistribution f = load_dist_spec(f_spec);
  PredictiveDistribution d = load_dist_spec(d_spec);
  TestSpec spec{parse_side(side), alpha};
  double a_star = calibrated_alpha(d, spec);

  ordered_json j;
  j["side"] = side;
  j["alpha"] = round10(alpha);
  j["f"] = dist_to_json(f);
  j["d"] = dist_to_json(d);
  j["pow_star_raw"] = round10(power_standard(f, d, spec));
  j["pow_star_calibrated"] = round10(power_standard(f, d, TestSpec{spec.side, a_star}));
  j["pow_ddag"] = round10(power_percentile(f, d, spec));
  j["calibrated_alpha"] = round10(a_star);

  fs::path dir = prepare_out_dir(out);
  write_file((dir / "power.json").string(), j.dump(2) + "\n");
  Manifest m;
  m.command = {"power", f_spec, d_spec, "--alpha", fmt10(alpha), "--side", side};
  if (f_spec.front() != '{') m.add_input(f_spec);
  if (d_spec.front() != '{') m.add_input(d_spec);
  m.outputs = {"power.json"};
  emit_manifest(m, dir);
  return 0;
}

int cmd_diagnose(const std::string& residuals_path, const std::string& which, double alpha,
                 const std::string& side, const std::string& correction,
                 const std::string& out) {
  auto records = residuals_from_csv(residuals_path);
  WhichResidual w = which == "star" ? WhichResidual::Star : WhichResidual::Ddag;
  TestSpec spec{parse_side(side), alpha};
  DiagnosticsReport rep = diagnose(records, w, spec, parse_correction(correction));

  fs::path dir = prepare_out_dir(out);
  write_file((dir / "diagnostics.json").string(),
             diagnostics_report_to_json(rep, spec).dump(2) + "\n");
  write_file((dir / "qq.csv").string(), qq_to_csv(rep.panels));
  write_file((dir / "density.csv").string(), density_to_csv(rep.panels));
  write_file((dir / "ecdf.csv").string(), ecdf_to_csv(rep.panels));

  Manifest m;
  m.command = {"diagnose", residuals_path, "--which", which, "--alpha", fmt10(alpha),
               "--side",   side,           "--correction", correction};
  m.add_input(residuals_path);
  m.outputs = {"diagnostics.json", "qq.csv", "density.csv", "ecdf.csv"};
  emit_manifest(m, dir);
  return 0;
}

int cmd_simulate(const std::string& config_path, int replications_override,
                 long long seed_override, const std::string& out_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(config_path + ": " + e.what());
  }
  SimConfig cfg = sim_config_from_json(j);
  if (replications_override >= 0) cfg.n_replications = replications_override;
  if (seed_override >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed_override);
  cfg.validate();

  fs::path dir = prepare_out_dir(out_dir);
  Manifest m;
  m.command = {"simulate", config_path};
  m.add_input(config_path);
  m.seed = cfg.master_seed;
  m.has_seed = true;

  StudyReport report = run_study(cfg);
  write_file((dir / "study.csv").string(), study_report_to_csv(report));
  m.outputs.push_back("study.csv");

  // Figure panels from a single K-unit replication, both hypotheses x both
  // residual kinds.
  for (Hypothesis hyp : {Hypothesis::Null, Hypothesis::Alternative}) {
    auto records = run_figure_replication(cfg, hyp);
    for (WhichResidual w : {WhichResidual::Star, WhichResidual::Ddag}) {
      PanelData panels = panel_data(records, w);
      std::string stem = to_string(hyp) + "_" + to_string(w) + "_";
      write_file((dir / (stem + "qq.csv")).string(), qq_to_csv(panels));
      write_file((dir / (stem + "density.csv")).string(), density_to_csv(panels));
      write_file((dir / (stem + "ecdf.csv")).string(), ecdf_to_csv(panels));
      m.outputs.push_back(stem + "qq.csv");
      m.outputs.push_back(stem + "density.csv");
      m.outputs.push_back(stem + "ecdf.csv");
    }
  }
  emit_manifest(m, dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"residkit: percentile-based residuals and calibrated model assessment"};
  app.require_subcommand(1);

  std::string obs_path, dists_path, f_spec, d_spec, residuals_path, config_path;
  std::string out = ".";
  std::string side = "right", which = "ddag", correction = "none", format = "csv";
  double alpha = 0.05, trunc_bound = kDefaultTruncBound;
  int replications = -1;
  long long seed = -1;

  auto* c_res = app.add_subcommand("residuals", "Residuals for observations vs predictives");
  c_res->add_option("obs", obs_path, "Observations CSV (unit_id,y)")->required();
  c_res->add_option("dists", dists_path, "Distribution map JSON or draws CSV (unit_id,draw)")
      ->required();
  c_res->add_option("--trunc-bound", trunc_bound, "Residual truncation bound");
  c_res->add_option("--out", out, "Output directory");
  c_res->add_option("--format", format, "residuals output format (csv|json)");

  auto* c_cal = app.add_subcommand("calibrate", "Calibration report for (f, d)");
  c_cal->add_option("f", f_spec, "True-law spec (JSON literal or path)")->required();
  c_cal->add_option("d", d_spec, "Working-law spec (JSON literal or path)")->required();
  c_cal->add_option("--alpha", alpha, "Nominal level");
  c_cal->add_option("--side", side, "Test side (right|left|two)");
  c_cal->add_option("--out", out, "Output directory");

  auto* c_pow = app.add_subcommand("power", "Raw/calibrated/percentile power for (f, d)");
  c_pow->add_option("f", f_spec, "True-law spec")->required();
  c_pow->add_option("d", d_spec, "Working-law spec")->required();
  c_pow->add_option("--alpha", alpha, "Nominal level");
  c_pow->add_option("--side", side, "Test side (right|left|two)");
  c_pow->add_option("--out", out, "Output directory");

  auto* c_diag = app.add_subcommand("diagnose", "Outlier test, KS check, figure panels");
  c_diag->add_option("residuals", residuals_path, "Residuals CSV from the residuals command")
      ->required();
  c_diag->add_option("--which", which, "Residual kind (star|ddag)");
  c_diag->add_option("--alpha", alpha, "Nominal level");
  c_diag->add_option("--side", side, "Test side (right|left|two)");
  c_diag->add_option("--correction", correction, "Multiple-testing correction (none|bonferroni|bh)");
  c_diag->add_option("--out", out, "Output directory");

  auto* c_sim = app.add_subcommand("simulate", "Replicated beta-regression study");
  c_sim->add_option("config", config_path, "Study config JSON")->required();
  c_sim->add_option("--replications", replications, "Override n_replications");
  c_sim->add_option("--seed", seed, "Override master seed");
  c_sim->add_option("--out-dir", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_res) return cmd_residuals(obs_path, dists_path, trunc_bound, out, format);
    if (*c_cal) return cmd_calibrate(f_spec, d_spec, alpha, side, out);
    if (*c_pow) return cmd_power(f_spec, d_spec, alpha, side, out);
    if (*c_diag) return cmd_diagnose(residuals_path, which, alpha, side, correction, out);
    if (*c_sim) return cmd_simulate(config_path, replications, seed, out);
  } catch (const std::exception& e) {
    std::cerr << "residkit: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
