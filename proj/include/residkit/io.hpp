#ifndef RESIDKIT_IO_HPP
#define RESIDKIT_IO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "residkit/calibration.hpp"
#include "residkit/diagnostics.hpp"
#include "residkit/distribution.hpp"
#include "residkit/residuals.hpp"
#include "residkit/simulation.hpp"

namespace residkit {

using ordered_json = nlohmann::ordered_json;

// All floating-point output goes through 10 significant digits.
std::string fmt10(double x);
double round10(double x);

// FNV-1a 64-bit digest of a file's bytes, as hex.
std::string file_digest(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Distribution spec: {"kind": "...", "params": {...}}. Empirical accepts
// either an inline "draws" array or {"draws_csv": path, "unit": id}
// referencing a long-format draws file.
ordered_json dist_to_json(const PredictiveDistribution& d);
PredictiveDistribution dist_from_json(const nlohmann::json& j);
PredictiveDistribution load_dist_spec(const std::string& path_or_literal);

// Map unit_id -> distribution, either a JSON object of specs or a
// long-format draws CSV (header unit_id,draw).
std::map<std::string, PredictiveDistribution> load_dists(const std::string& path);
std::map<std::string, PredictiveDistribution> load_draws_csv(const std::string& path);

// Observations CSV, header unit_id,y.
std::vector<std::pair<std::string, double>> load_obs_csv(const std::string& path);

std::string residuals_to_csv(const std::vector<ResidualRecord>& records);
std::vector<ResidualRecord> residuals_from_csv(const std::string& path);
ordered_json residuals_to_json(const std::vector<ResidualRecord>& records);

ordered_json calibration_report_to_json(const CalibrationReport& rep, const TestSpec& spec,
                                        const PredictiveDistribution& f,
                                        const PredictiveDistribution& d);

ordered_json diagnostics_report_to_json(const DiagnosticsReport& rep, const TestSpec& spec);

std::string qq_to_csv(const PanelData& p);
std::string density_to_csv(const PanelData& p);
std::string ecdf_to_csv(const PanelData& p);

SimConfig sim_config_from_json(const nlohmann::json& j);
std::string study_report_to_csv(const StudyReport& report);

}  // namespace residkit

#endif
