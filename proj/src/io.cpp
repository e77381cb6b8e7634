#include "residkit/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "residkit/errors.hpp"

namespace residkit {

namespace {

using nlohmann::json;

double get_param(const json& params, const char* name, const std::string& kind) {
  if (!params.contains(name))
    throw ParseError("distribution spec: kind '" + kind + "' needs parameter '" + name + "'");
  return params.at(name).get<double>();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ParseError(where + ": cannot parse number '" + s + "'");
  return v;
}

// Strips a trailing \r so CRLF files parse too.
std::string chomp(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::string fmt10(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

double round10(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(fmt10(x).c_str(), nullptr);
}

std::string file_digest(const std::string& path) {
  std::string bytes = read_file(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

ordered_json dist_to_json(const PredictiveDistribution& d) {
  ordered_json j;
  j["kind"] = d.kind_name();
  ordered_json p;
  std::visit(
      [&p](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, dist::Normal>) {
          p["mu"] = q.mu;
          p["sigma"] = q.sigma;
        } else if constexpr (std::is_same_v<T, dist::LogNormal>) {
          p["mu_log"] = q.mu_log;
          p["sigma_log"] = q.sigma_log;
        } else if constexpr (std::is_same_v<T, dist::Beta>) {
          p["a"] = q.a;
          p["b"] = q.b;
        } else if constexpr (std::is_same_v<T, dist::Gamma>) {
          p["shape"] = q.shape;
          p["rate"] = q.rate;
        } else if constexpr (std::is_same_v<T, dist::Exponential>) {
          p["rate"] = q.rate;
        } else if constexpr (std::is_same_v<T, dist::Uniform>) {
          p["lo"] = q.lo;
          p["hi"] = q.hi;
        } else if constexpr (std::is_same_v<T, dist::Bernoulli>) {
          p["p"] = q.p;
        } else if constexpr (std::is_same_v<T, dist::Binomial>) {
          p["n"] = q.n;
          p["p"] = q.p;
        } else if constexpr (std::is_same_v<T, dist::Poisson>) {
          p["lambda"] = q.lambda;
        } else if constexpr (std::is_same_v<T, dist::PointMass>) {
          p["c"] = q.c;
        } else if constexpr (std::is_same_v<T, dist::Empirical>) {
          p["draws"] = q.draws;
        }
      },
      d.params());
  j["params"] = std::move(p);
  return j;
}

PredictiveDistribution dist_from_json(const json& j) {
  if (!j.contains("kind")) throw ParseError("distribution spec: missing 'kind'");
  std::string kind = j.at("kind").get<std::string>();
  json params = j.value("params", json::object());
  if (kind == "Normal")
    return PredictiveDistribution::normal(get_param(params, "mu", kind),
                                          get_param(params, "sigma", kind));
  if (kind == "LogNormal")
    return PredictiveDistribution::log_normal(get_param(params, "mu_log", kind),
                                              get_param(params, "sigma_log", kind));
  if (kind == "Beta")
    return PredictiveDistribution::beta(get_param(params, "a", kind),
                                        get_param(params, "b", kind));
  if (kind == "Gamma")
    return PredictiveDistribution::gamma(get_param(params, "shape", kind),
                                         get_param(params, "rate", kind));
  if (kind == "Exponential")
    return PredictiveDistribution::exponential(get_param(params, "rate", kind));
  if (kind == "Uniform")
    return PredictiveDistribution::uniform(get_param(params, "lo", kind),
                                           get_param(params, "hi", kind));
  if (kind == "Bernoulli")
    return PredictiveDistribution::bernoulli(get_param(params, "p", kind));
  if (kind == "Binomial")
    return PredictiveDistribution::binomial(
        static_cast<int>(get_param(params, "n", kind)), get_param(params, "p", kind));
  if (kind == "Poisson")
    return PredictiveDistribution::poisson(get_param(params, "lambda", kind));
  if (kind == "PointMass")
    return PredictiveDistribution::point_mass_at(get_param(params, "c", kind));
  if (kind == "Empirical") {
    if (params.contains("draws"))
      return PredictiveDistribution::empirical(params.at("draws").get<std::vector<double>>());
    if (params.contains("draws_csv")) {
      auto all = load_draws_csv(params.at("draws_csv").get<std::string>());
      if (params.contains("unit")) {
        auto it = all.find(params.at("unit").get<std::string>());
        if (it == all.end())
          throw ParseError("Empirical: unit '" + params.at("unit").get<std::string>() +
                           "' not found in draws CSV");
        return it->second;
      }
      if (all.size() != 1)
        throw ParseError("Empirical: draws CSV holds multiple units; give 'unit'");
      return all.begin()->second;
    }
    throw ParseError("Empirical: need 'draws' array or 'draws_csv' reference");
  }
  throw ParseError("distribution spec: unknown kind '" + kind + "'");
}

PredictiveDistribution load_dist_spec(const std::string& path_or_literal) {
  std::string text = path_or_literal;
  if (text.empty()) throw ParseError("empty distribution spec");
  if (text.front() != '{') text = read_file(path_or_literal);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("distribution spec: " + std::string(e.what()));
  }
  return dist_from_json(j);
}

std::map<std::string, PredictiveDistribution> load_dists(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return load_draws_csv(path);
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path + ": expected an object of unit -> spec");
  std::map<std::string, PredictiveDistribution> out;
  for (auto it = j.begin(); it != j.end(); ++it) out.emplace(it.key(), dist_from_json(*it));
  return out;
}

std::map<std::string, PredictiveDistribution> load_draws_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  int line_no = 0;
  std::map<std::string, std::vector<double>> draws;
  // Long format keeps ragged draw counts per unit workable.
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (line_no == 1) {
      if (fields.size() != 2 || fields[0] != "unit_id" || fields[1] != "draw")
        throw ParseError(path + ":1: expected header 'unit_id,draw'");
      continue;
    }
    if (fields.size() != 2)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 2 fields");
    draws[fields[0]].push_back(
        parse_double(fields[1], path + ":" + std::to_string(line_no)));
  }
  std::map<std::string, PredictiveDistribution> out;
  for (auto& [unit, v] : draws) {
    if (v.size() < 2)
      throw ParseError(path + ": unit '" + unit + "' has fewer than 2 draws");
    out.emplace(unit, PredictiveDistribution::empirical(std::move(v)));
  }
  return out;
}

std::vector<std::pair<std::string, double>> load_obs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  int line_no = 0;
  std::vector<std::pair<std::string, double>> out;
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (line_no == 1) {
      if (fields.size() != 2 || fields[0] != "unit_id" || fields[1] != "y")
        throw ParseError(path + ":1: expected header 'unit_id,y'");
      continue;
    }
    if (fields.size() != 2)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 2 fields");
    out.emplace_back(fields[0], parse_double(fields[1], path + ":" + std::to_string(line_no)));
  }
  return out;
}

std::string residuals_to_csv(const std::vector<ResidualRecord>& records) {
  std::ostringstream out;
  out << "unit_id,y,percentile,r_star,r_ddag,r_star_truncated,r_ddag_truncated\n";
  for (const auto& r : records)
    out << r.unit_id << ',' << fmt10(r.y) << ',' << fmt10(r.percentile) << ','
        << fmt10(r.r_star) << ',' << fmt10(r.r_ddag) << ',' << (r.r_star_truncated ? 1 : 0)
        << ',' << (r.r_ddag_truncated ? 1 : 0) << '\n';
  return out.str();
}

std::vector<ResidualRecord> residuals_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  int line_no = 0;
  std::vector<ResidualRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (line_no == 1) {
      if (fields.size() != 7 || fields[0] != "unit_id")
        throw ParseError(path + ":1: expected residual-record header");
      continue;
    }
    if (fields.size() != 7)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 7 fields");
    std::string where = path + ":" + std::to_string(line_no);
    ResidualRecord r;
    r.unit_id = fields[0];
    r.y = parse_double(fields[1], where);
    r.percentile = parse_double(fields[2], where);
    r.r_star = parse_double(fields[3], where);
    r.r_ddag = parse_double(fields[4], where);
    r.r_star_truncated = fields[5] == "1";
    r.r_ddag_truncated = fields[6] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

ordered_json residuals_to_json(const std::vector<ResidualRecord>& records) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : records) {
    ordered_json j;
    j["unit_id"] = r.unit_id;
    j["y"] = round10(r.y);
    j["percentile"] = round10(r.percentile);
    j["r_star"] = round10(r.r_star);
    j["r_ddag"] = round10(r.r_ddag);
    j["r_star_truncated"] = r.r_star_truncated;
    j["r_ddag_truncated"] = r.r_ddag_truncated;
    arr.push_back(std::move(j));
  }
  return arr;
}

ordered_json calibration_report_to_json(const CalibrationReport& rep, const TestSpec& spec,
                                        const PredictiveDistribution& f,
                                        const PredictiveDistribution& d) {
  ordered_json j;
  j["side"] = to_string(spec.side);
  j["alpha"] = round10(spec.alpha);
  j["f"] = dist_to_json(f);
  j["d"] = dist_to_json(d);
  j["effective_alpha"] = round10(rep.effective_alpha);
  j["classification"] = to_string(rep.classification);
  j["calibrated_alpha"] = round10(rep.calibrated_alpha);
  j["pow_star_raw"] = round10(rep.pow_star_raw);
  j["pow_star_calibrated"] = round10(rep.pow_star_calibrated);
  j["pow_ddag"] = round10(rep.pow_ddag);
  return j;
}

ordered_json diagnostics_report_to_json(const DiagnosticsReport& rep, const TestSpec& spec) {
  ordered_json j;
  j["n_units"] = rep.n_units;
  j["n_truncated"] = rep.n_truncated;
  j["ks_statistic"] = round10(rep.ks_statistic);
  j["ks_pvalue"] = round10(rep.ks_pvalue);
  j["side"] = to_string(spec.side);
  j["alpha"] = round10(spec.alpha);
  j["correction"] = to_string(rep.correction);
  ordered_json arr = ordered_json::array();
  for (const auto& o : rep.outliers) {
    ordered_json e;
    e["unit_id"] = o.unit_id;
    e["residual"] = round10(o.residual);
    e["raw_pvalue"] = round10(o.raw_pvalue);
    e["adjusted_pvalue"] = round10(o.adjusted_pvalue);
    e["rejected"] = o.rejected;
    arr.push_back(std::move(e));
  }
  j["outliers"] = std::move(arr);
  return j;
}

std::string qq_to_csv(const PanelData& p) {
  std::ostringstream out;
  out << "theoretical_quantile,sample_quantile\n";
  for (const auto& row : p.qq) out << fmt10(row[0]) << ',' << fmt10(row[1]) << '\n';
  return out.str();
}

std::string density_to_csv(const PanelData& p) {
  std::ostringstream out;
  out << "x,kde,ref_normal_pdf\n";
  for (const auto& row : p.density)
    out << fmt10(row[0]) << ',' << fmt10(row[1]) << ',' << fmt10(row[2]) << '\n';
  return out.str();
}

std::string ecdf_to_csv(const PanelData& p) {
  std::ostringstream out;
  out << "x,ecdf,ref_normal_cdf\n";
  for (const auto& row : p.ecdf)
    out << fmt10(row[0]) << ',' << fmt10(row[1]) << ',' << fmt10(row[2]) << '\n';
  return out.str();
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig cfg;
  if (!j.is_object()) throw ParseError("sim config: expected a JSON object");
  auto geti = [&](const char* k, int dflt) { return j.value(k, dflt); };
  auto getd = [&](const char* k, double dflt) { return j.value(k, dflt); };
  cfg.K = geti("K", cfg.K);
  cfg.beta0 = getd("beta0", cfg.beta0);
  cfg.beta1 = getd("beta1", cfg.beta1);
  cfg.beta2 = getd("beta2", cfg.beta2);
  cfg.b_true = getd("b_true", cfg.b_true);
  cfg.n_iter = geti("n_iter", cfg.n_iter);
  cfg.n_burnin = geti("n_burnin", cfg.n_burnin);
  cfg.n_chains = geti("n_chains", cfg.n_chains);
  cfg.n_replications = geti("n_replications", cfg.n_replications);
  cfg.alpha_nominal = getd("alpha_nominal", cfg.alpha_nominal);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.sample_size_N = geti("sample_size_N", cfg.sample_size_N);
  cfg.validate();
  return cfg;
}

std::string study_report_to_csv(const StudyReport& report) {
  std::ostringstream out;
  out << "hypothesis,N,rate_star,se_star,rate_star_calibrated,se_star_calibrated,"
         "rate_ddag,se_ddag,mean_calibrated_alpha,se_calibrated_alpha,"
         "n_replications,n_failed,n_flagged\n";
  for (const auto& c : report.cells)
    out << to_string(c.hypothesis) << ',' << c.sample_size << ',' << fmt10(c.rate_star) << ','
        << fmt10(c.se_star) << ',' << fmt10(c.rate_star_calibrated) << ','
        << fmt10(c.se_star_calibrated) << ',' << fmt10(c.rate_ddag) << ',' << fmt10(c.se_ddag)
        << ',' << fmt10(c.mean_calibrated_alpha) << ',' << fmt10(c.se_calibrated_alpha) << ','
        << c.n_replications << ',' << c.n_failed << ',' << c.n_flagged << '\n';
  return out.str();
}

}  // namespace residkit
