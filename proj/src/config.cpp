#include "vasifit/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vasifit {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& block,
                    const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key)) {
      throw ConfigError("unknown key '" + block + "." + key + "'");
    }
  }
}

Matrix parse_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError("'" + field + "' must be an array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw ConfigError("'" + field + "' rows have unequal lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        throw ConfigError("'" + field + "' must be numeric");
      }
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

Vector parse_vector(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("'" + field + "' must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("'" + field + "' must be numeric");
    v[i] = j[i].get<double>();
  }
  return v;
}

template <typename T>
void read_field(const json& obj, const std::string& key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("field '" + key + "' has the wrong type");
    }
  }
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

McConfig RunConfig::to_mc_config() const {
  McConfig mc;
  mc.params = model;
  mc.spec = noise;
  mc.replications = replications;
  mc.n_steps = n_steps;
  mc.h = h;
  mc.cfg = estimation;
  mc.master_seed = seed;
  mc.workers = workers;
  if (r0) mc.r0 = *r0;
  return mc;
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(root, "",
                 {"model", "noise", "estimation", "simulation", "mc", "data"});

  RunConfig cfg;

  const json noise = root.value("noise", json::object());
  reject_unknown(noise, "noise", {"kind", "d", "hurst", "jump_rate",
                                  "jump_std"});
  std::string kind = "brownian";
  read_field(noise, "kind", kind);
  cfg.noise.kind = noise_kind_from_string(kind);
  read_field(noise, "d", cfg.noise.d);
  read_field(noise, "hurst", cfg.noise.hurst);
  read_field(noise, "jump_rate", cfg.noise.jump_rate);
  read_field(noise, "jump_std", cfg.noise.jump_std);
  cfg.noise.validate();
  const int d = cfg.noise.d;

  const json model = root.value("model", json::object());
  reject_unknown(model, "model", {"theta", "b", "sigma_diag"});
  cfg.model.theta = Matrix::Identity(d, d);
  cfg.model.b = Vector::Zero(d);
  cfg.model.sigma = Matrix::Identity(d, d);
  if (model.contains("theta")) {
    cfg.model.theta = parse_matrix(model.at("theta"), "model.theta");
  }
  if (model.contains("b")) {
    cfg.model.b = parse_vector(model.at("b"), "model.b");
  }
  if (model.contains("sigma_diag")) {
    const Vector sd = parse_vector(model.at("sigma_diag"), "model.sigma_diag");
    cfg.model.sigma = Matrix(sd.asDiagonal());
  }
  cfg.model.validate();
  if (cfg.model.d() != d) {
    throw ConfigError("model dimension does not match noise.d");
  }

  const json est = root.value("estimation", json::object());
  reject_unknown(est, "estimation",
                 {"t_upper", "lag_step", "qv_window", "clip_eps", "care_tol"});
  read_field(est, "t_upper", cfg.estimation.t_upper);
  read_field(est, "lag_step", cfg.estimation.lag_step);
  read_field(est, "clip_eps", cfg.estimation.clip_eps);
  read_field(est, "care_tol", cfg.estimation.care_tol);
  if (est.contains("qv_window")) {
    const std::string w = est.at("qv_window").get<std::string>();
    if (w == "all_increments") {
      cfg.estimation.qv_window = QvWindow::all_increments;
    } else if (w == "unit_interval") {
      cfg.estimation.qv_window = QvWindow::unit_interval;
    } else {
      throw ConfigError("estimation.qv_window must be 'all_increments' or "
                        "'unit_interval'");
    }
  }
  if (cfg.estimation.t_upper <= 0.0) {
    throw ConfigError("estimation.t_upper must be positive");
  }

  const json sim = root.value("simulation", json::object());
  reject_unknown(sim, "simulation", {"n_steps", "h", "seed", "r0"});
  long long n_steps = cfg.n_steps;
  read_field(sim, "n_steps", n_steps);
  cfg.n_steps = n_steps;
  read_field(sim, "h", cfg.h);
  read_field(sim, "seed", cfg.seed);
  if (sim.contains("r0")) cfg.r0 = parse_vector(sim.at("r0"), "simulation.r0");
  if (cfg.n_steps < 1) throw ConfigError("simulation.n_steps must be >= 1");
  if (cfg.h <= 0.0) throw ConfigError("simulation.h must be positive");
  if (cfg.r0 && cfg.r0->size() != d) {
    throw ConfigError("simulation.r0 dimension does not match noise.d");
  }

  const json mc = root.value("mc", json::object());
  reject_unknown(mc, "mc", {"replications", "workers"});
  read_field(mc, "replications", cfg.replications);
  read_field(mc, "workers", cfg.workers);
  if (cfg.replications < 1) throw ConfigError("mc.replications must be >= 1");
  if (cfg.workers < 1) throw ConfigError("mc.workers must be >= 1");

  const json data = root.value("data", json::object());
  reject_unknown(data, "data", {"date_column", "value_columns", "h",
                                "holdout_fraction", "min_rows"});
  read_field(data, "date_column", cfg.date_column);
  read_field(data, "value_columns", cfg.value_columns);
  read_field(data, "h", cfg.data_h);
  read_field(data, "holdout_fraction", cfg.holdout_fraction);
  read_field(data, "min_rows", cfg.min_rows);
  if (cfg.data_h <= 0.0) throw ConfigError("data.h must be positive");
  if (cfg.holdout_fraction <= 0.0 || cfg.holdout_fraction >= 1.0) {
    throw ConfigError("data.holdout_fraction must lie in (0,1)");
  }

  return cfg;
}

RunConfig load_run_config(const std::string& file) {
  std::ifstream is(file);
  if (!is) throw IoError("cannot open config '" + file + "'");
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_run_config(buffer.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  j["noise"] = {{"kind", to_string(cfg.noise.kind)}, {"d", cfg.noise.d}};
  if (cfg.noise.kind == NoiseKind::fbm) {
    j["noise"]["hurst"] = cfg.noise.hurst;
  }
  if (cfg.noise.kind == NoiseKind::compound_poisson) {
    j["noise"]["jump_rate"] = cfg.noise.jump_rate;
    j["noise"]["jump_std"] = cfg.noise.jump_std;
  }
  j["model"] = {{"theta", matrix_json(cfg.model.theta)},
                {"b", vector_json(cfg.model.b)},
                {"sigma_diag", vector_json(cfg.model.sigma.diagonal())}};
  j["estimation"] = {
      {"t_upper", cfg.estimation.t_upper},
      {"lag_step", cfg.estimation.lag_step},
      {"qv_window", cfg.estimation.qv_window == QvWindow::all_increments
                        ? "all_increments"
                        : "unit_interval"},
      {"clip_eps", cfg.estimation.clip_eps},
      {"care_tol", cfg.estimation.care_tol}};
  j["simulation"] = {{"n_steps", cfg.n_steps}, {"h", cfg.h},
                     {"seed", cfg.seed}};
  if (cfg.r0) j["simulation"]["r0"] = vector_json(*cfg.r0);
  j["mc"] = {{"replications", cfg.replications}, {"workers", cfg.workers}};
  j["data"] = {{"date_column", cfg.date_column},
               {"value_columns", cfg.value_columns},
               {"h", cfg.data_h},
               {"holdout_fraction", cfg.holdout_fraction},
               {"min_rows", cfg.min_rows}};
  return j.dump(2);
}

}  // namespace vasifit
