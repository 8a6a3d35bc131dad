#pragma once

// Strict JSON run-configuration parsing: tagged model specs, solver and
// linearization settings, output routing.  Unknown keys are rejected by
// full path so config typos fail loudly instead of silently defaulting.

#include <edh/feshbach.hpp>
#include <edh/matrix_io.hpp>
#include <edh/models.hpp>
#include <edh/types.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace edh {

using ordered_json = nlohmann::ordered_json;

struct SolveConfig {
  Interval interval;
  int grid_points = 64;
  double tol = 1e-12;
  double ambiguity_threshold = 0.7;
};

struct LinearizeConfig {
  Scheme scheme = Scheme::hermitian;
  double cond_limit = 1e8;
};

struct OutputConfig {
  std::string format = "json";  // "json" | "csv"
  std::string path;             // empty: stdout
};

struct RunConfig {
  ordered_json echo;       // the parsed document, for report reproduction
  std::string model_type;  // tag of the model section
  EDHamiltonian model;
  std::optional<FeshbachModel> feshbach;  // kept for pole-aware solving
  double pole_buffer = 1e-4;
  double projection_tol = 1e-10;
  double pole_tol = 1e-8;
  SolveConfig solve;
  LinearizeConfig linearize;
  OutputConfig output;
};

namespace detail {

inline void require_object(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) throw config_error("\"" + path + "\" must be a JSON object");
}

inline void reject_unknown(const ordered_json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        ok = true;
        break;
      }
    if (!ok) {
      std::string msg = "unknown key \"" + path + "." + item.key() + "\" (allowed:";
      for (const char* a : allowed) msg += std::string(" ") + a;
      throw config_error(msg + ")");
    }
  }
}

inline const ordered_json& require_key(const ordered_json& j, const std::string& path,
                                       const char* key) {
  require_object(j, path);
  auto it = j.find(key);
  if (it == j.end()) throw config_error("missing required key \"" + path + "." + key + "\"");
  return *it;
}

inline double as_number(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) throw config_error("\"" + path + "\" must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw config_error("\"" + path + "\" must be finite");
  return v;
}

inline int as_integer(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) throw config_error("\"" + path + "\" must be an integer");
  return j.get<int>();
}

inline std::string as_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) throw config_error("\"" + path + "\" must be a string");
  return j.get<std::string>();
}

// [lo, hi]; null entries mean unbounded on that side
inline Interval as_window(const ordered_json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2)
    throw config_error("\"" + path + "\" must be an array [lo, hi]");
  Interval w;
  if (!j[0].is_null()) w.lo = as_number(j[0], path + "[0]");
  if (!j[1].is_null()) w.hi = as_number(j[1], path + "[1]");
  if (!(w.lo < w.hi)) throw config_error("\"" + path + "\" needs lo < hi");
  return w;
}

inline Interval as_bounded_interval(const ordered_json& j, const std::string& path) {
  const Interval w = as_window(j, path);
  if (!w.bounded()) throw config_error("\"" + path + "\" must be bounded");
  return w;
}

inline Eigen::MatrixXcd load_matrix(const ordered_json& j, const std::string& path,
                                    const std::filesystem::path& base_dir) {
  const std::filesystem::path rel = as_string(j, path);
  const std::filesystem::path full = rel.is_absolute() ? rel : base_dir / rel;
  try {
    return read_matrix_csv_file(full);
  } catch (const config_error& e) {
    throw config_error("\"" + path + "\": " + e.what());
  }
}

struct ParsedModel {
  std::string type;
  EDHamiltonian model;
  std::optional<FeshbachModel> feshbach;
  double pole_buffer = 1e-4;
  double projection_tol = 1e-10;
  double pole_tol = 1e-8;
};

inline ParsedModel parse_model(const ordered_json& jm, const std::filesystem::path& base_dir) {
  const std::string type = as_string(require_key(jm, "model", "type"), "model.type");

  if (type == "constant") {
    reject_unknown(jm, "model", {"type", "matrix"});
    return {type, make_constant(load_matrix(require_key(jm, "model", "matrix"), "model.matrix",
                                            base_dir)),
            std::nullopt, 1e-4, 1e-10, 1e-8};
  }

  if (type == "step") {
    reject_unknown(jm, "model", {"type", "segments"});
    const ordered_json& js = require_key(jm, "model", "segments");
    if (!js.is_array() || js.empty())
      throw config_error("\"model.segments\" must be a non-empty array");
    std::vector<StepSegment> segments;
    for (std::size_t i = 0; i < js.size(); ++i) {
      const std::string p = "model.segments[" + std::to_string(i) + "]";
      reject_unknown(js[i], p, {"window", "matrix"});
      StepSegment s;
      s.window = as_window(require_key(js[i], p, "window"), p + ".window");
      s.matrix = load_matrix(require_key(js[i], p, "matrix"), p + ".matrix", base_dir);
      segments.push_back(std::move(s));
    }
    return {type, make_step(std::move(segments)), std::nullopt, 1e-4, 1e-10, 1e-8};
  }

  if (type == "ed_mass_oscillator") {
    reject_unknown(jm, "model", {"type", "hbar", "g", "m0", "lambda", "grid"});
    OscillatorParams p;
    if (jm.contains("hbar")) p.hbar = as_number(jm["hbar"], "model.hbar");
    if (jm.contains("g")) p.g = as_number(jm["g"], "model.g");
    if (jm.contains("m0")) p.mass.m0 = as_number(jm["m0"], "model.m0");
    if (jm.contains("lambda")) p.mass.lambda = as_number(jm["lambda"], "model.lambda");
    if (jm.contains("grid")) {
      reject_unknown(jm["grid"], "model.grid", {"x_min", "x_max", "points"});
      if (jm["grid"].contains("x_min"))
        p.grid.x_min = as_number(jm["grid"]["x_min"], "model.grid.x_min");
      if (jm["grid"].contains("x_max"))
        p.grid.x_max = as_number(jm["grid"]["x_max"], "model.grid.x_max");
      if (jm["grid"].contains("points"))
        p.grid.points = as_integer(jm["grid"]["points"], "model.grid.points");
    }
    return {type, make_ed_mass_oscillator(p), std::nullopt, 1e-4, 1e-10, 1e-8};
  }

  if (type == "sextic_qes") {
    reject_unknown(jm, "model", {"type", "N", "b", "r_max", "points", "sector_window"});
    SexticParams p;
    p.N = as_integer(require_key(jm, "model", "N"), "model.N");
    if (jm.contains("b")) p.b = as_number(jm["b"], "model.b");
    if (jm.contains("r_max")) p.radial_grid.r_max = as_number(jm["r_max"], "model.r_max");
    if (jm.contains("points")) p.radial_grid.points = as_integer(jm["points"], "model.points");
    if (jm.contains("sector_window"))
      p.sector_window = as_window(jm["sector_window"], "model.sector_window");
    return {type, make_sextic_qes(p), std::nullopt, 1e-4, 1e-10, 1e-8};
  }

  if (type == "feshbach") {
    reject_unknown(jm, "model",
                   {"type", "h_r", "projector", "pole_buffer", "projection_tol", "pole_tol"});
    const Eigen::MatrixXcd h_r =
        load_matrix(require_key(jm, "model", "h_r"), "model.h_r", base_dir);
    const Eigen::MatrixXcd p =
        load_matrix(require_key(jm, "model", "projector"), "model.projector", base_dir);
    ParsedModel out{type, make_constant(Eigen::MatrixXcd::Identity(1, 1)), std::nullopt,
                    1e-4, 1e-10, 1e-8};
    try {
      out.feshbach = make_feshbach(h_r, p);
    } catch (const edh_error& e) {
      throw config_error(std::string("\"model\": ") + e.what());
    }
    out.model = feshbach_model_as_ed(*out.feshbach);
    if (jm.contains("pole_buffer")) {
      out.pole_buffer = as_number(jm["pole_buffer"], "model.pole_buffer");
      if (!(out.pole_buffer > 0)) throw config_error("\"model.pole_buffer\" must be positive");
    }
    if (jm.contains("projection_tol")) {
      out.projection_tol = as_number(jm["projection_tol"], "model.projection_tol");
      if (!(out.projection_tol > 0))
        throw config_error("\"model.projection_tol\" must be positive");
    }
    if (jm.contains("pole_tol")) {
      out.pole_tol = as_number(jm["pole_tol"], "model.pole_tol");
      if (!(out.pole_tol > 0)) throw config_error("\"model.pole_tol\" must be positive");
    }
    return out;
  }

  throw config_error("\"model.type\" must be one of: constant, step, ed_mass_oscillator, "
                     "sextic_qes, feshbach (got \"" + type + "\")");
}

inline SolveConfig parse_solve(const ordered_json& js) {
  reject_unknown(js, "solve", {"interval", "grid_points", "tol", "ambiguity_threshold"});
  SolveConfig s;
  s.interval = as_bounded_interval(require_key(js, "solve", "interval"), "solve.interval");
  s.grid_points = as_integer(require_key(js, "solve", "grid_points"), "solve.grid_points");
  if (s.grid_points < 16) throw config_error("\"solve.grid_points\" must be >= 16");
  if (js.contains("tol")) {
    s.tol = as_number(js["tol"], "solve.tol");
    if (!(s.tol > 0)) throw config_error("\"solve.tol\" must be positive");
  }
  if (js.contains("ambiguity_threshold")) {
    s.ambiguity_threshold = as_number(js["ambiguity_threshold"], "solve.ambiguity_threshold");
    if (!(s.ambiguity_threshold > 0 && s.ambiguity_threshold <= 1))
      throw config_error("\"solve.ambiguity_threshold\" must lie in (0, 1]");
  }
  return s;
}

inline LinearizeConfig parse_linearize(const ordered_json& jl) {
  reject_unknown(jl, "linearize", {"scheme", "cond_limit"});
  LinearizeConfig l;
  if (jl.contains("scheme")) {
    const std::string s = as_string(jl["scheme"], "linearize.scheme");
    if (s == "hermitian")
      l.scheme = Scheme::hermitian;
    else if (s == "nonhermitian")
      l.scheme = Scheme::nonhermitian;
    else
      throw config_error("\"linearize.scheme\" must be \"hermitian\" or \"nonhermitian\"");
  }
  if (jl.contains("cond_limit")) {
    l.cond_limit = as_number(jl["cond_limit"], "linearize.cond_limit");
    if (!(l.cond_limit > 1)) throw config_error("\"linearize.cond_limit\" must exceed 1");
  }
  return l;
}

inline OutputConfig parse_output(const ordered_json& jo) {
  reject_unknown(jo, "output", {"format", "path"});
  OutputConfig o;
  if (jo.contains("format")) {
    o.format = as_string(jo["format"], "output.format");
    if (o.format != "json" && o.format != "csv")
      throw config_error("\"output.format\" must be \"json\" or \"csv\"");
  }
  if (jo.contains("path")) o.path = as_string(jo["path"], "output.path");
  return o;
}

}  // namespace detail

inline RunConfig parse_run_config(const ordered_json& doc,
                                  const std::filesystem::path& base_dir) {
  detail::reject_unknown(doc, "config", {"model", "solve", "linearize", "output"});
  detail::ParsedModel pm =
      detail::parse_model(detail::require_key(doc, "config", "model"), base_dir);
  SolveConfig solve = detail::parse_solve(detail::require_key(doc, "config", "solve"));
  LinearizeConfig lin =
      doc.contains("linearize") ? detail::parse_linearize(doc["linearize"]) : LinearizeConfig{};
  OutputConfig out = doc.contains("output") ? detail::parse_output(doc["output"]) : OutputConfig{};
  return RunConfig{doc,
                   pm.type,
                   std::move(pm.model),
                   std::move(pm.feshbach),
                   pm.pole_buffer,
                   pm.projection_tol,
                   pm.pole_tol,
                   solve,
                   lin,
                   out};
}

inline RunConfig load_run_config(const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in) throw config_error("cannot open config file: " + config_path.string());
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("config JSON parse failure: ") + e.what());
  }
  return parse_run_config(doc, config_path.has_parent_path()
                                   ? config_path.parent_path()
                                   : std::filesystem::path("."));
}

}  // namespace edh
