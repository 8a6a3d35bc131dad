#pragma once

// End-to-end orchestration: model -> self-consistent solve -> bi-orthogonal
// analysis -> linearization -> oracle cross-checks, assembled into a
// deterministic machine-readable report.  Every failure is re-thrown tagged
// with the stage that produced it so drivers can name the failing stage.

#include <edh/biortho.hpp>
#include <edh/config.hpp>
#include <edh/linearize.hpp>
#include <edh/nlevp.hpp>
#include <edh/oracles.hpp>
#include <edh/qes.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace edh {

// carries the name of the pipeline stage whose numerics failed
class pipeline_error : public edh_error {
 public:
  pipeline_error(std::string stage_name, const std::string& message)
      : edh_error("stage " + stage_name + ": " + message), stage_(std::move(stage_name)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

enum class PipelineDepth { solve, verify, full };

struct PipelineOutcome {
  std::vector<BoundState> states;
  std::optional<OverlapMatrix> overlap;
  std::optional<DualBasis> duals;
  std::optional<LinearizedPair> pair;
  std::optional<SpectralDecomposition> eta_block;
  ordered_json report;
};

namespace detail {

inline std::string format_full(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general,
                         std::numeric_limits<double>::max_digits10);
  return std::string(buf, r.ptr);
}

inline std::string iso_utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline ordered_json json_matrix(const Eigen::MatrixXcd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(ordered_json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class Fn>
auto staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const config_error&) {
    throw;  // config problems keep their class: drivers map them to exit 2
  } catch (const edh_error& e) {
    throw pipeline_error(stage, e.what());
  }
}

// merge states found on several z-segments: renumber root ordinals per branch
inline void renumber_ordinals(std::vector<BoundState>& states) {
  std::stable_sort(states.begin(), states.end(), [](const BoundState& a, const BoundState& b) {
    return a.branch != b.branch ? a.branch < b.branch : a.energy < b.energy;
  });
  int current_branch = std::numeric_limits<int>::min(), next = 0;
  for (auto& s : states) {
    if (s.branch != current_branch) {
      current_branch = s.branch;
      next = 0;
    }
    s.ordinal = next++;
  }
}

inline std::vector<BoundState> solve_stage(const RunConfig& cfg,
                                           std::vector<Interval>& segments_out) {
  return staged("solve", [&] {
    std::vector<Interval> segments;
    if (cfg.feshbach)
      segments = admissible_segments(*cfg.feshbach, cfg.solve.interval, cfg.pole_buffer);
    else
      segments = {cfg.solve.interval};

    SolveOptions opts;
    opts.tol = cfg.solve.tol;
    opts.ambiguity_threshold = cfg.solve.ambiguity_threshold;

    const double total = cfg.solve.interval.width();
    std::vector<BoundState> states;
    for (const Interval& seg : segments) {
      const int pts = std::max<int>(
          16, static_cast<int>(std::llround(cfg.solve.grid_points * seg.width() / total)));
      auto part = solve_all(cfg.model, seg, pts, opts);
      states.insert(states.end(), std::make_move_iterator(part.begin()),
                    std::make_move_iterator(part.end()));
    }
    if (segments.size() > 1) renumber_ordinals(states);

    // reduced-space states are lifted back to the full space, where they are
    // exact eigenvectors of the original matrix; downstream bi-orthogonal
    // analysis then runs in the space whose dimension bounds the state count
    if (cfg.feshbach) {
      for (BoundState& s : states) {
        Eigen::VectorXcd full = feshbach_lift(*cfg.feshbach, s.energy, s.right);
        full.normalize();
        canonical_phase(full);
        s.right = full;
        s.left = full.adjoint();
        const Eigen::VectorXcd r = cfg.feshbach->h_r * full - s.energy * full;
        s.residual_right = r.norm();
        s.residual_left = r.norm();
      }
    }
    segments_out = std::move(segments);
    return states;
  });
}

inline ordered_json oracle_checks(const RunConfig& cfg, const std::vector<BoundState>& states) {
  const Interval iv = cfg.solve.interval;
  auto nearest_found = [&](double e) {
    double best = kInf;
    for (const auto& s : states) best = std::min(best, std::abs(s.energy - e));
    return best;
  };
  ordered_json oc;

  if (cfg.model_type == "constant" && cfg.model.hermitian_each_z()) {
    oc["kind"] = "direct_diagonalization";
    const auto pairs = eigen_at(cfg.model, 0.5 * (iv.lo + iv.hi));
    ordered_json expected = ordered_json::array();
    double worst = 0;
    for (const auto& p : pairs) {
      const double e = p.value.real();
      if (!iv.contains(e)) continue;
      expected.push_back(e);
      worst = std::max(worst, nearest_found(e));
    }
    oc["expected_energies"] = std::move(expected);
    oc["max_abs_error"] = worst;
    return oc;
  }

  if (cfg.model_type == "ed_mass_oscillator") {
    const ordered_json& jm = cfg.echo["model"];
    OscillatorParams p;
    if (jm.contains("hbar")) p.hbar = jm["hbar"].get<double>();
    if (jm.contains("g")) p.g = jm["g"].get<double>();
    if (jm.contains("m0")) p.mass.m0 = jm["m0"].get<double>();
    if (jm.contains("lambda")) p.mass.lambda = jm["lambda"].get<double>();
    oc["kind"] = "oscillator_fixed_points";
    ordered_json rows = ordered_json::array();
    double worst = 0;
    for (const auto& s : states) {
      const auto roots = ho_analytic_roots(s.branch, p);
      double best = kInf;
      for (double r : roots) best = std::min(best, std::abs(s.energy - r));
      if (!roots.empty()) worst = std::max(worst, best);
      rows.push_back(ordered_json{{"alpha", {s.branch, s.ordinal}},
                                  {"abs_error", roots.empty() ? ordered_json() : ordered_json(best)}});
    }
    oc["states"] = std::move(rows);
    oc["max_abs_error"] = worst;
    return oc;
  }

  if (cfg.model_type == "sextic_qes") {
    const ordered_json& jm = cfg.echo["model"];
    const int n = jm["N"].get<int>();
    const double b = jm.contains("b") ? jm["b"].get<double>() : 1.0;
    const QESSolution sol = qes_sextic_construct(n, b);
    oc["kind"] = "qes_sector_energies";
    ordered_json expected = ordered_json::array();
    double worst = 0;
    for (double e : sol.energies) {
      if (!iv.contains(e) || !cfg.model.admissible(e)) continue;
      expected.push_back(e);
      worst = std::max(worst, nearest_found(e));
    }
    oc["expected_energies"] = std::move(expected);
    oc["max_abs_error"] = worst;
    return oc;
  }

  if (cfg.model_type == "feshbach") {
    oc["kind"] = "recoverable_spectrum";
    const auto rec = recoverable_spectrum(*cfg.feshbach, cfg.projection_tol, cfg.pole_tol);
    ordered_json expected = ordered_json::array();
    double worst = 0;
    for (const auto& r : rec) {
      if (!r.recoverable || !iv.contains(r.value) || r.pole_gap <= cfg.pole_buffer) continue;
      expected.push_back(r.value);
      worst = std::max(worst, nearest_found(r.value));
    }
    oc["expected_energies"] = std::move(expected);
    oc["max_abs_error"] = worst;
    return oc;
  }

  return ordered_json();  // step models have no closed-form reference
}

}  // namespace detail

inline PipelineOutcome run_pipeline(const RunConfig& cfg, std::uint64_t seed = 0,
                                    PipelineDepth depth = PipelineDepth::full) {
  PipelineOutcome out;

  std::vector<Interval> segments;
  out.states = detail::solve_stage(cfg, segments);

  const bool have_states = !out.states.empty();
  // lifted reduced-space states live in the full space
  const Eigen::Index dim = cfg.feshbach ? cfg.feshbach->dim : cfg.model.dim();
  const bool complete = have_states && static_cast<Eigen::Index>(out.states.size()) == dim;

  if (depth != PipelineDepth::solve && have_states) {
    detail::staged("biortho", [&] {
      out.overlap = overlap_matrix(out.states, cfg.linearize.scheme);
      out.duals = dual_basis(out.states, *out.overlap, cfg.linearize.cond_limit);
      return 0;
    });
  }
  if (depth == PipelineDepth::full && have_states) {
    detail::staged("linearize", [&] {
      out.pair = linearize_states(out.states, *out.duals);
      return 0;
    });
    if (cfg.model_type == "constant" && !cfg.model.hermitian_each_z()) {
      detail::staged("eta", [&] {
        out.eta_block = spectral_decomposition_nonhermitian(cfg.model.eval(0.0));
        return 0;
      });
    }
  }

  // ---- report assembly (insertion order fixes the serialized key order) ----
  ordered_json rep;
  rep["timestamp"] = detail::iso_utc_now();
  rep["config"] = cfg.echo;
  rep["versions"] = ordered_json{
      {"artifact", "1.0.0"},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)}};
  rep["seed"] = seed;
  rep["model"] = ordered_json{{"type", cfg.model_type},
                              {"dim", dim},
                              {"hermitian_each_z", cfg.model.hermitian_each_z()}};
  if (cfg.feshbach) rep["model"]["reduced_rank"] = cfg.feshbach->rank;

  ordered_json segs = ordered_json::array();
  for (const Interval& s : segments) segs.push_back(ordered_json::array({s.lo, s.hi}));
  rep["solve"] = ordered_json{{"interval", {cfg.solve.interval.lo, cfg.solve.interval.hi}},
                              {"segments", std::move(segs)},
                              {"grid_points", cfg.solve.grid_points},
                              {"tol", cfg.solve.tol},
                              {"states_found", out.states.size()}};

  ordered_json rows = ordered_json::array();
  for (const auto& s : out.states)
    rows.push_back(ordered_json{{"alpha", {s.branch, s.ordinal}},
                                {"energy", s.energy},
                                {"residual_right", s.residual_right},
                                {"residual_left", s.residual_left},
                                {"match_quality", s.match_quality}});
  rep["bound_states"] = std::move(rows);

  if (out.duals) {
    ordered_json jb;
    jb["scheme"] = to_string(cfg.linearize.scheme);
    jb["overlap_condition"] = out.overlap->condition;
    jb["biorthonormality_residual"] = biorthonormality_residual(out.states, *out.duals);
    jb["projector_idempotency"] = projector_idempotency_defect(out.states, *out.duals);
    jb["complete"] = complete;
    if (complete) {
      const Eigen::MatrixXcd pi = completeness_projector(out.states, *out.duals);
      jb["projector_vs_identity"] =
          max_abs(Eigen::MatrixXcd(pi - Eigen::MatrixXcd::Identity(pi.rows(), pi.cols())));
    } else {
      jb["projector_vs_identity"] = ordered_json();
    }
    rep["biortho"] = std::move(jb);
  } else {
    rep["biortho"] = ordered_json();
  }

  if (out.pair) {
    ordered_json jr;
    for (const auto& [key, value] : out.pair->residuals) jr[key] = value;
    rep["linearize"] = ordered_json{{"scheme", to_string(out.pair->scheme)},
                                    {"residuals", std::move(jr)}};
  } else {
    rep["linearize"] = ordered_json();
  }

  if (depth == PipelineDepth::full) {
    ordered_json oc = detail::staged("oracle", [&] { return detail::oracle_checks(cfg, out.states); });
    rep["oracle_checks"] = std::move(oc);
  }

  if (out.eta_block) {
    ordered_json je;
    ordered_json jr;
    for (const auto& [key, value] : out.eta_block->residuals) jr[key] = value;
    je["residuals"] = std::move(jr);
    if (dim <= 16) je["matrix"] = detail::json_matrix(out.eta_block->eta);
    rep["eta"] = std::move(je);
  }

  out.report = std::move(rep);
  return out;
}

// flat CSV rendering of the bound-state table
inline std::string report_to_csv(const ordered_json& rep) {
  std::string s = "branch,ordinal,energy,residual_right,residual_left,match_quality\n";
  for (const auto& row : rep.at("bound_states")) {
    s += std::to_string(row.at("alpha")[0].get<int>());
    s += ',';
    s += std::to_string(row.at("alpha")[1].get<int>());
    s += ',';
    s += detail::format_full(row.at("energy").get<double>());
    s += ',';
    s += detail::format_full(row.at("residual_right").get<double>());
    s += ',';
    s += detail::format_full(row.at("residual_left").get<double>());
    s += ',';
    s += detail::format_full(row.at("match_quality").get<double>());
    s += '\n';
  }
  return s;
}

}  // namespace edh
