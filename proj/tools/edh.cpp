// Command-line driver: configuration-driven runs of the full
// linearization pipeline plus focused subcommands for each layer.
//
// Exit codes: 0 success, 2 configuration failure, 3 numerical failure
// (the failing pipeline stage is named on stderr).

#include <edh/matrix_io.hpp>
#include <edh/oracles.hpp>
#include <edh/pipeline.hpp>
#include <edh/qes.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using edh::ordered_json;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw edh::config_error("cannot open output file: " + path);
  out << text;
}

std::string render_report(const ordered_json& report, const std::string& format) {
  if (format == "csv") return edh::report_to_csv(report);
  return report.dump(2) + "\n";
}

struct CommonFlags {
  std::string config_path;
  std::string output_path;
  std::string format;  // empty: take the config's choice
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required = true) {
  auto* c = cmd->add_option("--config", f.config_path, "JSON run configuration");
  if (config_required) c->required();
  cmd->add_option("--output", f.output_path, "write the report here instead of stdout");
  cmd->add_option("--format", f.format, "report format: json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", f.seed, "seed echoed into the report (random generators only)");
}

int emit_pipeline_report(const CommonFlags& f, edh::PipelineDepth depth) {
  const edh::RunConfig cfg = edh::load_run_config(f.config_path);
  const edh::PipelineOutcome outcome = edh::run_pipeline(cfg, f.seed, depth);
  const std::string format = !f.format.empty() ? f.format : cfg.output.format;
  const std::string path = !f.output_path.empty() ? f.output_path : cfg.output.path;
  write_text(path, render_report(outcome.report, format));
  return 0;
}

int cmd_linearize(const CommonFlags& f, const std::string& outdir) {
  const edh::RunConfig cfg = edh::load_run_config(f.config_path);
  const edh::PipelineOutcome outcome = edh::run_pipeline(cfg, f.seed);
  if (!outcome.pair)
    throw edh::pipeline_error("linearize", "no bound states found in the solve interval");

  const std::filesystem::path dir(outdir);
  std::filesystem::create_directories(dir);
  const auto& p = *outcome.pair;
  edh::write_matrix_csv((dir / "K.csv").string(), p.k);
  edh::write_matrix_csv((dir / "L.csv").string(), p.l);
  if (p.scheme == edh::Scheme::hermitian) {
    edh::write_matrix_csv((dir / "xi.csv").string(), p.xi);
    edh::write_matrix_csv((dir / "xi_inv.csv").string(), p.xi_inv);
  } else {
    edh::write_matrix_csv((dir / "mu.csv").string(), p.mu);
    edh::write_matrix_csv((dir / "nu.csv").string(), p.nu);
    edh::write_matrix_csv((dir / "mu_inv.csv").string(), p.mu_inv);
    edh::write_matrix_csv((dir / "nu_inv.csv").string(), p.nu_inv);
  }

  ordered_json jr;
  jr["scheme"] = edh::to_string(p.scheme);
  jr["files"] = ordered_json::array();
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".csv") jr["files"].push_back(entry.path().filename().string());
  std::sort(jr["files"].begin(), jr["files"].end());
  ordered_json res;
  for (const auto& [key, value] : p.residuals) res[key] = value;
  jr["residuals"] = std::move(res);
  write_text(f.output_path, jr.dump(2) + "\n");
  return 0;
}

int cmd_verify(const CommonFlags& f) {
  const edh::RunConfig cfg = edh::load_run_config(f.config_path);
  const edh::PipelineOutcome outcome = edh::run_pipeline(cfg, f.seed, edh::PipelineDepth::verify);
  ordered_json j;
  j["states_found"] = outcome.states.size();
  if (outcome.overlap) {
    j["overlap_r"] = edh::detail::json_matrix(outcome.overlap->r);
    j["condition"] = outcome.overlap->condition;
    j["biorthonormality_residual"] = edh::biorthonormality_residual(outcome.states, *outcome.duals);
    j["projector_idempotency"] = edh::projector_idempotency_defect(outcome.states, *outcome.duals);
    const Eigen::Index full_dim = cfg.feshbach ? cfg.feshbach->dim : cfg.model.dim();
    const bool complete = static_cast<Eigen::Index>(outcome.states.size()) == full_dim;
    j["complete"] = complete;
    if (complete) {
      const Eigen::MatrixXcd pi = edh::completeness_projector(outcome.states, *outcome.duals);
      j["projector_vs_identity"] =
          edh::max_abs(Eigen::MatrixXcd(pi - Eigen::MatrixXcd::Identity(pi.rows(), pi.cols())));
    }
  }
  write_text(f.output_path, j.dump(2) + "\n");
  return 0;
}

int cmd_reduce(const std::string& hr_path, const std::string& p_path,
               std::vector<double> energies, const std::string& output_path) {
  const Eigen::MatrixXcd h_r = edh::read_matrix_csv_file(hr_path);
  const Eigen::MatrixXcd p = edh::read_matrix_csv_file(p_path);
  edh::FeshbachModel m = [&] {
    try {
      return edh::make_feshbach(h_r, p);
    } catch (const edh::edh_error& e) {
      throw edh::config_error(e.what());
    }
  }();

  if (energies.empty()) {
    // default samples: midpoints between consecutive poles plus outer flanks
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.h_r);
    const double lo = es.eigenvalues().minCoeff() - 1.0;
    const double hi = es.eigenvalues().maxCoeff() + 1.0;
    energies.push_back(lo);
    for (Eigen::Index i = 0; i + 1 < m.poles.size(); ++i)
      energies.push_back(0.5 * (m.poles(i) + m.poles(i + 1)));
    energies.push_back(hi);
  }

  ordered_json j;
  j["dim"] = m.dim;
  j["rank"] = m.rank;
  ordered_json poles = ordered_json::array();
  for (Eigen::Index i = 0; i < m.poles.size(); ++i) poles.push_back(m.poles(i));
  j["poles"] = std::move(poles);

  ordered_json samples = ordered_json::array();
  for (double e : energies) {
    ordered_json row;
    row["energy"] = e;
    row["pole_gap"] = edh::pole_gap(m, e);
    try {
      row["h_eff"] = edh::detail::json_matrix(edh::feshbach_reduce(m, e));
    } catch (const edh::pole_error& err) {
      row["h_eff"] = nullptr;
      row["error"] = err.what();
    }
    samples.push_back(std::move(row));
  }
  j["samples"] = std::move(samples);

  ordered_json rec = ordered_json::array();
  for (const auto& r : edh::recoverable_spectrum(m)) {
    const char* reason = r.reason == edh::Recoverability::ok               ? "ok"
                         : r.reason == edh::Recoverability::pole_collision ? "pole_collision"
                                                                           : "zero_projection";
    rec.push_back(ordered_json{{"value", r.value},
                               {"p_norm", r.p_norm},
                               {"pole_gap", r.pole_gap},
                               {"reason", reason},
                               {"recoverable", r.recoverable}});
  }
  j["recoverable_spectrum"] = std::move(rec);
  write_text(output_path, j.dump(2) + "\n");
  return 0;
}

int cmd_oracle(int qes_n, double qes_b, int moments_nmax, double moments_c,
               const std::string& output_path) {
  ordered_json j;
  if (qes_n >= 0) {
    const edh::QESSolution sol = edh::qes_sextic_construct(qes_n, qes_b);
    ordered_json q;
    q["N"] = sol.N;
    q["b"] = sol.b;
    q["A"] = sol.A;
    q["energies"] = sol.energies;
    ordered_json cp = ordered_json::array();
    for (const auto& c : sol.charpoly) cp.push_back(c.str());
    q["charpoly"] = std::move(cp);  // ascending powers, exact rationals
    q["wavefunction_polynomials"] = sol.poly_coeffs;
    j["qes"] = std::move(q);
  }
  if (moments_nmax >= 0) {
    ordered_json rows = ordered_json::array();
    for (int n = 0; n <= moments_nmax; ++n) {
      const double exact = edh::gamma_moment(n, moments_c);
      const double quad = edh::gamma_moment_quadrature(n, moments_c);
      rows.push_back(ordered_json{{"n", n},
                                  {"gamma_moment", exact},
                                  {"quadrature", quad},
                                  {"abs_diff", std::abs(exact - quad)}});
    }
    j["moments"] = ordered_json{{"c", moments_c}, {"rows", std::move(rows)}};
  }
  if (j.empty())
    throw edh::config_error("oracle: pass --qes N (with optional --b) and/or --moments NMAX");
  write_text(output_path, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // deterministic numerics regardless of the ambient BLAS configuration
  setenv("OPENBLAS_NUM_THREADS", "1", 1);
  setenv("OMP_NUM_THREADS", "1", 1);

  CLI::App app{"linearization toolkit for energy-dependent Hamiltonians"};
  app.require_subcommand(1);

  CommonFlags run_f, solve_f, lin_f, verify_f;
  std::string lin_outdir = ".";

  auto* run_cmd = app.add_subcommand("run", "full pipeline: solve, bi-orthogonalize, linearize");
  add_common(run_cmd, run_f);

  auto* solve_cmd = app.add_subcommand("solve", "self-consistent bound states only");
  add_common(solve_cmd, solve_f);

  auto* lin_cmd = app.add_subcommand("linearize", "emit K, L and metric matrices as CSV");
  add_common(lin_cmd, lin_f);
  lin_cmd->add_option("--outdir", lin_outdir, "directory for the CSV matrices");

  auto* verify_cmd = app.add_subcommand("verify", "overlap matrix, duals and projector checks");
  add_common(verify_cmd, verify_f);

  auto* reduce_cmd = app.add_subcommand("reduce", "project a Hermitian matrix onto a subspace");
  std::string hr_path, p_path, reduce_out;
  std::vector<double> reduce_at;
  reduce_cmd->add_option("--hr", hr_path, "full-space Hermitian matrix (CSV)")->required();
  reduce_cmd->add_option("--p", p_path, "orthogonal projector matrix (CSV)")->required();
  reduce_cmd->add_option("--at", reduce_at, "energies at which to sample the reduction");
  reduce_cmd->add_option("--output", reduce_out, "write the JSON here instead of stdout");

  auto* oracle_cmd = app.add_subcommand("oracle", "closed-form reference tables");
  int qes_n = -1, moments_nmax = -1;
  double qes_b = 1.0, moments_c = 0.0;
  oracle_cmd->add_option("--qes", qes_n, "sextic sector size N");
  oracle_cmd->add_option("--b", qes_b, "sextic potential parameter b");
  oracle_cmd->add_option("--moments", moments_nmax, "moment table up to this n");
  oracle_cmd->add_option("--c", moments_c, "moment weight exponent c");
  std::string oracle_out;
  oracle_cmd->add_option("--output", oracle_out, "write the JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return emit_pipeline_report(run_f, edh::PipelineDepth::full);
    if (solve_cmd->parsed()) return emit_pipeline_report(solve_f, edh::PipelineDepth::solve);
    if (lin_cmd->parsed()) return cmd_linearize(lin_f, lin_outdir);
    if (verify_cmd->parsed()) return cmd_verify(verify_f);
    if (reduce_cmd->parsed()) return cmd_reduce(hr_path, p_path, reduce_at, reduce_out);
    if (oracle_cmd->parsed())
      return cmd_oracle(qes_n, qes_b, moments_nmax, moments_c, oracle_out);
  } catch (const edh::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const edh::pipeline_error& e) {
    std::cerr << "numerical failure in " << e.what() << "\n";
    return 3;
  } catch (const edh::edh_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
