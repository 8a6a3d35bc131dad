#pragma once

// Feshbach reduction of a Hermitian operator H_R on a D-dimensional space to
// an energy-dependent operator on ran(P), P an orthogonal projector of rank k:
//
//   H_eff(E) = H_PP + H_PQ (E - H_QQ)^{-1} H_QP,
//
// expressed in an orthonormal eigenbasis of P. Every eigenvalue of H_R whose
// eigenvector meets ran(P) reappears as a fixed point E of H_eff; eigenvalues
// of H_QQ are poles.

#include <edh/models.hpp>
#include <edh/types.hpp>

#include <memory>
#include <vector>

namespace edh {

struct FeshbachModel {
  Eigen::MatrixXcd h_r;        // D x D, Hermitian
  Eigen::MatrixXcd projector;  // P: Hermitian idempotent
  int dim = 0;                 // D
  int rank = 0;                // k
  Eigen::MatrixXcd p_basis;    // D x k, orthonormal columns spanning ran(P)
  Eigen::MatrixXcd q_basis;    // D x (D-k)
  Eigen::MatrixXcd h_pp, h_pq, h_qp, h_qq;  // blocks in those bases
  Eigen::VectorXd poles;       // eigenvalues of H_QQ, ascending
};

inline FeshbachModel make_feshbach(const Eigen::MatrixXcd& h_r, const Eigen::MatrixXcd& p) {
  if (h_r.rows() != h_r.cols() || h_r.rows() < 2)
    throw dimension_error("make_feshbach: H_R must be square with D >= 2");
  if (p.rows() != h_r.rows() || p.cols() != h_r.cols())
    throw dimension_error("make_feshbach: P must match H_R in shape");
  if (hermiticity_defect(h_r) > kHermitianTol)
    throw config_error("make_feshbach: H_R is not Hermitian");
  if (hermiticity_defect(p) > kHermitianTol)
    throw config_error("make_feshbach: P is not Hermitian");
  if (max_abs(Eigen::MatrixXcd(p * p - p)) > kHermitianTol)
    throw config_error("make_feshbach: P is not idempotent");

  FeshbachModel m;
  m.h_r = h_r;
  m.projector = p;
  m.dim = static_cast<int>(h_r.rows());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p);
  if (es.info() != Eigen::Success) throw edh_error("make_feshbach: projector eigensolve failed");
  int k = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (std::abs(lam) > 1e-10 && std::abs(lam - 1.0) > 1e-10)
      throw config_error("make_feshbach: P has an eigenvalue away from {0,1}");
    if (lam > 0.5) ++k;
  }
  if (k < 1 || k >= m.dim)
    throw config_error("make_feshbach: rank must satisfy 1 <= k < D, got k = " +
                       std::to_string(k));
  m.rank = k;
  // ascending eigenvalues: first D-k columns span ker(P), the last k span ran(P)
  m.q_basis = es.eigenvectors().leftCols(m.dim - k);
  m.p_basis = es.eigenvectors().rightCols(k);

  m.h_pp = m.p_basis.adjoint() * h_r * m.p_basis;
  m.h_pq = m.p_basis.adjoint() * h_r * m.q_basis;
  m.h_qp = m.q_basis.adjoint() * h_r * m.p_basis;
  m.h_qq = m.q_basis.adjoint() * h_r * m.q_basis;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eq(m.h_qq);
  if (eq.info() != Eigen::Success) throw edh_error("make_feshbach: H_QQ eigensolve failed");
  m.poles = eq.eigenvalues();
  return m;
}

inline double pole_gap(const FeshbachModel& m, double e) {
  double gap = kInf;
  for (Eigen::Index i = 0; i < m.poles.size(); ++i)
    gap = std::min(gap, std::abs(e - m.poles(i)));
  return gap;
}

// k x k effective Hamiltonian at energy E; Hermitian for real E
inline Eigen::MatrixXcd feshbach_reduce(const FeshbachModel& m, double e) {
  const double scale = std::max(1.0, m.poles.size() ? m.poles.cwiseAbs().maxCoeff() : 0.0);
  if (pole_gap(m, e) <= 1e-12 * scale)
    throw pole_error("feshbach_reduce: E = " + std::to_string(e) +
                     " collides with an eigenvalue of H_QQ");
  const Eigen::Index q = m.dim - m.rank;
  const Eigen::MatrixXcd shifted = e * Eigen::MatrixXcd::Identity(q, q) - m.h_qq;
  const Eigen::MatrixXcd green = Eigen::PartialPivLU<Eigen::MatrixXcd>(shifted).solve(m.h_qp);
  return m.h_pp + m.h_pq * green;
}

// wrap the reduction as an energy-dependent model on ran(P)
inline EDHamiltonian feshbach_model_as_ed(const FeshbachModel& m) {
  auto shared = std::make_shared<FeshbachModel>(m);
  const double scale =
      std::max(1.0, shared->poles.size() ? shared->poles.cwiseAbs().maxCoeff() : 0.0);
  return EDHamiltonian(
      m.rank, Interval{}, true, [shared](double z) { return feshbach_reduce(*shared, z); },
      "feshbach", [shared, scale](double z) { return pole_gap(*shared, z) > 1e-12 * scale; });
}

// reconstruct the eliminated component of an eigenvector: given the reduced
// state at a self-consistent energy, return the full-space vector (in the
// original coordinates, unnormalized) that the reduction projected away from
inline Eigen::VectorXcd feshbach_lift(const FeshbachModel& m, double energy,
                                      const Eigen::VectorXcd& psi_p) {
  if (psi_p.size() != m.rank)
    throw dimension_error("feshbach_lift: reduced state has wrong dimension");
  const double scale = std::max(1.0, max_abs(m.h_r));
  if (pole_gap(m, energy) <= 1e-12 * scale)
    throw pole_error("feshbach_lift: energy collides with an eliminated-block eigenvalue");
  const Eigen::Index q = m.dim - m.rank;
  const Eigen::MatrixXcd shifted =
      energy * Eigen::MatrixXcd::Identity(q, q) - m.h_qq;
  const Eigen::VectorXcd psi_q =
      Eigen::PartialPivLU<Eigen::MatrixXcd>(shifted).solve(m.h_qp * psi_p);
  return m.p_basis * psi_p + m.q_basis * psi_q;
}

enum class Recoverability { ok, pole_collision, zero_projection };

struct RecoverableEigenvalue {
  double value = 0;
  double p_norm = 0;    // norm of the projected eigenvector
  double pole_gap = 0;  // distance to the nearest eigenvalue of H_QQ
  Recoverability reason = Recoverability::ok;
  bool recoverable = false;
};

// classify every eigenvalue of H_R by whether the reduction can see it
inline std::vector<RecoverableEigenvalue> recoverable_spectrum(const FeshbachModel& m,
                                                               double projection_tol = 1e-10,
                                                               double pole_tol = 1e-8) {
  if (!(projection_tol > 0) || !(pole_tol > 0))
    throw config_error("recoverable_spectrum: tolerances must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.h_r);
  if (es.info() != Eigen::Success) throw edh_error("recoverable_spectrum: eigensolve failed");
  std::vector<RecoverableEigenvalue> out(static_cast<size_t>(m.dim));
  for (int i = 0; i < m.dim; ++i) {
    RecoverableEigenvalue& r = out[static_cast<size_t>(i)];
    r.value = es.eigenvalues()(i);
    r.p_norm = (m.p_basis.adjoint() * es.eigenvectors().col(i)).norm();
    r.pole_gap = pole_gap(m, r.value);
    // an exactly decoupled eigenvector also lands on an H_QQ pole, so the
    // projection test comes first: invisibility is the primary diagnosis
    if (r.p_norm <= projection_tol) {
      r.reason = Recoverability::zero_projection;
    } else if (r.pole_gap <= pole_tol) {
      r.reason = Recoverability::pole_collision;
    } else {
      r.reason = Recoverability::ok;
      r.recoverable = true;
    }
  }
  return out;
}

// maximal closed subintervals of `interval` staying `buffer` away from every pole
inline std::vector<Interval> admissible_segments(const FeshbachModel& m, Interval interval,
                                                 double buffer) {
  if (!(buffer > 0)) throw config_error("admissible_segments: buffer must be positive");
  if (!interval.bounded() || !(interval.lo < interval.hi))
    throw config_error("admissible_segments: interval must be bounded with lo < hi");
  std::vector<double> cuts;
  for (Eigen::Index i = 0; i < m.poles.size(); ++i)
    if (m.poles(i) > interval.lo - buffer && m.poles(i) < interval.hi + buffer)
      cuts.push_back(m.poles(i));
  std::sort(cuts.begin(), cuts.end());
  std::vector<Interval> segs;
  double lo = interval.lo;
  for (double c : cuts) {
    const double hi = c - buffer;
    if (hi > lo) segs.push_back({lo, hi});
    lo = std::max(lo, c + buffer);
  }
  if (interval.hi > lo) segs.push_back({lo, interval.hi});
  return segs;
}

}  // namespace edh
