#pragma once

// Energy-independent linear representatives of a solved state set:
//
//   K = Phi diag(E) dual_bras     (acts on right states: K phi_a = E_a phi_a)
//   L = dual_kets diag(E) B       (acts on dual kets:   L phi^a = E_a phi^a)
//
// plus the metric operators that intertwine them. Hermitian scheme: xi and
// the inverse-metric sum xi_inv with xi L = K xi and L xi_inv = xi_inv K.
// Non-Hermitian scheme: mu, nu and their inverse-sum partners with
// K^dagger mu = mu K, nu L = L^dagger nu, and the adjoint relations for the
// inverses. A separate routine decomposes a diagonalizable energy-independent
// operator with real spectrum and returns its quasi-Hermiticity metric eta.

#include <edh/biortho.hpp>
#include <edh/nlevp.hpp>
#include <edh/types.hpp>

#include <map>
#include <string>
#include <vector>

namespace edh {

namespace detail {

inline Eigen::VectorXd energies_of(const std::vector<BoundState>& states) {
  Eigen::VectorXd e(static_cast<Eigen::Index>(states.size()));
  for (size_t a = 0; a < states.size(); ++a) e(static_cast<Eigen::Index>(a)) = states[a].energy;
  return e;
}

inline void require_biorthonormal(const std::vector<BoundState>& states, const DualBasis& duals,
                                  const char* who) {
  const double res = biorthonormality_residual(states, duals);
  if (!(res <= 1e-8))
    throw edh_error(std::string(who) + ": dual basis fails the Kronecker rule (residual " +
                    std::to_string(res) + ")");
}

}  // namespace detail

inline Eigen::MatrixXcd build_K(const std::vector<BoundState>& states, const DualBasis& duals) {
  detail::require_biorthonormal(states, duals, "build_K");
  const Eigen::VectorXd e = detail::energies_of(states);
  return rights_matrix(states) * e.cast<cxd>().asDiagonal() * duals.dual_bras;
}

inline Eigen::MatrixXcd build_L(const std::vector<BoundState>& states, const DualBasis& duals) {
  detail::require_biorthonormal(states, duals, "build_L");
  const Eigen::VectorXd e = detail::energies_of(states);
  return duals.dual_kets * e.cast<cxd>().asDiagonal() * bras_matrix(states, duals.scheme);
}

// Hermitian-scheme metric xi = Phi Phi^dagger and inverse-sum Phi~ Phi~^dagger
inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> metric_xi(
    const std::vector<BoundState>& states, const DualBasis& duals) {
  if (duals.scheme != Scheme::hermitian)
    throw config_error("metric_xi: defined for the hermitian scheme");
  const Eigen::MatrixXcd phi = rights_matrix(states);
  return {phi * phi.adjoint(), duals.dual_kets * duals.dual_kets.adjoint()};
}

inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> metric_xi(
    const std::vector<BoundState>& states) {
  return metric_xi(states, dual_basis(states, overlap_matrix(states, Scheme::hermitian)));
}

struct LinearizedPair {
  Scheme scheme = Scheme::hermitian;
  Eigen::MatrixXcd k, l;
  Eigen::MatrixXcd xi, xi_inv;              // hermitian scheme
  Eigen::MatrixXcd mu, nu, mu_inv, nu_inv;  // nonhermitian scheme
  std::map<std::string, double> residuals;
};

// metric/commutator defects of an assembled pair, all in the max norm
inline std::map<std::string, double> intertwining_residuals(const LinearizedPair& p) {
  std::map<std::string, double> r;
  if (p.scheme == Scheme::hermitian) {
    r["xi_intertwining"] = max_abs(Eigen::MatrixXcd(p.xi * p.l - p.k * p.xi));
    r["xi_inv_intertwining"] = max_abs(Eigen::MatrixXcd(p.l * p.xi_inv - p.xi_inv * p.k));
    r["k_vs_l_adjoint"] = max_abs(Eigen::MatrixXcd(p.k - p.l.adjoint()));
  } else {
    r["mu_intertwining"] = max_abs(Eigen::MatrixXcd(p.k.adjoint() * p.mu - p.mu * p.k));
    r["nu_intertwining"] = max_abs(Eigen::MatrixXcd(p.nu * p.l - p.l.adjoint() * p.nu));
    r["mu_inv_intertwining"] =
        max_abs(Eigen::MatrixXcd(p.k * p.mu_inv - p.mu_inv * p.k.adjoint()));
    r["nu_inv_intertwining"] =
        max_abs(Eigen::MatrixXcd(p.l * p.nu_inv - p.nu_inv * p.l.adjoint()));
  }
  return r;
}

// build K, L and the scheme's metrics, then record every verification residual
//
// With m states in a dim-dimensional space every operator here has rank at
// most m, so the residual products are associated to keep a thin dim-by-m
// factor adjacent: the cost stays O(dim^2 m) instead of O(dim^3).
inline LinearizedPair linearize_states(const std::vector<BoundState>& states,
                                       const DualBasis& duals) {
  LinearizedPair p;
  p.scheme = duals.scheme;
  p.k = build_K(states, duals);
  p.l = build_L(states, duals);

  const Eigen::MatrixXcd phi = rights_matrix(states);
  if (p.scheme == Scheme::hermitian) {
    std::tie(p.xi, p.xi_inv) = metric_xi(states, duals);
    // xi = phi phi^dagger and xi_inv = kets kets^dagger, kept factored
    p.residuals["xi_intertwining"] = max_abs(
        Eigen::MatrixXcd(phi * (phi.adjoint() * p.l) - (p.k * phi) * phi.adjoint()));
    p.residuals["xi_inv_intertwining"] = max_abs(Eigen::MatrixXcd(
        (p.l * duals.dual_kets) * duals.dual_kets.adjoint() -
        duals.dual_kets * (duals.dual_kets.adjoint() * p.k)));
    p.residuals["k_vs_l_adjoint"] = max_abs(Eigen::MatrixXcd(p.k - p.l.adjoint()));
  } else {
    const Eigen::MatrixXcd w = bras_matrix(states, Scheme::nonhermitian);
    p.mu = duals.dual_bras.adjoint() * duals.dual_bras;
    p.nu = w.adjoint() * w;
    p.mu_inv = phi * phi.adjoint();
    p.nu_inv = duals.dual_kets * duals.dual_kets.adjoint();
    const Eigen::MatrixXcd bk = duals.dual_bras * p.k;  // m x dim
    p.residuals["mu_intertwining"] =
        max_abs(Eigen::MatrixXcd(bk.adjoint() * duals.dual_bras - duals.dual_bras.adjoint() * bk));
    const Eigen::MatrixXcd wl = w * p.l;  // m x dim
    p.residuals["nu_intertwining"] =
        max_abs(Eigen::MatrixXcd(w.adjoint() * wl - wl.adjoint() * w));
    const Eigen::MatrixXcd kp = p.k * phi;  // dim x m
    p.residuals["mu_inv_intertwining"] =
        max_abs(Eigen::MatrixXcd(kp * phi.adjoint() - phi * kp.adjoint()));
    const Eigen::MatrixXcd lk = p.l * duals.dual_kets;  // dim x m
    p.residuals["nu_inv_intertwining"] = max_abs(
        Eigen::MatrixXcd(lk * duals.dual_kets.adjoint() - duals.dual_kets * lk.adjoint()));
  }

  const Eigen::VectorXd e = detail::energies_of(states);
  const Eigen::MatrixXcd ediag = e.cast<cxd>().asDiagonal();
  p.residuals["k_action"] = max_abs(Eigen::MatrixXcd(p.k * phi - phi * ediag));
  p.residuals["l_action"] =
      max_abs(Eigen::MatrixXcd(p.l * duals.dual_kets - duals.dual_kets * ediag));
  if (phi.rows() == phi.cols()) {
    // complete state set: K must equal the plain similarity form Phi diag(E) Phi^{-1}
    const Eigen::MatrixXcd brute =
        phi * ediag * Eigen::PartialPivLU<Eigen::MatrixXcd>(phi).solve(
                          Eigen::MatrixXcd::Identity(phi.rows(), phi.cols()));
    p.residuals["k_brute_force"] = max_abs(Eigen::MatrixXcd(p.k - brute));
  }
  return p;
}

// spectral decomposition of a diagonalizable operator with real spectrum,
// together with the metric eta = W^dagger W that makes it quasi-Hermitian
struct SpectralDecomposition {
  std::vector<BoundState> states;
  Eigen::MatrixXcd eta, eta_inv;
  std::map<std::string, double> residuals;
};

inline SpectralDecomposition spectral_decomposition_nonhermitian(const Eigen::MatrixXcd& h0) {
  if (h0.rows() != h0.cols() || h0.rows() < 1)
    throw dimension_error("spectral_decomposition_nonhermitian: matrix must be square");
  std::vector<EigenPair> pairs = detail::decompose_general(h0);
  for (const EigenPair& p : pairs)
    if (std::abs(p.value.imag()) > 1e-10)
      throw unsupported_spectrum_error(
          "spectral_decomposition_nonhermitian: complex eigenvalue with Im = " +
          std::to_string(p.value.imag()));

  SpectralDecomposition d;
  const Eigen::Index n = h0.rows();
  d.states.resize(static_cast<size_t>(n));
  Eigen::MatrixXcd phi(n, n), w(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    BoundState& s = d.states[static_cast<size_t>(i)];
    s.branch = static_cast<int>(i);
    s.ordinal = 0;
    s.energy = pairs[static_cast<size_t>(i)].value.real();
    s.right = pairs[static_cast<size_t>(i)].right;
    s.left = pairs[static_cast<size_t>(i)].left;
    s.residual_right = (h0 * s.right - s.energy * s.right).norm();
    s.residual_left = (s.left * h0 - s.energy * s.left).norm();
    phi.col(i) = s.right;
    w.row(i) = s.left;
  }
  d.eta = w.adjoint() * w;
  d.eta_inv = phi * phi.adjoint();

  const Eigen::VectorXd e = detail::energies_of(d.states);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  d.residuals["reconstruction"] = max_abs(Eigen::MatrixXcd(phi * e.cast<cxd>().asDiagonal() * w - h0));
  d.residuals["completeness"] = max_abs(Eigen::MatrixXcd(phi * w - id));
  d.residuals["eta_hermiticity"] = hermiticity_defect(d.eta);
  d.residuals["eta_intertwining"] = max_abs(Eigen::MatrixXcd(h0.adjoint() * d.eta - d.eta * h0));
  d.residuals["eta_inv_intertwining"] =
      max_abs(Eigen::MatrixXcd(h0 * d.eta_inv - d.eta_inv * h0.adjoint()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ee(0.5 * (d.eta + d.eta.adjoint()));
  d.residuals["eta_min_eigenvalue"] = ee.eigenvalues().minCoeff();
  if (!(d.residuals["reconstruction"] <= 1e-6))
    throw non_diagonalizable_error(
        "spectral_decomposition_nonhermitian: reconstruction residual " +
        std::to_string(d.residuals["reconstruction"]) + "; eigenbasis too ill-conditioned");
  return d;
}

}  // namespace edh
