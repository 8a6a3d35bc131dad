#pragma once

// Bi-orthogonal bookkeeping over a finite set of bound states. Right vectors
// form the columns of Phi (dim x m); the bra side depends on the scheme:
//
//   hermitian     bra_a = right_a^dagger        (overlaps R = Phi^dagger Phi)
//   nonhermitian  bra_a = left_a                (R = W Phi)
//
// Dual bras R^{-1} B and dual kets Phi R^{-1} satisfy the Kronecker rule
// dual_bras * Phi = I, and Pi = Phi * dual_bras projects onto span(Phi).

#include <edh/nlevp.hpp>
#include <edh/types.hpp>

#include <vector>

namespace edh {

enum class Scheme { hermitian, nonhermitian };

inline const char* to_string(Scheme s) {
  return s == Scheme::hermitian ? "hermitian" : "nonhermitian";
}

inline Eigen::MatrixXcd rights_matrix(const std::vector<BoundState>& states) {
  if (states.empty()) throw config_error("rights_matrix: need at least one state");
  const Eigen::Index d = states.front().right.size();
  Eigen::MatrixXcd phi(d, static_cast<Eigen::Index>(states.size()));
  for (size_t a = 0; a < states.size(); ++a) {
    if (states[a].right.size() != d)
      throw dimension_error("rights_matrix: states live in different spaces");
    phi.col(static_cast<Eigen::Index>(a)) = states[a].right;
  }
  return phi;
}

inline Eigen::MatrixXcd bras_matrix(const std::vector<BoundState>& states, Scheme scheme) {
  if (states.empty()) throw config_error("bras_matrix: need at least one state");
  const Eigen::Index d = states.front().right.size();
  Eigen::MatrixXcd b(static_cast<Eigen::Index>(states.size()), d);
  for (size_t a = 0; a < states.size(); ++a) {
    if (states[a].right.size() != d || states[a].left.size() != d)
      throw dimension_error("bras_matrix: states live in different spaces");
    b.row(static_cast<Eigen::Index>(a)) = scheme == Scheme::hermitian
                                              ? Eigen::RowVectorXcd(states[a].right.adjoint())
                                              : states[a].left;
  }
  return b;
}

struct OverlapMatrix {
  Scheme scheme = Scheme::hermitian;
  Eigen::MatrixXcd r;  // m x m
  double sigma_max = 0;
  double sigma_min = 0;
  double condition = kInf;
};

inline OverlapMatrix overlap_matrix(const std::vector<BoundState>& states, Scheme scheme) {
  const Eigen::MatrixXcd phi = rights_matrix(states);
  if (phi.cols() > phi.rows())
    throw rank_deficient_error("overlap_matrix: more states than dimensions (" +
                               std::to_string(phi.cols()) + " > " + std::to_string(phi.rows()) +
                               "), overlap matrix cannot be invertible");
  OverlapMatrix o;
  o.scheme = scheme;
  o.r = bras_matrix(states, scheme) * phi;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(o.r);
  o.sigma_max = svd.singularValues()(0);
  o.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  o.condition = o.sigma_min > 0 ? o.sigma_max / o.sigma_min : kInf;
  return o;
}

struct DualBasis {
  Scheme scheme = Scheme::hermitian;
  Eigen::MatrixXcd dual_bras;  // m x dim, row a = <<phi_a|
  Eigen::MatrixXcd dual_kets;  // dim x m, col b = |phi^b>>
};

inline DualBasis dual_basis(const std::vector<BoundState>& states, const OverlapMatrix& overlap,
                            double cond_limit = 1e8) {
  if (!(overlap.condition < cond_limit))
    throw rank_deficient_error(
        "dual_basis: overlap matrix is numerically rank-deficient: condition " +
        std::to_string(overlap.condition) + " exceeds the limit (sigma_min = " +
        std::to_string(overlap.sigma_min) + ")");
  const Eigen::MatrixXcd phi = rights_matrix(states);
  const Eigen::MatrixXcd b = bras_matrix(states, overlap.scheme);
  const Eigen::Index m = overlap.r.rows();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(overlap.r);
  Eigen::MatrixXcd rinv = lu.solve(Eigen::MatrixXcd::Identity(m, m));
  rinv += lu.solve(Eigen::MatrixXcd::Identity(m, m) - overlap.r * rinv);  // one refinement step
  DualBasis d;
  d.scheme = overlap.scheme;
  d.dual_bras = rinv * b;
  d.dual_kets = phi * rinv;
  return d;
}

// max |dual_bras * Phi - I|: how well the Kronecker rule holds
inline double biorthonormality_residual(const std::vector<BoundState>& states,
                                        const DualBasis& duals) {
  const Eigen::MatrixXcd phi = rights_matrix(states);
  const Eigen::Index m = phi.cols();
  return max_abs(Eigen::MatrixXcd(duals.dual_bras * phi - Eigen::MatrixXcd::Identity(m, m)));
}

// Pi = sum_a |phi_a> <<phi_a|: identity on span, idempotent in general
inline Eigen::MatrixXcd completeness_projector(const std::vector<BoundState>& states,
                                               const DualBasis& duals) {
  return rights_matrix(states) * duals.dual_bras;
}

// max-norm defect of Pi^2 = Pi, with the square evaluated in factored form
// (rank-m projector in a dim-dimensional space: cost O(dim^2 m), not O(dim^3))
inline double projector_idempotency_defect(const std::vector<BoundState>& states,
                                           const DualBasis& duals) {
  const Eigen::MatrixXcd phi = rights_matrix(states);
  const Eigen::MatrixXcd pi_square = phi * ((duals.dual_bras * phi) * duals.dual_bras);
  return max_abs(Eigen::MatrixXcd(pi_square - completeness_projector(states, duals)));
}

}  // namespace edh
