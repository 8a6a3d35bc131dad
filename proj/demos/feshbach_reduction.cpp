// Eliminate half of a 4x4 Hermitian matrix and watch the eliminated part
// come back as energy dependence: the reduced 2x2 block H_eff(z) has poles
// at the spectrum of the eliminated sector, its self-consistent energies
// reproduce the full spectrum exactly, and each reduced state lifts back to
// an exact full-space eigenvector.

#include <edh/biortho.hpp>
#include <edh/feshbach.hpp>
#include <edh/nlevp.hpp>

#include <cstdio>

int main() {
  Eigen::MatrixXcd h_r(4, 4);
  h_r << 2.0, 0.5, 0.3, 0.1,  //
      0.5, -1.0, 0.2, 0.4,    //
      0.3, 0.2, 1.0, 0.6,     //
      0.1, 0.4, 0.6, 3.0;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(4, 4);
  p(0, 0) = p(1, 1) = 1.0;  // keep coordinates 0,1; eliminate 2,3

  const edh::FeshbachModel m = edh::make_feshbach(h_r, p);
  std::printf("reduced rank %d of dimension %d; poles of H_eff(z):", m.rank, m.dim);
  for (double q : m.poles) std::printf(" %.6f", q);
  std::printf("\n");

  std::printf("\nfull spectrum and its recoverability from the reduced problem:\n");
  const auto rec = edh::recoverable_spectrum(m);
  for (const auto& r : rec)
    std::printf("  E = %13.9f  projection norm %.3f  pole gap %.3g  -> %s\n", r.value,
                r.p_norm, r.pole_gap, r.recoverable ? "recoverable" : "not recoverable");

  // solve z = E^(n)(z) for the 2x2 effective model, skipping small buffers
  // around the poles where H_eff(z) is singular
  const edh::EDHamiltonian model = edh::feshbach_model_as_ed(m);
  std::vector<edh::BoundState> found;
  for (const edh::Interval& seg : edh::admissible_segments(m, {-3.0, 4.0}, 1e-4)) {
    const int pts = std::max(33, static_cast<int>(seg.width() * 100));
    for (auto& s : edh::solve_all(model, seg, pts)) found.push_back(std::move(s));
  }

  std::printf("\nself-consistent energies of the reduced model, lifted back:\n");
  std::vector<edh::BoundState> lifted = found;
  for (auto& s : lifted) {
    Eigen::VectorXcd full = edh::feshbach_lift(m, s.energy, s.right);
    full.normalize();
    const double residual = (h_r * full - s.energy * full).norm();
    std::printf("  z = %13.9f  full-space eigenvector residual %.2e\n", s.energy, residual);
    s.right = full;
    s.left = full.adjoint();
  }

  // the lifted states live in the full 4-dimensional space, so all four of
  // them together form a complete bi-orthonormal system there
  const edh::DualBasis duals =
      edh::dual_basis(lifted, edh::overlap_matrix(lifted, edh::Scheme::hermitian));
  const Eigen::MatrixXcd pi = edh::completeness_projector(lifted, duals);
  std::printf("\n|Pi - I| over the lifted set = %.2e\n",
              edh::max_abs(Eigen::MatrixXcd(pi - Eigen::MatrixXcd::Identity(4, 4))));
  return 0;
}
