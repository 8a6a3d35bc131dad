// Walk the whole machinery on a 2x2 matrix small enough to check by hand:
//
//   H0 = [1 1]      eigenvalues 1 and 2, right eigenvectors (1,0) and
//        [0 2]      (1,1)/sqrt(2) -- non-orthogonal, so the dual basis,
//                   the metric, and the linearized representatives are all
//                   nontrivial while every number stays recognizable.

#include <edh/biortho.hpp>
#include <edh/linearize.hpp>
#include <edh/models.hpp>
#include <edh/nlevp.hpp>

#include <cstdio>

namespace {

void print_matrix(const char* label, const Eigen::MatrixXcd& m) {
  std::printf("%s =\n", label);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::printf("  ");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const edh::cxd v = m(i, j);
      if (std::abs(v.imag()) > 1e-12)
        std::printf("%9.5f%+.5fi ", v.real(), v.imag());
      else
        std::printf("%9.5f ", v.real());
    }
    std::printf("\n");
  }
}

}  // namespace

int main() {
  Eigen::MatrixXcd h0(2, 2);
  h0 << 1, 1, 0, 2;

  // 1. treat H0 as an (energy-independent) model and solve z = E^(n)(z)
  const edh::EDHamiltonian model = edh::make_constant(h0);
  const auto states = edh::solve_all(model, {0.0, 3.0}, 31);
  std::printf("solved %zu self-consistent states:\n", states.size());
  for (const auto& s : states)
    std::printf("  branch %d: E = %.12f, residual = %.2e\n", s.branch, s.energy,
                s.residual_right);

  // 2. dual basis from the Gram matrix of the right eigenvectors
  const edh::OverlapMatrix overlap = edh::overlap_matrix(states, edh::Scheme::hermitian);
  std::printf("\noverlap condition = %.6f\n", overlap.condition);
  const edh::DualBasis duals = edh::dual_basis(states, overlap);
  std::printf("biorthonormality residual = %.2e\n",
              edh::biorthonormality_residual(states, duals));

  // 3. energy-independent representatives and the metric
  const edh::LinearizedPair pair = edh::linearize_states(states, duals);
  print_matrix("\nK (acts as H0 on the solved states)", pair.k);
  print_matrix("xi (metric intertwining K with L)", pair.xi);
  for (const auto& [name, value] : pair.residuals)
    std::printf("  %-22s = %.2e\n", name.c_str(), value);

  // 4. the same matrix through the non-Hermitian spectral route: a positive
  //    metric eta with eta H0 = H0^+ eta certifies the real spectrum
  const edh::SpectralDecomposition sd = edh::spectral_decomposition_nonhermitian(h0);
  print_matrix("\neta (quasi-Hermiticity metric)", sd.eta);
  std::printf("eta intertwining residual = %.2e, smallest eta eigenvalue = %.6f\n",
              sd.residuals.at("eta_intertwining"), sd.residuals.at("eta_min_eigenvalue"));
  return 0;
}
