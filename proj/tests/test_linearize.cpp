#include <edh/linearize.hpp>
#include <edh/models.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

using namespace edh;

namespace {

Eigen::MatrixXcd random_hermitian(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cxd(nd(rng), nd(rng));
  return 0.5 * (a + a.adjoint());
}

// well-conditioned similarity S = I + 0.3*G applied to a real diagonal
Eigen::MatrixXd random_real_spectrum_matrix(int n, unsigned seed, Eigen::VectorXd* evals = nullptr) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = -3.0 + 6.0 * std::generate_canonical<double, 53>(rng);
  std::sort(d.data(), d.data() + n);
  for (int i = 1; i < n; ++i) d(i) = std::max(d(i), d(i - 1) + 0.05);  // keep gaps open
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = (i == j ? 1.0 : 0.0) + 0.3 * nd(rng);
  if (evals) *evals = d;
  return s * d.asDiagonal() * s.inverse();
}

BoundState state(double e, const Eigen::VectorXcd& right, const Eigen::RowVectorXcd& left) {
  BoundState s;
  s.energy = e;
  s.right = right;
  s.left = left;
  return s;
}

std::vector<BoundState> triangular_states() {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::VectorXcd r0(2), r1(2);
  r0 << 1, 0;
  r1 << s, s;
  Eigen::RowVectorXcd l0(2), l1(2);
  l0 << 1, -1;
  l1 << 0, std::sqrt(2.0);
  return {state(1.0, r0, l0), state(2.0, r1, l1)};
}

std::vector<BoundState> solved_states(const Eigen::MatrixXcd& h, Interval iv, int pts = 33) {
  return solve_all(make_constant(h), iv, pts);
}

const Eigen::MatrixXcd kTriangular = [] {
  Eigen::MatrixXcd h(2, 2);
  h << 1, 1, 0, 2;
  return h;
}();

}  // namespace

TEST_CASE("hermitian-scheme representative reproduces the frozen matrix") {
  const auto states = triangular_states();
  const DualBasis d = dual_basis(states, overlap_matrix(states, Scheme::hermitian));
  const LinearizedPair p = linearize_states(states, d);

  // complete set: K recovers the generating operator exactly
  CHECK(max_abs(Eigen::MatrixXcd(p.k - kTriangular)) < 1e-13);
  CHECK(max_abs(Eigen::MatrixXcd(p.l - p.k.adjoint())) < 1e-13);

  // frozen positive metric for the pair (1,0), (1,1)/sqrt2
  REQUIRE(p.xi.rows() == 2);
  CHECK(std::abs(p.xi(0, 0) - 1.5) < 1e-13);
  CHECK(std::abs(p.xi(0, 1) - 0.5) < 1e-13);
  CHECK(std::abs(p.xi(1, 0) - 0.5) < 1e-13);
  CHECK(std::abs(p.xi(1, 1) - 0.5) < 1e-13);
  CHECK(max_abs(Eigen::MatrixXcd(p.xi * p.xi_inv - Eigen::MatrixXcd::Identity(2, 2))) < 1e-12);

  // the two representatives are intertwined by the metric
  CHECK(p.residuals.at("xi_intertwining") < 1e-12);
  CHECK(p.residuals.at("xi_inv_intertwining") < 1e-12);
  CHECK(p.residuals.at("k_vs_l_adjoint") < 1e-13);
  CHECK(p.residuals.at("k_action") < 1e-13);
  CHECK(p.residuals.at("l_action") < 1e-13);
  CHECK(p.residuals.at("k_brute_force") < 1e-12);
}

TEST_CASE("nonhermitian-scheme metrics for the frozen pair") {
  const auto states = triangular_states();
  const DualBasis d = dual_basis(states, overlap_matrix(states, Scheme::nonhermitian));
  const LinearizedPair p = linearize_states(states, d);

  CHECK(max_abs(Eigen::MatrixXcd(p.k - kTriangular)) < 1e-13);
  CHECK(max_abs(Eigen::MatrixXcd(p.l - kTriangular)) < 1e-13);

  // mu = sum of dual-bra outer products: [[1,-1],[-1,3]]
  REQUIRE(p.mu.rows() == 2);
  CHECK(std::abs(p.mu(0, 0) - 1.0) < 1e-13);
  CHECK(std::abs(p.mu(0, 1) + 1.0) < 1e-13);
  CHECK(std::abs(p.mu(1, 0) + 1.0) < 1e-13);
  CHECK(std::abs(p.mu(1, 1) - 3.0) < 1e-13);
  CHECK(max_abs(Eigen::MatrixXcd(p.mu * p.mu_inv - Eigen::MatrixXcd::Identity(2, 2))) < 1e-12);
  CHECK(max_abs(Eigen::MatrixXcd(p.nu * p.nu_inv - Eigen::MatrixXcd::Identity(2, 2))) < 1e-12);

  CHECK(p.residuals.at("mu_intertwining") < 1e-12);
  CHECK(p.residuals.at("nu_intertwining") < 1e-12);
  CHECK(p.residuals.at("mu_inv_intertwining") < 1e-12);
  CHECK(p.residuals.at("nu_inv_intertwining") < 1e-12);
}

TEST_CASE("representative is independent of state ordering") {
  const Eigen::MatrixXcd h = random_hermitian(6, 91);
  auto states = solved_states(h, {-5.0, 5.0});
  REQUIRE(states.size() == 6);
  const LinearizedPair p =
      linearize_states(states, dual_basis(states, overlap_matrix(states, Scheme::hermitian)));

  auto shuffled = states;
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[1], shuffled[4]);
  const LinearizedPair q =
      linearize_states(shuffled, dual_basis(shuffled, overlap_matrix(shuffled, Scheme::hermitian)));

  CHECK(max_abs(Eigen::MatrixXcd(p.k - q.k)) < 1e-12);
  CHECK(max_abs(Eigen::MatrixXcd(p.l - q.l)) < 1e-12);
  CHECK(max_abs(Eigen::MatrixXcd(p.xi - q.xi)) < 1e-12);
}

TEST_CASE("subset of states still satisfies every metric relation") {
  const Eigen::MatrixXcd h = random_hermitian(6, 92);
  auto states = solved_states(h, {-5.0, 5.0});
  REQUIRE(states.size() == 6);
  states.resize(4);  // strict subset: dim 6, four states

  for (Scheme scheme : {Scheme::hermitian, Scheme::nonhermitian}) {
    const DualBasis d = dual_basis(states, overlap_matrix(states, scheme));
    const LinearizedPair p = linearize_states(states, d);
    for (const auto& [key, value] : p.residuals) {
      INFO(to_string(scheme) << " residual " << key);
      if (key == "k_brute_force") continue;  // not defined off the full space
      CHECK(value <= 1e-10);
    }
    CHECK(!p.residuals.count("k_brute_force"));
    // K acts as the energies on the span
    const Eigen::MatrixXcd phi = rights_matrix(states);
    for (std::size_t a = 0; a < states.size(); ++a)
      CHECK((p.k * phi.col(a) - states[a].energy * phi.col(a)).norm() <= 1e-10);
  }
}

TEST_CASE("hermitian metric is positive definite on a complete set") {
  const Eigen::MatrixXcd h = random_hermitian(5, 93);
  const auto states = solved_states(h, {-5.0, 5.0});
  REQUIRE(states.size() == 5);
  const LinearizedPair p =
      linearize_states(states, dual_basis(states, overlap_matrix(states, Scheme::hermitian)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p.xi);
  CHECK(es.eigenvalues().minCoeff() > 1e-8);
  CHECK(hermiticity_defect(p.xi) < 1e-12);
}

TEST_CASE("mismatched duals are rejected") {
  const auto states = triangular_states();
  DualBasis d = dual_basis(states, overlap_matrix(states, Scheme::hermitian));
  d.dual_bras(0, 0) += 0.5;  // break bi-orthonormality
  CHECK_THROWS_AS(build_K(states, d), edh_error);
  CHECK_THROWS_AS(linearize_states(states, d), edh_error);
}

TEST_CASE("spectral decomposition of the frozen triangular matrix") {
  const SpectralDecomposition sd = spectral_decomposition_nonhermitian(kTriangular);
  REQUIRE(sd.states.size() == 2);
  CHECK(std::abs(sd.states[0].energy - 1.0) < 1e-13);
  CHECK(std::abs(sd.states[1].energy - 2.0) < 1e-13);

  // eta proportional to [[1,-1],[-1,3]] with a positive scale
  const double scale = sd.eta(0, 0).real();
  REQUIRE(scale > 0.0);
  Eigen::MatrixXcd expected(2, 2);
  expected << 1, -1, -1, 3;
  CHECK(max_abs(Eigen::MatrixXcd(sd.eta / scale - expected)) < 1e-12);

  CHECK(sd.residuals.at("reconstruction") < 1e-13);
  CHECK(sd.residuals.at("completeness") < 1e-13);
  CHECK(sd.residuals.at("eta_hermiticity") < 1e-13);
  CHECK(sd.residuals.at("eta_intertwining") < 1e-12);
  CHECK(sd.residuals.at("eta_inv_intertwining") < 1e-12);
  CHECK(sd.residuals.at("eta_min_eigenvalue") > 0.0);
}

TEST_CASE("spectral decomposition of random real-spectrum matrices") {
  for (unsigned seed : {101u, 102u, 103u, 104u, 105u}) {
    Eigen::VectorXd evals;
    const Eigen::MatrixXd h0 = random_real_spectrum_matrix(6, seed, &evals);
    const SpectralDecomposition sd = spectral_decomposition_nonhermitian(h0);
    REQUIRE(sd.states.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(sd.states[i].energy - evals(i)) < 1e-9);

    CHECK(sd.residuals.at("reconstruction") <= 1e-9);
    CHECK(sd.residuals.at("completeness") <= 1e-9);
    CHECK(sd.residuals.at("eta_hermiticity") <= 1e-10);
    CHECK(sd.residuals.at("eta_intertwining") <= 1e-9);
    CHECK(sd.residuals.at("eta_inv_intertwining") <= 1e-9);
    CHECK(sd.residuals.at("eta_min_eigenvalue") > 0.0);

    // the decomposition's own eta matches an independent reassembly
    Eigen::MatrixXcd eta_sum = Eigen::MatrixXcd::Zero(6, 6);
    for (const auto& s : sd.states) eta_sum += s.left.adjoint() * s.left;
    CHECK(max_abs(Eigen::MatrixXcd(eta_sum - sd.eta)) <= 1e-10);
  }
}

TEST_CASE("spectral decomposition rejects unsupported inputs") {
  Eigen::MatrixXcd rot(2, 2);
  rot << 0, -1, 1, 0;  // eigenvalues +-i
  CHECK_THROWS_AS(spectral_decomposition_nonhermitian(rot), unsupported_spectrum_error);

  Eigen::MatrixXcd defective(2, 2);
  defective << 2, 1, 0, 2;
  CHECK_THROWS_AS(spectral_decomposition_nonhermitian(defective), non_diagonalizable_error);
}
