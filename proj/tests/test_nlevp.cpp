#include <edh/nlevp.hpp>
#include <edh/oracles.hpp>

#include <catch2/catch_amalgamated.hpp>

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

EDHamiltonian two_window_step() {
  Eigen::MatrixXcd a = Eigen::Vector2cd(0.5, 5.0).asDiagonal();
  Eigen::MatrixXcd b = Eigen::Vector2cd(0.6, 2.0).asDiagonal();
  return make_step({{Interval{-kInf, 1.0}, a}, {Interval{1.0, kInf}, b}});
}

OscillatorParams osc_params(double lambda, int points) {
  OscillatorParams p;
  p.hbar = 1.0;
  p.g = 0.5;
  p.mass.m0 = 1.0;
  p.mass.lambda = lambda;
  p.grid = {-8.0, 8.0, points};
  return p;
}

}  // namespace

TEST_CASE("eigen_at on a frozen Hermitian 2x2") {
  Eigen::MatrixXcd h(2, 2);
  h << 0, 1, 1, 0;
  const auto pairs = eigen_at(make_constant(h), 0.0);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].value.real() == Catch::Approx(-1.0).margin(1e-14));
  CHECK(pairs[1].value.real() == Catch::Approx(1.0).margin(1e-14));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(std::abs(pairs[0].right(0)) - s) < 1e-14);
  CHECK(std::abs(std::abs(pairs[0].right(1)) - s) < 1e-14);
  for (const auto& p : pairs) {
    CHECK(std::abs(p.right.norm() - 1.0) < 1e-14);
    CHECK(std::abs((p.left * p.right)(0, 0) - 1.0) < 1e-14);
    CHECK(max_abs(Eigen::MatrixXcd(p.left - p.right.adjoint())) < 1e-14);
  }
}

TEST_CASE("eigen_at on a frozen non-Hermitian 2x2") {
  Eigen::MatrixXcd h(2, 2);
  h << 1, 1, 0, 2;
  const auto pairs = eigen_at(make_constant(h), 0.0);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].value.real() == Catch::Approx(1.0).margin(1e-14));
  CHECK(pairs[1].value.real() == Catch::Approx(2.0).margin(1e-14));
  // right vectors (1,0) and (1,1)/sqrt2 up to phase, lefts from the inverse
  CHECK(std::abs(pairs[0].right(0)) == Catch::Approx(1.0).margin(1e-14));
  CHECK(std::abs(pairs[0].right(1)) < 1e-14);
  CHECK(std::abs(pairs[1].right(0)) == Catch::Approx(1 / std::sqrt(2.0)).margin(1e-14));
  // bi-orthonormality across the set
  for (size_t i = 0; i < 2; ++i)
    for (size_t j = 0; j < 2; ++j) {
      const cxd v = (pairs[i].left * pairs[j].right)(0, 0);
      CHECK(std::abs(v - (i == j ? 1.0 : 0.0)) < 1e-13);
    }
  // left row for the lower state is (1,-1) up to the right vector's phase
  CHECK(std::abs(pairs[0].left(0)) == Catch::Approx(1.0).margin(1e-13));
  CHECK(std::abs(pairs[0].left(1)) == Catch::Approx(1.0).margin(1e-13));
}

TEST_CASE("eigen_at rejects defective matrices") {
  Eigen::MatrixXcd j2(2, 2);
  j2 << 0, 1, 0, 0;
  CHECK_THROWS_AS(eigen_at(make_constant(j2), 0.0), non_diagonalizable_error);
  j2 << 2, 1, 0, 2;
  CHECK_THROWS_AS(eigen_at(make_constant(j2), 0.0), non_diagonalizable_error);
}

TEST_CASE("eigen_at residuals and ordering on random matrices") {
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXcd a(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) a(i, j) = cxd(nd(rng), nd(rng));
    const EDHamiltonian m = make_constant(a);
    const auto pairs = eigen_at(m, 0.0);
    const double scale = a.cwiseAbs().maxCoeff();
    for (size_t i = 0; i < pairs.size(); ++i) {
      CHECK((a * pairs[i].right - pairs[i].value * pairs[i].right).norm() < 1e-12 * scale * 10);
      CHECK((pairs[i].left * a - pairs[i].value * pairs[i].left).norm() <
            1e-12 * scale * 10 * pairs[i].left.norm());
      if (i + 1 < pairs.size()) {
        const cxd u = pairs[i].value, v = pairs[i + 1].value;
        CHECK((u.real() < v.real() || (u.real() == v.real() && u.imag() <= v.imag())));
      }
      for (size_t j = 0; j < pairs.size(); ++j)
        CHECK(std::abs((pairs[i].left * pairs[j].right)(0, 0) - (i == j ? 1.0 : 0.0)) < 1e-11);
    }
  }
}

TEST_CASE("trace_branches on a constant model is flat with perfect matching") {
  const Eigen::MatrixXcd h = random_hermitian(5, 77);
  const EDHamiltonian m = make_constant(h);
  const BranchTable t = trace_branches(m, linspace(-1.0, 1.0, 9));
  CHECK(t.branch_count() == 5);
  CHECK(t.match_quality() == Catch::Approx(1.0).margin(1e-12));
  for (int b = 0; b < 5; ++b)
    for (size_t k = 0; k < t.grid.size(); ++k)
      CHECK(t.values[b][k] == t.values[b][0]);
}

TEST_CASE("trace_branches validates its grid") {
  const EDHamiltonian m = make_constant(random_hermitian(3, 5));
  CHECK_THROWS_AS(trace_branches(m, {0.0}), config_error);
  CHECK_THROWS_AS(trace_branches(m, {0.0, 0.0, 1.0}), config_error);
  OscillatorParams p = osc_params(1.0, 21);
  const EDHamiltonian o = make_ed_mass_oscillator(p);
  CHECK_THROWS_AS(trace_branches(o, {-2.0, 0.5, 1.0}), evaluation_error);
}

TEST_CASE("oscillator branches decrease and stay ordered") {
  const EDHamiltonian m = make_ed_mass_oscillator(osc_params(1.0, 201));
  const BranchTable t = trace_branches(m, linspace(0.1, 4.0, 41));
  REQUIRE(t.branch_count() == 201);
  CHECK(t.match_quality() > 0.7);
  for (int b = 0; b < 6; ++b)
    for (size_t k = 0; k + 1 < t.grid.size(); ++k) {
      // E_n(z) = (n + 1/2) sqrt(2g/m(z)) falls as the mass grows with z
      CHECK(t.values[b][k + 1].real() < t.values[b][k].real());
      CHECK(t.values[b][k].real() < t.values[b + 1][k].real());
    }
}

TEST_CASE("self-consistent roots of a constant model are its eigenvalues") {
  Eigen::MatrixXcd h = Eigen::Vector2cd(0.5, 2.0).asDiagonal();
  const BranchTable t = trace_branches(make_constant(h), linspace(0.0, 3.0, 17));
  const auto r0 = self_consistent_roots(t, 0);
  const auto r1 = self_consistent_roots(t, 1);
  REQUIRE(r0.size() == 1);
  REQUIRE(r1.size() == 1);
  CHECK(std::abs(r0[0] - 0.5) <= 1e-12);
  CHECK(std::abs(r1[0] - 2.0) <= 1e-12);
  CHECK_THROWS_AS(self_consistent_roots(t, 2), config_error);
  CHECK_THROWS_AS(self_consistent_roots(t, 0, -1.0), config_error);
}

TEST_CASE("self-consistent roots reject complex branches") {
  Eigen::MatrixXcd h(2, 2);
  h << 0, -1, 1, 0;  // eigenvalues +-i
  const BranchTable t = trace_branches(make_constant(h), linspace(-1.0, 1.0, 5));
  CHECK_THROWS_AS(self_consistent_roots(t, 0), complex_branch_error);
}

TEST_CASE("step model keeps only self-consistent energies") {
  const BranchTable t = trace_branches(two_window_step(), linspace(0.0, 3.0, 31));
  const auto r0 = self_consistent_roots(t, 0);
  const auto r1 = self_consistent_roots(t, 1);
  REQUIRE(r0.size() == 1);  // 0.5 in its own window; 0.6 is not
  CHECK(std::abs(r0[0] - 0.5) <= 1e-12);
  REQUIRE(r1.size() == 1);  // 2 in its own window; 5 is not
  CHECK(std::abs(r1[0] - 2.0) <= 1e-12);
}

TEST_CASE("solve_all matches direct diagonalization for constant models") {
  for (unsigned seed : {11u, 12u, 13u}) {
    const Eigen::MatrixXcd h = random_hermitian(6, seed);
    const EDHamiltonian m = make_constant(h);
    const auto direct = eigen_at(m, 0.0);
    const double lo = direct.front().value.real() - 1.0;
    const double hi = direct.back().value.real() + 1.0;
    const auto states = solve_all(m, {lo, hi}, 33);
    REQUIRE(states.size() == 6);
    for (size_t i = 0; i < 6; ++i) {
      CHECK(states[i].branch == static_cast<int>(i));
      CHECK(states[i].ordinal == 0);
      CHECK(std::abs(states[i].energy - direct[i].value.real()) <= 1e-10);
    }
  }
}

TEST_CASE("bound states carry certified eigenpairs") {
  const EDHamiltonian m = make_ed_mass_oscillator(osc_params(1.0, 151));
  const auto states = solve_all(m, {0.1, 4.0}, 33);
  REQUIRE(states.size() >= 4);
  for (const auto& s : states) {
    CHECK(std::abs(s.right.norm() - 1.0) <= 1e-12);
    CHECK(std::abs((s.left * s.right)(0, 0) - 1.0) <= 1e-12);
    CHECK(s.residual_right <= 1e-9 * (1.0 + std::abs(s.energy)));
    CHECK(s.residual_left <= 1e-9 * (1.0 + std::abs(s.energy)));
    CHECK(s.match_quality > 0.9);
    // fixed-point certificate: diagonalizing H(E) recovers E on the branch
    const auto pairs = eigen_at(m, s.energy);
    double best = kInf;
    for (const auto& p : pairs) best = std::min(best, std::abs(p.value.real() - s.energy));
    CHECK(best <= 1e-10);
  }
}

TEST_CASE("solver roots track the analytic oscillator oracle") {
  for (double lambda : {0.0, 1.0}) {
    OscillatorParams p = osc_params(lambda, 301);
    const EDHamiltonian m = make_ed_mass_oscillator(p);
    const auto states = solve_all(m, {0.1, 4.0}, 49);
    for (int n = 0; n <= 3; ++n) {
      const auto oracle = ho_analytic_roots(n, p);
      std::vector<double> found;
      for (const auto& s : states)
        if (s.branch == n) found.push_back(s.energy);
      REQUIRE(found.size() == 1);
      // finite-difference error grows with the level: h^2 (2n^2+2n+1)/32 scale
      CHECK(std::abs(found[0] - oracle[0]) < 2.5e-4 * (2 * n * n + 2 * n + 1));
    }
  }
}

TEST_CASE("grid refinement does not move converged roots") {
  const EDHamiltonian m = make_ed_mass_oscillator(osc_params(1.0, 151));
  const auto a = solve_all(m, {0.1, 4.0}, 33);
  const auto b = solve_all(m, {0.1, 4.0}, 65);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].branch == b[i].branch);
    CHECK(std::abs(a[i].energy - b[i].energy) <= 1e-9);
  }
}

TEST_CASE("an interval without fixed points yields no states") {
  Eigen::MatrixXcd h = Eigen::Vector2cd(10.0, 12.0).asDiagonal();
  const auto states = solve_all(make_constant(h), {0.0, 1.0}, 17);
  CHECK(states.empty());
}

TEST_CASE("automatic branch windowing matches full tracking") {
  // dim 80 exceeds the windowing threshold; a full trace is still feasible
  const EDHamiltonian m = make_ed_mass_oscillator(osc_params(0.0, 80));
  SolveOptions full;
  full.auto_window = false;
  const auto a = solve_all(m, {0.1, 4.0}, 33);
  const auto b = solve_all(m, {0.1, 4.0}, 33, full);
  REQUIRE(!a.empty());
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].branch == b[i].branch);
    CHECK(std::abs(a[i].energy - b[i].energy) <= 1e-11);
  }
}

TEST_CASE("solve_all validates its arguments") {
  const EDHamiltonian m = make_constant(random_hermitian(3, 9));
  CHECK_THROWS_AS(solve_all(m, {1.0, 0.0}, 17), config_error);
  CHECK_THROWS_AS(solve_all(m, {0.0, kInf}, 17), config_error);
  CHECK_THROWS_AS(solve_all(m, {0.0, 1.0}, 1), config_error);
}
