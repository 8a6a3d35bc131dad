#pragma once

// Nonlinear eigenvalue machinery: spectra of H(z) at frozen z, eigenvalue
// branches traced over a grid by eigenvector overlap, and the self-consistent
// fixed points z = E^(n)(z) that define the bound states.
//
// Hermitian models with a tridiagonal position-space form use LAPACK's
// indexed tridiagonal solver so only the branches near the search window are
// ever computed; everything else goes through dense Eigen solvers.

#include <edh/models.hpp>
#include <edh/types.hpp>

#include <lapacke.h>

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

namespace edh {

struct EigenPair {
  cxd value;
  Eigen::VectorXcd right;    // unit 2-norm
  Eigen::RowVectorXcd left;  // left * right = 1
};

namespace detail {

// deterministic phase: make the largest-magnitude component real positive
inline void canonical_phase(Eigen::VectorXcd& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const cxd a = v(imax);
  if (std::abs(a) > 0) v *= std::conj(a) / std::abs(a);
}

// eigenpairs of global index range [il, iu] (0-based, ascending order) of a
// real symmetric tridiagonal matrix
inline void stevr_range(const TridiagReal& t, int il, int iu, Eigen::VectorXd& w,
                        Eigen::MatrixXd& z) {
  const int n = static_cast<int>(t.diag.size());
  if (il < 0 || iu >= n || il > iu) throw edh_error("stevr_range: bad index range");
  std::vector<double> d(t.diag.data(), t.diag.data() + n);
  std::vector<double> e(n);
  for (int i = 0; i + 1 < n; ++i) e[static_cast<size_t>(i)] = t.sub(i);
  const int m_want = iu - il + 1;
  w.resize(m_want);
  z.resize(n, m_want);
  std::vector<lapack_int> isuppz(static_cast<size_t>(2 * m_want));
  lapack_int m_found = 0;
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0,
                                         0.0, il + 1, iu + 1, 0.0, &m_found, w.data(), z.data(),
                                         n, isuppz.data());
  if (info != 0 || m_found != m_want)
    throw edh_error("tridiagonal eigensolver failed, info = " + std::to_string(info));
}

// count of eigenvalues <= bound for a real symmetric tridiagonal matrix
inline int stevr_count_below(const TridiagReal& t, double bound) {
  const int n = static_cast<int>(t.diag.size());
  std::vector<double> d(t.diag.data(), t.diag.data() + n);
  std::vector<double> e(n);
  for (int i = 0; i + 1 < n; ++i) e[static_cast<size_t>(i)] = t.sub(i);
  std::vector<double> w(static_cast<size_t>(n));
  lapack_int m_found = 0;
  const lapack_int info =
      LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'V', n, d.data(), e.data(),
                     -std::numeric_limits<double>::max(), bound, 1, 1, 0.0, &m_found, w.data(),
                     nullptr, n, nullptr);
  if (info != 0) throw edh_error("tridiagonal eigenvalue count failed");
  return static_cast<int>(m_found);
}

inline std::vector<EigenPair> decompose_hermitian(const Eigen::MatrixXcd& a) {
  const Eigen::MatrixXcd sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
  if (es.info() != Eigen::Success) throw edh_error("hermitian eigensolver failed");
  std::vector<EigenPair> out(static_cast<size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    EigenPair& p = out[static_cast<size_t>(i)];
    p.value = cxd(es.eigenvalues()(i), 0.0);
    p.right = es.eigenvectors().col(i);
    canonical_phase(p.right);
    p.left = p.right.adjoint();
  }
  return out;
}

inline std::vector<EigenPair> decompose_general(const Eigen::MatrixXcd& a) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a, true);
  if (es.info() != Eigen::Success) throw edh_error("general eigensolver failed");
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    const cxd vi = es.eigenvalues()(i), vj = es.eigenvalues()(j);
    if (vi.real() != vj.real()) return vi.real() < vj.real();
    return vi.imag() < vj.imag();
  });
  Eigen::MatrixXcd v(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::VectorXcd col = es.eigenvectors().col(order[static_cast<size_t>(c)]);
    col.normalize();
    canonical_phase(col);
    v.col(c) = col;
  }
  // rows of V^{-1} are the bi-normalized left eigenvectors; a defective input
  // shows up as a (numerically) singular eigenvector matrix
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v);
  const Eigen::MatrixXcd w = lu.solve(Eigen::MatrixXcd::Identity(n, n));
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(w.row(i).norm() < 1e10))
      throw non_diagonalizable_error(
          "matrix is not diagonalizable (left eigenvector norm exceeds 1e10)");
  std::vector<EigenPair> out(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    EigenPair& p = out[static_cast<size_t>(i)];
    p.value = es.eigenvalues()(order[static_cast<size_t>(i)]);
    p.right = v.col(i);
    p.left = w.row(i);
  }
  return out;
}

}  // namespace detail

// full spectrum of H(z), ascending by (Re, Im)
inline std::vector<EigenPair> eigen_at(const EDHamiltonian& h, double z) {
  const Eigen::MatrixXcd a = h.eval(z);
  return h.hermitian_each_z() ? detail::decompose_hermitian(a) : detail::decompose_general(a);
}

struct TraceOptions {
  double ambiguity_threshold = 0.7;
  // global eigenvalue-index window [first, last] to track; all of them when unset
  std::optional<std::pair<int, int>> index_range;
};

struct BranchTable {
  EDHamiltonian model;
  std::vector<double> grid;
  int index_offset = 0;  // global index of local branch 0
  double ambiguity_threshold = 0.7;
  std::vector<std::vector<cxd>> values;                // [branch][grid point]
  std::vector<std::vector<Eigen::VectorXcd>> rights;   // unit vectors
  std::vector<std::vector<Eigen::RowVectorXcd>> lefts; // bi-normalized rows
  std::vector<double> step_quality;    // per grid step, min overlap over branches
  std::vector<double> branch_quality;  // per branch, min overlap along the trace

  int branch_count() const { return static_cast<int>(values.size()); }
  double match_quality() const {
    return step_quality.empty() ? 1.0
                                : *std::min_element(step_quality.begin(), step_quality.end());
  }
};

namespace detail {

// spectrum slice of H(z) restricted to global index window [il, iu]
inline std::vector<EigenPair> window_pairs(const EDHamiltonian& h, double z, int il, int iu) {
  if (h.hermitian_each_z() && h.has_tridiag()) {
    const TridiagReal t = h.eval_tridiag(z);
    Eigen::VectorXd w;
    Eigen::MatrixXd zm;
    stevr_range(t, il, iu, w, zm);
    std::vector<EigenPair> out(static_cast<size_t>(iu - il + 1));
    for (int c = 0; c <= iu - il; ++c) {
      EigenPair& p = out[static_cast<size_t>(c)];
      p.value = cxd(w(c), 0.0);
      Eigen::VectorXcd v = zm.col(c).cast<cxd>();
      v.normalize();
      canonical_phase(v);
      p.right = std::move(v);
      p.left = p.right.adjoint();
    }
    return out;
  }
  std::vector<EigenPair> all = eigen_at(h, z);
  return {all.begin() + il, all.begin() + iu + 1};
}

// normalized mutual overlap used for branch matching
inline double overlap(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0 || nb == 0) return 0.0;
  return std::abs(a.dot(b)) / (na * nb);  // Eigen's dot conjugates the left argument
}

}  // namespace detail

// Follow all (or a window of) eigenvalue branches across a strictly increasing
// grid, assigning eigenvectors between neighboring points by greedy maximal
// overlap. An assignment below the ambiguity threshold aborts: refine the grid.
inline BranchTable trace_branches(const EDHamiltonian& h, const std::vector<double>& grid,
                                  const TraceOptions& opts = {}) {
  if (grid.size() < 2) throw config_error("trace_branches: need at least 2 grid points");
  for (size_t k = 0; k + 1 < grid.size(); ++k)
    if (!(grid[k] < grid[k + 1]))
      throw config_error("trace_branches: grid must be strictly increasing");
  for (double z : grid)
    if (!h.admissible(z))
      throw model_domain_error("trace_branches: grid point z = " + std::to_string(z) +
                               " outside the model domain");

  int il = 0, iu = h.dim() - 1;
  if (opts.index_range) {
    il = opts.index_range->first;
    iu = opts.index_range->second;
    if (il < 0 || iu >= h.dim() || il > iu)
      throw config_error("trace_branches: index window out of range");
  }
  const int nb = iu - il + 1;

  BranchTable table;
  table.model = h;
  table.grid = grid;
  table.index_offset = il;
  table.ambiguity_threshold = opts.ambiguity_threshold;
  table.values.assign(static_cast<size_t>(nb), {});
  table.rights.assign(static_cast<size_t>(nb), {});
  table.lefts.assign(static_cast<size_t>(nb), {});
  table.branch_quality.assign(static_cast<size_t>(nb), 1.0);

  std::vector<EigenPair> prev = detail::window_pairs(h, grid[0], il, iu);
  for (int b = 0; b < nb; ++b) {
    table.values[static_cast<size_t>(b)].push_back(prev[static_cast<size_t>(b)].value);
    table.rights[static_cast<size_t>(b)].push_back(prev[static_cast<size_t>(b)].right);
    table.lefts[static_cast<size_t>(b)].push_back(prev[static_cast<size_t>(b)].left);
  }

  for (size_t k = 1; k < grid.size(); ++k) {
    std::vector<EigenPair> cur = detail::window_pairs(h, grid[k], il, iu);
    // greedy assignment on the overlap matrix
    Eigen::MatrixXd ov(nb, nb);
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j)
        ov(i, j) = detail::overlap(table.rights[static_cast<size_t>(i)].back(),
                                   cur[static_cast<size_t>(j)].right);
    std::vector<int> assign(static_cast<size_t>(nb), -1);
    std::vector<bool> used_row(static_cast<size_t>(nb), false), used_col(used_row);
    double step_min = 1.0;
    for (int pick = 0; pick < nb; ++pick) {
      int bi = -1, bj = -1;
      double best = -1.0;
      for (int i = 0; i < nb; ++i) {
        if (used_row[static_cast<size_t>(i)]) continue;
        for (int j = 0; j < nb; ++j) {
          if (used_col[static_cast<size_t>(j)]) continue;
          if (ov(i, j) > best) {
            best = ov(i, j);
            bi = i;
            bj = j;
          }
        }
      }
      assign[static_cast<size_t>(bi)] = bj;
      used_row[static_cast<size_t>(bi)] = true;
      used_col[static_cast<size_t>(bj)] = true;
      step_min = std::min(step_min, best);
      table.branch_quality[static_cast<size_t>(bi)] =
          std::min(table.branch_quality[static_cast<size_t>(bi)], best);
    }
    if (step_min < opts.ambiguity_threshold)
      throw ambiguity_error("trace_branches: eigenvector overlap " + std::to_string(step_min) +
                            " below threshold between z = " + std::to_string(grid[k - 1]) +
                            " and z = " + std::to_string(grid[k]) + "; refine the grid");
    table.step_quality.push_back(step_min);
    for (int b = 0; b < nb; ++b) {
      EigenPair& p = cur[static_cast<size_t>(assign[static_cast<size_t>(b)])];
      table.values[static_cast<size_t>(b)].push_back(p.value);
      table.rights[static_cast<size_t>(b)].push_back(std::move(p.right));
      table.lefts[static_cast<size_t>(b)].push_back(std::move(p.left));
    }
  }
  return table;
}

namespace detail {

// branch-consistent eigenpair of H(z) at off-grid z: pick the candidate with
// maximal overlap against the branch vector at the nearest grid point
inline EigenPair branch_pair_at(const BranchTable& t, int branch, double z) {
  size_t kstar = 0;
  double dist = kInf;
  for (size_t k = 0; k < t.grid.size(); ++k) {
    const double d = std::abs(t.grid[k] - z);
    if (d < dist) {
      dist = d;
      kstar = k;
    }
  }
  const Eigen::VectorXcd& ref = t.rights[static_cast<size_t>(branch)][kstar];
  const int il = t.index_offset;
  const int iu = t.index_offset + t.branch_count() - 1;
  std::vector<EigenPair> cand = window_pairs(t.model, z, il, iu);
  size_t best = 0;
  double bestov = -1.0;
  for (size_t c = 0; c < cand.size(); ++c) {
    const double o = overlap(ref, cand[c].right);
    if (o > bestov) {
      bestov = o;
      best = c;
    }
  }
  return cand[best];
}

}  // namespace detail

// All z in the table's grid span with z = E^(branch)(z), to |E(z) - z| <= tol
// (scaled by the local slope where the branch is steep, so a genuine root next
// to a resolvent pole is kept while a branch jump across z — a sign change
// with no fixed point — still collapses its bracket and is rejected).
inline std::vector<double> self_consistent_roots(const BranchTable& t, int branch,
                                                 double tol = 1e-12) {
  if (branch < 0 || branch >= t.branch_count())
    throw config_error("self_consistent_roots: branch index out of range");
  if (!(tol > 0)) throw config_error("self_consistent_roots: tol must be positive");
  const auto& vals = t.values[static_cast<size_t>(branch)];
  for (size_t k = 0; k < vals.size(); ++k)
    if (std::abs(vals[k].imag()) > 1e-10)
      throw complex_branch_error("self_consistent_roots: branch " + std::to_string(branch) +
                                 " has complex values (Im = " + std::to_string(vals[k].imag()) +
                                 ")");
  auto f_at = [&](double z) { return detail::branch_pair_at(t, branch, z).value.real() - z; };

  std::vector<double> roots;
  std::vector<double> f(t.grid.size());
  for (size_t k = 0; k < t.grid.size(); ++k) f[k] = vals[k].real() - t.grid[k];
  for (size_t k = 0; k < t.grid.size(); ++k)
    if (std::abs(f[k]) <= tol) roots.push_back(t.grid[k]);
  for (size_t k = 0; k + 1 < t.grid.size(); ++k) {
    if (std::abs(f[k]) <= tol || std::abs(f[k + 1]) <= tol) continue;
    if (f[k] * f[k + 1] > 0) continue;
    // |f| at a collapsed bracket scales with the local slope; a jump keeps
    // |f| at the size of the discontinuity instead
    const double cell_slope = std::abs(f[k + 1] - f[k]) / (t.grid[k + 1] - t.grid[k]);
    const double accept_tol = tol * std::max(1.0, cell_slope);
    double a = t.grid[k], b = t.grid[k + 1], fa = f[k];
    bool found = false;
    double best_mid = 0, best_abs = kInf;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = f_at(mid);
      if (std::abs(fm) < best_abs) {
        best_abs = std::abs(fm);
        best_mid = mid;
      }
      if (std::abs(fm) <= tol) {
        roots.push_back(mid);
        found = true;
        break;
      }
      if (fa * fm < 0) {
        b = mid;
      } else {
        a = mid;
        fa = fm;
      }
      if ((b - a) <= 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid)))
        break;  // collapsed: a steep root passes the slope-scaled test, a jump fails it
    }
    if (!found && best_abs <= accept_tol) roots.push_back(best_mid);
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots)
    if (out.empty() || r - out.back() > 10 * tol) out.push_back(r);
  return out;
}

struct SolveOptions {
  double tol = 1e-12;
  double ambiguity_threshold = 0.7;
  std::optional<std::pair<int, int>> branch_range;  // explicit global index window
  bool auto_window = true;  // prune far branches for large tridiagonal Hermitian models
};

struct BoundState {
  int branch = 0;   // n: global branch index
  int ordinal = 0;  // j: position among the branch's roots, ascending energy
  double energy = 0;
  Eigen::VectorXcd right;    // unit norm
  Eigen::RowVectorXcd left;  // left * right = 1
  double residual_right = 0;
  double residual_left = 0;
  double match_quality = 1.0;
};

namespace detail {

inline double residual_right_norm(const EDHamiltonian& h, double e, const Eigen::VectorXcd& v) {
  if (h.hermitian_each_z() && h.has_tridiag() && h.dim() > 512) {
    const TridiagReal t = h.eval_tridiag(e);
    const Eigen::Index n = v.size();
    Eigen::VectorXcd r = t.diag.cast<cxd>().cwiseProduct(v) - e * v;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      r(i) += t.sub(i) * v(i + 1);
      r(i + 1) += t.sub(i) * v(i);
    }
    return r.norm();
  }
  const Eigen::MatrixXcd a = h.eval(e);
  return (a * v - e * v).norm();
}

inline double residual_left_norm(const EDHamiltonian& h, double e,
                                 const Eigen::RowVectorXcd& l) {
  if (h.hermitian_each_z() && h.has_tridiag() && h.dim() > 512) {
    Eigen::VectorXcd v = l.adjoint();
    v.normalize();
    return residual_right_norm(h, e, v) * l.norm();
  }
  const Eigen::MatrixXcd a = h.eval(e);
  return (l * a - e * l).norm();
}

}  // namespace detail

// Solve the self-consistency problem over a closed interval: trace branches on
// a uniform grid, locate every fixed point per branch, then re-diagonalize at
// each root and return bi-normalized bound states ordered by (branch, energy).
inline std::vector<BoundState> solve_all(const EDHamiltonian& h, Interval interval,
                                         int grid_points, const SolveOptions& opts = {}) {
  if (!interval.bounded() || !(interval.lo < interval.hi))
    throw config_error("solve_all: interval must be bounded with lo < hi");
  if (grid_points < 2) throw config_error("solve_all: need at least 2 grid points");

  TraceOptions topt;
  topt.ambiguity_threshold = opts.ambiguity_threshold;
  if (opts.branch_range) {
    topt.index_range = opts.branch_range;
  } else if (opts.auto_window && h.hermitian_each_z() && h.has_tridiag() && h.dim() > 64) {
    // keep every branch that can reach values <= hi + width over the interval
    const double margin = interval.width();
    int count = 0;
    for (double z : {interval.lo, 0.5 * (interval.lo + interval.hi), interval.hi}) {
      if (!h.admissible(z)) continue;
      count = std::max(count,
                       detail::stevr_count_below(h.eval_tridiag(z), interval.hi + margin));
    }
    count = std::min(h.dim(), count + 2);
    topt.index_range = {0, std::max(count, 1) - 1};
  }

  const BranchTable table = trace_branches(h, linspace(interval.lo, interval.hi, grid_points), topt);

  std::vector<BoundState> states;
  for (int b = 0; b < table.branch_count(); ++b) {
    const std::vector<double> roots = self_consistent_roots(table, b, opts.tol);
    int j = 0;
    for (double z : roots) {
      EigenPair p = detail::branch_pair_at(table, b, z);
      if (std::abs(p.value.imag()) > 1e-10) continue;
      BoundState s;
      s.branch = table.index_offset + b;
      s.ordinal = j++;
      s.energy = z;
      s.right = std::move(p.right);
      s.left = std::move(p.left);
      s.residual_right = detail::residual_right_norm(h, z, s.right);
      s.residual_left = detail::residual_left_norm(h, z, s.left);
      s.match_quality = table.branch_quality[static_cast<size_t>(b)];
      states.push_back(std::move(s));
    }
  }
  return states;
}

}  // namespace edh
