#pragma once

// Quasi-exactly-solvable sector of the radial sextic oscillator
//
//   -u''(r) + (A r^2 + 2 b r^4 + r^6) u(r) = E u(r),   u(0) = 0,
//
// closed in exact arithmetic. With A = A_N = b^2 - 4N - 5 the ansatz
// u = p(r^2) * r * exp(-r^4/4 - b r^2/2), deg p = N, truncates, and the N+1
// sector energies are the eigenvalues of a tridiagonal (N+1)x(N+1) matrix M
// with rational entries. Energies are algebraic, not rational, so exactness
// lives in the quotient field Q[E]/(charpoly(M)): wavefunction coefficients
// and the Schroedinger residual are computed there with cpp_rational
// coefficients, and "residual == 0" is an exact statement for every sector
// energy at once.

#include <edh/types.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <vector>

namespace edh {

using rat = boost::multiprecision::cpp_rational;

// dense univariate polynomial over Q, coefficient k belongs to X^k
using RatPoly = std::vector<rat>;

namespace ratpoly {

inline void trim(RatPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

inline bool is_zero(const RatPoly& p) {
  for (const auto& c : p)
    if (c != 0) return false;
  return true;
}

inline RatPoly add(const RatPoly& a, const RatPoly& b) {
  RatPoly r(std::max(a.size(), b.size()), rat(0));
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  trim(r);
  return r;
}

inline RatPoly sub(const RatPoly& a, const RatPoly& b) {
  RatPoly r(std::max(a.size(), b.size()), rat(0));
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  trim(r);
  return r;
}

inline RatPoly mul(const RatPoly& a, const RatPoly& b) {
  if (is_zero(a) || is_zero(b)) return {};
  RatPoly r(a.size() + b.size() - 1, rat(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  trim(r);
  return r;
}

inline RatPoly scale(const RatPoly& a, const rat& s) {
  if (s == 0) return {};
  RatPoly r = a;
  for (auto& c : r) c *= s;
  return r;
}

inline RatPoly derivative(const RatPoly& a) {
  if (a.size() < 2) return {};
  RatPoly r(a.size() - 1);
  for (size_t i = 1; i < a.size(); ++i) r[i - 1] = a[i] * rat(static_cast<long>(i));
  return r;
}

// remainder of a modulo a monic divisor
inline RatPoly mod_monic(RatPoly a, const RatPoly& m) {
  trim(a);
  const size_t dm = m.size() - 1;
  while (a.size() > dm) {
    const rat lead = a.back();
    const size_t shift = a.size() - 1 - dm;
    if (lead != 0)
      for (size_t i = 0; i < dm; ++i) a[shift + i] -= lead * m[i];
    a.pop_back();
    trim(a);
    if (a.size() <= dm) break;
  }
  return a;
}

inline double eval_double(const RatPoly& p, double x) {
  long double acc = 0;
  for (size_t i = p.size(); i-- > 0;) acc = acc * x + static_cast<long double>(p[i]);
  return static_cast<double>(acc);
}

}  // namespace ratpoly

// element of Q[E]/(modulus); plain reduced polynomial in E
struct QuotientField {
  RatPoly modulus;  // monic

  RatPoly reduce(const RatPoly& p) const { return ratpoly::mod_monic(p, modulus); }
  RatPoly from_rat(const rat& c) const { return c == 0 ? RatPoly{} : RatPoly{c}; }
  RatPoly generator() const { return reduce(RatPoly{rat(0), rat(1)}); }
  RatPoly add(const RatPoly& a, const RatPoly& b) const { return ratpoly::add(a, b); }
  RatPoly sub(const RatPoly& a, const RatPoly& b) const { return ratpoly::sub(a, b); }
  RatPoly mul(const RatPoly& a, const RatPoly& b) const { return reduce(ratpoly::mul(a, b)); }
  RatPoly scale(const RatPoly& a, const rat& s) const { return ratpoly::scale(a, s); }
};

using FieldElem = RatPoly;

// polynomial in r whose coefficients live in Q[E]/(charpoly)
struct FieldPoly {
  std::vector<FieldElem> c;  // c[k] multiplies r^k

  bool is_zero() const {
    for (const auto& e : c)
      if (!ratpoly::is_zero(e)) return false;
    return true;
  }
  size_t degree_bound() const { return c.size(); }
};

namespace fieldpoly {

inline FieldPoly add(const QuotientField& F, const FieldPoly& a, const FieldPoly& b) {
  FieldPoly r;
  r.c.resize(std::max(a.c.size(), b.c.size()));
  for (size_t i = 0; i < r.c.size(); ++i) {
    FieldElem ai = i < a.c.size() ? a.c[i] : FieldElem{};
    FieldElem bi = i < b.c.size() ? b.c[i] : FieldElem{};
    r.c[i] = F.add(ai, bi);
  }
  return r;
}

inline FieldPoly sub(const QuotientField& F, const FieldPoly& a, const FieldPoly& b) {
  FieldPoly r;
  r.c.resize(std::max(a.c.size(), b.c.size()));
  for (size_t i = 0; i < r.c.size(); ++i) {
    FieldElem ai = i < a.c.size() ? a.c[i] : FieldElem{};
    FieldElem bi = i < b.c.size() ? b.c[i] : FieldElem{};
    r.c[i] = F.sub(ai, bi);
  }
  return r;
}

inline FieldPoly mul(const QuotientField& F, const FieldPoly& a, const FieldPoly& b) {
  FieldPoly r;
  if (a.c.empty() || b.c.empty()) return r;
  r.c.resize(a.c.size() + b.c.size() - 1);
  for (size_t i = 0; i < a.c.size(); ++i) {
    if (ratpoly::is_zero(a.c[i])) continue;
    for (size_t j = 0; j < b.c.size(); ++j) {
      if (ratpoly::is_zero(b.c[j])) continue;
      r.c[i + j] = F.add(r.c[i + j], F.mul(a.c[i], b.c[j]));
    }
  }
  return r;
}

inline FieldPoly scale(const QuotientField& F, const FieldPoly& a, const FieldElem& s) {
  FieldPoly r;
  r.c.resize(a.c.size());
  for (size_t i = 0; i < a.c.size(); ++i) r.c[i] = F.mul(a.c[i], s);
  return r;
}

inline FieldPoly d_dr(const FieldPoly& a) {
  FieldPoly r;
  if (a.c.size() < 2) return r;
  r.c.resize(a.c.size() - 1);
  for (size_t i = 1; i < a.c.size(); ++i)
    r.c[i - 1] = ratpoly::scale(a.c[i], rat(static_cast<long>(i)));
  return r;
}

}  // namespace fieldpoly

struct QESSolution {
  int N = 0;
  double b = 0;
  rat b_exact;
  rat A_exact;  // A_N = b^2 - 4N - 5
  double A = 0;
  std::vector<double> energies;                 // ascending, N+1 of them
  RatPoly charpoly;                             // monic, exact
  std::vector<FieldElem> coeff_symbolic;        // c_0..c_N in Q[E]/(charpoly)
  std::vector<std::vector<double>> poly_coeffs; // per energy: c_k evaluated at E_j

  QuotientField field() const { return QuotientField{charpoly}; }
};

namespace detail {

// sector matrix M, tridiagonal rational (N+1)x(N+1); M c = E c closes the
// recurrence for p(r^2) = sum c_k r^{2k}
inline rat sector_diag(const rat& b, int j) { return b * rat(4 * j + 3); }
inline rat sector_super(int j) { return rat(-(2 * j + 3) * (2 * j + 2)); }
inline rat sector_sub(int j, int N) { return rat(4 * (j - N - 1)); }

inline RatPoly sector_charpoly(const rat& b, int N) {
  // det(XI - M) by the three-term principal-minor recurrence
  RatPoly pm1{rat(1)};  // D_0
  RatPoly p = ratpoly::sub(RatPoly{rat(0), rat(1)}, RatPoly{sector_diag(b, 0)});
  for (int k = 1; k <= N; ++k) {
    RatPoly x_minus_d = ratpoly::sub(RatPoly{rat(0), rat(1)}, RatPoly{sector_diag(b, k)});
    RatPoly next = ratpoly::sub(ratpoly::mul(x_minus_d, p),
                                ratpoly::scale(pm1, sector_super(k - 1) * sector_sub(k, N)));
    pm1 = std::move(p);
    p = std::move(next);
  }
  return p;
}

inline std::vector<double> sector_energies(const rat& b, int N, const RatPoly& charpoly) {
  const int n = N + 1;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    M(j, j) = static_cast<double>(sector_diag(b, j));
    if (j + 1 < n) {
      M(j, j + 1) = static_cast<double>(sector_super(j));
      M(j + 1, j) = static_cast<double>(sector_sub(j + 1, N));
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  std::vector<double> ev(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<size_t>(i)] = es.eigenvalues()(i).real();
  std::sort(ev.begin(), ev.end());
  // Newton polish against the exact characteristic polynomial
  RatPoly dp = ratpoly::derivative(charpoly);
  for (double& x : ev) {
    for (int it = 0; it < 4; ++it) {
      const double d = ratpoly::eval_double(dp, x);
      if (d == 0) break;
      x -= ratpoly::eval_double(charpoly, x) / d;
    }
  }
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace detail

// Build the exact QES sector for quantum number count N+1 at quartic strength
// 2b (the r^6 coefficient is 1). b is taken at its exact binary value.
inline QESSolution qes_sextic_construct(int N, double b) {
  if (N < 0 || N > 3) throw config_error("qes_sextic_construct: N must be in 0..3");
  if (!std::isfinite(b)) throw config_error("qes_sextic_construct: b must be finite");
  QESSolution sol;
  sol.N = N;
  sol.b = b;
  sol.b_exact = rat(b);
  sol.A_exact = sol.b_exact * sol.b_exact - rat(4 * N + 5);
  sol.A = static_cast<double>(sol.A_exact);
  sol.charpoly = detail::sector_charpoly(sol.b_exact, N);
  sol.energies = detail::sector_energies(sol.b_exact, N, sol.charpoly);

  const QuotientField F = sol.field();
  const FieldElem E = F.generator();

  // c_{j+1} = ([b(4j+3) - E] c_j + 4(j-N-1) c_{j-1}) / ((2j+3)(2j+2))
  sol.coeff_symbolic.assign(static_cast<size_t>(N + 1), FieldElem{});
  sol.coeff_symbolic[0] = F.from_rat(rat(1));
  FieldElem prev;  // c_{-1} = 0
  for (int j = 0; j < N; ++j) {
    FieldElem t = F.mul(F.sub(F.from_rat(detail::sector_diag(sol.b_exact, j)), E),
                        sol.coeff_symbolic[static_cast<size_t>(j)]);
    t = F.add(t, F.scale(prev, detail::sector_sub(j, N)));
    t = F.scale(t, rat(1) / rat((2 * j + 3) * (2 * j + 2)));
    prev = sol.coeff_symbolic[static_cast<size_t>(j)];
    sol.coeff_symbolic[static_cast<size_t>(j + 1)] = t;
  }
  // closure row must vanish identically in the quotient field
  {
    FieldElem last = F.mul(F.sub(F.from_rat(detail::sector_diag(sol.b_exact, N)), E),
                           sol.coeff_symbolic[static_cast<size_t>(N)]);
    if (N > 0) last = F.add(last, F.scale(sol.coeff_symbolic[static_cast<size_t>(N - 1)],
                                          detail::sector_sub(N, N)));
    if (!ratpoly::is_zero(last))
      throw edh_error("qes_sextic_construct: recurrence closure failed");
  }

  sol.poly_coeffs.resize(sol.energies.size());
  for (size_t j = 0; j < sol.energies.size(); ++j) {
    sol.poly_coeffs[j].resize(static_cast<size_t>(N + 1));
    for (int k = 0; k <= N; ++k)
      sol.poly_coeffs[j][static_cast<size_t>(k)] =
          ratpoly::eval_double(sol.coeff_symbolic[static_cast<size_t>(k)], sol.energies[j]);
  }
  return sol;
}

// radial wavefunction polynomial f(r) = r p(r^2) = sum_k c_k r^{2k+1}
inline FieldPoly qes_wavefunction_poly(const QESSolution& sol) {
  FieldPoly f;
  f.c.resize(static_cast<size_t>(2 * sol.N + 2));
  for (int k = 0; k <= sol.N; ++k)
    f.c[static_cast<size_t>(2 * k + 1)] = sol.coeff_symbolic[static_cast<size_t>(k)];
  return f;
}

struct QESResidual {
  QuotientField field;
  FieldPoly q;  // -u'' + (A r^2 + 2b r^4 + r^6) u - E u = q(r) exp(-r^4/4 - b r^2/2)

  bool is_zero() const { return q.is_zero(); }
  // numeric coefficient of r^k at sector energy E_j (for display / smallness checks)
  double coeff_at(size_t k, double energy) const {
    if (k >= q.c.size()) return 0.0;
    return ratpoly::eval_double(q.c[k], energy);
  }
};

// Exact Schroedinger residual of sector state j, optionally with the energy or
// the quadratic coupling displaced by exact rational offsets. The calculus is
// the unreduced chain rule on u = f exp(s): no hand-simplified cancellations,
// so it is an independent check of the construction above.
inline QESResidual qes_residual(const QESSolution& sol, int j, const rat& dE = rat(0),
                                const rat& dA = rat(0)) {
  if (j < 0 || j > sol.N) throw config_error("qes_residual: state index out of range");
  const QuotientField F = sol.field();
  using namespace fieldpoly;

  const FieldPoly f = qes_wavefunction_poly(sol);
  const FieldPoly f1 = d_dr(f);
  const FieldPoly f2 = d_dr(f1);

  auto rpoly = [&](std::initializer_list<std::pair<int, rat>> terms) {
    FieldPoly p;
    for (const auto& [k, v] : terms) {
      if (p.c.size() <= static_cast<size_t>(k)) p.c.resize(static_cast<size_t>(k) + 1);
      p.c[static_cast<size_t>(k)] = F.from_rat(v);
    }
    return p;
  };

  // s = -r^4/4 - b r^2/2
  const FieldPoly s1 = rpoly({{3, rat(-1)}, {1, -sol.b_exact}});
  const FieldPoly s2 = rpoly({{2, rat(-3)}, {0, -sol.b_exact}});
  FieldPoly potential = rpoly({{6, rat(1)}, {4, rat(2) * sol.b_exact}, {2, sol.A_exact + dA}});

  // E acts as the field generator, shifted by dE if requested
  FieldElem E = F.add(F.generator(), F.from_rat(dE));

  // q = -(f'' + 2 f' s' + f (s'' + s'^2)) + (V - E) f
  FieldPoly upp = add(F, f2, add(F, scale(F, mul(F, f1, s1), F.from_rat(rat(2))),
                                 mul(F, f, add(F, s2, mul(F, s1, s1)))));
  FieldPoly q = sub(F, mul(F, potential, f), scale(F, f, E));
  q = sub(F, q, upp);

  QESResidual res;
  res.field = F;
  res.q = std::move(q);
  return res;
}

}  // namespace edh
