#pragma once

// Shared scalar/matrix aliases, intervals and the error taxonomy used across
// the library. Everything downstream includes this header.

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace edh {

using cxd = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// tolerance used when classifying a matrix as Hermitian
inline constexpr double kHermitianTol = 1e-12;

// base class: every failure raised by the library derives from this
struct edh_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct dimension_error : edh_error {
  using edh_error::edh_error;
};

// z outside a model's admissible set (step gaps, sector windows, ...)
struct model_domain_error : edh_error {
  using edh_error::edh_error;
};

// evaluator left its validity region, e.g. mass m(z) <= 0
struct evaluation_error : edh_error {
  using edh_error::edh_error;
};

// E hit (or came too close to) an eigenvalue of H_QQ
struct pole_error : edh_error {
  using edh_error::edh_error;
};

struct non_diagonalizable_error : edh_error {
  using edh_error::edh_error;
};

// branch tracing could not assign eigenvectors across a grid step
struct ambiguity_error : edh_error {
  using edh_error::edh_error;
};

// self-consistency requested on a branch with complex values
struct complex_branch_error : edh_error {
  using edh_error::edh_error;
};

// overlap matrix not safely invertible
struct rank_deficient_error : edh_error {
  using edh_error::edh_error;
};

// spectral decomposition requested for an operator with complex spectrum
struct unsupported_spectrum_error : edh_error {
  using edh_error::edh_error;
};

struct config_error : edh_error {
  using edh_error::edh_error;
};

// closed real interval, possibly unbounded
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double z) const { return z >= lo && z <= hi; }
  // step/sector windows use the half-open convention (lo, hi]
  bool contains_half_open(double z) const { return z > lo && z <= hi; }
  double width() const { return hi - lo; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
};

inline double max_abs(const Eigen::MatrixXcd& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const Eigen::MatrixXcd& a) {
  return max_abs(Eigen::MatrixXcd(a - a.adjoint()));
}

inline bool is_hermitian(const Eigen::MatrixXcd& a, double tol = kHermitianTol) {
  return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(static_cast<size_t>(n));
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = lo + i * h;
  g.back() = hi;
  return g;
}

}  // namespace edh
