#pragma once

// Energy-dependent Hamiltonian families H(z): a common evaluator interface
// plus the concrete model constructors. Matrices returned by eval() are dim x
// dim and bitwise reproducible for equal z. Models that are real symmetric
// tridiagonal in the position basis also expose that structure directly so
// large grids avoid dense O(n^3) eigensolves.

#include <edh/qes.hpp>
#include <edh/types.hpp>

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace edh {

// symmetric real tridiagonal: diag has dim entries, sub has dim-1
struct TridiagReal {
  Eigen::VectorXd diag;
  Eigen::VectorXd sub;

  Eigen::MatrixXcd dense() const {
    const Eigen::Index n = diag.size();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, i) = diag(i);
      if (i + 1 < n) {
        m(i, i + 1) = sub(i);
        m(i + 1, i) = sub(i);
      }
    }
    return m;
  }
};

class EDHamiltonian {
 public:
  using DenseEval = std::function<Eigen::MatrixXcd(double)>;
  using TridiagEval = std::function<TridiagReal(double)>;
  using AdmissiblePred = std::function<bool(double)>;

  EDHamiltonian() = default;
  EDHamiltonian(int dim, Interval z_domain, bool hermitian_each_z, DenseEval evaluator,
                std::string label, AdmissiblePred admissible = {}, TridiagEval tridiag = {})
      : dim_(dim),
        z_domain_(z_domain),
        hermitian_(hermitian_each_z),
        eval_(std::move(evaluator)),
        label_(std::move(label)),
        admissible_(std::move(admissible)),
        tridiag_(std::move(tridiag)) {
    if (dim_ < 1) throw dimension_error("EDHamiltonian: dim must be >= 1");
    if (!eval_) throw edh_error("EDHamiltonian: missing evaluator");
  }

  int dim() const { return dim_; }
  const Interval& z_domain() const { return z_domain_; }
  bool hermitian_each_z() const { return hermitian_; }
  const std::string& label() const { return label_; }

  bool admissible(double z) const {
    if (!z_domain_.contains(z)) return false;
    return admissible_ ? admissible_(z) : true;
  }

  Eigen::MatrixXcd eval(double z) const {
    check_domain(z);
    Eigen::MatrixXcd m = eval_(z);
    if (m.rows() != dim_ || m.cols() != dim_)
      throw dimension_error("EDHamiltonian: evaluator returned wrong shape for " + label_);
    return m;
  }

  bool has_tridiag() const { return static_cast<bool>(tridiag_); }

  TridiagReal eval_tridiag(double z) const {
    if (!tridiag_) throw edh_error("EDHamiltonian: no tridiagonal form for " + label_);
    check_domain(z);
    return tridiag_(z);
  }

 private:
  void check_domain(double z) const {
    if (!std::isfinite(z) || !z_domain_.contains(z) || (admissible_ && !admissible_(z)))
      throw model_domain_error(label_ + ": z = " + std::to_string(z) +
                               " outside the model's admissible set");
  }

  int dim_ = 0;
  Interval z_domain_;
  bool hermitian_ = false;
  DenseEval eval_;
  std::string label_;
  AdmissiblePred admissible_;
  TridiagEval tridiag_;
};

// --- constant family -------------------------------------------------------

inline EDHamiltonian make_constant(const Eigen::MatrixXcd& H0) {
  if (H0.rows() != H0.cols() || H0.rows() < 1)
    throw dimension_error("make_constant: matrix must be square and nonempty");
  const bool herm = is_hermitian(H0);
  auto mat = std::make_shared<Eigen::MatrixXcd>(H0);
  return EDHamiltonian(static_cast<int>(H0.rows()), Interval{}, herm,
                       [mat](double) { return *mat; }, "constant");
}

// --- piecewise-constant (step) family --------------------------------------

// window is half-open (lo, hi]
struct StepSegment {
  Interval window;
  Eigen::MatrixXcd matrix;
};

inline EDHamiltonian make_step(std::vector<StepSegment> segments) {
  if (segments.empty()) throw config_error("make_step: need at least one segment");
  const Eigen::Index d = segments.front().matrix.rows();
  for (const auto& s : segments) {
    if (s.matrix.rows() != s.matrix.cols())
      throw dimension_error("make_step: segment matrix not square");
    if (s.matrix.rows() != d) throw dimension_error("make_step: segment dimensions differ");
    if (!(s.window.lo < s.window.hi))
      throw config_error("make_step: segment window must have lo < hi");
  }
  std::sort(segments.begin(), segments.end(),
            [](const StepSegment& a, const StepSegment& b) { return a.window.lo < b.window.lo; });
  for (size_t i = 1; i < segments.size(); ++i)
    if (segments[i].window.lo < segments[i - 1].window.hi)
      throw config_error("make_step: windows overlap");
  bool herm = true;
  for (const auto& s : segments) herm = herm && is_hermitian(s.matrix);

  const Interval hull{segments.front().window.lo, segments.back().window.hi};
  auto segs = std::make_shared<std::vector<StepSegment>>(std::move(segments));
  auto find = [segs](double z) -> const StepSegment* {
    for (const auto& s : *segs)
      if (s.window.contains_half_open(z)) return &s;
    return nullptr;
  };
  return EDHamiltonian(
      static_cast<int>(d), hull, herm,
      [segs, find](double z) -> Eigen::MatrixXcd {
        const StepSegment* s = find(z);
        if (!s) throw model_domain_error("step: z = " + std::to_string(z) + " in no window");
        return s->matrix;
      },
      "step", [find](double z) { return find(z) != nullptr; });
}

// --- oscillator with energy-dependent mass ---------------------------------

// m(z) = m0 (1 + lambda z) unless a custom law is supplied
struct MassLaw {
  double m0 = 1.0;
  double lambda = 0.0;
  std::function<double(double)> custom;

  double operator()(double z) const { return custom ? custom(z) : m0 * (1.0 + lambda * z); }
  bool parametric() const { return !custom; }
};

struct GridSpec {
  double x_min = -8.0;
  double x_max = 8.0;
  int points = 200;  // interior nodes; h = (x_max - x_min)/(points + 1)
};

struct OscillatorParams {
  double hbar = 1.0;
  double g = 0.5;  // potential g x^2
  MassLaw mass;
  GridSpec grid;
};

inline void validate(const GridSpec& g, const char* who) {
  if (!(g.x_min < g.x_max)) throw config_error(std::string(who) + ": x_min must be < x_max");
  if (g.points < 3) throw config_error(std::string(who) + ": need at least 3 grid points");
}

inline EDHamiltonian make_ed_mass_oscillator(const OscillatorParams& p) {
  validate(p.grid, "make_ed_mass_oscillator");
  if (!(p.hbar > 0) || !(p.g > 0) || !(p.mass.m0 > 0))
    throw config_error("make_ed_mass_oscillator: hbar, g, m0 must be positive");
  const int n = p.grid.points;
  const double h = (p.grid.x_max - p.grid.x_min) / (n + 1);
  auto x2 = std::make_shared<Eigen::VectorXd>(n);
  for (int i = 0; i < n; ++i) {
    const double xi = p.grid.x_min + (i + 1) * h;
    (*x2)(i) = xi * xi;
  }
  const double hbar2 = p.hbar * p.hbar;
  const double g = p.g;
  MassLaw mass = p.mass;
  auto tridiag = [x2, mass, hbar2, g, h, n](double z) -> TridiagReal {
    const double m = mass(z);
    if (!(m > 0))
      throw evaluation_error("ed_mass_oscillator: m(z) = " + std::to_string(m) +
                             " not positive at z = " + std::to_string(z));
    const double kin = hbar2 / (m * h * h);
    TridiagReal t;
    t.diag = Eigen::VectorXd::Constant(n, kin) + g * (*x2);
    t.sub = Eigen::VectorXd::Constant(n - 1, -kin / 2.0);
    return t;
  };
  return EDHamiltonian(
      n, Interval{}, true, [tridiag](double z) { return tridiag(z).dense(); },
      "ed_mass_oscillator", {}, tridiag);
}

// --- radial sextic QES sector ----------------------------------------------

struct RadialGrid {
  double r_max = 6.0;
  int points = 200;  // interior nodes; r_i = i h, h = r_max/(points + 1), u(0)=u(r_max)=0
};

struct SexticParams {
  int N = 0;
  double b = 1.0;
  RadialGrid radial_grid;
  Interval sector_window;  // half-open (lo, hi]
};

inline EDHamiltonian make_sextic_qes(const SexticParams& p) {
  if (!(p.radial_grid.r_max > 0)) throw config_error("make_sextic_qes: r_max must be positive");
  if (p.radial_grid.points < 3) throw config_error("make_sextic_qes: need at least 3 grid points");
  if (!(p.sector_window.lo < p.sector_window.hi))
    throw config_error("make_sextic_qes: sector window must have lo < hi");
  const QESSolution sector = qes_sextic_construct(p.N, p.b);  // validates N, supplies A_N
  const int n = p.radial_grid.points;
  const double h = p.radial_grid.r_max / (n + 1);
  auto pot = std::make_shared<Eigen::VectorXd>(n);
  for (int i = 0; i < n; ++i) {
    const double r = (i + 1) * h;
    const double r2 = r * r;
    (*pot)(i) = sector.A * r2 + 2.0 * p.b * r2 * r2 + r2 * r2 * r2;
  }
  const double inv_h2 = 1.0 / (h * h);
  TridiagReal t;
  t.diag = Eigen::VectorXd::Constant(n, 2.0 * inv_h2) + *pot;
  t.sub = Eigen::VectorXd::Constant(n - 1, -inv_h2);
  auto tt = std::make_shared<TridiagReal>(std::move(t));
  const Interval w = p.sector_window;
  return EDHamiltonian(
      n, w, true, [tt](double) { return tt->dense(); }, "sextic_qes",
      [w](double z) { return w.contains_half_open(z); },
      [tt](double) { return *tt; });
}

}  // namespace edh
