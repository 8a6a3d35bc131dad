#pragma once

// Independent analytic ground truths used to certify the numerical pipeline:
// closed-form fixed points for the energy-dependent-mass oscillator, the
// exact QES sector (qes.hpp), and Gaussian-moment values for normalization
// reductions. None of these call the eigensolvers they certify.

#include <edh/models.hpp>
#include <edh/qes.hpp>
#include <edh/types.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>

namespace edh {

// Fixed points of z = hbar (n + 1/2) sqrt(2 g / m(z)) for the parametric mass
// law m(z) = m0 (1 + lambda z). Squaring gives the cubic
//   m0 lambda z^3 + m0 z^2 - 2 g hbar^2 (n + 1/2)^2 = 0,
// which picks up spurious roots with z <= 0; physical fixed points are
// positive (the level itself is positive wherever m(z) > 0), so only roots
// with z > 0 and m(z) > 0 are returned occurring in ascending order.
inline std::vector<double> ho_analytic_roots(int n, const OscillatorParams& p) {
  if (n < 0) throw config_error("ho_analytic_roots: n must be >= 0");
  if (!p.mass.parametric())
    throw config_error("ho_analytic_roots: closed form needs the parametric mass law");
  if (!(p.hbar > 0) || !(p.g > 0) || !(p.mass.m0 > 0))
    throw config_error("ho_analytic_roots: hbar, g, m0 must be positive");
  const double T = 2.0 * p.g * p.hbar * p.hbar * (n + 0.5) * (n + 0.5);
  const double m0 = p.mass.m0;
  const double lam = p.mass.lambda;
  if (lam == 0.0) return {std::sqrt(T / m0)};

  auto c = [&](double z) { return m0 * z * z * (1.0 + lam * z) - T; };
  // Cauchy bound for the monic cubic z^3 + z^2/lam - T/(m0 lam)
  double zmax = 1.0 + std::max(std::abs(1.0 / lam), std::abs(T / (m0 * lam)));
  if (lam < 0) zmax = std::min(zmax, -1.0 / lam * (1.0 - 1e-12));  // keep m(z) > 0

  std::vector<double> roots;
  const int K = 200000;
  double a = 0.0, fa = c(a);
  for (int i = 1; i <= K; ++i) {
    const double b = zmax * i / K;
    const double fb = c(b);
    if (fb == 0.0) {
      roots.push_back(b);
    } else if (fa * fb < 0) {
      double lo = a, hi = b;
      for (int it = 0; it < 200 && (hi - lo) > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (c(lo) * c(mid) <= 0 ? hi : lo) = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  // Newton polish
  for (double& z : roots)
    for (int it = 0; it < 3; ++it) {
      const double d = m0 * z * (2.0 + 3.0 * lam * z);
      if (d == 0) break;
      z -= c(z) / d;
    }
  std::vector<double> out;
  for (double z : roots)
    if (z > 0 && m0 * (1.0 + lam * z) > 0) out.push_back(z);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double x, double y) { return std::abs(x - y) < 1e-12; }),
            out.end());
  return out;
}

// integral_0^inf t^(c + 2n) exp(-t^2) dt = Gamma((c + 2n + 1)/2) / 2
inline double gamma_moment(int n, double c) {
  if (n < 0) throw config_error("gamma_moment: n must be >= 0");
  if (!(c > -1.0)) throw config_error("gamma_moment: need c > -1");
  return 0.5 * std::tgamma(0.5 * (c + 2 * n + 1));
}

// companion value by adaptive quadrature, independent of the Gamma route
inline double gamma_moment_quadrature(int n, double c) {
  if (n < 0) throw config_error("gamma_moment_quadrature: n must be >= 0");
  if (!(c > -1.0)) throw config_error("gamma_moment_quadrature: need c > -1");
  boost::math::quadrature::exp_sinh<double> integrator;
  const double p = c + 2 * n;
  // exp/log form keeps the tails finite where pow(t,p) alone would overflow
  auto f = [p](double t) {
    if (t <= 0) return p == 0 ? 1.0 : 0.0;
    return std::exp(p * std::log(t) - t * t);
  };
  return integrator.integrate(f, 1e-14);
}

}  // namespace edh
