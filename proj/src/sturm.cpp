#include "vil/sturm.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace vil {

NeutralMode solve_potential(const std::function<Real(Real)>& A, Real M, int n) {
  auto grid = std::make_shared<RadialGrid>(GridKind::global, 0.0, M, n, 6.0, 0.8);
  const RadialGrid& g = *grid;
  int N = g.n(), ni = N - 2;

  // stiffness K = D^T W D + W diag(A) on the Dirichlet subspace, mass = W r^{-2}
  Mat D_ai = g.D().block(0, 1, N, ni);
  Mat K = D_ai.transpose() * g.weights().asDiagonal() * D_ai;
  Vec B(ni);
  for (int i = 0; i < ni; ++i) {
    Real r = g.nodes()(i + 1);
    K(i, i) += g.weights()(i + 1) * A(r);
    B(i) = g.weights()(i + 1) / (r * r);
  }
  K = 0.5 * (K + K.transpose()).eval();

  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(K, Mat(B.asDiagonal()));
  if (es.info() != Eigen::Success) throw VilError("solve_potential: eigensolver failed");

  NeutralMode out;
  out.mu_min = es.eigenvalues()(0);
  out.gap = es.eigenvalues()(1) - es.eigenvalues()(0);
  out.k0_squared = 0.25 - out.mu_min;
  out.grid = grid;
  out.phi0 = extend_zero(Vec(es.eigenvectors().col(0)));

  Real nrm = 0.0;
  for (int i = 1; i < N - 1; ++i) {
    Real r = g.nodes()(i);
    nrm += g.weights()(i) * out.phi0(i) * out.phi0(i) / (r * r);
  }
  out.phi0 /= std::sqrt(nrm);
  if (out.phi0_at(1.0) < 0.0) out.phi0 = -out.phi0;
  return out;
}

NeutralMode solve_neutral_mode(const VortexProfile& profile, Real M, int n,
                               Real min_k0_squared) {
  if (M <= profile.gpoly().hi()) throw VilError("solve_neutral_mode: M inside vortex support");
  NeutralMode out = solve_potential([&](Real r) { return profile.A(r); }, M, n);

  if (out.k0_squared < min_k0_squared) {
    std::ostringstream msg;
    msg << "solve_neutral_mode: k0^2 = " << out.k0_squared << " (mu_min = " << out.mu_min
        << ") below required " << min_k0_squared << "; retune the profile";
    throw VilError(msg.str());
  }
  return out;
}

TuneResult tune_vortex(const std::function<VortexParams(Real)>& family, Real t_lo, Real t_hi,
                       int target_k, Real epsilon, Real M, int n) {
  if (target_k < 2) throw VilError("tune_vortex: target_k >= 2 required");
  Real target = Real(target_k) * Real(target_k) - epsilon;
  auto eval = [&](Real t) {
    return solve_neutral_mode(build_vortex(family(t)), M, n).k0_squared - target;
  };
  Real f_lo = eval(t_lo), f_hi = eval(t_hi);
  if (f_lo * f_hi > 0.0) throw VilError("tune_vortex: no sign change on the bracket");

  // bisection with a secant proposal when it stays inside the bracket
  Real a = t_lo, b = t_hi, fa = f_lo, fb = f_hi;
  Real t = a, ft = fa;
  for (int it = 0; it < 80; ++it) {
    Real sec = b - fb * (b - a) / (fb - fa);
    t = (sec > a && sec < b) ? sec : 0.5 * (a + b);
    ft = eval(t);
    if (std::abs(ft) <= 1e-8) break;
    if (fa * ft <= 0.0) {
      b = t;
      fb = ft;
    } else {
      a = t;
      fa = ft;
    }
    if (b - a < 1e-14 * std::max(Real(1), std::abs(b))) break;
  }
  if (std::abs(ft) > 1e-8) throw VilError("tune_vortex: did not converge to 1e-8");

  TuneResult out;
  out.t = t;
  out.params = family(t);
  VortexProfile p = build_vortex(out.params);
  out.params = p.params();  // pick up the solved tail amplitude
  out.mode = solve_neutral_mode(p, M, n);
  return out;
}

VortexParams demo_family(Real gamma1) {
  VortexParams p;
  p.gamma1 = gamma1;
  return p;
}

VortexParams unstable_demo_family(Real gamma1) {
  VortexParams p;
  p.g0 = 2.6;
  p.gamma0 = 0.6;
  p.delta0 = 0.42;
  p.delta1 = 0.15;
  p.r0 = 1.6;
  p.gamma1 = gamma1;
  return balance_well_depth(p);
}

}  // namespace vil
