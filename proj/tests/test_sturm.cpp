#include "doctest.h"
#include "test_util.hpp"
#include "vil/sturm.hpp"

using namespace vil;
using namespace vil_test;

namespace {

// independent oracle: second-order finite differences on a uniform grid,
// lowest generalized eigenvalue by Sturm-sequence bisection on the
// symmetrized tridiagonal B^{-1/2} T B^{-1/2}
double fd_mu_min(const VortexProfile& p, double M, int nfd) {
  double h = M / nfd;
  int ni = nfd - 1;
  std::vector<double> diag(ni), off(ni - 1);
  for (int i = 0; i < ni; ++i) {
    double r = (i + 1) * h;
    diag[i] = (2.0 / (h * h) + p.A(r)) * r * r;
  }
  for (int i = 0; i + 1 < ni; ++i)
    off[i] = (-1.0 / (h * h)) * (i + 1) * h * (i + 2) * h;
  auto count_below = [&](double x) {
    int cnt = 0;
    double d = diag[0] - x;
    if (d < 0) ++cnt;
    for (int i = 1; i < ni; ++i) {
      d = diag[i] - x - off[i - 1] * off[i - 1] / d;
      if (d < 0) ++cnt;
    }
    return cnt;
  };
  double lo = -50.0, hi = 50.0;
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    if (count_below(mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double fd_k0sq_richardson(const VortexProfile& p, double M, int nfd) {
  double m1 = fd_mu_min(p, M, nfd), m2 = fd_mu_min(p, M, 2 * nfd);
  return 0.25 - (4.0 * m2 - m1) / 3.0;
}

}  // namespace

TEST_CASE("neutral mode matches the finite-difference oracle") {
  VortexProfile p = build_vortex(demo_family(2.0));
  NeutralMode m = solve_neutral_mode(p, 8.0, 1200);
  double oracle = fd_k0sq_richardson(p, 8.0, 4 * 1200);
  CHECK(m.k0_squared == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(m.gap > 1.0);
}

TEST_CASE("adding c/r^2 to the potential shifts k0^2 by exactly -c") {
  VortexProfile p = build_vortex(demo_family(2.0));
  Real c = 0.37;
  NeutralMode base = solve_potential([&](Real r) { return p.A(r); }, 8.0, 200);
  NeutralMode shifted =
      solve_potential([&](Real r) { return p.A(r) + c / (r * r); }, 8.0, 200);
  CHECK(shifted.k0_squared == doctest::Approx(base.k0_squared - c).epsilon(1e-11));
}

TEST_CASE("Rayleigh quotient of phi0 attains the minimum") {
  VortexProfile p = build_vortex(demo_family(2.0));
  NeutralMode m = solve_neutral_mode(p, 8.0, 300);
  const RadialGrid& g = *m.grid;
  auto quotient = [&](const Vec& f) {
    Vec df = g.D() * f;
    Real num = 0, den = 0;
    for (int i = 0; i < g.n(); ++i) {
      Real r = g.nodes()(i), w = g.weights()(i);
      num += w * df(i) * df(i);
      if (r > 0) {
        num += w * p.A(r) * f(i) * f(i);
        den += w * f(i) * f(i) / (r * r);
      }
    }
    return num / den;
  };
  CHECK(quotient(m.phi0) == doctest::Approx(m.mu_min).epsilon(1e-8));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    Vec f = random_smooth_dirichlet(g, rng);
    CHECK(quotient(f) > m.mu_min + 1e-10);
  }
}

TEST_CASE("phi0 is a normalized sign-fixed ground mode") {
  VortexProfile p = build_vortex(demo_family(2.0));
  NeutralMode m = solve_neutral_mode(p, 8.0, 300);
  const RadialGrid& g = *m.grid;
  CHECK(m.phi0(0) == 0.0);
  CHECK(m.phi0(g.n() - 1) == 0.0);
  CHECK(m.phi0_at(1.0) > 0.0);
  Real peak = m.phi0.cwiseAbs().maxCoeff();
  for (int i = 1; i < g.n() - 1; ++i) CHECK(m.phi0(i) > -1e-8 * peak);
  Real nrm = 0;
  for (int i = 1; i < g.n() - 1; ++i) {
    Real r = g.nodes()(i);
    nrm += g.weights()(i) * m.phi0(i) * m.phi0(i) / (r * r);
  }
  CHECK(std::sqrt(nrm) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("k0^2 stabilizes as the truncation radius grows") {
  VortexProfile p = build_vortex(demo_family(2.0));
  Real k8 = solve_neutral_mode(p, 8.0, 400).k0_squared;
  Real k16 = solve_neutral_mode(p, 16.0, 566).k0_squared;
  Real k32 = solve_neutral_mode(p, 32.0, 800).k0_squared;
  Real d1 = std::abs(k16 - k8), d2 = std::abs(k32 - k16);
  CHECK(d1 < 2e-3);
  CHECK(d2 < 0.5 * d1);
}

TEST_CASE("weighted norms of phi0 under domain doubling") {
  VortexProfile p = build_vortex(demo_family(2.0));
  auto norms = [&](Real M, int n) {
    NeutralMode m = solve_neutral_mode(p, M, n);
    const RadialGrid& g = *m.grid;
    Vec df = g.D() * m.phi0;
    Real a = 0, b = 0, c2 = 0;
    for (int i = 0; i < g.n(); ++i) {
      Real r = g.nodes()(i), w = g.weights()(i);
      a += w * r * r * df(i) * df(i);
      b += w * m.phi0(i) * m.phi0(i);
      c2 += w * std::pow(r * r * m.phi0(i), 2);
    }
    return std::array<Real, 3>{std::sqrt(a), std::sqrt(b), std::sqrt(c2)};
  };
  auto n8 = norms(8.0, 400), n16 = norms(16.0, 566), n32 = norms(32.0, 800);
  Real h8 = n8[0] + n8[1], h16 = n16[0] + n16[1], h32 = n32[0] + n32[1];
  CHECK(std::abs(h16 - h8) < 0.01 * h8);
  CHECK(std::abs(h32 - h16) < 0.01 * h16);
  // the tail phi0 ~ r^{1/2 - k0} with k0 just above 2 makes (r^2 phi0)^2
  // non-integrable at infinity, so this norm grows linearly in M
  CHECK(n16[2] / n8[2] == doctest::Approx(2.0).epsilon(0.1));
  CHECK(n32[2] / n16[2] == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("frozen k0^2 regression along the gamma1 family") {
  // tabulated at M = 8, n = 300; monotone increasing in gamma1
  const double gam[] = {1.2, 1.5, 1.8, 2.1, 2.4};
  const double k0sq[] = {3.8922307143, 3.9434735826, 3.9956491843, 4.0487696056,
                         4.1028467698};
  Real prev = 0.0;
  for (int i = 0; i < 5; ++i) {
    Real k = solve_neutral_mode(build_vortex(demo_family(gam[i])), 8.0, 300).k0_squared;
    CHECK(k == doctest::Approx(k0sq[i]).epsilon(1e-8));
    CHECK(k > prev);
    prev = k;
  }
}

TEST_CASE("tune_vortex hits k^2 - epsilon on the gamma1 family") {
  TuneResult t = tune_vortex(demo_family, 1.3, 2.5, 2, 0.01, 8.0, 300);
  CHECK(std::abs(t.mode.k0_squared - 3.99) <= 1e-8);
  CHECK(t.t > 1.3);
  CHECK(t.t < 2.5);
  // smooth dependence on the family parameter
  Real kp = solve_neutral_mode(build_vortex(demo_family(t.t + 1e-6)), 8.0, 300).k0_squared;
  Real dk = std::abs(kp - t.mode.k0_squared);
  CHECK(dk > 1e-8);
  CHECK(dk < 1e-5);
}

TEST_CASE("error paths") {
  VortexProfile p = build_vortex(demo_family(2.0));
  CHECK_THROWS_AS(solve_neutral_mode(p, 1.5, 300), VilError);
  CHECK_THROWS_WITH_AS(solve_neutral_mode(p, 8.0, 200, 100.0),
                       doctest::Contains("mu_min"), VilError);
  CHECK_THROWS_AS(tune_vortex(demo_family, 2.2, 3.0, 2, 0.01, 8.0, 200), VilError);
}
