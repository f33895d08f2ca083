#ifndef VIL_GAUSS_HPP
#define VIL_GAUSS_HPP

#include "vil/common.hpp"

namespace vil {

// Gauss-Legendre rule on [-1,1].
struct GaussRule {
  std::vector<Real> x;
  std::vector<Real> w;
};

// Nodes/weights computed by Newton iteration on P_n; cached per n.
const GaussRule& gauss_rule(int n);

// Integrate f over [a,b] with an n-point rule.
template <class F>
Real gauss_integrate(F&& f, Real a, Real b, int n) {
  const GaussRule& g = gauss_rule(n);
  const Real mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Real s = 0.0;
  for (int i = 0; i < n; ++i) s += g.w[i] * f(mid + half * g.x[i]);
  return half * s;
}

template <class F>
Complex gauss_integrate_c(F&& f, Real a, Real b, int n) {
  const GaussRule& g = gauss_rule(n);
  const Real mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Complex s = 0.0;
  for (int i = 0; i < n; ++i) s += g.w[i] * f(mid + half * g.x[i]);
  return half * s;
}

// Composite rule: integrand evaluated with npanel panels of npts points,
// panel boundaries aligned to the supplied breakpoints when they fall in [a,b].
template <class F>
Real gauss_integrate_broken(F&& f, Real a, Real b, const std::vector<Real>& breaks,
                            int npts, int subdiv_per_piece = 1) {
  std::vector<Real> cuts{a};
  for (Real c : breaks)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  Real s = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    Real lo = cuts[i], hi = cuts[i + 1];
    for (int j = 0; j < subdiv_per_piece; ++j) {
      Real p = lo + (hi - lo) * j / subdiv_per_piece;
      Real q = lo + (hi - lo) * (j + 1) / subdiv_per_piece;
      s += gauss_integrate(f, p, q, npts);
    }
  }
  return s;
}

}  // namespace vil

#endif
