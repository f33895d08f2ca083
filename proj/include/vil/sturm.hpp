#ifndef VIL_STURM_HPP
#define VIL_STURM_HPP

#include <functional>
#include <memory>

#include "vil/grid.hpp"
#include "vil/vortex.hpp"

namespace vil {

struct NeutralMode {
  Real k0_squared = 0.0;
  Real mu_min = 0.0;       // lowest eigenvalue, k0_squared = 1/4 - mu_min
  Real gap = 0.0;          // distance to the second eigenvalue
  Vec phi0;                // full node set, Dirichlet ends, ||phi0/r||_L2 = 1
  std::shared_ptr<const RadialGrid> grid;

  Real phi0_at(Real r) const { return grid->interp(phi0, r); }
};

// Lowest eigenpair of  -phi'' + A(r) phi = mu r^{-2} phi  on [0, M], Dirichlet.
// Assembled as a symmetric quadratic form on the Dirichlet subspace and solved
// with a symmetric-definite generalized eigensolver.  If min_k0_squared > 0 and
// the result falls below it, throws with mu_min in the message so the caller
// can retune the profile.
NeutralMode solve_neutral_mode(const VortexProfile& profile, Real M, int n,
                               Real min_k0_squared = 0.0);

// Same solve for an arbitrary potential in place of A(r).
NeutralMode solve_potential(const std::function<Real(Real)>& A, Real M, int n);

// Walk a one-parameter vortex family until k0^2(t) = target_k^2 - epsilon,
// to 1e-8 absolute.  Bracket [t_lo, t_hi] must produce a sign change.
struct TuneResult {
  Real t = 0.0;
  VortexParams params;
  NeutralMode mode;
};
TuneResult tune_vortex(const std::function<VortexParams(Real)>& family, Real t_lo, Real t_hi,
                       int target_k, Real epsilon, Real M, int n);

// Demo family: gamma1 scaling with the moment rebalanced through the tail bump.
VortexParams demo_family(Real gamma1);

// Demo family shaped for a strong instability at k = 2: a wide gentle inner
// flank keeps the principal-value part of the dispersion integral small while
// the core stays strong enough that 1/v'(1)^2 does not inflate the residue
// term.  The well depth is rebalanced at every gamma1 so the moment vanishes
// before the tail bump.
VortexParams unstable_demo_family(Real gamma1);

}  // namespace vil

#endif
