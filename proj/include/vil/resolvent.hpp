#ifndef VIL_RESOLVENT_HPP
#define VIL_RESOLVENT_HPP

#include <limits>
#include <memory>
#include <random>

#include "vil/grid.hpp"
#include "vil/vortex.hpp"

namespace vil {

constexpr Real BETA_INF = std::numeric_limits<Real>::infinity();

struct SemigroupParams {
  Real alpha = 0.4;
  Real beta = BETA_INF;  // BETA_INF selects the pure transport limit S_inf
  int k = 2;
};

// e^{tau S_beta} with S_beta = -ikv(r) + (1/(alpha beta))(r d/dr + 1/2),
// realized by the closed form: dilation of the data plus a phase from the
// exact antiderivative of v(u)/u.  Negative beta runs the reversed dilation
// (used with k -> -k to realize -S_beta for adjoint checks).
class Semigroup {
 public:
  Semigroup(std::shared_ptr<const RadialGrid> grid, const VortexProfile& profile,
            SemigroupParams params);

  const RadialGrid& grid() const { return *grid_; }
  std::shared_ptr<const RadialGrid> grid_ptr() const { return grid_; }
  const SemigroupParams& params() const { return params_; }
  const VortexProfile& profile() const { return profile_; }
  const Vec& v_nodes() const { return v_; }

  // support_radius: radius beyond which w is taken to be exactly zero; the
  // default (infinity) means "unknown support" and a dilation past r_max errors
  CVec apply(Real tau, const CVec& w, Real support_radius = BETA_INF) const;
  // pure transport limit e^{tau S_inf} w = e^{-ik tau v(r)} w(r)
  CVec apply_transport(Real tau, const CVec& w) const;

  // S_beta via the grid differentiation matrix (residual checks)
  CVec apply_generator(const CVec& f) const;

 private:
  std::shared_ptr<const RadialGrid> grid_;
  VortexProfile profile_;
  SemigroupParams params_;
  Vec v_;  // v at the nodes
};

struct ResolventProbe {
  Complex z;
  Real T_horizon = 0.0;    // 0 selects max(1, 40/Re z)
  Real tolerance = 1e-10;  // tail bound target
  Real support_radius = BETA_INF;
  int points_per_efold = 16;
};

// (S_beta - z)^{-1} w = -int_0^T e^{-z tau} e^{tau S_beta} w dtau
CVec resolvent_apply(const Semigroup& sg, const ResolventProbe& probe, const CVec& w);

// -(S_inf - z)^{-1} w = w / (ikv(r) + z), pointwise
CVec multiplier_apply(const Semigroup& sg, Complex z, const CVec& w);

// T_beta w = int_0^T e^{-z tau} (f_beta - f_inf)(tau) dtau, so that
// (S_beta - z)^{-1} = -(S_inf - z)^{-1} - T_beta
CVec T_beta_apply(const Semigroup& sg, const ResolventProbe& probe, const CVec& w);

// lower bound on ||T_beta||_{X->X} by random smooth compactly supported probes
Real estimate_operator_norm(const Semigroup& sg, const ResolventProbe& probe, NormKind X,
                            int trials, std::uint64_t seed = 1234);

// random analytic bump mixture supported (to machine precision) in [0, 6]
CVec random_probe_function(const RadialGrid& g, std::mt19937_64& rng);

}  // namespace vil

#endif
