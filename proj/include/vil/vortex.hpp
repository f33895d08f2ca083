#ifndef VIL_VORTEX_HPP
#define VIL_VORTEX_HPP

#include "vil/piecewise.hpp"

namespace vil {

struct VortexParams {
  Real g0 = 2.1;       // core vorticity amplitude, g(0)
  Real gamma0 = 0.6;   // core quadratic coefficient
  Real delta0 = 0.5;   // core plateau radius
  Real r1 = 1.0;       // critical radius (normalized to 1 in production)
  Real g1 = 0.5;       // well depth, g(r1) = -g1
  Real gamma1 = 2.0;   // well curvature
  Real delta1 = 0.15;  // well half-width
  Real r0 = 2.0;       // support radius
  std::vector<std::pair<Real, Real>> blend_knots;  // optional (radius, value) for connector 1
  Real tail_amplitude = 0.0;  // solved by build_vortex to enforce zero mean
};

// Background vortex in class G: piecewise-polynomial vorticity g with the
// quadratic core, the quadratic well at r1 = 1, quintic C^2 connectors, and a
// tail bump whose amplitude kills the radial moment. Velocity and the Rayleigh
// weight A are derived fields. Immutable after construction.
class VortexProfile {
 public:
  const VortexParams& params() const { return params_; }
  const PiecewisePoly& gpoly() const { return g_; }

  Real g(Real r) const { return g_.eval(r); }
  Real g_prime(Real r) const { return gp_.eval(r); }
  Real v(Real r) const;
  Real v_prime(Real r) const;
  Real v_prime_at_1() const { return vp1_; }
  Real v_at_1() const { return v1_; }
  Real A(Real r) const;

  Real r0() const { return params_.r0; }
  Real moment_residual() const { return moment_residual_; }

  // int_0^r s^{-1} (v(s) - v(0)) ds, exact piecewise closed form
  Real phase_integral(Real r) const;
  // int_a^b v(u)/u du for 0 < a <= b, exact piecewise closed form
  Real int_v_over_r(Real a, Real b) const;

  friend VortexProfile build_vortex(const VortexParams& params);
  friend VortexProfile profile_from_poly(PiecewisePoly g, bool validate);

 private:
  VortexProfile() = default;
  void derive_fields();

  VortexParams params_;
  PiecewisePoly g_, gp_;
  std::vector<Real> cum_moment_;  // moment of r*g over completed pieces
  Real v0_ = 0, v1_ = 0, vp1_ = 0, moment_residual_ = 0;
  bool class_g_ = true;  // full class-G structure (series for A near 1 usable)

  // exact antiderivative of v(u)/u: per piece of g, v = (C + Q(u))/u^2 with Q
  // polynomial, so the antiderivative is power terms plus a log
  struct IvPiece {
    Real c_inv2 = 0;        // coefficient of u^{-2}
    Real c_log = 0;         // coefficient of log(u)
    std::vector<Real> pw;   // pw[j] * u^{j+1}
    Real K = 0;             // continuity constant
  };
  std::vector<IvPiece> iv_;
  IvPiece iv_tail_;
  Real Iv(Real u) const;
};

VortexProfile build_vortex(const VortexParams& params);

// radial moment of the assembled g before the tail bump is added
Real raw_moment(const VortexParams& params);

// solve the well depth g1 (bisection) so the raw moment vanishes; the tail
// bump amplitude then stays negligible and never threatens monotonicity
VortexParams balance_well_depth(VortexParams params);

// validation-bypass construction from an arbitrary compactly supported g
VortexProfile profile_from_poly(PiecewisePoly g, bool validate = false);

}  // namespace vil

#endif
