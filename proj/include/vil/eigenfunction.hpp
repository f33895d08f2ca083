#ifndef VIL_EIGENFUNCTION_HPP
#define VIL_EIGENFUNCTION_HPP

#include "vil/rayleigh.hpp"

namespace vil {

// Vorticity eigenfunction reconstructed from the stream eigenfunction by the
// integrating-factor formula eta(r) = I(r)(C_phi - ik alpha beta
// int_0^r g'(s)/(s^2 I(s)) phi(s) ds) with C_phi anchoring eta = 0 beyond the
// vortex support.  Numerically the equivalent tail form
//   eta(r) = ik alpha beta int_r^{r0} (I(r)/I(s)) g'(s) s^{-2} phi(s) ds
// is used, with the ratio I(r)/I(s) evaluated in log space; this is stable for
// any beta, while the literal C_phi integral only converges when
// alpha beta Re(lambda_beta) < k + 3/2 (and overflows doubles long before the
// default beta).
struct EtaFunction {
  CVec eta;  // nodal values, exactly zero beyond the vortex support
  std::shared_ptr<const RadialGrid> grid;
  Complex C_phi{std::numeric_limits<Real>::quiet_NaN(),
                std::numeric_limits<Real>::quiet_NaN()};  // NaN when divergent
  Real holder_exponent = 0.0;  // alpha beta Re(lambda_beta) - 1/2
  Real support_radius = 0.0;   // largest radius with |eta| > 1e-8 max|eta|
  Real edge_residual = 0.0;    // |eta| just inside r0, relative to max|eta|
  Real consistency = 0.0;      // ||eta - L_k phi|| / ||eta|| on the grid
  Vec origin_r;                // log-spaced sample radii near the origin
  Vec origin_abs;              // |eta| at those radii (envelope fit data)
};

// integrating factor I(r) = r^{alpha beta lambda_beta - 1/2}
// e^{ik alpha beta (v(0) log r + int_0^r s^{-1}(v(s) - v(0)) ds)}
Complex build_I(const VortexProfile& prof, const EigenProblemConfig& cfg, Complex lambda_beta,
                Real r);

EtaFunction build_eta(const VortexProfile& prof, const EigenPair& pair,
                      const EigenProblemConfig& cfg);

// log-log slope of the near-origin envelope samples stored in the EtaFunction
Real measure_regularity(const EtaFunction& etaf);

// The origin-anchored constant ik alpha beta int_0^{r0} g'(s) s^{-2} I(s)^{-1}
// phi(s) ds, computed by direct quadrature.  Agreement with EtaFunction::C_phi
// (read off the tail form) verifies that the two representations of eta
// coincide.  Throws above the integrability threshold.
Complex literal_origin_constant(const VortexProfile& prof, const EigenPair& pair,
                                const EigenProblemConfig& cfg);

// Continuum refinement of a direct eigenpair.  The streamfunction is iterated
// through the exact identity phi = L_k^{-1} eta[phi, lambda_beta] (tail
// integral for eta, Green kernel of L_k for the inversion, both free of the
// collocation truncation at the outer radius), and lambda_beta is the secant
// root of the fixed-point multiplier.  The defect of the converged fixed point
// is the discrete consistency of the eigenfunction reconstruction formula.
struct RefinedPair {
  Complex lambda_beta;
  CVec phi;  // on the uniform mesh, ||phi/r|| = 1, phi(1) real positive
  CVec eta;
  Vec mesh;
  Real defect = 0.0;       // power-step residual at the converged eigenvalue
  Real consistency = 0.0;  // ||L_k^{-1} eta - phi|| / ||phi|| at the fixed point
  Real mu_err = 0.0;       // |mu - 1| at the accepted eigenvalue
  int iterations = 0;
};

RefinedPair refine_eigenpair(const VortexProfile& prof, const EigenPair& seed,
                             const EigenProblemConfig& cfg, int mesh_n = 16384,
                             int max_iter = 12);

}  // namespace vil

#endif
