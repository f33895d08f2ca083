#ifndef VIL_RAYLEIGH_HPP
#define VIL_RAYLEIGH_HPP

#include "vil/resolvent.hpp"
#include "vil/sturm.hpp"

namespace vil {

// Forced Rayleigh eigenvalue problem at mode k near the neutral wavenumber:
// lambda_beta L_k phi = -ikv L_k phi + ik (g'/r) phi + (alpha beta)^{-1} (r d/dr + 1/2) L_k phi.
// The detuning epsilon = k0^2 - k^2 is positive on the unstable side; the
// growth rate scales like Re lambda_beta ~ k epsilon Im(c_tilde).
struct EigenProblemConfig {
  int k = 2;
  Real alpha = 0.4;
  Real beta = 1e6;      // forcing scale; BETA_INF drops the dilation term
  Real epsilon = 0.01;  // detuning k0^2 - k^2
  Real M_mode = 8.0;    // neutral-mode truncation radius
  int n_mode = 300;     // neutral-mode grid size
  Real R_out = 40.0;    // direct-solve truncation radius
  int n_direct = 600;   // direct-solve grid size
  Real clustering = 80.0;     // node density boost near r = 1
  Real cluster_width = 0.3;   // covers the critical layer and the well joints
};

struct EigenPair {
  Complex lambda_beta;  // eigenvalue of the rescaled generator
  Complex lambda;       // lambda_beta + (alpha - 1) / (alpha beta)
  Complex c;            // wave speed, lambda_beta = -i k c
  CVec phi;             // streamfunction at all grid nodes, ||phi/r|| = 1,
                        // phi(1) real positive
  std::shared_ptr<const RadialGrid> grid;
  Real residual = 0.0;   // relative residual of the discrete eigen-system
  Real mass_fraction = 0.0;  // ||phi/r||^2 fraction inside [0, 2 r0]
};

// Dense generalized eigensolve on a grid clustered at the critical radius.
// Keeps the growing mode: Re lambda_beta largest among eigenpairs with mass
// concentrated on the vortex support.  Throws if no such mode exists.
EigenPair solve_direct(const VortexProfile& profile, const EigenProblemConfig& cfg);

// Boundary value of the dispersion integral Gamma1(c) = int A |phi0|^2 / (v - c) dr
// as c approaches v(1) from the unstable side, and the root c of the forced
// dispersion relation  epsilon (c_tilde Gamma1(c) - 1) + Gamma2 = 0  with
// c = v(1) + epsilon c_tilde.
struct DispersionReport {
  Complex z0;           // limit of conj(Gamma1); Im z0 > 0 for an unstable well
  Real kappa = 0.0;     // principal-value part, Re z0
  Real residue_term = 0.0;  // pi gamma1 phi0(1)^2 / v'(1)^2, the exact Im z0
  Complex Gamma2;       // forced correction <T_beta(ik g'/r phi0), phi0>
  Complex c_tilde;      // root in the rescaled wave-speed variable
  Complex c;            // v(1) + epsilon c_tilde
  Complex lambda_beta;  // -i k c
  Complex ball_center;  // -1/z0, the leading-order root location
  Real ball_radius = 0.0;    // 1/(2 |z0|)
  Real rouche_margin = 0.0;  // min over the ball boundary of |F0| - |F - F0|
  Real newton_residual = 0.0;
};

Complex dispersion_integral(const VortexProfile& profile, const NeutralMode& mode, Complex c);

DispersionReport predict_wave_speed(const VortexProfile& profile, const NeutralMode& mode,
                                    const EigenProblemConfig& cfg);

// Perturbative eigenvalue solve built on the neutral mode: the eigenfunction is
// phi = chi_in (phi0 + u) + chi_out w with the correction pair (u, w) obtained
// by Neumann iteration of the coupled block operator; see solve_perturbative.
struct CutoffPair {
  Real M = 80.0;  // inner cutoff chi_in falls from 1 to 0 on [M/2, M]
  Real R = 16.0;  // outer cutoff chi_out rises from 0 to 1 on [R, 2R]
};

struct PerturbativeSolution {
  Complex lambda_beta;
  Complex c;
  CVec phi;  // assembled eigenfunction on the extended grid
  std::shared_ptr<const RadialGrid> grid;
  int iterations = 0;
  Real increment_tail = 0.0;  // norm of the final Neumann increment
  Real residual = 0.0;        // relative residual on the vortex support
};

PerturbativeSolution solve_perturbative(const VortexProfile& profile, const NeutralMode& mode,
                                        const EigenProblemConfig& cfg, const CutoffPair& cut);

// Probed operator norms of the four correction blocks, for scaling studies in
// epsilon (M11 shrinks) and the cutoff radius M (M12, M21 shrink).
struct BlockNorms {
  Real M11 = 0.0, M12 = 0.0, M21 = 0.0;
  Real spectral_radius = 0.0;  // power-iteration estimate for the full block map
};

BlockNorms measure_block_norms(const VortexProfile& profile, const NeutralMode& mode,
                               const EigenProblemConfig& cfg, const CutoffPair& cut,
                               int trials = 8, std::uint64_t seed = 77);

}  // namespace vil

#endif
