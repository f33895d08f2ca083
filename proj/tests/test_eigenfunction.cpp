#include <cmath>
#include <complex>

#include "doctest.h"
#include "vil/eigenfunction.hpp"

using namespace vil;
using C = std::complex<double>;

namespace {

const TuneResult& tuned_demo() {
  static TuneResult t = tune_vortex(unstable_demo_family, 1.5, 4.0, 2, -0.01, 8.0, 300);
  return t;
}

const VortexProfile& tuned_profile() {
  static VortexProfile p = build_vortex(tuned_demo().params);
  return p;
}

}  // namespace

TEST_CASE("integrating factor has the power-law modulus and transport phase") {
  const VortexProfile& prof = tuned_profile();
  EigenProblemConfig cfg;
  cfg.beta = 500.0;
  C lb(0.012, -0.58);
  double ab = cfg.alpha * cfg.beta;
  for (double r : {0.2, 0.7, 1.3}) {
    C I = build_I(prof, cfg, lb, r);
    CHECK(std::abs(I) == doctest::Approx(std::pow(r, ab * lb.real() - 0.5)).epsilon(1e-12));
  }
  // multiplicative transport property across an interval
  double r1 = 0.4, r2 = 1.1;
  C ratio = build_I(prof, cfg, lb, r2) / build_I(prof, cfg, lb, r1);
  C expect = std::exp((ab * lb - 0.5) * std::log(r2 / r1) +
                      C(0, cfg.k * ab) * prof.int_v_over_r(r1, r2));
  CHECK(std::abs(ratio - expect) < 1e-12 * std::abs(expect));
  // the phase integral has a removable singularity, P(r) ~ c r^2 near zero
  double p1 = prof.phase_integral(1e-3), p2 = prof.phase_integral(2e-3);
  CHECK(p2 / p1 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("eta formula is consistent with the direct eigenfunction") {
  const VortexProfile& prof = tuned_profile();
  EigenProblemConfig cfg;
  EigenPair ep = solve_direct(prof, cfg);
  EtaFunction ef = build_eta(prof, ep, cfg);

  CHECK(ef.support_radius < prof.r0());
  CHECK(ef.support_radius > 0.9 * prof.r0());
  CHECK(ef.edge_residual < 1e-8);
  // collocation comparison carries the differentiation noise of the grid
  CHECK(ef.consistency < 1e-3);
  CHECK(ef.holder_exponent ==
        doctest::Approx(cfg.alpha * cfg.beta * ep.lambda_beta.real() - 0.5).epsilon(1e-12));
  // above the integrability threshold the origin constant does not exist
  CHECK(std::isnan(ef.C_phi.real()));
  CHECK_THROWS_AS(literal_origin_constant(prof, ep, cfg), VilError);
}

TEST_CASE("continuum refinement closes the reconstruction identity") {
  const VortexProfile& prof = tuned_profile();
  EigenProblemConfig cfg;
  EigenPair ep = solve_direct(prof, cfg);
  RefinedPair rp = refine_eigenpair(prof, ep, cfg);

  // first calibration: consistency 1.3e-6, defect 1.4e-6, |shift| 1.1e-5
  CHECK(rp.consistency < 1e-5);
  CHECK(rp.defect < 1e-5);
  CHECK(rp.mu_err < 1e-5);
  CHECK(std::abs(rp.lambda_beta - ep.lambda_beta) < 5e-5);
  CHECK(rp.lambda_beta.real() > 0.5 * cfg.epsilon);
  // normalization contract on the mesh
  double h = rp.mesh(1) - rp.mesh(0), nrm = 0.0;
  for (int i = 1; i < rp.mesh.size(); ++i)
    nrm += h * std::norm(rp.phi(i) / rp.mesh(i));
  CHECK(std::sqrt(nrm) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("near-origin envelope and origin constant at a resolvable exponent") {
  const VortexProfile& prof = tuned_profile();
  EigenProblemConfig cfg;
  cfg.beta = 200.0;  // holder exponent 1.4, below the k + 1/2 particular branch
  EigenPair ep = solve_direct(prof, cfg);
  EtaFunction ef = build_eta(prof, ep, cfg);

  double gamma = cfg.alpha * cfg.beta * ep.lambda_beta.real() - 0.5;
  CHECK(gamma > 1.0);
  CHECK(gamma < cfg.k + 0.5);
  double slope = measure_regularity(ef);
  // first calibration: relative error 3e-5
  CHECK(slope == doctest::Approx(gamma).epsilon(0.05));

  // the tail readout and the literal origin integral give the same constant
  C lit = literal_origin_constant(prof, ep, cfg);
  CHECK(std::abs(ef.C_phi - lit) < 1e-3 * std::abs(lit));
  // frozen value from the first calibration
  CHECK(std::abs(ef.C_phi - C(0.2733, 1.1867)) < 0.01);
  CHECK(ef.edge_residual < 1e-8);
}
