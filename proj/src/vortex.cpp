#include "vil/vortex.hpp"

#include <cmath>

#include "vil/gauss.hpp"

namespace vil {

Real VortexProfile::v(Real r) const {
  const Real rr0 = g_.hi();
  if (class_g_ && r <= params_.delta0)
    return 0.5 * params_.g0 - 0.25 * params_.gamma0 * r * r;
  if (r < 1e-12) return 0.5 * g_.eval(0.0);
  if (r >= rr0) {
    Real m_total = g_.integrate_rw(g_.lo(), rr0, 1);
    Real scale = std::abs(g_.integrate_rw(g_.lo(), 1.0, 1)) + std::abs(m_total);
    if (std::abs(m_total) < 1e-11 * std::max(scale, Real(1))) return 0.0;
    return m_total / (r * r);
  }
  return g_.integrate_rw(g_.lo(), r, 1) / (r * r);
}

Real VortexProfile::v_prime(Real r) const {
  if (class_g_ && r <= params_.delta0) return -0.5 * params_.gamma0 * r;
  if (r < 1e-12) return 0.0;
  if (r >= g_.hi()) {
    Real m_total = g_.integrate_rw(g_.lo(), g_.hi(), 1);
    if (std::abs(m_total) < 1e-11) return 0.0;
    return -2.0 * m_total / (r * r * r);
  }
  return (g_.eval(r) - 2.0 * v(r)) / r;
}

Real VortexProfile::A(Real r) const {
  if (r >= g_.hi()) return 0.0;
  if (class_g_) {
    Real h = r - 1.0;
    // one-sided expansion at the critical radius: g' = gamma1*h exactly in the
    // well and v''(1) = -3 v'(1) for class-G data, so A = (gamma1/v'(1))(1+h/2)+O(h^2)
    if (std::abs(h) < 1e-5) return params_.gamma1 / vp1_ * (1.0 + 0.5 * h);
  }
  if (r <= 0.0) return g_.eval_derivative(0.0, 2) / (v0_ - v1_);  // g'(r)/r -> g''(0)
  Real gp = gp_.eval(r);
  Real den = r * (v(r) - v1_);
  if (std::abs(den) < 1e-13 * std::max(Real(1), std::abs(v0_))) {
    if (std::abs(gp) < 1e-10) return 0.0;
    throw VilError("A(r): v(r)=v(1) with g'(r) != 0 away from r=1; vortex violates monotonicity");
  }
  return gp / den;
}

Real VortexProfile::Iv(Real u) const {
  const auto& breaks = g_.breaks();
  const IvPiece* p = &iv_tail_;
  for (size_t i = 0; i + 1 < breaks.size(); ++i)
    if (u < breaks[i + 1]) {
      p = &iv_[i];
      break;
    }
  Real s = p->K + p->c_inv2 / (u * u);
  if (p->c_log != 0.0) s += p->c_log * std::log(u);
  Real poly = 0.0;
  for (int j = int(p->pw.size()) - 1; j >= 0; --j) poly = poly * u + p->pw[j];
  return s + poly * u;
}

// int_0^r (v(s) - v0)/s ds = Iv(r) - v0 log r, which tends to 0 as r -> 0
// because the first piece of Iv is v0 log u + O(u)
Real VortexProfile::phase_integral(Real r) const {
  if (r <= 0.0) return 0.0;
  return Iv(r) - v0_ * std::log(r);
}

Real VortexProfile::int_v_over_r(Real a, Real b) const {
  if (a <= 0.0) throw VilError("int_v_over_r: a must be positive");
  if (a >= b) return 0.0;
  return Iv(b) - Iv(a);
}

void VortexProfile::derive_fields() {
  gp_ = g_.derivative();
  v0_ = class_g_ ? 0.5 * params_.g0 : 0.5 * g_.eval(0.0);
  v1_ = g_.integrate_rw(g_.lo(), 1.0, 1);
  vp1_ = g_.eval(1.0) - 2.0 * v1_;
  moment_residual_ = g_.integrate_rw(g_.lo(), g_.hi(), 1);

  // closed-form antiderivative of v/u, piece by piece, kept continuous
  const auto& breaks = g_.breaks();
  iv_.assign(g_.coeffs().size(), IvPiece{});
  Real m_cum = 0.0;   // moment of s*g up to the left break
  Real F_left = 0.0;  // value of Iv at the left break (0 for the first piece)
  for (size_t i = 0; i < g_.coeffs().size(); ++i) {
    Real b_lo = breaks[i], b_hi = breaks[i + 1];
    std::vector<Real> q = poly_shift(g_.coeffs()[i], -b_lo);  // coeffs in powers of u
    // Q(u) = int u*q(u) du, powers j+2; C chosen so m(u) = C + Q(u) on the piece
    std::vector<Real> Q(q.size() + 2, 0.0);
    for (size_t j = 0; j < q.size(); ++j) Q[j + 2] = q[j] / Real(j + 2);
    Real Q_lo = 0.0;
    for (int j = int(Q.size()) - 1; j >= 0; --j) Q_lo = Q_lo * b_lo + Q[j];
    Real C = m_cum - Q_lo;

    IvPiece& P = iv_[i];
    P.c_inv2 = -0.5 * C;
    P.c_log = Q.size() > 2 ? Q[2] : 0.0;
    P.pw.assign(Q.size() > 3 ? Q.size() - 3 : 0, 0.0);
    for (size_t p = 3; p < Q.size(); ++p) P.pw[p - 3] = Q[p] / Real(p - 2);

    if (i == 0) {
      // first piece starts at u = 0: C = 0 there, constant fixed to 0 so the
      // phase integral limit at the origin vanishes
      P.K = 0.0;
    } else {
      Real raw = P.c_inv2 / (b_lo * b_lo) + (P.c_log != 0.0 ? P.c_log * std::log(b_lo) : 0.0);
      Real poly = 0.0;
      for (int j = int(P.pw.size()) - 1; j >= 0; --j) poly = poly * b_lo + P.pw[j];
      P.K = F_left - raw - poly * b_lo;
    }

    Real Q_hi = 0.0;
    for (int j = int(Q.size()) - 1; j >= 0; --j) Q_hi = Q_hi * b_hi + Q[j];
    m_cum = C + Q_hi;
    {
      Real raw = P.c_inv2 / (b_hi * b_hi) + (P.c_log != 0.0 ? P.c_log * std::log(b_hi) : 0.0);
      Real poly = 0.0;
      for (int j = int(P.pw.size()) - 1; j >= 0; --j) poly = poly * b_hi + P.pw[j];
      F_left = P.K + raw + poly * b_hi;
    }
  }
  // beyond the support v = m_total/u^2 (zero for a balanced vortex)
  Real rhi = breaks.back();
  iv_tail_.c_inv2 = -0.5 * m_cum;
  iv_tail_.c_log = 0.0;
  iv_tail_.pw.clear();
  iv_tail_.K = F_left - iv_tail_.c_inv2 / (rhi * rhi);
}

static PiecewisePoly unit_moment_bump(Real a, Real b) {
  // ((r-a)(b-r))^5, C^4 at both ends, scaled to unit radial moment
  Real L = b - a;
  std::vector<Real> c(11, 0.0);
  Real binom[6] = {1, 5, 10, 10, 5, 1};
  for (int j = 0; j <= 5; ++j) c[5 + j] = (j % 2 ? -1.0 : 1.0) * binom[j] * std::pow(L, 5 - j);
  PiecewisePoly bump({a, b}, {c});
  Real m = bump.integrate_rw(a, b, 1);
  std::vector<Real> cs = c;
  for (Real& x : cs) x /= m;
  return PiecewisePoly({a, b}, {cs});
}

static void validate_params(const VortexParams& p) {
  if (p.r1 != 1.0)
    throw VilError("build_vortex: r1 = 1 normalization required (use profile_from_poly to bypass)");
  if (!(p.g0 > 0 && p.gamma0 > 0 && p.g1 > 0 && p.gamma1 > 0))
    throw VilError("build_vortex: amplitudes must be positive");
  if (!(p.delta0 > 0 && p.delta0 < 1) || !(p.delta1 > 0 && p.delta1 < 1))
    throw VilError("build_vortex: delta0, delta1 must lie in (0,1)");
  if (!(p.delta0 < 1.0 - p.delta1))
    throw VilError("build_vortex: core and well pieces overlap (delta0 >= 1 - delta1)");
  if (!(p.r0 > 1.0 + p.delta1)) throw VilError("build_vortex: r0 <= r1 + delta1");
  if (!(p.g0 - p.gamma0 * p.delta0 * p.delta0 > 0))
    throw VilError("build_vortex: g not positive on the core plateau");
}

// core plateau, two connectors, well, all before the tail bump
static PiecewisePoly assemble_unbumped(const VortexParams& p) {
  Real d0 = p.delta0, d1 = p.delta1, r0 = p.r0;
  Real wl = 1.0 - d1, wr = 1.0 + d1;

  // C^4 joints: the adjacent pieces are quadratics, so third and fourth
  // derivatives vanish there
  std::vector<Real> core_right = {p.g0 - p.gamma0 * d0 * d0, -2 * p.gamma0 * d0, -2 * p.gamma0,
                                  0, 0};
  std::vector<Real> well_left = {-p.g1 + 0.5 * p.gamma1 * d1 * d1, -p.gamma1 * d1, p.gamma1, 0,
                                 0};
  std::vector<Real> well_right = {-p.g1 + 0.5 * p.gamma1 * d1 * d1, p.gamma1 * d1, p.gamma1, 0,
                                  0};
  std::vector<Real> zero5 = {0, 0, 0, 0, 0};

  std::vector<Real> conn1 = hermite_connector(d0, wl, core_right, well_left, p.blend_knots);
  std::vector<Real> conn2 = hermite_connector(wr, r0, well_right, zero5, {});

  std::vector<Real> wellc = {-p.g1 + 0.5 * p.gamma1 * d1 * d1, -p.gamma1 * d1, 0.5 * p.gamma1};

  return PiecewisePoly({0.0, d0, wl, wr, r0}, {{p.g0, 0.0, -p.gamma0}, conn1, wellc, conn2});
}

Real raw_moment(const VortexParams& p) {
  validate_params(p);
  return assemble_unbumped(p).integrate_rw(0.0, p.r0, 1);
}

VortexParams balance_well_depth(VortexParams p) {
  Real a = 1e-3, b = 10.0;
  auto moment_at = [&](Real g1) {
    p.g1 = g1;
    return raw_moment(p);
  };
  Real fa = moment_at(a), fb = moment_at(b);
  if (fa * fb > 0.0)
    throw VilError("balance_well_depth: no sign change of the moment on g1 in [1e-3, 10]");
  for (int it = 0; it < 100 && b - a > 1e-14; ++it) {
    Real m = 0.5 * (a + b), fm = moment_at(m);
    if (fa * fm <= 0.0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  p.g1 = 0.5 * (a + b);
  return p;
}

VortexProfile build_vortex(const VortexParams& p) {
  validate_params(p);
  Real r0 = p.r0, wr = 1.0 + p.delta1;
  PiecewisePoly g = assemble_unbumped(p);

  // tail bump amplitude from the moment (linear, one Newton step)
  PiecewisePoly bump = unit_moment_bump(wr, r0);
  Real amp = -g.integrate_rw(0.0, r0, 1);
  g.add(bump, amp);

  VortexProfile prof;
  prof.params_ = p;
  prof.params_.tail_amplitude = amp;
  prof.class_g_ = true;
  prof.g_ = g;
  prof.derive_fields();

  // structural validation by dense sampling
  PiecewisePoly gp = g.derivative();
  Real scale = 0.0;
  int ns = 4000;
  for (int i = 0; i <= ns; ++i) scale = std::max(scale, std::abs(gp.eval(r0 * i / ns)));
  for (int i = 0; i <= ns; ++i) {
    Real r = r0 * i / ns;
    Real d = gp.eval(r);
    if (r <= 1.0 && d > 1e-9 * scale)
      throw VilError("build_vortex: g' > 0 on [0, r1] at r=" + std::to_string(r));
    if (r > 1.0 && d < -1e-9 * scale)
      throw VilError("build_vortex: g' < 0 on (r1, r0] at r=" + std::to_string(r));
  }
  Real mr = std::abs(prof.moment_residual_);
  Real mabs = gauss_integrate_broken([&](Real r) { return std::abs(g.eval(r)) * r; }, 0.0, r0,
                                     g.breaks(), 16, 4);
  if (mr > 1e-12 * mabs)
    throw VilError("build_vortex: zero-mean enforcement failed, residual moment " +
                   std::to_string(mr));
  if (std::abs(prof.vp1_) < 1e-6)
    throw VilError("build_vortex: degenerate vortex, |v'(1)| below threshold");
  return prof;
}

VortexProfile profile_from_poly(PiecewisePoly g, bool validate) {
  (void)validate;
  VortexProfile prof;
  prof.class_g_ = false;
  prof.g_ = std::move(g);
  prof.derive_fields();
  return prof;
}

}  // namespace vil
