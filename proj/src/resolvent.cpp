#include "vil/resolvent.hpp"

#include <cmath>

#include "vil/gauss.hpp"

namespace vil {

Semigroup::Semigroup(std::shared_ptr<const RadialGrid> grid, const VortexProfile& profile,
                     SemigroupParams params)
    : grid_(std::move(grid)), profile_(profile), params_(params) {
  if (!(params_.alpha > 0.0 && params_.alpha < 2.0)) throw VilError("Semigroup: alpha not in (0,2)");
  if (params_.beta == 0.0) throw VilError("Semigroup: beta must be nonzero");
  if (params_.k == 0) throw VilError("Semigroup: k must be nonzero");
  v_.resize(grid_->n());
  for (int i = 0; i < grid_->n(); ++i) v_(i) = profile_.v(grid_->nodes()(i));
}

CVec Semigroup::apply_transport(Real tau, const CVec& w) const {
  CVec out(w.size());
  for (int i = 0; i < w.size(); ++i)
    out(i) = std::exp(Complex(0, -params_.k * tau * v_(i))) * w(i);
  return out;
}

CVec Semigroup::apply(Real tau, const CVec& w, Real support_radius) const {
  if (tau < 0.0) throw VilError("Semigroup::apply: tau must be nonnegative");
  if (std::isinf(params_.beta)) return apply_transport(tau, w);
  if (w.size() != grid_->n()) throw VilError("Semigroup::apply: size mismatch");
  Real ab = params_.alpha * params_.beta;
  Real lambda = std::exp(tau / ab);
  Real amp = std::sqrt(lambda);
  CVec out(w.size());
  for (int i = 0; i < w.size(); ++i) {
    Real r = grid_->nodes()(i), rp = lambda * r;
    Complex wval;
    if (rp > grid_->r_max()) {
      if (rp < support_radius)
        throw VilError("Semigroup::apply: dilation exits the stored domain");
      wval = Complex(0, 0);
    } else {
      wval = grid_->interp(w, rp);
    }
    Real phase;  // int_0^tau v(e^{(tau-s)/(ab)} r) ds
    if (r <= 0.0) {
      phase = tau * v_(0);
    } else if (rp > r) {
      phase = ab * profile_.int_v_over_r(r, rp);
    } else if (rp < r) {
      phase = -ab * profile_.int_v_over_r(rp, r);
    } else {
      phase = 0.0;
    }
    out(i) = amp * std::exp(Complex(0, -params_.k * phase)) * wval;
  }
  return out;
}

CVec Semigroup::apply_generator(const CVec& f) const {
  CVec df = grid_->D().cast<Complex>() * f;
  CVec out(f.size());
  Real inv_ab = std::isinf(params_.beta) ? 0.0 : 1.0 / (params_.alpha * params_.beta);
  for (int i = 0; i < f.size(); ++i) {
    out(i) = Complex(0, -params_.k * v_(i)) * f(i) +
             inv_ab * (grid_->nodes()(i) * df(i) + 0.5 * f(i));
  }
  return out;
}

namespace {

struct Quadrature {
  Real T = 0.0;
  int npanels = 0;
};

Quadrature setup_quadrature(const Semigroup& sg, const ResolventProbe& probe) {
  Real rez = probe.z.real();
  if (!(rez > 0.0)) throw VilError("resolvent: Re z > 0 required");
  Real beta = sg.params().beta;
  if (!std::isinf(beta) && !(std::abs(beta) > 2.0 / (sg.params().alpha * rez)))
    throw VilError("resolvent: beta below the beta_0 threshold 2/(alpha Re z)");
  Quadrature q;
  q.T = probe.T_horizon > 0.0 ? probe.T_horizon : std::max(Real(1), 40.0 / rez);
  if (std::exp(-rez * q.T) * (1.0 + q.T) > probe.tolerance)
    throw VilError("resolvent: horizon too small for the requested tolerance");
  // the integrand oscillates at the frequency of e^{-z tau} combined with the
  // transport phase k v(r) tau, so the panel width must resolve both even when
  // the decay rate Re z is small
  Real osc = std::abs(probe.z.imag()) +
             std::abs(Real(sg.params().k)) * sg.v_nodes().cwiseAbs().maxCoeff();
  q.npanels = std::max(8, int(std::ceil(q.T * (rez + osc) * probe.points_per_efold / 8.0)));
  return q;
}

// integrate e^{-z tau} F(tau) over [0, T] with composite 8-point Gauss
template <class F>
CVec laplace_quadrature(const Quadrature& q, Complex z, int n, F&& f) {
  const GaussRule& rule = gauss_rule(8);
  CVec acc = CVec::Zero(n);
  Real h = q.T / q.npanels;
  for (int p = 0; p < q.npanels; ++p) {
    Real a = p * h;
    for (int j = 0; j < 8; ++j) {
      Real tau = a + 0.5 * h * (rule.x[j] + 1.0);
      Real wq = 0.5 * h * rule.w[j];
      acc += (wq * std::exp(-z * tau)) * f(tau);
    }
  }
  return acc;
}

}  // namespace

CVec resolvent_apply(const Semigroup& sg, const ResolventProbe& probe, const CVec& w) {
  Quadrature q = setup_quadrature(sg, probe);
  return -laplace_quadrature(q, probe.z, int(w.size()),
                             [&](Real tau) { return sg.apply(tau, w, probe.support_radius); });
}

CVec multiplier_apply(const Semigroup& sg, Complex z, const CVec& w) {
  CVec out(w.size());
  for (int i = 0; i < w.size(); ++i)
    out(i) = w(i) / (Complex(0, sg.params().k * sg.v_nodes()(i)) + z);
  return out;
}

CVec T_beta_apply(const Semigroup& sg, const ResolventProbe& probe, const CVec& w) {
  if (std::isinf(sg.params().beta)) return CVec::Zero(w.size());
  Quadrature q = setup_quadrature(sg, probe);
  return laplace_quadrature(q, probe.z, int(w.size()), [&](Real tau) {
    return CVec(sg.apply(tau, w, probe.support_radius) - sg.apply_transport(tau, w));
  });
}

CVec random_probe_function(const RadialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<Real> uc(1.0, 3.0), uw(0.3, 0.5);
  std::normal_distribution<Real> amp(0.0, 1.0);
  int nbump = 6;
  std::vector<Real> c(nbump), s(nbump);
  std::vector<Complex> a(nbump);
  for (int b = 0; b < nbump; ++b) {
    c[b] = uc(rng);
    s[b] = uw(rng);
    a[b] = Complex(amp(rng), amp(rng));
  }
  CVec w = CVec::Zero(g.n());
  for (int i = 0; i < g.n(); ++i) {
    Real r = g.nodes()(i);
    if (r > 6.0) continue;
    for (int b = 0; b < nbump; ++b) {
      Real t = (r - c[b]) / s[b];
      w(i) += a[b] * std::exp(-t * t);
    }
  }
  return w;
}

Real estimate_operator_norm(const Semigroup& sg, const ResolventProbe& probe, NormKind X,
                            int trials, std::uint64_t seed) {
  if (trials < 8) throw VilError("estimate_operator_norm: trials >= 8 required");
  if (std::isinf(sg.params().beta)) return 0.0;
  std::mt19937_64 rng(seed);
  Real best = 0.0;
  for (int t = 0; t < trials; ++t) {
    CVec w = random_probe_function(sg.grid(), rng);
    Real nw = grid_norm(sg.grid(), w, X);
    if (nw <= 0.0) continue;
    CVec Tw = T_beta_apply(sg, probe, w);
    best = std::max(best, grid_norm(sg.grid(), Tw, X) / nw);
  }
  return best;
}

}  // namespace vil
