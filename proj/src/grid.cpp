#include "vil/grid.hpp"

#include <cmath>

namespace vil {

// Nodes come from Chebyshev-Gauss-Lobatto points pushed through a monotone
// map r(x) defined by a node-density function: uniform density plus an
// optional sech^2 bump centered at r = 1 (integrated in closed form), which
// buys resolution at the critical layer without losing spectral accuracy.

Real RadialGrid::density(Real s) const {
  if (cluster_ <= 0.0) return 1.0;
  Real t = (s - 1.0) / cwidth_;
  Real sech = 1.0 / std::cosh(t);
  return 1.0 + cluster_ * sech * sech;
}

Real RadialGrid::density_cdf(Real s) const {
  Real base = s - s_min_;
  if (cluster_ <= 0.0) return base;
  Real t1 = std::tanh((s - 1.0) / cwidth_);
  Real t0 = std::tanh((s_min_ - 1.0) / cwidth_);
  return base + cluster_ * cwidth_ * (t1 - t0);
}

Real RadialGrid::map_s_of_u(Real u) const {
  if (cluster_ <= 0.0) return s_min_ + u * (s_max_ - s_min_);
  // bracketed Newton: the density bump is stiff, a raw Newton step overshoots
  Real target = u * total_mass_;
  Real lo = s_min_, hi = s_max_;
  Real s = s_min_ + u * (s_max_ - s_min_);
  for (int it = 0; it < 200; ++it) {
    Real f = density_cdf(s) - target;
    if (f > 0)
      hi = s;
    else
      lo = s;
    Real step = f / density(s);
    Real next = s - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) < 1e-15 * (s_max_ - s_min_)) return next;
    s = next;
  }
  return s;
}

Real RadialGrid::map_x_of_r(Real r) const {
  Real u = (cluster_ <= 0.0) ? (r - s_min_) / (s_max_ - s_min_)
                             : density_cdf(r) / total_mass_;
  return 2.0 * u - 1.0;
}

RadialGrid::RadialGrid(GridKind kind, Real r_min, Real r_max, int n, Real clustering,
                       Real cluster_width)
    : kind_(kind), r_min_(r_min), r_max_(r_max), cluster_(clustering), cwidth_(cluster_width) {
  if (n < 16) throw VilError("RadialGrid: n too small (min 16)");
  if (!(r_min < r_max) || r_min < 0.0) throw VilError("RadialGrid: bad interval");
  s_min_ = r_min;
  s_max_ = r_max;
  total_mass_ = density_cdf(s_max_);

  int N = n - 1;
  x_.resize(n);
  r_.resize(n);
  Vec rp(n);  // dr/dx at nodes
  for (int j = 0; j <= N; ++j) {
    x_(j) = -std::cos(PI * j / N);
    Real u = 0.5 * (x_(j) + 1.0);
    Real s = map_s_of_u(u);
    r_(j) = s;
    rp(j) = 0.5 * total_mass_ / density(s);
  }
  r_(0) = r_min;
  r_(N) = r_max;

  // Clenshaw-Curtis weights on x in [-1,1]
  Vec wcc(n);
  for (int j = 0; j <= N; ++j) {
    Real theta = PI * j / N;
    Real s = 1.0;
    for (int m = 1; m <= N / 2; ++m) {
      Real b = (2 * m == N) ? 1.0 : 2.0;
      s -= b / (4.0 * m * m - 1.0) * std::cos(2.0 * m * theta);
    }
    Real c = (j == 0 || j == N) ? 0.5 : 1.0;
    wcc(j) = 2.0 * c * s / N;
  }
  w_ = wcc.cwiseProduct(rp);

  // barycentric weights for CGL nodes (ascending)
  bary_.resize(n);
  for (int j = 0; j <= N; ++j) {
    Real b = (j % 2 == 0) ? 1.0 : -1.0;
    if (j == 0 || j == N) b *= 0.5;
    bary_(j) = b;
  }

  // differentiation matrix in x (generic barycentric form), then chain rule
  Mat Dx = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Real rowsum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      Dx(i, j) = (bary_(j) / bary_(i)) / (x_(i) - x_(j));
      rowsum += Dx(i, j);
    }
    Dx(i, i) = -rowsum;
  }
  D_ = rp.cwiseInverse().asDiagonal() * Dx;
  D2_ = D_ * D_;
}

template <class VecT>
auto RadialGrid::interp_impl(const VecT& f, Real r) const -> typename VecT::Scalar {
  using S = typename VecT::Scalar;
  if (r <= r_min_) return f(0);
  if (r >= r_max_) return f(f.size() - 1);
  Real x = map_x_of_r(r);
  S num = S(0);
  Real den = 0.0;
  for (int j = 0; j < n(); ++j) {
    Real dx = x - x_(j);
    if (std::abs(dx) < 1e-14) return f(j);
    Real c = bary_(j) / dx;
    num += S(c) * f(j);
    den += c;
  }
  return num / S(den);
}

Real RadialGrid::interp(const Vec& f, Real r) const { return interp_impl(f, r); }
Complex RadialGrid::interp(const CVec& f, Real r) const { return interp_impl(f, r); }

static Real wl2sq(const Vec& w, const CVec& f) {
  return (w.array() * f.array().abs2()).sum();
}

Real grid_norm(const RadialGrid& g, const CVec& f, NormKind which, Real M) {
  if (f.size() != g.n()) throw VilError("grid_norm: size mismatch");
  const Vec& w = g.weights();
  const Vec& r = g.nodes();
  CVec df = g.D().cast<Complex>() * f;
  CVec f_over_r = f;
  for (int i = 0; i < f.size(); ++i) {
    // at a node with r = 0 the Dirichlet data gives f/r -> f'(0)
    f_over_r(i) = (r(i) > 0.0) ? f(i) / r(i) : df(i);
  }
  switch (which) {
    case NormKind::L2:
      return std::sqrt(wl2sq(w, f));
    case NormKind::H1_0:
    case NormKind::H1_dot:
      return std::sqrt(wl2sq(w, df) + wl2sq(w, f_over_r));
    case NormKind::H1:
      return std::sqrt(wl2sq(w, df) + wl2sq(w, f_over_r) + wl2sq(w, f));
    case NormKind::Z_M: {
      if (M <= 0.0) throw VilError("grid_norm: Z_M needs M");
      return std::sqrt(M) * std::sqrt(wl2sq(w, df) + wl2sq(w, f_over_r));
    }
    case NormKind::H1_r: {
      CVec rdf = r.cast<Complex>().cwiseProduct(df);
      Real s = std::sqrt(wl2sq(w, df)) + std::sqrt(wl2sq(w, f_over_r));
      s += std::sqrt(wl2sq(w, rdf)) + std::sqrt(wl2sq(w, f));
      return s;
    }
  }
  throw VilError("grid_norm: unknown kind");
}

Real grid_norm(const RadialGrid& g, const Vec& f, NormKind which, Real M) {
  return grid_norm(g, CVec(f.cast<Complex>()), which, M);
}

ModeOperator::ModeOperator(std::shared_ptr<const RadialGrid> grid, int k)
    : grid_(std::move(grid)), k_(k) {
  if (std::abs(k) < 1) throw VilError("ModeOperator: |k| >= 1 required");
  const RadialGrid& g = *grid_;
  int n = g.n(), ni = n - 2;
  Lk_ai_ = g.D2().block(0, 1, n, ni);  // columns of interior nodes, all rows
  Real kk = Real(k_) * Real(k_) - 0.25;
  for (int j = 0; j < ni; ++j) {
    Real r = g.nodes()(j + 1);
    Lk_ai_(j + 1, j) -= kk / (r * r);
  }
  Lk_ii_ = Lk_ai_.block(1, 0, ni, ni);
  lu_.compute(Lk_ii_);
}

Vec ModeOperator::apply(const Vec& phi_int) const { return Lk_ii_ * phi_int; }
CVec ModeOperator::apply(const CVec& phi_int) const {
  return Lk_ii_ * phi_int.real() + Complex(0, 1) * (Lk_ii_ * phi_int.imag());
}
Vec ModeOperator::apply_allrows(const Vec& phi_int) const { return Lk_ai_ * phi_int; }
CVec ModeOperator::apply_allrows(const CVec& phi_int) const {
  return Lk_ai_ * phi_int.real() + Complex(0, 1) * (Lk_ai_ * phi_int.imag());
}
Vec ModeOperator::invert(const Vec& eta_int) const { return lu_.solve(eta_int); }
CVec ModeOperator::invert(const CVec& eta_int) const {
  Vec re = lu_.solve(Vec(eta_int.real()));
  Vec im = lu_.solve(Vec(eta_int.imag()));
  return re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
}

Vec extend_zero(const Vec& interior) {
  Vec out = Vec::Zero(interior.size() + 2);
  out.segment(1, interior.size()) = interior;
  return out;
}
CVec extend_zero(const CVec& interior) {
  CVec out = CVec::Zero(interior.size() + 2);
  out.segment(1, interior.size()) = interior;
  return out;
}

}  // namespace vil
