#include "vil/piecewise.hpp"

#include <algorithm>
#include <cmath>

#include "vil/gauss.hpp"

namespace vil {

PiecewisePoly::PiecewisePoly(std::vector<Real> breaks, std::vector<std::vector<Real>> coeffs)
    : breaks_(std::move(breaks)), coeffs_(std::move(coeffs)) {
  if (breaks_.size() != coeffs_.size() + 1)
    throw VilError("PiecewisePoly: breaks/coeffs size mismatch");
  for (size_t i = 0; i + 1 < breaks_.size(); ++i)
    if (!(breaks_[i] < breaks_[i + 1])) throw VilError("PiecewisePoly: breaks not increasing");
}

int PiecewisePoly::find_piece(Real r) const {
  if (r < breaks_.front() || r >= breaks_.back()) return -1;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), r);
  int i = int(it - breaks_.begin()) - 1;
  if (i >= int(coeffs_.size())) i = int(coeffs_.size()) - 1;
  return i;
}

static Real horner(const std::vector<Real>& c, Real x) {
  Real s = 0.0;
  for (int j = int(c.size()) - 1; j >= 0; --j) s = s * x + c[j];
  return s;
}

Real PiecewisePoly::eval(Real r) const {
  int i = find_piece(r);
  if (i < 0) return 0.0;
  return horner(coeffs_[i], r - breaks_[i]);
}

Real PiecewisePoly::eval_derivative(Real r, int order) const {
  int i = find_piece(r);
  if (i < 0) return 0.0;
  std::vector<Real> c = coeffs_[i];
  for (int d = 0; d < order; ++d) {
    for (size_t j = 1; j < c.size(); ++j) c[j - 1] = c[j] * Real(j);
    if (c.empty())
      return 0.0;
    else
      c.pop_back();
  }
  return horner(c, r - breaks_[i]);
}

PiecewisePoly PiecewisePoly::derivative() const {
  std::vector<std::vector<Real>> dc;
  dc.reserve(coeffs_.size());
  for (const auto& c : coeffs_) {
    std::vector<Real> d;
    for (size_t j = 1; j < c.size(); ++j) d.push_back(c[j] * Real(j));
    if (d.empty()) d.push_back(0.0);
    dc.push_back(std::move(d));
  }
  return PiecewisePoly(breaks_, std::move(dc));
}

Real PiecewisePoly::integrate_rw(Real a, Real b, int rweight) const {
  a = std::max(a, lo());
  b = std::min(b, hi());
  if (a >= b) return 0.0;
  Real s = 0.0;
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    Real lo_i = std::max(a, breaks_[i]), hi_i = std::min(b, breaks_[i + 1]);
    if (lo_i >= hi_i) continue;
    int deg = int(coeffs_[i].size()) - 1 + rweight;
    int npts = deg / 2 + 2;
    const auto& c = coeffs_[i];
    Real base = breaks_[i];
    s += gauss_integrate(
        [&](Real r) {
          Real p = horner(c, r - base);
          return rweight ? p * r : p;
        },
        lo_i, hi_i, npts);
  }
  return s;
}

std::vector<Real> poly_shift(const std::vector<Real>& c, Real delta) {
  // p(x + delta) by synthetic division
  std::vector<Real> out(c);
  int n = int(c.size());
  for (int j = 0; j < n - 1; ++j)
    for (int k = n - 2; k >= j; --k) out[k] += delta * out[k + 1];
  return out;
}

void PiecewisePoly::add(const PiecewisePoly& q, Real amp) {
  // merge breakpoints
  std::vector<Real> nb = breaks_;
  for (Real b : q.breaks_)
    if (b > lo() && b < hi()) nb.push_back(b);
  std::sort(nb.begin(), nb.end());
  nb.erase(std::unique(nb.begin(), nb.end(),
                       [](Real x, Real y) { return std::abs(x - y) < 1e-14; }),
           nb.end());
  std::vector<std::vector<Real>> nc;
  for (size_t i = 0; i + 1 < nb.size(); ++i) {
    Real mid = 0.5 * (nb[i] + nb[i + 1]);
    int ip = find_piece(mid);
    std::vector<Real> c =
        ip >= 0 ? poly_shift(coeffs_[ip], nb[i] - breaks_[ip]) : std::vector<Real>{0.0};
    int iq = q.find_piece(mid);
    if (iq >= 0 && amp != 0.0) {
      std::vector<Real> cq = poly_shift(q.coeffs_[iq], nb[i] - q.breaks_[iq]);
      if (cq.size() > c.size()) c.resize(cq.size(), 0.0);
      for (size_t j = 0; j < cq.size(); ++j) c[j] += amp * cq[j];
    }
    nc.push_back(std::move(c));
  }
  breaks_ = std::move(nb);
  coeffs_ = std::move(nc);
}

std::vector<Real> hermite_connector(Real a, Real b, const std::vector<Real>& left,
                                    const std::vector<Real>& right,
                                    const std::vector<std::pair<Real, Real>>& knots) {
  // match left.size() derivatives at a and right.size() at b, plus the knot
  // values; assembled in the scaled variable xi = (r-a)/(b-a) for conditioning,
  // coefficients returned in the local variable x = r - a
  int nk = int(knots.size());
  int nl = int(left.size()), nr = int(right.size());
  int n = nl + nr + nk;
  Mat A = Mat::Zero(n, n);
  Vec rhs = Vec::Zero(n);
  Real h = b - a;
  auto fill_row = [&](int row, Real xi, int order) {
    for (int j = order; j < n; ++j) {
      Real f = 1.0;
      for (int d = 0; d < order; ++d) f *= Real(j - d);
      A(row, j) = f * std::pow(xi, j - order);
    }
  };
  Real hp = 1.0;
  for (int d = 0; d < nl; ++d) {
    fill_row(d, 0.0, d);
    rhs(d) = left[d] * hp;
    hp *= h;
  }
  hp = 1.0;
  for (int d = 0; d < nr; ++d) {
    fill_row(nl + d, 1.0, d);
    rhs(nl + d) = right[d] * hp;
    hp *= h;
  }
  for (int i = 0; i < nk; ++i) {
    fill_row(nl + nr + i, (knots[i].first - a) / h, 0);
    rhs(nl + nr + i) = knots[i].second;
  }
  Vec c = A.fullPivLu().solve(rhs);
  std::vector<Real> out(n);
  hp = 1.0;
  for (int j = 0; j < n; ++j) {
    out[j] = c(j) / hp;
    hp *= h;
  }
  return out;
}

}  // namespace vil
