#ifndef VIL_PIECEWISE_HPP
#define VIL_PIECEWISE_HPP

#include <array>
#include <utility>

#include "vil/common.hpp"

namespace vil {

// Piecewise polynomial on [breaks.front(), breaks.back()], zero outside.
// Piece i holds coefficients in the local variable (r - breaks[i]).
class PiecewisePoly {
 public:
  PiecewisePoly() = default;
  PiecewisePoly(std::vector<Real> breaks, std::vector<std::vector<Real>> coeffs);

  Real operator()(Real r) const { return eval(r); }
  Real eval(Real r) const;
  Real eval_derivative(Real r, int order = 1) const;

  PiecewisePoly derivative() const;

  // exact integral of p(r) * r^w over [a,b] (w = 0 or 1), via per-piece Gauss
  Real integrate_rw(Real a, Real b, int rweight) const;

  // add q (given in the same global coordinate pieces) scaled by amp on the
  // sub-interval [q.lo(), q.hi()]; splits pieces as needed
  void add(const PiecewisePoly& q, Real amp);

  Real lo() const { return breaks_.front(); }
  Real hi() const { return breaks_.back(); }
  const std::vector<Real>& breaks() const { return breaks_; }
  const std::vector<std::vector<Real>>& coeffs() const { return coeffs_; }

 private:
  int find_piece(Real r) const;
  std::vector<Real> breaks_;
  std::vector<std::vector<Real>> coeffs_;
};

// Polynomial utility: Taylor shift, p(x) -> p(x + delta), coefficients in place.
std::vector<Real> poly_shift(const std::vector<Real>& c, Real delta);

// Hermite connector of minimal degree matching (value, d1, d2) at both ends,
// optionally interpolating interior (radius, value) knots.
std::vector<Real> hermite_connector(Real a, Real b, const std::vector<Real>& left,
                                    const std::vector<Real>& right,
                                    const std::vector<std::pair<Real, Real>>& knots);

}  // namespace vil

#endif
