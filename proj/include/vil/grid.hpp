#ifndef VIL_GRID_HPP
#define VIL_GRID_HPP

#include <memory>

#include "vil/common.hpp"

namespace vil {

enum class GridKind { inner, outer, global };

// Chebyshev-Gauss-Lobatto nodes mapped to [r_min, r_max] with optional extra
// node density near r = 1 (algebraic stretch via a sech^2 density bump), plus
// Clenshaw-Curtis quadrature weights and collocation differentiation matrices.
class RadialGrid {
 public:
  RadialGrid(GridKind kind, Real r_min, Real r_max, int n, Real clustering = 0.0,
             Real cluster_width = 0.6);

  GridKind kind() const { return kind_; }
  int n() const { return int(r_.size()); }
  Real r_min() const { return r_min_; }
  Real r_max() const { return r_max_; }
  Real clustering() const { return cluster_; }

  const Vec& nodes() const { return r_; }
  const Vec& weights() const { return w_; }
  const Mat& D() const { return D_; }    // d/dr on the full node set
  const Mat& D2() const { return D2_; }  // d^2/dr^2

  template <class Derived>
  auto integrate(const Eigen::MatrixBase<Derived>& f) const {
    using S = typename Derived::Scalar;
    S s{};
    for (int i = 0; i < f.size(); ++i) s += S(w_(i)) * f(i);
    return s;
  }

  // barycentric interpolation of nodal data at an arbitrary radius
  Real interp(const Vec& f, Real r) const;
  Complex interp(const CVec& f, Real r) const;

  // map internals (for semigroup dilation and refinement studies)
  Real map_x_of_r(Real r) const;

 private:
  template <class VecT>
  auto interp_impl(const VecT& f, Real r) const -> typename VecT::Scalar;

  GridKind kind_;
  Real r_min_, r_max_, cluster_, cwidth_, total_mass_;
  Real s_min_ = 0, s_max_ = 0;
  Vec x_;     // CGL parameter, ascending in [-1,1]
  Vec r_;     // mapped nodes, ascending
  Vec w_;     // quadrature weights in r
  Vec bary_;  // barycentric weights on x_
  Mat D_, D2_;

  Real density(Real s) const;
  Real density_cdf(Real s) const;
  Real map_s_of_u(Real u) const;
};

enum class NormKind { H1_0, H1_dot, H1, Z_M, H1_r, L2 };

// Discrete analogues of the paper-style radial norms; f lives on grid nodes.
Real grid_norm(const RadialGrid& g, const CVec& f, NormKind which, Real M = -1.0);
Real grid_norm(const RadialGrid& g, const Vec& f, NormKind which, Real M = -1.0);

// L_k(phi) = phi'' - (k^2 - 1/4) r^{-2} phi with Dirichlet rows at both ends.
class ModeOperator {
 public:
  ModeOperator(std::shared_ptr<const RadialGrid> grid, int k);

  int k() const { return k_; }
  const RadialGrid& grid() const { return *grid_; }
  int n_interior() const { return int(grid_->n()) - 2; }

  // interior nodal values in, interior values of L_k(phi) out
  Vec apply(const Vec& phi_int) const;
  CVec apply(const CVec& phi_int) const;
  // values of L_k(phi) at all nodes (phi extended by zero at the ends)
  Vec apply_allrows(const Vec& phi_int) const;
  CVec apply_allrows(const CVec& phi_int) const;

  // unique Dirichlet solution of L_k(phi) = eta
  Vec invert(const Vec& eta_int) const;
  CVec invert(const CVec& eta_int) const;

  const Mat& matrix() const { return Lk_ii_; }        // interior x interior
  const Mat& matrix_allrows() const { return Lk_ai_; }  // all x interior

 private:
  std::shared_ptr<const RadialGrid> grid_;
  int k_;
  Mat Lk_ii_, Lk_ai_;
  Eigen::PartialPivLU<Mat> lu_;
};

// pad interior values with zero boundary entries
Vec extend_zero(const Vec& interior);
CVec extend_zero(const CVec& interior);

}  // namespace vil

#endif
