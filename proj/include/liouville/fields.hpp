#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <string>

#include "liouville/error.hpp"

namespace liouville {

using Index = Eigen::Index;

/// Uniform rectangular grid; node (i, j) sits at (x0 + i*hx, y0 + j*hy).
struct Grid2D {
  Index nx = 0;
  Index ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double hx = 0.0;
  double hy = 0.0;

  Grid2D() = default;
  Grid2D(Index nx_, Index ny_, double x0_, double y0_, double hx_, double hy_)
      : nx(nx_), ny(ny_), x0(x0_), y0(y0_), hx(hx_), hy(hy_) {
    if (nx < 2 || ny < 2)
      throw GridTooSmall("grid needs at least 2 nodes per direction, got " +
                         std::to_string(nx) + "x" + std::to_string(ny));
    if (!(hx > 0.0) || !(hy > 0.0) || !std::isfinite(hx) || !std::isfinite(hy))
      throw Error("fields.InvalidGrid", "grid spacings must be positive and finite");
    if (!std::isfinite(x0) || !std::isfinite(y0))
      throw Error("fields.InvalidGrid", "grid origin must be finite");
  }

  /// Grid spanning [x0, x1] x [y0, y1] with nx x ny nodes, corners included.
  static Grid2D spanning(double x0, double y0, double x1, double y1, Index nx, Index ny) {
    if (nx < 2 || ny < 2)
      throw GridTooSmall("grid needs at least 2 nodes per direction");
    return Grid2D(nx, ny, x0, y0, (x1 - x0) / static_cast<double>(nx - 1),
                  (y1 - y0) / static_cast<double>(ny - 1));
  }

  double x(Index i) const { return x0 + static_cast<double>(i) * hx; }
  double y(Index j) const { return y0 + static_cast<double>(j) * hy; }
  double x_end() const { return x(nx - 1); }
  double y_end() const { return y(ny - 1); }

  /// The (nx-1) x (ny-1) grid of cell centres. A 2x2 grid has a single
  /// cell, so this skips the node-count check.
  Grid2D cells() const {
    Grid2D c;
    c.nx = nx - 1;
    c.ny = ny - 1;
    c.x0 = x0 + hx / 2;
    c.y0 = y0 + hy / 2;
    c.hx = hx;
    c.hy = hy;
    return c;
  }

  bool operator==(const Grid2D&) const = default;
};

/// Nodal values on a Grid2D, stored as values(i, j).
template <typename Scalar>
struct ScalarField2D {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Grid2D grid;
  Array values;

  ScalarField2D() = default;
  explicit ScalarField2D(const Grid2D& g, Scalar fill = Scalar{0})
      : grid(g), values(Array::Constant(g.nx, g.ny, fill)) {}
  ScalarField2D(const Grid2D& g, Array v) : grid(g), values(std::move(v)) {
    if (values.rows() != grid.nx || values.cols() != grid.ny)
      throw Error("fields.ShapeMismatch", "value array does not match grid");
  }

  Scalar& operator()(Index i, Index j) { return values(i, j); }
  const Scalar& operator()(Index i, Index j) const { return values(i, j); }
};

using Field = ScalarField2D<double>;

/// Marks nodes where a quantity is undefined (boundary residuals, masked
/// blow-up regions). Norms skip it.
template <typename Scalar = double>
constexpr Scalar sentinel() {
  return std::numeric_limits<Scalar>::quiet_NaN();
}

template <typename Scalar>
bool is_sentinel(Scalar v) {
  return std::isnan(v);
}

/// The constants of Δu = K e^{au} / u_xy = K e^{au}; both must be nonzero.
struct LiouvilleParams {
  double K = 1.0;
  double a = 1.0;

  LiouvilleParams() = default;
  LiouvilleParams(double K_, double a_) : K(K_), a(a_) {
    if (K == 0.0 || a == 0.0 || !std::isfinite(K) || !std::isfinite(a))
      throw Error("fields.InvalidParams", "K and a must be nonzero finite reals");
  }
};

/// Samples fn(x, y) at every node.
template <typename Fn>
Field sample(const Grid2D& grid, Fn&& fn) {
  Field f(grid);
  for (Index j = 0; j < grid.ny; ++j)
    for (Index i = 0; i < grid.nx; ++i) f(i, j) = fn(grid.x(i), grid.y(j));
  return f;
}

/// Interior nodes carry Δ_h u - K exp(a u) (5-point Laplacian); boundary
/// nodes carry the sentinel.
template <typename Scalar>
ScalarField2D<Scalar> residual_elliptic(const ScalarField2D<Scalar>& u,
                                        const LiouvilleParams& p) {
  const Grid2D& g = u.grid;
  if (g.nx < 3 || g.ny < 3) throw GridTooSmall("elliptic residual needs a 3x3 grid");
  const Scalar ihx2 = Scalar{1} / (g.hx * g.hx);
  const Scalar ihy2 = Scalar{1} / (g.hy * g.hy);
  ScalarField2D<Scalar> r(g, sentinel<Scalar>());
  for (Index j = 1; j + 1 < g.ny; ++j) {
    for (Index i = 1; i + 1 < g.nx; ++i) {
      const Scalar c = u(i, j);
      const Scalar lap = (u(i + 1, j) - 2 * c + u(i - 1, j)) * ihx2 +
                         (u(i, j + 1) - 2 * c + u(i, j - 1)) * ihy2;
      r(i, j) = lap - p.K * std::exp(p.a * c);
    }
  }
  return r;
}

/// Per-cell D_xy u - K exp(a ū), ū the average of the four corners; the
/// result lives on grid.cells().
template <typename Scalar>
ScalarField2D<Scalar> residual_hyperbolic(const ScalarField2D<Scalar>& u,
                                          const LiouvilleParams& p) {
  const Grid2D& g = u.grid;
  const Scalar ihxy = Scalar{1} / (g.hx * g.hy);
  ScalarField2D<Scalar> r(g.cells());
  for (Index j = 0; j + 1 < g.ny; ++j) {
    for (Index i = 0; i + 1 < g.nx; ++i) {
      const Scalar dxy = (u(i + 1, j + 1) - u(i + 1, j) - u(i, j + 1) + u(i, j)) * ihxy;
      const Scalar avg = (u(i, j) + u(i + 1, j) + u(i, j + 1) + u(i + 1, j + 1)) / 4;
      r(i, j) = dxy - p.K * std::exp(p.a * avg);
    }
  }
  return r;
}

/// Per-cell D_xy(log T) / T̄ - K for the log form; T̄ is the geometric mean
/// of the four corners, so the result is exactly the hyperbolic residual of
/// log T (a = 1) divided by T̄.
template <typename Scalar>
ScalarField2D<Scalar> residual_log(const ScalarField2D<Scalar>& T, double K) {
  if (K == 0.0) throw Error("fields.InvalidParams", "K must be nonzero");
  if (!(T.values > Scalar{0}).all())
    throw NonPositiveField("log-form field must be strictly positive");
  ScalarField2D<Scalar> logT(T.grid, T.values.log());
  ScalarField2D<Scalar> r = residual_hyperbolic(logT, LiouvilleParams(K, 1.0));
  const Grid2D& g = T.grid;
  for (Index j = 0; j + 1 < g.ny; ++j) {
    for (Index i = 0; i + 1 < g.nx; ++i) {
      const Scalar mean_log =
          (logT(i, j) + logT(i + 1, j) + logT(i, j + 1) + logT(i + 1, j + 1)) / 4;
      const Scalar tbar = std::exp(mean_log);
      // (D_xy - K tbar) / tbar
      r(i, j) = r(i, j) / tbar;
    }
  }
  return r;
}

struct Norms {
  double max_abs = 0.0;
  double l2 = 0.0;
};

/// Max-abs and discrete L² (sqrt(hx hy Σ r²)) over non-sentinel entries.
template <typename Scalar>
Norms norms(const ScalarField2D<Scalar>& r) {
  Norms out;
  double sum = 0.0;
  Index count = 0;
  for (Index j = 0; j < r.grid.ny; ++j) {
    for (Index i = 0; i < r.grid.nx; ++i) {
      const double v = r(i, j);
      if (is_sentinel(v)) continue;
      out.max_abs = std::max(out.max_abs, std::abs(v));
      sum += v * v;
      ++count;
    }
  }
  if (count == 0) throw EmptyInterior();
  out.l2 = std::sqrt(r.grid.hx * r.grid.hy * sum);
  return out;
}

}  // namespace liouville
