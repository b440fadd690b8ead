#include "liouville/hyperbolic.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace liouville {

namespace {

constexpr double kOverflow = 200.0;

struct CellOutcome {
  double value;
  bool blown_up;
};

/// Root of g(x) = x - A - c exp(a (S + x) / 4) on the branch continuous with
/// c -> 0 (the smaller root when c*a > 0).
CellOutcome solve_cell(double A, double S, double c, double a, Index i, Index j) {
  auto rhs = [&](double x) { return A + c * std::exp(a * (S + x) / 4.0); };
  auto g = [&](double x) { return x - rhs(x); };

  double x = A;
  for (int it = 0; it < 20; ++it) {
    const double next = rhs(x);
    if (!std::isfinite(next)) break;
    if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(next))) return {next, false};
    x = next;
  }

  // Newton with a bisection safeguard on a bracket of the wanted root.
  const double ca = c * a;
  double lo, hi;
  if (ca > 0.0) {
    // g is concave with its maximum at x_star; no root means blow-up.
    const double x_star = 4.0 / a * std::log(4.0 / ca) - S;
    if (g(x_star) < 0.0) return {0.0, true};
    if (a > 0.0) {
      hi = x_star;
      lo = std::min(A, x_star) - 1.0;
      for (int k = 0; g(lo) > 0.0 && k < 200; ++k) lo -= 2.0 * (hi - lo);
    } else {
      lo = x_star;
      hi = std::max(A, x_star) + 1.0;
      for (int k = 0; g(hi) < 0.0 && k < 200; ++k) hi += 2.0 * (hi - lo);
    }
  } else {
    // g is monotone increasing: expand a bracket around A.
    double step = 1.0;
    lo = A - step;
    hi = A + step;
    for (int k = 0; g(lo) > 0.0 && k < 200; ++k) lo -= (step *= 2.0);
    step = 1.0;
    for (int k = 0; g(hi) < 0.0 && k < 200; ++k) hi += (step *= 2.0);
  }
  double glo = g(lo), ghi = g(hi);
  if (!(glo <= 0.0 && ghi >= 0.0)) throw CellIterationDivergence(i, j);
  x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gx = g(x);
    if (gx == 0.0) return {x, false};
    if (gx < 0.0)
      lo = x;
    else
      hi = x;
    const double dg = 1.0 - ca / 4.0 * std::exp(a * (S + x) / 4.0);
    double next = x - gx / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x)) || hi - lo <= 1e-15 * (1.0 + std::abs(x)))
      return {next, false};
    x = next;
  }
  throw CellIterationDivergence(i, j);
}

}  // namespace

MarchResult march_edges(const Eigen::VectorXd& bottom, const Eigen::VectorXd& left,
                        const LiouvilleParams& p, const Grid2D& grid, double threshold) {
  if (bottom.size() != grid.nx || left.size() != grid.ny)
    throw Error("hyperbolic.InvalidArgument", "edge data does not match the grid");
  if (std::abs(bottom(0) - left(0)) > 1e-12)
    throw Error("hyperbolic.CornerMismatch",
                "phi(x0) and psi(y0) differ by " + std::to_string(std::abs(bottom(0) - left(0))));
  if (!bottom.allFinite() || !left.allFinite())
    throw Error("hyperbolic.InvalidArgument", "edge data must be finite");

  MarchResult out{Field(grid), Mask::Zero(grid.nx, grid.ny)};
  Field& u = out.u;
  Mask& mask = out.mask;
  for (Index i = 0; i < grid.nx; ++i) {
    u(i, 0) = bottom(i);
    if (u(i, 0) > threshold || (i > 0 && mask(i - 1, 0))) mask(i, 0) = 1;
  }
  for (Index j = 0; j < grid.ny; ++j) {
    u(0, j) = left(j);
    if (u(0, j) > threshold || (j > 0 && mask(0, j - 1))) mask(0, j) = 1;
  }

  const double c = grid.hx * grid.hy * p.K;
  for (Index j = 1; j < grid.ny; ++j) {
    for (Index i = 1; i < grid.nx; ++i) {
      if (mask(i - 1, j) || mask(i, j - 1) || mask(i - 1, j - 1)) {
        mask(i, j) = 1;
        continue;
      }
      const double A = u(i - 1, j) + u(i, j - 1) - u(i - 1, j - 1);
      const double S = u(i - 1, j) + u(i, j - 1) + u(i - 1, j - 1);
      const CellOutcome cell = solve_cell(A, S, c, p.a, i, j);
      if (cell.blown_up || !(cell.value <= threshold))
        mask(i, j) = 1;
      else
        u(i, j) = cell.value;
    }
  }
  for (Index j = 0; j < grid.ny; ++j)
    for (Index i = 0; i < grid.nx; ++i)
      if (mask(i, j)) u(i, j) = sentinel();
  return out;
}

MarchResult march(const GoursatData& data, const LiouvilleParams& p, const Grid2D& grid,
                  double threshold) {
  if (data.phi.arity() != 1 || data.psi.arity() != 1)
    throw Error("hyperbolic.InvalidArgument", "Goursat data must be functions of one variable");
  Eigen::VectorXd bottom(grid.nx), left(grid.ny);
  for (Index i = 0; i < grid.nx; ++i) bottom(i) = data.phi(grid.x(i));
  for (Index j = 0; j < grid.ny; ++j) left(j) = data.psi(grid.y(j));
  return march_edges(bottom, left, p, grid, threshold);
}

namespace {

/// Samples of a one-variable function and its derivative at nodes and
/// midpoints: index 2k is node k, 2k+1 the midpoint after it.
struct HalfSamples {
  Eigen::VectorXd value;
  Eigen::VectorXd slope;
};

HalfSamples sample_half(const Expr& e, double origin, double h, Index n) {
  HalfSamples s{Eigen::VectorXd(2 * n - 1), Eigen::VectorXd(2 * n - 1)};
  for (Index k = 0; k < 2 * n - 1; ++k) {
    const auto r = eval_dual(e, origin + 0.5 * static_cast<double>(k) * h);
    s.value(k) = r.value;
    s.slope(k) = r.d1;
  }
  return s;
}

/// One RK4 sweep of dv/dt = sign*w_t + coef*exp((v + sign*w)/2) along a
/// line, where w = line(t) + offset; returns node values.
Eigen::VectorXd integrate_line(const HalfSamples& line, double offset, double v0, double h,
                               double sign, double coef, const std::string& label) {
  const Index n = (line.value.size() + 1) / 2;
  Eigen::VectorXd v(n);
  v(0) = v0;
  auto f = [&](Index k, double val) {
    return sign * line.slope(k) + coef * std::exp((val + sign * (line.value(k) + offset)) / 2.0);
  };
  for (Index m = 0; m + 1 < n; ++m) {
    const Index k = 2 * m;
    const double y = v(m);
    const double k1 = f(k, y);
    const double k2 = f(k + 1, y + 0.5 * h * k1);
    const double k3 = f(k + 1, y + 0.5 * h * k2);
    const double k4 = f(k + 2, y + h * k3);
    const double next = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(k1 + k2 + k3 + k4) || !std::isfinite(next) || next > kOverflow)
      throw OdeOverflow(label + ", step " + std::to_string(m + 1));
    v(m + 1) = next;
  }
  return v;
}

}  // namespace

Field backlund(const WaveSolution& w, double bt_a, double u_corner, const Grid2D& grid,
               IntegrationOrder order) {
  if (bt_a == 0.0 || !std::isfinite(bt_a))
    throw Error("hyperbolic.InvalidArgument", "Bäcklund constant must be nonzero");
  if (w.phi.arity() != 1 || w.psi.arity() != 1)
    throw Error("hyperbolic.InvalidArgument", "wave data must be functions of one variable");
  const HalfSamples phi = sample_half(w.phi, grid.x0, grid.hx, grid.nx);
  const HalfSamples psi = sample_half(w.psi, grid.y0, grid.hy, grid.ny);

  // Along x: u_x = +w_x + bt_a e^{(u+w)/2};  along y: u_y = -w_y + (2/bt_a) e^{(u-w)/2}.
  const double cx = bt_a, cy = 2.0 / bt_a;
  Field u(grid);
  if (order == IntegrationOrder::x_then_y) {
    const Eigen::VectorXd edge =
        integrate_line(phi, psi.value(0), u_corner, grid.hx, 1.0, cx, "bottom edge");
    for (Index i = 0; i < grid.nx; ++i) {
      const Eigen::VectorXd col = integrate_line(psi, phi.value(2 * i), edge(i), grid.hy, -1.0,
                                                 cy, "column " + std::to_string(i));
      u.values.row(i) = col.transpose();
    }
  } else {
    const Eigen::VectorXd edge =
        integrate_line(psi, phi.value(0), u_corner, grid.hy, -1.0, cy, "left edge");
    for (Index j = 0; j < grid.ny; ++j) {
      const Eigen::VectorXd row = integrate_line(phi, psi.value(2 * j), edge(j), grid.hx, 1.0,
                                                 cx, "row " + std::to_string(j));
      u.values.col(j) = row;
    }
  }
  return u;
}

}  // namespace liouville
