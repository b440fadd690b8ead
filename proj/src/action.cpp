#include "liouville/action.hpp"

#include <cmath>

namespace liouville {

double action_value(const Field& phi, const ActionParams& p) {
  const Grid2D& g = phi.grid;
  const double m2 = p.mu * p.mu;
  double sum = 0.0;
  for (Index j = 0; j + 1 < g.ny; ++j) {
    for (Index i = 0; i + 1 < g.nx; ++i) {
      const double f00 = phi(i, j), f10 = phi(i + 1, j), f01 = phi(i, j + 1),
                   f11 = phi(i + 1, j + 1);
      const double gx = (f10 - f00 + f11 - f01) / (2.0 * g.hx);
      const double gy = (f01 - f00 + f11 - f10) / (2.0 * g.hy);
      const double mean = (f00 + f10 + f01 + f11) / 4.0;
      sum += 0.5 * (gx * gx + gy * gy) + m2 * std::exp(mean);
    }
  }
  return p.C * g.hx * g.hy * sum;
}

Field action_gradient(const Field& phi, const ActionParams& p) {
  const Grid2D& g = phi.grid;
  const double m2 = p.mu * p.mu;
  const double w = p.C * g.hx * g.hy;
  const double ax = 1.0 / (2.0 * g.hx), ay = 1.0 / (2.0 * g.hy);
  Field grad(g, 0.0);
  for (Index j = 0; j + 1 < g.ny; ++j) {
    for (Index i = 0; i + 1 < g.nx; ++i) {
      const double f00 = phi(i, j), f10 = phi(i + 1, j), f01 = phi(i, j + 1),
                   f11 = phi(i + 1, j + 1);
      const double gx = (f10 - f00 + f11 - f01) * ax;
      const double gy = (f01 - f00 + f11 - f10) * ay;
      const double e = m2 * std::exp((f00 + f10 + f01 + f11) / 4.0) / 4.0;
      grad(i, j) += w * (-gx * ax - gy * ay + e);
      grad(i + 1, j) += w * (gx * ax - gy * ay + e);
      grad(i, j + 1) += w * (-gx * ax + gy * ay + e);
      grad(i + 1, j + 1) += w * (gx * ax + gy * ay + e);
    }
  }
  for (Index i = 0; i < g.nx; ++i) grad(i, 0) = grad(i, g.ny - 1) = sentinel();
  for (Index j = 0; j < g.ny; ++j) grad(0, j) = grad(g.nx - 1, j) = sentinel();
  return grad;
}

}  // namespace liouville
