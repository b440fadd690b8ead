#pragma once

// Test-only helpers for refinement studies. Deliberately independent of the
// solvers: they only look at sampled fields.

#include <algorithm>
#include <cmath>

#include "liouville/fields.hpp"

namespace liouville::testing {

inline double observed_order(double coarse_error, double fine_error) {
  return std::log2(coarse_error / fine_error);
}

/// max |(4 r_fine - r_coarse) / 3| over coarse nodes, for node-based
/// residuals on dyadically refined grids (coarse node i = fine node 2i).
inline double richardson_nodes(const Field& coarse, const Field& fine) {
  double worst = 0.0;
  for (Index j = 0; j < coarse.grid.ny; ++j)
    for (Index i = 0; i < coarse.grid.nx; ++i) {
      const double c = coarse(i, j), f = fine(2 * i, 2 * j);
      if (is_sentinel(c) || is_sentinel(f)) continue;
      worst = std::max(worst, std::abs((4.0 * f - c) / 3.0));
    }
  return worst;
}

/// Cell-centred version: the coarse cell centre is the shared corner of four
/// fine cells, whose residuals are averaged.
inline double richardson_cells(const Field& coarse, const Field& fine) {
  double worst = 0.0;
  for (Index j = 0; j < coarse.grid.ny; ++j)
    for (Index i = 0; i < coarse.grid.nx; ++i) {
      const double f = (fine(2 * i, 2 * j) + fine(2 * i + 1, 2 * j) + fine(2 * i, 2 * j + 1) +
                        fine(2 * i + 1, 2 * j + 1)) / 4.0;
      worst = std::max(worst, std::abs((4.0 * f - coarse(i, j)) / 3.0));
    }
  return worst;
}

/// Max |a - b| over nodes defined in both.
inline double max_difference(const Field& a, const Field& b) {
  double worst = 0.0;
  for (Index j = 0; j < a.grid.ny; ++j)
    for (Index i = 0; i < a.grid.nx; ++i) {
      if (is_sentinel(a(i, j)) || is_sentinel(b(i, j))) continue;
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    }
  return worst;
}

}  // namespace liouville::testing
