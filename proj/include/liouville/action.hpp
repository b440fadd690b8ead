#pragma once

#include "liouville/fields.hpp"

namespace liouville {

/// Constants of S[φ] = C ∫ (½|∇φ|² + μ² e^φ) dx dy.
struct ActionParams {
  double C = 1.0;
  double mu = 1.0;

  ActionParams() = default;
  ActionParams(double C_, double mu_) : C(C_), mu(mu_) {
    if (!(C > 0.0) || !std::isfinite(C) || !std::isfinite(mu))
      throw Error("action.InvalidParams", "C must be positive and mu finite");
  }
};

/// Cell-wise midpoint quadrature: each cell contributes
/// hx*hy*(½(gx² + gy²) + μ² exp(φ̄)), with gx, gy the averages of the two
/// forward differences across the cell and φ̄ the corner average.
double action_value(const Field& phi, const ActionParams& p);

/// Exact gradient of action_value with respect to the interior node values;
/// boundary nodes are held fixed and carry the sentinel. Critical points
/// solve a discrete Δφ = μ² e^φ, the elliptic equation with K = μ², a = 1:
/// gradient / (C hx hy) is consistent with -Δφ + μ² e^φ.
Field action_gradient(const Field& phi, const ActionParams& p);

}  // namespace liouville
