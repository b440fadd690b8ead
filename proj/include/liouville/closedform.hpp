#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "liouville/expr.hpp"
#include "liouville/fields.hpp"

namespace liouville {

/// The two arbitrary functions of the general hyperbolic solution
/// u = (1/a) ln(2 f'(x) g'(y) / (a K (f(x) + g(y))^2)).
struct CharacteristicPair {
  Expr f;  // in x
  Expr g;  // in y

  CharacteristicPair(Expr f_, Expr g_);
};

enum class SeedSign { plus, minus };

/// Analytic function F(z) generating the real elliptic solution
/// u = ln(8|F'|^2 / (1 ± |F|^2)^2), shifted for general (K, a).
struct AnalyticSeed {
  Expr F;  // in z, evaluated in complex mode
  SeedSign sign = SeedSign::minus;

  AnalyticSeed(Expr F_, SeedSign sign_);
};

/// Hyperbolic solution on every node. Throws SingularNode where f + g
/// vanishes and Error("closedform.SignError") where a K f' g' <= 0.
Field hyperbolic_exact(const CharacteristicPair& cp, const LiouvilleParams& p,
                       const Grid2D& grid);

/// Pointwise version of hyperbolic_exact (same checks, no node indices).
double hyperbolic_exact_at(const CharacteristicPair& cp, const LiouvilleParams& p,
                           double x, double y);

/// Elliptic solution of Δu = K e^{au} from an analytic seed, z = x + iy.
/// The seed sign must be minus when aK > 0 and plus when aK < 0.
/// Errors: closedform.SeedDegenerate (F' = 0), closedform.DomainViolation
/// (|F| >= 1 with the minus sign), closedform.SignError (sign mismatch).
Field elliptic_exact(const AnalyticSeed& seed, double K, double a, const Grid2D& grid);

/// One member of the radial family solving Δu + λ e^u = 0 on the unit disk
/// with u(1) = 0:  λ = 8b/(1+b)^2,  u(r) = ln(8b / (λ (1 + b r^2)^2)).
struct GelfandRadial {
  double b = 1.0;
  double lambda = 2.0;
  double u0 = 0.0;

  double operator()(double r) const;
};

/// Throws closedform.NonPositiveB for b <= 0.
GelfandRadial gelfand_radial(double b);

/// u = ln(8 / (1 - x^2 - y^2)^2) solving Δu = e^u with u -> +inf on the unit
/// circle; nodes on or outside the circle hold the sentinel.
Field boundary_blowup_exact(const Grid2D& grid);
double boundary_blowup_at(double r);

struct BlowupCurve {
  /// One entry per x-sample; y is empty where f(x) + g(y) has no root in the
  /// searched interval.
  std::vector<std::pair<double, std::optional<double>>> samples;
  double tol = 0.0;
};

/// Locates the singular set f(x) + g(y) = 0 for x-samples spread over
/// [x_lo, x_hi], searching y in [y_lo, y_hi]. Requires g' not to change sign
/// on the y-interval (closedform.NonMonotoneG otherwise).
BlowupCurve blowup_curve(const CharacteristicPair& cp, std::pair<double, double> x_range,
                         std::pair<double, double> y_range, Index n_samples, double tol);

enum class LogDirection { u_to_T, T_to_u };

/// T = e^u or u = ln T node by node (sentinels pass through).
Field convert_log_form(const Field& f, LogDirection direction);

}  // namespace liouville
