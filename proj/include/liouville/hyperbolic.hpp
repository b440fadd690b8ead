#pragma once

#include <Eigen/Core>

#include "liouville/expr.hpp"
#include "liouville/field_io.hpp"
#include "liouville/fields.hpp"

namespace liouville {

/// Characteristic (Goursat) data: u(x, y0) = phi(x) and u(x0, y) = psi(y),
/// where (x0, y0) is the grid origin.
struct GoursatData {
  Expr phi;
  Expr psi;
};

/// w(x, y) = phi(x) + psi(y), a solution of w_xy = 0.
struct WaveSolution {
  Expr phi;
  Expr psi;
};

struct MarchResult {
  Field u;    // sentinel where masked
  Mask mask;  // 1 where the solution blew up or depends on a blown-up node
};

inline constexpr double kDefaultBlowupThreshold = 25.0;

/// Marches u_xy = K e^{au} cell by cell from the two characteristic edges:
///   u(i,j) = u(i-1,j) + u(i,j-1) - u(i-1,j-1) + hx*hy*K*exp(a*ū),
/// ū the average of the four cell corners (implicit in u(i,j)). Nodes with
/// u > blowup_threshold, or whose cell equation has no root, are masked
/// together with everything downstream of them.
MarchResult march(const GoursatData& data, const LiouvilleParams& p, const Grid2D& grid,
                  double blowup_threshold = kDefaultBlowupThreshold);

/// Same, from sampled edges: bottom(i) = u(i, 0), left(j) = u(0, j).
MarchResult march_edges(const Eigen::VectorXd& bottom, const Eigen::VectorXd& left,
                        const LiouvilleParams& p, const Grid2D& grid,
                        double blowup_threshold = kDefaultBlowupThreshold);

enum class IntegrationOrder { x_then_y, y_then_x };

/// Integrates the Bäcklund pair
///   u_x =  w_x + bt_a * exp((u + w) / 2)
///   u_y = -w_y + (2 / bt_a) * exp((u - w) / 2)
/// with RK4 from u(x0, y0) = u_corner: first along one edge, then along
/// every line in the other direction. The result solves u_xy = e^u.
/// Throws OdeOverflow if the solution escapes to +inf.
Field backlund(const WaveSolution& w, double bt_a, double u_corner, const Grid2D& grid,
               IntegrationOrder order = IntegrationOrder::x_then_y);

}  // namespace liouville
