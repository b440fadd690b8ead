#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <optional>
#include <variant>
#include <vector>

#include "liouville/expr.hpp"
#include "liouville/fields.hpp"

namespace liouville {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Rectangle discretised by the 5-point Laplacian on its grid.
struct Rectangle {
  Grid2D grid;
};

/// Unit disk solved radially: n nodes r_i = i/(n-1), u'(0) = 0 closure.
struct Disk {
  Index n = 0;
};

using Geometry = std::variant<Rectangle, Disk>;

/// Constant or u = expr(x, y) on the boundary. A disk takes constants only.
using BoundaryData = std::variant<double, Expr>;

/// Δu + λ e^u = 0, i.e. Δu = K e^{au} with K = -λ, a = 1.
struct Gelfand {
  double lambda = 0.0;
};

using Equation = std::variant<LiouvilleParams, Gelfand>;

struct DirichletProblem {
  Geometry geometry;
  Equation equation;
  BoundaryData boundary = 0.0;
};

/// Values at r_i = i*h, i = 0..n-1; the last node is the boundary.
struct RadialProfile {
  double h = 0.0;
  Vector values;

  double r(Index i) const { return static_cast<double>(i) * h; }
  double center() const { return values(0); }
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  /// Max-norm of the scaled residual before each Newton step and after the
  /// last one.
  std::vector<double> newton_history;
};

class NonConvergence : public Error {
 public:
  explicit NonConvergence(SolveReport report)
      : Error("elliptic.NonConvergence",
              "Newton stopped after " + std::to_string(report.iterations) +
                  " iterations at residual " + std::to_string(report.final_residual),
              ErrorKind::nonconvergence),
        report_(std::move(report)) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

/// Newton settings. The residual is measured in node-equation form: the
/// discrete equation multiplied by the squared mesh width (hx*hy, or h^2 on
/// the disk), which keeps `tol` above the rounding floor of the stencil on
/// fine grids.
struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int max_halvings = 30;
};

/// The discrete Dirichlet operator F(u) = L u + b - K exp(a u) restricted to
/// the free nodes (rectangle interior, or disk nodes 0..n-2). L is fixed
/// after construction; b carries the boundary values.
class DiscreteDirichlet {
 public:
  static DiscreteDirichlet rectangle(const Grid2D& grid, const BoundaryData& boundary);
  static DiscreteDirichlet disk(Index n, double boundary_value);
  static DiscreteDirichlet from(const Geometry& geometry, const BoundaryData& boundary);

  Index size() const { return laplacian_.rows(); }
  /// Free-node index of the domain centre (r = 0 on the disk).
  Index center() const { return center_; }
  /// Multiplier taking F to node-equation form.
  double scale() const { return scale_; }

  const SparseMatrix& laplacian() const { return laplacian_; }
  const Vector& boundary_term() const { return boundary_term_; }

  Vector residual(const Vector& u, double K, double a) const;
  /// L - diag(K a exp(a u)).
  SparseMatrix jacobian(const Vector& u, double K, double a) const;
  /// Solution of L u + b = 0.
  Vector harmonic_extension() const;

  bool is_disk() const { return std::holds_alternative<Disk>(geometry_); }
  Field to_field(const Vector& u) const;
  RadialProfile to_profile(const Vector& u) const;

 private:
  Geometry geometry_;
  SparseMatrix laplacian_;
  Vector boundary_term_;
  Vector boundary_values_;  // rectangle: full nx*ny sample, disk: one value
  Index center_ = 0;
  double scale_ = 1.0;
};

/// Max-norm of the scaled residual.
double scaled_residual_norm(const DiscreteDirichlet& op, const Vector& u, double K, double a);

/// Damped Newton (backtracking by halves on the residual max-norm) from
/// `initial`. Throws NonConvergence or Error("elliptic.SingularJacobian").
std::pair<Vector, SolveReport> newton_solve(const DiscreteDirichlet& op, double K, double a,
                                            Vector initial, const NewtonOptions& opts = {});

struct DirichletSolution {
  std::variant<Field, RadialProfile> solution;
  SolveReport report;
  Vector free_values;
};

/// Starts from the harmonic extension of the boundary data unless an initial
/// free-node vector is given.
DirichletSolution solve_dirichlet(const DirichletProblem& problem,
                                  const NewtonOptions& opts = {},
                                  const std::optional<Vector>& initial = std::nullopt);

struct BranchPoint {
  double lambda = 0.0;
  double u0 = 0.0;
  double s = 0.0;
  double dlambda_ds = 0.0;
  Vector u;
};

struct Fold {
  double lambda0 = 0.0;
  double u0 = 0.0;
  double s = 0.0;
  /// The fold lies between points[index] and points[index + 1].
  std::size_t index = 0;
};

struct Branch {
  std::vector<BranchPoint> points;
  std::optional<Fold> fold;
};

class StepFailure : public Error {
 public:
  explicit StepFailure(Branch partial)
      : Error("elliptic.StepFailure",
              "continuation step failed after 10 halvings; " +
                  std::to_string(partial.points.size()) + " points kept",
              ErrorKind::nonconvergence),
        partial_(std::move(partial)) {}
  const Branch& partial() const noexcept { return partial_; }

 private:
  Branch partial_;
};

struct ContinuationOptions {
  double lambda_start = 0.0;
  int max_steps = 400;
  double ds = 0.05;
  double ds_min = 1e-4;
  double ds_max = 0.1;
  /// Stop once λ drops below this after the fold has been passed.
  double lambda_stop = 0.5;
  /// Stop once the centre value exceeds this.
  double u0_max = 12.0;
  double tol = 1e-10;
  double fold_tol = 1e-6;
};

/// Pseudo-arclength continuation of Δu + λ e^u = 0, u = 0 on the boundary,
/// in the unknowns (u, λ) with secant predictor and adaptive step. The fold
/// is the sign change of dλ/ds, refined by bisection on the step length.
Branch continue_branch(const Geometry& geometry, const ContinuationOptions& opts = {});

enum class BranchSide { lower, upper };

struct BranchSolve {
  double lambda = 0.0;
  double u0 = 0.0;
  Vector u;
  SolveReport report;
};

/// Solves at fixed λ starting from the branch points bracketing λ on the
/// requested side of the fold.
BranchSolve solve_on_branch(const Geometry& geometry, const Branch& branch, double lambda,
                            BranchSide side, const NewtonOptions& opts = {});

/// Radial solutions of Δu = e^u on the unit disk with u = M on the circle, one
/// per entry of the increasing list `boundary_values`.
std::vector<RadialProfile> boundary_blowup_approx(Index n,
                                                  const std::vector<double>& boundary_values,
                                                  const NewtonOptions& opts = {});

}  // namespace liouville
