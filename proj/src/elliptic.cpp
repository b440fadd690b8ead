#include "liouville/elliptic.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <limits>
#include <tuple>
#include <cmath>

namespace liouville {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix bordered(const SparseMatrix& J, const Vector& column, const Vector& row,
                      double corner) {
  const Index n = J.rows();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(J.nonZeros() + 2 * n + 1));
  for (Index k = 0; k < J.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(J, k); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, n, column(i));
    t.emplace_back(n, i, row(i));
  }
  t.emplace_back(n, n, corner);
  SparseMatrix A(n + 1, n + 1);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

Vector solve_sparse(const SparseMatrix& A, const Vector& rhs) {
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw Error("elliptic.SingularJacobian", "sparse LU factorisation failed",
                ErrorKind::nonconvergence);
  Vector x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw Error("elliptic.SingularJacobian", "sparse solve failed",
                ErrorKind::nonconvergence);
  return x;
}

double boundary_value(const BoundaryData& b, double x, double y) {
  if (const double* c = std::get_if<double>(&b)) return *c;
  const Expr& e = std::get<Expr>(b);
  const std::array<double, 2> p{x, y};
  return e(std::span<const double>(p));
}

std::pair<double, double> equation_constants(const Equation& eq) {
  if (const auto* g = std::get_if<Gelfand>(&eq)) return {-g->lambda, 1.0};
  const auto& p = std::get<LiouvilleParams>(eq);
  return {p.K, p.a};
}

}  // namespace

DiscreteDirichlet DiscreteDirichlet::rectangle(const Grid2D& grid,
                                               const BoundaryData& boundary) {
  if (grid.nx < 3 || grid.ny < 3) throw GridTooSmall("Dirichlet problem needs a 3x3 grid");
  if (const auto* e = std::get_if<Expr>(&boundary); e && e->arity() != 2)
    throw Error("elliptic.InvalidBoundary", "boundary expression must use (x, y)");
  DiscreteDirichlet op;
  op.geometry_ = Rectangle{grid};
  const Index mx = grid.nx - 2, my = grid.ny - 2, n = mx * my;
  op.boundary_values_ = Vector::Zero(grid.nx * grid.ny);
  for (Index j = 0; j < grid.ny; ++j)
    for (Index i = 0; i < grid.nx; ++i)
      if (i == 0 || j == 0 || i == grid.nx - 1 || j == grid.ny - 1)
        op.boundary_values_(i + j * grid.nx) = boundary_value(boundary, grid.x(i), grid.y(j));

  const double cx = 1.0 / (grid.hx * grid.hx), cy = 1.0 / (grid.hy * grid.hy);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(5 * n));
  op.boundary_term_ = Vector::Zero(n);
  auto idx = [mx](Index i, Index j) { return (i - 1) + (j - 1) * mx; };
  for (Index j = 1; j + 1 < grid.ny; ++j) {
    for (Index i = 1; i + 1 < grid.nx; ++i) {
      const Index k = idx(i, j);
      t.emplace_back(k, k, -2.0 * (cx + cy));
      const std::array<std::tuple<Index, Index, double>, 4> nbrs{
          {{i - 1, j, cx}, {i + 1, j, cx}, {i, j - 1, cy}, {i, j + 1, cy}}};
      for (const auto& [ii, jj, c] : nbrs) {
        if (ii == 0 || jj == 0 || ii == grid.nx - 1 || jj == grid.ny - 1)
          op.boundary_term_(k) += c * op.boundary_values_(ii + jj * grid.nx);
        else
          t.emplace_back(k, idx(ii, jj), c);
      }
    }
  }
  op.laplacian_.resize(n, n);
  op.laplacian_.setFromTriplets(t.begin(), t.end());
  op.center_ = idx(std::clamp<Index>(grid.nx / 2, 1, grid.nx - 2),
                   std::clamp<Index>(grid.ny / 2, 1, grid.ny - 2));
  op.scale_ = grid.hx * grid.hy;
  return op;
}

DiscreteDirichlet DiscreteDirichlet::disk(Index n, double boundary_value) {
  if (n < 3) throw GridTooSmall("radial grid needs at least 3 nodes");
  if (!std::isfinite(boundary_value))
    throw Error("elliptic.InvalidBoundary", "boundary value must be finite");
  DiscreteDirichlet op;
  op.geometry_ = Disk{n};
  const Index m = n - 1;  // free nodes 0..n-2
  const double h = 1.0 / static_cast<double>(n - 1);
  const double c = 1.0 / (h * h);
  op.boundary_values_ = Vector::Constant(1, boundary_value);
  op.boundary_term_ = Vector::Zero(m);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(3 * m));
  // r = 0: Δu -> 2u'' with the mirror node u_{-1} = u_1.
  t.emplace_back(0, 0, -4.0 * c);
  if (m > 1)
    t.emplace_back(0, 1, 4.0 * c);
  else
    op.boundary_term_(0) += 4.0 * c * boundary_value;
  for (Index i = 1; i < m; ++i) {
    const double di = static_cast<double>(i);
    const double up = (di + 0.5) / di * c, down = (di - 0.5) / di * c;
    t.emplace_back(i, i, -(up + down));
    t.emplace_back(i, i - 1, down);
    if (i + 1 < m)
      t.emplace_back(i, i + 1, up);
    else
      op.boundary_term_(i) += up * boundary_value;
  }
  op.laplacian_.resize(m, m);
  op.laplacian_.setFromTriplets(t.begin(), t.end());
  op.center_ = 0;
  op.scale_ = h * h;
  return op;
}

DiscreteDirichlet DiscreteDirichlet::from(const Geometry& geometry,
                                          const BoundaryData& boundary) {
  if (const auto* r = std::get_if<Rectangle>(&geometry)) return rectangle(r->grid, boundary);
  const double* c = std::get_if<double>(&boundary);
  if (!c) throw Error("elliptic.InvalidBoundary", "disk boundary data must be a constant");
  return disk(std::get<Disk>(geometry).n, *c);
}

Vector DiscreteDirichlet::residual(const Vector& u, double K, double a) const {
  return laplacian_ * u + boundary_term_ - K * (a * u.array()).exp().matrix();
}

SparseMatrix DiscreteDirichlet::jacobian(const Vector& u, double K, double a) const {
  SparseMatrix J = laplacian_;
  const Vector d = K * a * (a * u.array()).exp();
  for (Index i = 0; i < J.rows(); ++i) J.coeffRef(i, i) -= d(i);
  return J;
}

Vector DiscreteDirichlet::harmonic_extension() const {
  return solve_sparse(laplacian_, -boundary_term_);
}

Field DiscreteDirichlet::to_field(const Vector& u) const {
  const Grid2D& g = std::get<Rectangle>(geometry_).grid;
  Field f(g);
  for (Index j = 0; j < g.ny; ++j) {
    for (Index i = 0; i < g.nx; ++i) {
      const bool edge = i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1;
      f(i, j) = edge ? boundary_values_(i + j * g.nx) : u((i - 1) + (j - 1) * (g.nx - 2));
    }
  }
  return f;
}

RadialProfile DiscreteDirichlet::to_profile(const Vector& u) const {
  const Index n = std::get<Disk>(geometry_).n;
  RadialProfile p;
  p.h = 1.0 / static_cast<double>(n - 1);
  p.values.resize(n);
  p.values.head(n - 1) = u;
  p.values(n - 1) = boundary_values_(0);
  return p;
}

double scaled_residual_norm(const DiscreteDirichlet& op, const Vector& u, double K, double a) {
  const Vector r = op.residual(u, K, a);
  if (!r.allFinite()) return std::numeric_limits<double>::infinity();
  return op.scale() * r.lpNorm<Eigen::Infinity>();
}

std::pair<Vector, SolveReport> newton_solve(const DiscreteDirichlet& op, double K, double a,
                                            Vector u, const NewtonOptions& opts) {
  SolveReport report;
  double norm = scaled_residual_norm(op, u, K, a);
  report.newton_history.push_back(norm);
  while (report.iterations < opts.max_iter && norm > opts.tol) {
    const Vector r = op.residual(u, K, a);
    const Vector du = solve_sparse(op.jacobian(u, K, a), -r);
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= opts.max_halvings; ++halving, step *= 0.5) {
      Vector trial = u + step * du;
      const double trial_norm = scaled_residual_norm(op, trial, K, a);
      if (trial_norm < norm) {
        u = std::move(trial);
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    ++report.iterations;
    if (!accepted) break;
    report.newton_history.push_back(norm);
  }
  report.final_residual = norm;
  report.converged = norm <= opts.tol;
  if (!report.converged) throw NonConvergence(report);
  return {std::move(u), std::move(report)};
}

DirichletSolution solve_dirichlet(const DirichletProblem& problem, const NewtonOptions& opts,
                                  const std::optional<Vector>& initial) {
  const DiscreteDirichlet op = DiscreteDirichlet::from(problem.geometry, problem.boundary);
  const auto [K, a] = equation_constants(problem.equation);
  Vector start = initial ? *initial : op.harmonic_extension();
  if (start.size() != op.size())
    throw Error("elliptic.InvalidArgument", "initial guess has the wrong size");
  auto [u, report] = newton_solve(op, K, a, std::move(start), opts);
  DirichletSolution out;
  if (op.is_disk())
    out.solution = op.to_profile(u);
  else
    out.solution = op.to_field(u);
  out.report = std::move(report);
  out.free_values = std::move(u);
  return out;
}

// ---------------------------------------------------------------------------
// Continuation of Δu + λ e^u = 0 with zero boundary data.

namespace {

/// Solution vectors are weighted by 1/N in the arclength inner product so
/// that λ and the RMS of u carry comparable weight.
class GelfandSystem {
 public:
  explicit GelfandSystem(const Geometry& g)
      : op_(DiscreteDirichlet::from(g, 0.0)), weight_(1.0 / static_cast<double>(op_.size())) {}

  const DiscreteDirichlet& op() const { return op_; }
  double weight() const { return weight_; }

  double norm(const Vector& du, double dl) const {
    return std::sqrt(weight_ * du.squaredNorm() + dl * dl);
  }

  /// Tangent at (u, λ) oriented along (dir_u, dir_l).
  std::pair<Vector, double> tangent(const Vector& u, double lambda, const Vector& dir_u,
                                    double dir_l) const {
    const Index n = op_.size();
    const SparseMatrix A =
        bordered(op_.jacobian(u, -lambda, 1.0), u.array().exp(), weight_ * dir_u, dir_l);
    Vector rhs = Vector::Zero(n + 1);
    rhs(n) = 1.0;
    const Vector t = solve_sparse(A, rhs);
    Vector tu = t.head(n);
    double tl = t(n);
    const double nrm = norm(tu, tl);
    return {tu / nrm, tl / nrm};
  }

  struct Corrected {
    Vector u;
    double lambda;
    int iterations;
  };

  /// Newton on {G(u, λ) = 0, <d, X - X0> = sigma} from the predictor X0 + sigma*d.
  std::optional<Corrected> correct(const Vector& u0, double l0, const Vector& du, double dl,
                                   double sigma, double tol) const {
    const Index n = op_.size();
    Vector u = u0 + sigma * du;
    double lambda = l0 + sigma * dl;
    constexpr int kMaxIter = 15;
    for (int it = 0; it <= kMaxIter; ++it) {
      const Vector G = op_.residual(u, -lambda, 1.0);
      if (!G.allFinite()) return std::nullopt;
      const double constraint =
          weight_ * du.dot(u - u0) + dl * (lambda - l0) - sigma;
      const double gnorm = op_.scale() * G.lpNorm<Eigen::Infinity>();
      if (gnorm <= tol && std::abs(constraint) <= 1e-12) return Corrected{u, lambda, it};
      if (it == kMaxIter || gnorm > 1e6) return std::nullopt;
      const SparseMatrix A =
          bordered(op_.jacobian(u, -lambda, 1.0), u.array().exp(), weight_ * du, dl);
      Vector rhs(n + 1);
      rhs.head(n) = -G;
      rhs(n) = -constraint;
      Vector step;
      try {
        step = solve_sparse(A, rhs);
      } catch (const Error&) {
        return std::nullopt;
      }
      u += step.head(n);
      lambda += step(n);
    }
    return std::nullopt;
  }

 private:
  DiscreteDirichlet op_;
  double weight_;
};

}  // namespace

Branch continue_branch(const Geometry& geometry, const ContinuationOptions& opts) {
  if (!(opts.lambda_start >= 0.0))
    throw Error("elliptic.InvalidArgument", "lambda_start must be >= 0");
  if (!(opts.ds > 0.0) || !(opts.ds_min > 0.0) || opts.ds_max < opts.ds_min)
    throw Error("elliptic.InvalidArgument", "invalid continuation step bounds");
  const GelfandSystem sys(geometry);
  const DiscreteDirichlet& op = sys.op();
  const Index n = op.size();

  Branch branch;
  NewtonOptions nopts;
  nopts.tol = opts.tol;
  Vector u = Vector::Zero(n);
  if (opts.lambda_start > 0.0)
    u = newton_solve(op, -opts.lambda_start, 1.0, u, nopts).first;
  double lambda = opts.lambda_start;

  auto [tu, tl] = sys.tangent(u, lambda, Vector::Zero(n), 1.0);
  branch.points.push_back({lambda, u(op.center()), 0.0, tl, u});

  Vector dir_u = tu;
  double dir_l = tl;
  double ds = std::clamp(opts.ds, opts.ds_min, opts.ds_max);
  bool past_fold = false;

  for (int step = 0; step < opts.max_steps; ++step) {
    const BranchPoint& cur = branch.points.back();
    std::optional<GelfandSystem::Corrected> next;
    int halvings = 0;
    while (true) {
      next = sys.correct(cur.u, cur.lambda, dir_u, dir_l, ds, opts.tol);
      if (next) break;
      if (++halvings > 10 || ds / 2 < opts.ds_min * (1 - 1e-12)) throw StepFailure(branch);
      ds /= 2;
    }
    auto [nu, nl] = sys.tangent(next->u, next->lambda, dir_u, dir_l);
    BranchPoint p{next->lambda, next->u(op.center()), cur.s + ds, nl, next->u};

    if (!branch.fold && cur.dlambda_ds > 0.0 && nl <= 0.0) {
      // Bisect on the step length from `cur` along the same direction.
      double lo = 0.0, hi = ds;
      double lam_lo = cur.lambda, lam_hi = p.lambda;
      GelfandSystem::Corrected best{next->u, next->lambda, 0};
      double best_sigma = ds;
      for (int it = 0; it < 80; ++it) {
        if (std::abs(lam_hi - lam_lo) <= opts.fold_tol && hi - lo <= opts.fold_tol) break;
        const double mid = 0.5 * (lo + hi);
        auto c = sys.correct(cur.u, cur.lambda, dir_u, dir_l, mid, opts.tol);
        if (!c) break;
        const auto [mu, ml] = sys.tangent(c->u, c->lambda, dir_u, dir_l);
        best = *c;
        best_sigma = mid;
        if (ml > 0.0) {
          lo = mid;
          lam_lo = c->lambda;
        } else {
          hi = mid;
          lam_hi = c->lambda;
        }
      }
      branch.fold = Fold{best.lambda, best.u(op.center()), cur.s + best_sigma,
                         branch.points.size() - 1};
      past_fold = true;
    }

    dir_u = (p.u - cur.u);
    dir_l = p.lambda - cur.lambda;
    const double secant = sys.norm(dir_u, dir_l);
    dir_u /= secant;
    dir_l /= secant;

    branch.points.push_back(std::move(p));
    const BranchPoint& last = branch.points.back();
    if (past_fold && last.lambda < opts.lambda_stop) break;
    if (last.u0 > opts.u0_max || last.lambda < 0.0) break;

    if (next->iterations <= 3)
      ds = std::min(ds * 1.5, opts.ds_max);
    else if (next->iterations >= 7)
      ds = std::max(ds * 0.5, opts.ds_min);
  }
  return branch;
}

BranchSolve solve_on_branch(const Geometry& geometry, const Branch& branch, double lambda,
                            BranchSide side, const NewtonOptions& opts) {
  const auto& pts = branch.points;
  const std::size_t split = branch.fold ? branch.fold->index + 1 : pts.size();
  const std::size_t begin = side == BranchSide::lower ? 0 : split;
  const std::size_t end = side == BranchSide::lower ? split : pts.size();
  for (std::size_t k = begin; k + 1 < end; ++k) {
    const double l0 = pts[k].lambda, l1 = pts[k + 1].lambda;
    if ((l0 - lambda) * (l1 - lambda) > 0.0) continue;
    const double t = l1 == l0 ? 0.0 : (lambda - l0) / (l1 - l0);
    Vector guess = (1 - t) * pts[k].u + t * pts[k + 1].u;
    const DiscreteDirichlet op = DiscreteDirichlet::from(geometry, 0.0);
    auto [u, report] = newton_solve(op, -lambda, 1.0, std::move(guess), opts);
    return {lambda, u(op.center()), std::move(u), std::move(report)};
  }
  throw Error("elliptic.InvalidArgument",
              "lambda = " + std::to_string(lambda) + " is not bracketed on that side of the branch");
}

std::vector<RadialProfile> boundary_blowup_approx(Index n,
                                                  const std::vector<double>& boundary_values,
                                                  const NewtonOptions& opts) {
  if (boundary_values.empty())
    throw Error("elliptic.InvalidArgument", "need at least one boundary value");
  for (std::size_t k = 1; k < boundary_values.size(); ++k)
    if (!(boundary_values[k] > boundary_values[k - 1]))
      throw Error("elliptic.InvalidArgument", "boundary values must increase");
  std::vector<RadialProfile> out;
  std::optional<Vector> guess;
  for (double M : boundary_values) {
    DirichletProblem problem{Disk{n}, LiouvilleParams(1.0, 1.0), M};
    DirichletSolution s = solve_dirichlet(problem, opts, guess);
    guess = s.free_values;
    out.push_back(std::get<RadialProfile>(s.solution));
  }
  return out;
}

}  // namespace liouville
