#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "liouville/closedform.hpp"
#include "liouville/elliptic.hpp"
#include "support/convergence.hpp"

using namespace liouville;
using liouville::testing::max_difference;
using liouville::testing::observed_order;

namespace {

void check_quadratic_tail(const SolveReport& r) {
  const auto& h = r.newton_history;
  REQUIRE(h.size() >= 3);
  for (std::size_t k = h.size() - 3; k + 1 < h.size(); ++k) {
    if (h[k + 1] == 0.0 || h[k] < 1e-13) continue;  // rounding floor
    CHECK(h[k + 1] / (h[k] * h[k]) < 1e3);
  }
}

const Branch& disk_branch() {
  static const Branch b = continue_branch(Disk{2049});
  return b;
}

}  // namespace

TEST_CASE("manufactured solution from the plus seed") {
  const AnalyticSeed seed(parse("z", {"z"}), SeedSign::plus);
  const Expr boundary = parse("ln(8/(1 + x^2 + y^2)^2)", {"x", "y"});
  std::vector<double> errs;
  for (Index n : {17, 33, 65}) {
    const Grid2D g = Grid2D::spanning(-0.4, -0.4, 0.4, 0.4, n, n);
    const DirichletSolution s =
        solve_dirichlet(DirichletProblem{Rectangle{g}, LiouvilleParams(-1, 1), boundary});
    CHECK(s.report.converged);
    CHECK(s.report.final_residual <= 1e-10);
    check_quadratic_tail(s.report);
    const Field exact = elliptic_exact(seed, -1.0, 1.0, g);
    errs.push_back(max_difference(std::get<Field>(s.solution), exact));
  }
  for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
    CHECK(observed_order(errs[k], errs[k + 1]) >= 1.8);
    CHECK(observed_order(errs[k], errs[k + 1]) <= 2.2);
  }
}

TEST_CASE("tiny domain converges quickly from zero") {
  const Grid2D g = Grid2D::spanning(0, 0, 0.1, 0.1, 21, 21);
  const DirichletSolution s = solve_dirichlet(DirichletProblem{Rectangle{g}, LiouvilleParams(1, 1), 0.0});
  CHECK(s.report.converged);
  CHECK(s.report.iterations <= 6);
  const Field& u = std::get<Field>(s.solution);
  // Δu = e^u > 0 with zero boundary: the solution is negative inside.
  CHECK(u(10, 10) < 0.0);
  CHECK(u(10, 10) > -0.01);
}

TEST_CASE("residual history and report invariants") {
  const Grid2D g = Grid2D::spanning(0, 0, 1, 1, 33, 33);
  const DirichletSolution s =
      solve_dirichlet(DirichletProblem{Rectangle{g}, Gelfand{5.0}, 0.0});
  CHECK(s.report.converged);
  const auto& h = s.report.newton_history;
  for (std::size_t k = 1; k + 1 < h.size(); ++k) CHECK(h[k + 1] <= h[k]);
  CHECK(h.back() == s.report.final_residual);
  check_quadratic_tail(s.report);
}

TEST_CASE("Jacobian matches central differences") {
  const Grid2D g = Grid2D::spanning(0, 0, 1, 1, 12, 9);
  const Expr boundary = parse("x*y + 0.5*sin(3*x)", {"x", "y"});
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (const Geometry geometry : {Geometry{Rectangle{g}}, Geometry{Disk{40}}}) {
    const DiscreteDirichlet op =
        std::holds_alternative<Disk>(geometry) ? DiscreteDirichlet::from(geometry, 0.3)
                                               : DiscreteDirichlet::from(geometry, boundary);
    Vector u(op.size());
    for (Index i = 0; i < u.size(); ++i) u(i) = d(rng);
    const SparseMatrix J = op.jacobian(u, 1.5, 0.7);
    for (int k = 0; k < 10; ++k) {
      Vector v(op.size());
      for (Index i = 0; i < v.size(); ++i) v(i) = d(rng);
      const double eps = 1e-6;
      const Vector fd =
          (op.residual(u + eps * v, 1.5, 0.7) - op.residual(u - eps * v, 1.5, 0.7)) / (2 * eps);
      const Vector jv = J * v;
      CHECK((fd - jv).lpNorm<Eigen::Infinity>() <= 1e-6 * jv.lpNorm<Eigen::Infinity>());
    }
  }
}

TEST_CASE("initial guess and validation") {
  const Grid2D g = Grid2D::spanning(0, 0, 1, 1, 9, 9);
  const DiscreteDirichlet op = DiscreteDirichlet::rectangle(g, parse("x + y", {"x", "y"}));
  // The harmonic extension of linear data is the linear function itself.
  const Field h = op.to_field(op.harmonic_extension());
  for (Index j = 0; j < 9; ++j)
    for (Index i = 0; i < 9; ++i) CHECK(h(i, j) == doctest::Approx(g.x(i) + g.y(j)).epsilon(1e-12));

  CHECK_THROWS_AS(DiscreteDirichlet::rectangle(Grid2D::spanning(0, 0, 1, 1, 2, 5), 0.0), GridTooSmall);
  CHECK_THROWS_AS(
      solve_dirichlet(DirichletProblem{Rectangle{g}, LiouvilleParams(1, 1), 0.0}, {}, Vector::Zero(3)),
      Error);
}

TEST_CASE("Gelfand problem on the disk at λ = 2 has no discrete solution") {
  // The discrete fold sits just below 2, so Newton cannot converge there.
  CHECK_THROWS_AS(solve_dirichlet(DirichletProblem{Disk{129}, LiouvilleParams(-2, 1), 0.0}),
                  NonConvergence);
}

TEST_CASE("discrete fold converges to the closed-form fold at second order") {
  const GelfandRadial exact = gelfand_radial(1.0);
  std::vector<double> dl, du;
  for (Index n : {33, 65, 129}) {
    const Branch b = continue_branch(Disk{n});
    REQUIRE(b.fold.has_value());
    dl.push_back(std::abs(b.fold->lambda0 - exact.lambda));
    du.push_back(std::abs(b.fold->u0 - exact.u0));
  }
  for (std::size_t k = 0; k + 1 < dl.size(); ++k) {
    CHECK(observed_order(dl[k], dl[k + 1]) >= 1.8);
    CHECK(observed_order(dl[k], dl[k + 1]) <= 2.2);
  }
  CHECK(du.back() < 1e-4);
}

TEST_CASE("lower-branch disk solve matches the radial family") {
  const double b = 0.4;
  const GelfandRadial exact = gelfand_radial(b);
  std::vector<double> errs;
  for (Index n : {33, 65, 129}) {
    const DirichletSolution s = solve_dirichlet(DirichletProblem{Disk{n}, Gelfand{exact.lambda}, 0.0});
    const RadialProfile& p = std::get<RadialProfile>(s.solution);
    double worst = 0.0;
    for (Index i = 0; i < p.values.size(); ++i) worst = std::max(worst, std::abs(p.values(i) - exact(p.r(i))));
    errs.push_back(worst);
  }
  CHECK(observed_order(errs[0], errs[1]) >= 1.8);
  CHECK(observed_order(errs[1], errs[2]) >= 1.8);
}

TEST_CASE("continuation on the disk") {
  const Branch& b = disk_branch();
  REQUIRE(b.fold.has_value());
  CHECK(b.fold->lambda0 == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(std::abs(b.fold->u0 - std::log(4.0)) <= 1e-3);
  CHECK(b.fold->index + 1 < b.points.size());

  // First point is the trivial solution.
  CHECK(b.points.front().lambda == 0.0);
  CHECK(b.points.front().u.lpNorm<Eigen::Infinity>() == 0.0);

  // Arclength increases and dλ/ds changes sign exactly once, at the fold.
  int sign_changes = 0;
  for (std::size_t k = 0; k + 1 < b.points.size(); ++k) {
    CHECK(b.points[k + 1].s > b.points[k].s);
    if ((b.points[k].dlambda_ds > 0) != (b.points[k + 1].dlambda_ds > 0)) {
      ++sign_changes;
      CHECK(k == b.fold->index);
    }
  }
  CHECK(sign_changes == 1);
  CHECK(b.points.back().lambda < 1.0);
}

TEST_CASE("branch solves at λ = 1 and the b <-> 1/b pairing") {
  const Branch& b = disk_branch();
  const Geometry disk = Disk{2049};
  const double b_lo = 3.0 - 2.0 * std::sqrt(2.0);
  const BranchSolve lo = solve_on_branch(disk, b, 1.0, BranchSide::lower);
  const BranchSolve hi = solve_on_branch(disk, b, 1.0, BranchSide::upper);
  CHECK(std::abs(lo.u0 - 0.316694) <= 1e-3);
  CHECK(std::abs(lo.u0 - gelfand_radial(b_lo).u0) <= 1e-3);
  CHECK(std::abs(hi.u0 - gelfand_radial(1.0 / b_lo).u0) <= 1e-3);

  for (double lambda : {0.5, 1.5, 1.9}) {
    CAPTURE(lambda);
    // Lower root of λ(1+b)^2 = 8b.
    const double c = 4.0 / lambda - 1.0;
    const double blo = c - std::sqrt(c * c - 1.0);
    CHECK(std::abs(solve_on_branch(disk, b, lambda, BranchSide::lower).u0 - gelfand_radial(blo).u0) <= 1e-3);
    CHECK(std::abs(solve_on_branch(disk, b, lambda, BranchSide::upper).u0 - gelfand_radial(1 / blo).u0) <= 1e-3);
  }
}

TEST_CASE("boundary blow-up exhaustion") {
  const std::vector<RadialProfile> ps = boundary_blowup_approx(1025, {5.0, 8.0, 11.0});
  REQUIRE(ps.size() == 3);
  const double ln8 = std::log(8.0);
  double prev_gap = INFINITY;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const double gap = std::abs(ps[k].center() - ln8);
    CHECK(ps[k].center() < ln8);
    CHECK(gap < prev_gap);
    prev_gap = gap;
    if (k > 0)
      for (Index i = 0; i < ps[k].values.size(); ++i) CHECK(ps[k].values(i) >= ps[k - 1].values(i));
  }
  CHECK(prev_gap <= 0.02);

  CHECK(boundary_blowup_approx(257, {5.0}).size() == 1);
  CHECK_THROWS_AS(boundary_blowup_approx(257, {8.0, 5.0}), Error);
  CHECK_THROWS_AS(boundary_blowup_approx(257, {}), Error);
}
