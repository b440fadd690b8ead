#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "liouville/closedform.hpp"
#include "liouville/field_io.hpp"
#include "liouville/fields.hpp"
#include "support/convergence.hpp"

using namespace liouville;
using liouville::testing::observed_order;

namespace {

const Grid2D kUnit = Grid2D::spanning(0.0, 0.0, 1.0, 1.0, 5, 5);

Field random_field(const Grid2D& g, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  return sample(g, [&](double, double) { return d(rng); });
}

}  // namespace

TEST_CASE("grid geometry") {
  const Grid2D g = Grid2D::spanning(-1.0, 2.0, 1.0, 3.0, 5, 3);
  CHECK(g.hx == 0.5);
  CHECK(g.hy == 0.5);
  CHECK(g.x(4) == 1.0);
  CHECK(g.y(2) == 3.0);
  const Grid2D c = g.cells();
  CHECK(c.nx == 4);
  CHECK(c.x0 == -0.75);
  CHECK_THROWS_AS(Grid2D(1, 4, 0, 0, 1, 1), GridTooSmall);
  CHECK_THROWS_AS(Grid2D(3, 3, 0, 0, 0.0, 1), Error);
  CHECK_THROWS_AS(LiouvilleParams(0.0, 1.0), Error);
  CHECK_THROWS_AS(LiouvilleParams(1.0, 0.0), Error);
}

TEST_CASE("elliptic residual of zero") {
  const Field r = residual_elliptic(Field(kUnit), LiouvilleParams(1, 1));
  for (Index j = 0; j < 5; ++j)
    for (Index i = 0; i < 5; ++i) {
      const bool interior = i > 0 && j > 0 && i < 4 && j < 4;
      if (interior)
        CHECK(r(i, j) == -1.0);
      else
        CHECK(is_sentinel(r(i, j)));
    }
  CHECK_THROWS_AS(residual_elliptic(Field(Grid2D(2, 2, 0, 0, 1, 1)), LiouvilleParams(1, 1)),
                  GridTooSmall);
}

TEST_CASE("hyperbolic residual of zero and of a linear field") {
  const Field r0 = residual_hyperbolic(Field(kUnit), LiouvilleParams(1, 1));
  CHECK(r0.grid == kUnit.cells());
  CHECK((r0.values == -1.0).all());

  const Field lin = sample(kUnit, [](double x, double y) { return x + y; });
  const Field r = residual_hyperbolic(lin, LiouvilleParams(1, 1));
  for (Index j = 0; j < r.grid.ny; ++j)
    for (Index i = 0; i < r.grid.nx; ++i)
      CHECK(r(i, j) == doctest::Approx(-std::exp(r.grid.x(i) + r.grid.y(j))).epsilon(1e-14));

  // 2x2 is the smallest grid the cross stencil accepts.
  CHECK(residual_hyperbolic(Field(Grid2D(2, 2, 0, 0, 1, 1)), LiouvilleParams(1, 1)).grid.nx == 1);
}

TEST_CASE("log residual") {
  const Field T(kUnit, 1.0);
  CHECK((residual_log(T, 1.0).values == -1.0).all());
  CHECK_THROWS_AS(residual_log(T, 0.0), Error);
  Field bad = T;
  bad(2, 3) = 0.0;
  CHECK_THROWS_AS(residual_log(bad, 1.0), NonPositiveField);
}

TEST_CASE("log residual times the cell mean equals the hyperbolic residual") {
  const Grid2D g = Grid2D::spanning(0.5, 0.5, 1.5, 1.5, 17, 17);
  const Field u = random_field(g, 3, -2.0, 2.0);
  const Field T = convert_log_form(u, LogDirection::u_to_T);
  const Field rl = residual_log(T, 1.3);
  const Field rh = residual_hyperbolic(u, LiouvilleParams(1.3, 1.0));
  const double eps = std::numeric_limits<double>::epsilon();
  for (Index j = 0; j < rl.grid.ny; ++j)
    for (Index i = 0; i < rl.grid.nx; ++i) {
      const double tbar =
          std::exp((u(i, j) + u(i + 1, j) + u(i, j + 1) + u(i + 1, j + 1)) / 4);
      const double scale = std::abs(rh(i, j)) + 1.3 * tbar;
      CHECK(std::abs(rl(i, j) * tbar - rh(i, j)) <= 10 * eps * scale * std::exp(u.values.maxCoeff()));
    }
}

TEST_CASE("norms") {
  const Field r = residual_elliptic(Field(Grid2D::spanning(0, 0, 1, 1, 5, 5)), LiouvilleParams(1, 1));
  CHECK(norms(r).max_abs == 1.0);

  Field zero(Grid2D::spanning(0, 0, 1, 1, 3, 3), 0.0);
  CHECK(norms(zero).max_abs == 0.0);
  CHECK(norms(zero).l2 == 0.0);

  Field single(Grid2D::spanning(0, 0, 1, 1, 3, 3), sentinel());
  single(1, 1) = 2.0;
  CHECK(norms(single).max_abs == 2.0);
  CHECK(norms(single).l2 == 1.0);

  CHECK_THROWS_AS(norms(Field(kUnit, sentinel())), EmptyInterior);
}

TEST_CASE("norms scale with the field and ignore node order") {
  const Grid2D g = Grid2D::spanning(0, 0, 2, 1, 9, 7);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Field r = random_field(g, static_cast<unsigned>(trial));
    r(0, 0) = sentinel();
    const double c = std::uniform_real_distribution<double>(-5.0, 5.0)(rng);
    Field scaled(g, c * r.values);
    CHECK(norms(scaled).max_abs == doctest::Approx(std::abs(c) * norms(r).max_abs).epsilon(1e-15));
    CHECK(norms(scaled).l2 == doctest::Approx(std::abs(c) * norms(r).l2).epsilon(1e-13));

    // Shuffle the values (the sentinel travels with them).
    std::vector<double> flat(r.values.data(), r.values.data() + r.values.size());
    std::shuffle(flat.begin(), flat.end(), rng);
    Field shuffled(g, Eigen::Map<Field::Array>(flat.data(), g.nx, g.ny));
    CHECK(norms(shuffled).max_abs == norms(r).max_abs);
    CHECK(norms(shuffled).l2 == doctest::Approx(norms(r).l2).epsilon(1e-14));
  }
}

TEST_CASE("elliptic residual of an exact solution is second order") {
  const AnalyticSeed seed(parse("z", {"z"}), SeedSign::minus);
  std::vector<double> errs;
  for (Index n : {33, 65, 129}) {
    const Grid2D g = Grid2D::spanning(-0.4, -0.4, 0.4, 0.4, n, n);
    errs.push_back(norms(residual_elliptic(elliptic_exact(seed, 1.0, 1.0, g), LiouvilleParams(1, 1))).max_abs);
  }
  for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
    const double p = observed_order(errs[k], errs[k + 1]);
    CHECK(p >= 1.8);
    CHECK(p <= 2.2);
  }
}

TEST_CASE("log residual of exp(u) is second order") {
  const CharacteristicPair cp(parse("exp(x)", {"x"}), parse("exp(y)", {"y"}));
  std::vector<double> errs;
  for (Index n : {33, 65, 129}) {
    const Grid2D g = Grid2D::spanning(0.5, 0.5, 1.5, 1.5, n, n);
    const Field T = convert_log_form(hyperbolic_exact(cp, LiouvilleParams(1, 1), g), LogDirection::u_to_T);
    errs.push_back(norms(residual_log(T, 1.0)).max_abs);
  }
  for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
    const double p = observed_order(errs[k], errs[k + 1]);
    CHECK(p >= 1.8);
    CHECK(p <= 2.2);
  }
}

TEST_CASE("CSV field round trip is bit exact") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const Grid2D g(3 + trial, 4 + 2 * trial, -0.1 * trial, 1.0 / 3.0, 1.0 / 7.0, 0.1);
    Field f = random_field(g, static_cast<unsigned>(trial), -1e3, 1e3);
    f(1, 1) = sentinel();
    f(0, 0) = 1e-300;
    f(2, 0) = -0.0;
    std::stringstream ss;
    write_field(ss, f);
    const Field back = read_field(ss);
    CHECK(back.grid == g);
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        if (is_sentinel(f(i, j))) {
          CHECK(is_sentinel(back(i, j)));
        } else {
          CHECK(std::memcmp(&f(i, j), &back(i, j), sizeof(double)) == 0);
        }
      }
  }
}

TEST_CASE("CSV header layout and malformed input") {
  Field f(Grid2D(3, 2, 0.0, 0.5, 0.25, 0.5));
  f(1, 0) = 1.5;
  f(2, 1) = -2.0;
  std::stringstream ss;
  write_field(ss, f);
  CHECK(ss.str() == "# 3 2 0 0.5 0.25 0.5\n0,1.5,0\n0,0,-2\n");

  std::stringstream bad1("3 2 0 0 1 1\n");
  CHECK_THROWS_AS(read_field(bad1), Error);
  std::stringstream bad2("# 3 2 0 0 1 1\n1,2\n1,2,3\n");
  CHECK_THROWS_AS(read_field(bad2), Error);
  std::stringstream bad3("# 3 2 0 0 1 1\n1,2,x\n1,2,3\n");
  CHECK_THROWS_AS(read_field(bad3), Error);
  std::stringstream bad4("# 3 2 0 0 1 1\n1,2,3\n");
  CHECK_THROWS_AS(read_field(bad4), Error);
}
