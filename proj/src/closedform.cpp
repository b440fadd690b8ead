#include "liouville/closedform.hpp"

#include <cmath>
#include <limits>

namespace liouville {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_arity(const Expr& e, const char* what) {
  if (e.arity() != 1)
    throw Error("closedform.InvalidSeed", std::string(what) + " must have one variable");
}

struct HyperbolicTerms {
  double value;
  bool singular;
  bool sign_ok;
};

HyperbolicTerms hyperbolic_terms(double f, double fp, double g, double gp,
                                 const LiouvilleParams& p) {
  const double sum = f + g;
  if (std::abs(sum) <= 4 * kEps * (std::abs(f) + std::abs(g))) return {0.0, true, true};
  const double aK = p.a * p.K;
  if (!(aK * fp * gp > 0.0)) return {0.0, false, false};
  return {std::log(2.0 * fp * gp / (aK * sum * sum)) / p.a, false, true};
}

}  // namespace

CharacteristicPair::CharacteristicPair(Expr f_, Expr g_) : f(std::move(f_)), g(std::move(g_)) {
  require_arity(f, "f");
  require_arity(g, "g");
}

AnalyticSeed::AnalyticSeed(Expr F_, SeedSign sign_) : F(std::move(F_)), sign(sign_) {
  require_arity(F, "F");
}

Field hyperbolic_exact(const CharacteristicPair& cp, const LiouvilleParams& p,
                       const Grid2D& grid) {
  std::vector<EvalResult<double>> fx(static_cast<std::size_t>(grid.nx));
  std::vector<EvalResult<double>> gy(static_cast<std::size_t>(grid.ny));
  for (Index i = 0; i < grid.nx; ++i) fx[static_cast<std::size_t>(i)] = eval_dual(cp.f, grid.x(i));
  for (Index j = 0; j < grid.ny; ++j) gy[static_cast<std::size_t>(j)] = eval_dual(cp.g, grid.y(j));

  Field u(grid);
  for (Index j = 0; j < grid.ny; ++j) {
    const auto& g = gy[static_cast<std::size_t>(j)];
    for (Index i = 0; i < grid.nx; ++i) {
      const auto& f = fx[static_cast<std::size_t>(i)];
      const HyperbolicTerms t = hyperbolic_terms(f.value, f.d1, g.value, g.d1, p);
      if (t.singular) throw SingularNode(i, j);
      if (!t.sign_ok)
        throw Error("closedform.SignError",
                    "a*K*f'(x)*g'(y) <= 0 at node (" + std::to_string(i) + "," +
                        std::to_string(j) + ")");
      u(i, j) = t.value;
    }
  }
  return u;
}

double hyperbolic_exact_at(const CharacteristicPair& cp, const LiouvilleParams& p,
                           double x, double y) {
  const auto f = eval_dual(cp.f, x);
  const auto g = eval_dual(cp.g, y);
  const HyperbolicTerms t = hyperbolic_terms(f.value, f.d1, g.value, g.d1, p);
  if (t.singular) throw Error("closedform.SingularNode", "f(x)+g(y) vanishes");
  if (!t.sign_ok) throw Error("closedform.SignError", "a*K*f'(x)*g'(y) <= 0");
  return t.value;
}

Field elliptic_exact(const AnalyticSeed& seed, double K, double a, const Grid2D& grid) {
  const LiouvilleParams p(K, a);
  const double aK = p.a * p.K;
  const SeedSign expected = aK > 0 ? SeedSign::minus : SeedSign::plus;
  if (seed.sign != expected)
    throw Error("closedform.SignError",
                aK > 0 ? "a*K > 0 requires the minus seed sign"
                       : "a*K < 0 requires the plus seed sign");
  const double shift = std::log(std::abs(aK));
  const double s = seed.sign == SeedSign::minus ? -1.0 : 1.0;

  Field u(grid);
  for (Index j = 0; j < grid.ny; ++j) {
    for (Index i = 0; i < grid.nx; ++i) {
      const auto [F, Fp] = eval_complex(seed.F, Complex(grid.x(i), grid.y(j)));
      const double dF2 = std::norm(Fp);
      if (dF2 == 0.0)
        throw Error("closedform.SeedDegenerate",
                    "F'(z) = 0 at node (" + std::to_string(i) + "," + std::to_string(j) + ")");
      const double m = std::norm(F);
      if (seed.sign == SeedSign::minus && m >= 1.0)
        throw Error("closedform.DomainViolation",
                    "|F(z)| >= 1 at node (" + std::to_string(i) + "," + std::to_string(j) + ")");
      const double den = 1.0 + s * m;
      u(i, j) = (std::log(8.0 * dF2 / (den * den)) - shift) / p.a;
    }
  }
  return u;
}

double GelfandRadial::operator()(double r) const {
  const double q = 1.0 + b * r * r;
  return std::log(8.0 * b / (lambda * q * q));
}

GelfandRadial gelfand_radial(double b) {
  if (!(b > 0.0) || !std::isfinite(b))
    throw Error("closedform.NonPositiveB", "b must be a positive finite real");
  GelfandRadial g;
  g.b = b;
  g.lambda = 8.0 * b / ((1.0 + b) * (1.0 + b));
  // ln(8b/λ) simplifies to ln((1+b)^2), which stays accurate as b -> 0.
  g.u0 = 2.0 * std::log1p(b);
  return g;
}

double boundary_blowup_at(double r) {
  const double d = 1.0 - r * r;
  if (!(d > 0.0)) return sentinel();
  return std::log(8.0 / (d * d));
}

Field boundary_blowup_exact(const Grid2D& grid) {
  return sample(grid, [](double x, double y) {
    const double d = 1.0 - x * x - y * y;
    return d > 0.0 ? std::log(8.0 / (d * d)) : sentinel();
  });
}

BlowupCurve blowup_curve(const CharacteristicPair& cp, std::pair<double, double> x_range,
                         std::pair<double, double> y_range, Index n_samples, double tol) {
  if (n_samples < 1) throw Error("closedform.InvalidArgument", "need at least one sample");
  if (!(tol > 0.0)) throw Error("closedform.InvalidArgument", "tolerance must be positive");
  auto [y_lo, y_hi] = y_range;
  if (!(y_hi > y_lo)) throw Error("closedform.InvalidArgument", "empty y-interval");

  constexpr int kMonotoneProbes = 65;
  int sign = 0;
  for (int k = 0; k < kMonotoneProbes; ++k) {
    const double y = y_lo + (y_hi - y_lo) * k / (kMonotoneProbes - 1);
    const double d = eval_dual(cp.g, y).d1;
    const int s = (d > 0) - (d < 0);
    if (s == 0) continue;
    if (sign != 0 && s != sign)
      throw NonMonotoneG("g' changes sign near y = " + std::to_string(y));
    sign = s;
  }

  BlowupCurve curve;
  curve.tol = tol;
  for (Index k = 0; k < n_samples; ++k) {
    const double x = n_samples == 1
                         ? x_range.first
                         : x_range.first + (x_range.second - x_range.first) *
                                               static_cast<double>(k) /
                                               static_cast<double>(n_samples - 1);
    const double fx = cp.f(x);
    auto h = [&](double y) { return fx + cp.g(y); };
    auto accept = [&](double y) {
      return std::abs(h(y)) <= tol * (std::abs(fx) + std::abs(cp.g(y)) + 1.0);
    };
    double lo = y_lo, hi = y_hi;
    double h_lo = h(lo), h_hi = h(hi);
    std::optional<double> root;
    if (accept(lo)) {
      root = lo;
    } else if (accept(hi)) {
      root = hi;
    } else if ((h_lo < 0) != (h_hi < 0)) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (accept(mid) || mid == lo || mid == hi) {
          root = mid;
          break;
        }
        const double hm = h(mid);
        if ((hm < 0) == (h_lo < 0)) {
          lo = mid;
          h_lo = hm;
        } else {
          hi = mid;
        }
      }
    }
    curve.samples.emplace_back(x, root);
  }
  return curve;
}

Field convert_log_form(const Field& f, LogDirection direction) {
  Field out(f.grid);
  for (Index j = 0; j < f.grid.ny; ++j) {
    for (Index i = 0; i < f.grid.nx; ++i) {
      const double v = f(i, j);
      if (is_sentinel(v)) {
        out(i, j) = v;
      } else if (direction == LogDirection::u_to_T) {
        out(i, j) = std::exp(v);
      } else {
        if (!(v > 0.0))
          throw NonPositiveField("T <= 0 at node (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
        out(i, j) = std::log(v);
      }
    }
  }
  return out;
}

}  // namespace liouville
