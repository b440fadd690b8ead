#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "liouville/action.hpp"
#include "liouville/closedform.hpp"
#include "liouville/elliptic.hpp"
#include "liouville/field_io.hpp"
#include "liouville/hyperbolic.hpp"

namespace liouville::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string digest(const std::vector<std::string>& args) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (const auto& a : args) {
    for (unsigned char c : a) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0x1f;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

struct Context {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  Json summary;
  bool stdout_used = false;
};

/// Writes through `writer` to stdout ("-"), a file, or nowhere ("").
void emit(Context& ctx, const std::string& path,
          const std::function<void(std::ostream&)>& writer) {
  if (path.empty()) return;
  if (path == "-") {
    writer(ctx.out);
    ctx.stdout_used = true;
    return;
  }
  std::ofstream os(path);
  if (!os) throw Error("cli.IoError", "cannot open '" + path + "' for writing");
  writer(os);
}

Field load_field(Context& ctx, const std::string& path) {
  if (path == "-") return read_field(ctx.in);
  return read_field_file(path);
}

Json field_json(const Field& f) {
  Json values = Json::array();
  for (Index j = 0; j < f.grid.ny; ++j) {
    Json row = Json::array();
    for (Index i = 0; i < f.grid.nx; ++i) row.push_back(number(f(i, j)));
    values.push_back(std::move(row));
  }
  return Json{{"nx", f.grid.nx}, {"ny", f.grid.ny}, {"x0", f.grid.x0}, {"y0", f.grid.y0},
              {"hx", f.grid.hx}, {"hy", f.grid.hy}, {"values", std::move(values)}};
}

void emit_field(Context& ctx, const std::string& path, const std::string& format,
                const Field& f) {
  emit(ctx, path, [&](std::ostream& os) {
    if (format == "json")
      os << field_json(f).dump() << '\n';
    else
      write_field(os, f);
  });
}

Json field_stats(const Field& f) {
  double lo = INFINITY, hi = -INFINITY;
  Index masked = 0;
  for (Index j = 0; j < f.grid.ny; ++j)
    for (Index i = 0; i < f.grid.nx; ++i) {
      const double v = f(i, j);
      if (is_sentinel(v)) {
        ++masked;
        continue;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return Json{{"nx", f.grid.nx}, {"ny", f.grid.ny}, {"min", number(lo)}, {"max", number(hi)},
              {"undefined_nodes", masked}};
}

struct DomainOpts {
  std::vector<double> box;
  Index nx = 65;
  Index ny = 65;

  Grid2D grid() const { return Grid2D::spanning(box[0], box[1], box[2], box[3], nx, ny); }
};

void add_domain(CLI::App* sub, DomainOpts& d, std::vector<double> box, Index n = 65) {
  d.box = std::move(box);
  d.nx = d.ny = n;
  sub->add_option("--domain", d.box, "rectangle corners x0 y0 x1 y1 (coordinates)")
      ->expected(4)
      ->capture_default_str();
  sub->add_option("--nx", d.nx, "nodes along x, corners included (count, >= 2)")
      ->capture_default_str();
  sub->add_option("--ny", d.ny, "nodes along y, corners included (count, >= 2)")
      ->capture_default_str();
}

void add_output(CLI::App* sub, std::string& out, const std::string& what,
                const std::string& default_path) {
  out = default_path;
  sub->add_option("--out", out, what + " ('-' = stdout, '' = none)")->capture_default_str();
}

void add_format(CLI::App* sub, std::string& format) {
  format = "csv";
  sub->add_option("--format", format, "field output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

Expr parse_arg(const std::string& src, std::vector<std::string> vars) {
  return Expr::parse(src, std::move(vars));
}

std::optional<double> as_number(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
  return std::nullopt;
}

void reject_if(bool conflict, const std::string& message) {
  if (conflict) throw Error("cli.ConflictingFlags", message);
}

Json report_json(const SolveReport& r) {
  return Json{{"iterations", r.iterations},
              {"final_residual", number(r.final_residual)},
              {"converged", r.converged},
              {"newton_history", r.newton_history}};
}

/// Subcommand registry: options bind into the closure state; `run` executes
/// after parsing.
struct Command {
  CLI::App* app;
  std::function<void(Context&)> run;
};

// ---------------------------------------------------------------------------

Command exact_h(CLI::App& root) {
  auto* sub = root.add_subcommand("exact-h", "closed-form solution of u_xy = K e^{au} from f(x), g(y)");
  struct S {
    std::string f = "x", g = "y", out, format;
    double K = 1.0, a = 1.0;
    DomainOpts d;
  };
  auto s = std::make_shared<S>();
  sub->add_option("--f", s->f, "f(x), expression in x")->capture_default_str();
  sub->add_option("--g", s->g, "g(y), expression in y")->capture_default_str();
  sub->add_option("--K", s->K, "equation constant K (nonzero)")->capture_default_str();
  sub->add_option("--a", s->a, "equation constant a (nonzero)")->capture_default_str();
  add_domain(sub, s->d, {0.5, 0.5, 1.5, 1.5});
  add_output(sub, s->out, "field file", "-");
  add_format(sub, s->format);
  return {sub, [s](Context& ctx) {
            const CharacteristicPair cp(parse_arg(s->f, {"x"}), parse_arg(s->g, {"y"}));
            const Field u = hyperbolic_exact(cp, LiouvilleParams(s->K, s->a), s->d.grid());
            emit_field(ctx, s->out, s->format, u);
            ctx.summary["field"] = field_stats(u);
          }};
}

Command exact_e(CLI::App& root) {
  auto* sub = root.add_subcommand("exact-e", "closed-form solution of Δu = K e^{au} from an analytic seed F(z)");
  struct S {
    std::string F = "z", sign = "auto", out, format;
    double K = 1.0, a = 1.0;
    DomainOpts d;
  };
  auto s = std::make_shared<S>();
  sub->add_option("--F", s->F, "analytic seed F(z), expression in z")->capture_default_str();
  sub->add_option("--sign", s->sign, "denominator sign (1 ± |F|^2); auto picks minus for aK > 0")
      ->check(CLI::IsMember({"auto", "plus", "minus"}))
      ->capture_default_str();
  sub->add_option("--K", s->K, "equation constant K (nonzero)")->capture_default_str();
  sub->add_option("--a", s->a, "equation constant a (nonzero)")->capture_default_str();
  add_domain(sub, s->d, {-0.5, -0.5, 0.5, 0.5});
  add_output(sub, s->out, "field file", "-");
  add_format(sub, s->format);
  return {sub, [s](Context& ctx) {
            SeedSign sign = s->a * s->K > 0 ? SeedSign::minus : SeedSign::plus;
            if (s->sign == "plus") sign = SeedSign::plus;
            if (s->sign == "minus") sign = SeedSign::minus;
            const AnalyticSeed seed(parse_arg(s->F, {"z"}), sign);
            const Field u = elliptic_exact(seed, s->K, s->a, s->d.grid());
            emit_field(ctx, s->out, s->format, u);
            ctx.summary["sign"] = sign == SeedSign::plus ? "plus" : "minus";
            ctx.summary["field"] = field_stats(u);
          }};
}

Command blowup_exact(CLI::App& root) {
  auto* sub = root.add_subcommand("blowup-exact", "boundary blow-up solution ln(8/(1-r^2)^2) on the unit disk");
  struct S {
    std::string out, format;
    DomainOpts d;
  };
  auto s = std::make_shared<S>();
  add_domain(sub, s->d, {-1.0, -1.0, 1.0, 1.0});
  add_output(sub, s->out, "field file", "-");
  add_format(sub, s->format);
  return {sub, [s](Context& ctx) {
            const Field u = boundary_blowup_exact(s->d.grid());
            emit_field(ctx, s->out, s->format, u);
            ctx.summary["field"] = field_stats(u);
            ctx.summary["center_value"] = boundary_blowup_at(0.0);
          }};
}

Command blowup_curve_cmd(CLI::App& root) {
  auto* sub = root.add_subcommand("blowup-curve", "locate the singular curve f(x) + g(y) = 0");
  struct S {
    std::string f = "x", g = "y", out;
    std::vector<double> xr{-1.0, 1.0}, yr{-5.0, 5.0};
    Index samples = 21;
    double tol = 1e-12;
  };
  auto s = std::make_shared<S>();
  sub->add_option("--f", s->f, "f(x), expression in x")->capture_default_str();
  sub->add_option("--g", s->g, "g(y), expression in y")->capture_default_str();
  sub->add_option("--x-range", s->xr, "x interval sampled (coordinates)")->expected(2)->capture_default_str();
  sub->add_option("--y-range", s->yr, "y interval searched (coordinates)")->expected(2)->capture_default_str();
  sub->add_option("--samples", s->samples, "number of x samples (count)")->capture_default_str();
  sub->add_option("--tol", s->tol, "relative tolerance on |f+g| (dimensionless)")->capture_default_str();
  add_output(sub, s->out, "x,y CSV (NA = no root)", "-");
  return {sub, [s](Context& ctx) {
            const CharacteristicPair cp(parse_arg(s->f, {"x"}), parse_arg(s->g, {"y"}));
            const BlowupCurve c =
                blowup_curve(cp, {s->xr[0], s->xr[1]}, {s->yr[0], s->yr[1]}, s->samples, s->tol);
            Index roots = 0;
            for (const auto& [x, y] : c.samples) roots += y.has_value();
            emit(ctx, s->out, [&](std::ostream& os) {
              os << "x,y\n";
              for (const auto& [x, y] : c.samples)
                os << format_number(x) << ',' << (y ? format_number(*y) : "NA") << '\n';
            });
            ctx.summary["samples"] = c.samples.size();
            ctx.summary["roots"] = roots;
          }};
}

Command verify(CLI::App& root) {
  auto* sub = root.add_subcommand("verify", "residual and norms of a field against one equation form");
  struct S {
    std::string in = "-", eq = "hyperbolic", out, format;
    double K = 1.0, a = 1.0;
    std::optional<double> expect_max;
  };
  auto s = std::make_shared<S>();
  sub->add_option("--in", s->in, "field file ('-' = stdin)")->capture_default_str();
  sub->add_option("--eq", s->eq, "equation form")
      ->check(CLI::IsMember({"elliptic", "hyperbolic", "log"}))
      ->capture_default_str();
  sub->add_option("--K", s->K, "equation constant K (nonzero)")->capture_default_str();
  sub->add_option("--a", s->a, "equation constant a (nonzero; ignored for log)")->capture_default_str();
  sub->add_option("--expect-max", s->expect_max,
                  "fail with exit 1 if the max residual exceeds this (residual units)");
  add_output(sub, s->out, "residual field file", "");
  add_format(sub, s->format);
  return {sub, [s](Context& ctx) {
            const Field f = load_field(ctx, s->in);
            Field r;
            if (s->eq == "elliptic")
              r = residual_elliptic(f, LiouvilleParams(s->K, s->a));
            else if (s->eq == "hyperbolic")
              r = residual_hyperbolic(f, LiouvilleParams(s->K, s->a));
            else
              r = residual_log(f, s->K);
            const Norms n = norms(r);
            emit_field(ctx, s->out, s->format, r);
            ctx.summary["eq"] = s->eq;
            ctx.summary["max_residual"] = n.max_abs;
            ctx.summary["l2_residual"] = n.l2;
            if (s->expect_max && !(n.max_abs <= *s->expect_max))
              throw Error("cli.ThresholdExceeded", "max residual " + format_number(n.max_abs) +
                                                       " exceeds " + format_number(*s->expect_max));
          }};
}

Command solve_elliptic(CLI::App& root) {
  auto* sub = root.add_subcommand("solve-elliptic", "Newton solve of the Dirichlet problem for Δu = K e^{au}");
  struct S {
    std::string geometry = "rect", boundary = "0", out, format, report;
    double K = 1.0, a = 1.0, tol = 1e-10;
    std::optional<double> lambda;
    int max_iter = 50;
    Index n = 257;
    DomainOpts d;
  };
  auto s = std::make_shared<S>();
  sub->add_option("--geometry", s->geometry, "rect (2D grid) or disk (radial, unit disk)")
      ->check(CLI::IsMember({"rect", "disk"}))
      ->capture_default_str();
  add_domain(sub, s->d, {0.0, 0.0, 1.0, 1.0}, 33);
  sub->add_option("--n", s->n, "radial nodes on [0, 1] for the disk (count)")->capture_default_str();
  auto* k = sub->add_option("--K", s->K, "equation constant K (nonzero)")->capture_default_str();
  auto* a = sub->add_option("--a", s->a, "equation constant a (nonzero)")->capture_default_str();
  sub->add_option("--lambda", s->lambda, "solve Δu + λ e^u = 0 instead (K = -λ, a = 1)")
      ->excludes(k)
      ->excludes(a);
  sub->add_option("--boundary", s->boundary,
                  "boundary value: number, or expression in x, y (rect only)")
      ->capture_default_str();
  sub->add_option("--tol", s->tol, "Newton tolerance on the h^2-scaled max residual")->capture_default_str();
  sub->add_option("--max-iter", s->max_iter, "Newton iteration cap (count)")->capture_default_str();
  add_output(sub, s->out, "solution file (field CSV, or r,u CSV on the disk)", "-");
  add_format(sub, s->format);
  sub->add_option("--report", s->report, "solve report JSON file");
  return {sub, [s, sub](Context& ctx) {
            const bool disk = s->geometry == "disk";
            reject_if(disk && (sub->count("--nx") || sub->count("--ny") || sub->count("--domain")),
                      "--geometry disk takes --n, not --domain/--nx/--ny");
            reject_if(!disk && sub->count("--n"), "--n applies to --geometry disk only");
            DirichletProblem p{Disk{s->n}, LiouvilleParams(1.0, 1.0), 0.0};
            if (!disk) p.geometry = Rectangle{s->d.grid()};
            if (s->lambda)
              p.equation = Gelfand{*s->lambda};
            else
              p.equation = LiouvilleParams(s->K, s->a);
            if (auto v = as_number(s->boundary))
              p.boundary = *v;
            else
              p.boundary = parse_arg(s->boundary, {"x", "y"});
            NewtonOptions opts;
            opts.tol = s->tol;
            opts.max_iter = s->max_iter;
            const DirichletSolution sol = solve_dirichlet(p, opts);
            if (const auto* prof = std::get_if<RadialProfile>(&sol.solution)) {
              emit(ctx, s->out, [&](std::ostream& os) {
                os << "r,u\n";
                for (Index i = 0; i < prof->values.size(); ++i)
                  os << format_number(prof->r(i)) << ',' << format_number(prof->values(i)) << '\n';
              });
              ctx.summary["u_center"] = prof->center();
            } else {
              const Field& f = std::get<Field>(sol.solution);
              emit_field(ctx, s->out, s->format, f);
              ctx.summary["u_center"] = f(f.grid.nx / 2, f.grid.ny / 2);
            }
            ctx.summary["report"] = report_json(sol.report);
            if (!s->report.empty()) {
              std::ofstream os(s->report);
              if (!os) throw Error("cli.IoError", "cannot open '" + s->report + "'");
              os << report_json(sol.report).dump(2) << '\n';
            }
          }};
}

Command gelfand(CLI::App& root) {
  auto* sub = root.add_subcommand("gelfand", "pseudo-arclength continuation of Δu + λ e^u = 0, u = 0 on the boundary");
  struct S {
    std::string geometry = "disk", out;
    Index n = 2049;
    DomainOpts d;
    ContinuationOptions c;
  };
  auto s = std::make_shared<S>();
  sub->add_option("--geometry", s->geometry, "disk (radial, certified λ0 = 2) or rect")
      ->check(CLI::IsMember({"disk", "rect"}))
      ->capture_default_str();
  sub->add_option("--n", s->n, "radial nodes on [0, 1] for the disk (count)")->capture_default_str();
  add_domain(sub, s->d, {0.0, 0.0, 1.0, 1.0}, 33);
  sub->add_option("--lambda-start", s->c.lambda_start, "first λ on the branch (>= 0)")->capture_default_str();
  sub->add_option("--lambda-stop", s->c.lambda_stop, "stop below this λ after the fold")->capture_default_str();
  sub->add_option("--ds", s->c.ds, "initial arclength step (weighted norm)")->capture_default_str();
  sub->add_option("--ds-max", s->c.ds_max, "largest arclength step")->capture_default_str();
  sub->add_option("--max-steps", s->c.max_steps, "continuation step cap (count)")->capture_default_str();
  sub->add_option("--u0-max", s->c.u0_max, "stop once the centre value exceeds this")->capture_default_str();
  add_output(sub, s->out, "branch CSV s,lambda,u0", "");
  return {sub, [s, sub](Context& ctx) {
            const bool disk = s->geometry == "disk";
            reject_if(disk && (sub->count("--nx") || sub->count("--ny") || sub->count("--domain")),
                      "--geometry disk takes --n, not --domain/--nx/--ny");
            reject_if(!disk && sub->count("--n"), "--n applies to --geometry disk only");
            const Geometry g = disk ? Geometry(Disk{s->n}) : Geometry(Rectangle{s->d.grid()});
            const Branch b = continue_branch(g, s->c);
            emit(ctx, s->out, [&](std::ostream& os) {
              os << "s,lambda,u0\n";
              for (const auto& p : b.points)
                os << format_number(p.s) << ',' << format_number(p.lambda) << ','
                   << format_number(p.u0) << '\n';
            });
            ctx.summary["geometry"] = s->geometry;
            ctx.summary["certified"] = disk;
            ctx.summary["points"] = b.points.size();
            if (b.fold) {
              ctx.summary["lambda0"] = b.fold->lambda0;
              ctx.summary["u0_at_fold"] = b.fold->u0;
            } else {
              ctx.summary["lambda0"] = nullptr;
            }
          }};
}

Command blowup_approx(CLI::App& root) {
  auto* sub = root.add_subcommand("blowup-approx", "radial Δu = e^u on the unit disk with u = M on the circle, M increasing");
  struct S {
    Index n = 2049;
    std::vector<double> M{5.0, 8.0, 11.0};
    std::string out;
  };
  auto s = std::make_shared<S>();
  sub->add_option("--n", s->n, "radial nodes on [0, 1] (count)")->capture_default_str();
  sub->add_option("--M", s->M, "increasing boundary values")->capture_default_str();
  add_output(sub, s->out, "profile CSV r,u_M1,u_M2,...", "");
  return {sub, [s](Context& ctx) {
            const auto profiles = boundary_blowup_approx(s->n, s->M);
            emit(ctx, s->out, [&](std::ostream& os) {
              os << 'r';
              for (double m : s->M) os << ",u_" << format_number(m);
              os << '\n';
              for (Index i = 0; i < profiles.front().values.size(); ++i) {
                os << format_number(profiles.front().r(i));
                for (const auto& p : profiles) os << ',' << format_number(p.values(i));
                os << '\n';
              }
            });
            Json centers = Json::array(), gaps = Json::array();
            for (const auto& p : profiles) {
              centers.push_back(p.center());
              gaps.push_back(boundary_blowup_at(0.0) - p.center());
            }
            ctx.summary["M"] = s->M;
            ctx.summary["u_center"] = centers;
            ctx.summary["gap_to_ln8"] = gaps;
          }};
}

Command march_cmd(CLI::App& root) {
  auto* sub = root.add_subcommand("march", "Goursat marching of u_xy = K e^{au} from characteristic data");
  struct S {
    std::string phi = "ln(2/(x+0.5)^2)", psi = "ln(2/(0.5+y)^2)", out, format, mask_out;
    double K = 1.0, a = 1.0, threshold = kDefaultBlowupThreshold;
    DomainOpts d;
  };
  auto s = std::make_shared<S>();
  sub->add_option("--phi", s->phi, "u(x, y0), expression in x")->capture_default_str();
  sub->add_option("--psi", s->psi, "u(x0, y), expression in y")->capture_default_str();
  sub->add_option("--K", s->K, "equation constant K (nonzero)")->capture_default_str();
  sub->add_option("--a", s->a, "equation constant a (nonzero)")->capture_default_str();
  sub->add_option("--threshold", s->threshold, "blow-up threshold on u")->capture_default_str();
  add_domain(sub, s->d, {0.5, 0.5, 1.5, 1.5});
  add_output(sub, s->out, "field file", "-");
  add_format(sub, s->format);
  sub->add_option("--mask-out", s->mask_out, "blow-up mask file (0/1 CSV)");
  return {sub, [s](Context& ctx) {
            const GoursatData data{parse_arg(s->phi, {"x"}), parse_arg(s->psi, {"y"})};
            const MarchResult r = march(data, LiouvilleParams(s->K, s->a), s->d.grid(), s->threshold);
            emit_field(ctx, s->out, s->format, r.u);
            emit(ctx, s->mask_out, [&](std::ostream& os) { write_mask(os, r.u.grid, r.mask); });
            ctx.summary["field"] = field_stats(r.u);
            ctx.summary["masked_nodes"] = r.mask.cast<Index>().sum();
          }};
}

Command backlund_cmd(CLI::App& root) {
  auto* sub = root.add_subcommand("backlund", "Liouville solution from w = phi(x) + psi(y) by the Bäcklund pair");
  struct S {
    std::string phi = "0", psi = "0", order = "xy", out, format;
    double bt_a = 2.0, u_corner = 0.0;
    DomainOpts d;
  };
  auto s = std::make_shared<S>();
  sub->add_option("--phi", s->phi, "phi(x), expression in x")->capture_default_str();
  sub->add_option("--psi", s->psi, "psi(y), expression in y")->capture_default_str();
  sub->add_option("--bt-a", s->bt_a, "Bäcklund constant (nonzero)")->capture_default_str();
  sub->add_option("--u-corner", s->u_corner, "u at the grid origin")->capture_default_str();
  sub->add_option("--order", s->order, "xy: bottom edge then columns; yx: left edge then rows")
      ->check(CLI::IsMember({"xy", "yx"}))
      ->capture_default_str();
  add_domain(sub, s->d, {0.0, 0.0, 0.5, 0.5});
  add_output(sub, s->out, "field file", "-");
  add_format(sub, s->format);
  return {sub, [s](Context& ctx) {
            const WaveSolution w{parse_arg(s->phi, {"x"}), parse_arg(s->psi, {"y"})};
            const Field u = backlund(w, s->bt_a, s->u_corner, s->d.grid(),
                                     s->order == "xy" ? IntegrationOrder::x_then_y
                                                      : IntegrationOrder::y_then_x);
            emit_field(ctx, s->out, s->format, u);
            ctx.summary["field"] = field_stats(u);
            ctx.summary["max_residual"] = norms(residual_hyperbolic(u, LiouvilleParams(1, 1))).max_abs;
          }};
}

Command action_cmd(CLI::App& root) {
  auto* sub = root.add_subcommand("action", "discrete Liouville action, its gradient, and a finite-difference check");
  struct S {
    std::string in, phi = "0", grad_out, format;
    double C = 1.0, mu = 1.0;
    int check_nodes = 20;
    unsigned seed = 1;
    DomainOpts d;
  };
  auto s = std::make_shared<S>();
  auto* in = sub->add_option("--in", s->in, "field file for φ ('-' = stdin)");
  sub->add_option("--phi", s->phi, "φ(x, y) expression, sampled on --domain")
      ->excludes(in)
      ->capture_default_str();
  add_domain(sub, s->d, {0.0, 0.0, 1.0, 1.0}, 17);
  sub->add_option("--C", s->C, "action prefactor C (> 0)")->capture_default_str();
  sub->add_option("--mu", s->mu, "μ (enters as μ^2)")->capture_default_str();
  sub->add_option("--check-nodes", s->check_nodes, "interior nodes checked by central differences (count)")
      ->capture_default_str();
  sub->add_option("--seed", s->seed, "RNG seed for the node choice")->capture_default_str();
  sub->add_option("--grad-out", s->grad_out, "gradient field file");
  add_format(sub, s->format);
  return {sub, [s, sub](Context& ctx) {
            Field phi;
            if (!s->in.empty()) {
              reject_if(sub->count("--domain") || sub->count("--nx") || sub->count("--ny"),
                        "--in fixes the grid; drop --domain/--nx/--ny");
              phi = load_field(ctx, s->in);
            } else {
              const Expr e = parse_arg(s->phi, {"x", "y"});
              phi = sample(s->d.grid(), [&](double x, double y) {
                const std::array<double, 2> p{x, y};
                return e(std::span<const double>(p));
              });
            }
            const ActionParams p(s->C, s->mu);
            const double S0 = action_value(phi, p);
            const Field grad = action_gradient(phi, p);
            const Norms gn = norms(grad);
            std::mt19937_64 rng(s->seed);
            std::uniform_int_distribution<Index> di(1, phi.grid.nx - 2), dj(1, phi.grid.ny - 2);
            double worst = 0.0;
            if (phi.grid.nx > 2 && phi.grid.ny > 2) {
              for (int k = 0; k < s->check_nodes; ++k) {
                const Index i = di(rng), j = dj(rng);
                const double eps = 1e-5 * std::max(1.0, std::abs(phi(i, j)));
                Field plus = phi, minus = phi;
                plus(i, j) += eps;
                minus(i, j) -= eps;
                const double fd = (action_value(plus, p) - action_value(minus, p)) / (2 * eps);
                const double scale = std::max(std::abs(grad(i, j)), p.C * phi.grid.hx * phi.grid.hy);
                worst = std::max(worst, std::abs(fd - grad(i, j)) / scale);
              }
            }
            emit_field(ctx, s->grad_out, s->format, grad);
            ctx.summary["action"] = S0;
            ctx.summary["gradient_max"] = gn.max_abs;
            ctx.summary["fd_max_rel_error"] = worst;
          }};
}

Command convert_log(CLI::App& root) {
  auto* sub = root.add_subcommand("convert-log", "pointwise T = e^u or u = ln T");
  struct S {
    std::string in = "-", direction = "u-to-T", out, format;
  };
  auto s = std::make_shared<S>();
  sub->add_option("--in", s->in, "field file ('-' = stdin)")->capture_default_str();
  sub->add_option("--direction", s->direction, "conversion direction")
      ->check(CLI::IsMember({"u-to-T", "T-to-u"}))
      ->capture_default_str();
  add_output(sub, s->out, "field file", "-");
  add_format(sub, s->format);
  return {sub, [s](Context& ctx) {
            const Field f = load_field(ctx, s->in);
            const Field g = convert_log_form(
                f, s->direction == "u-to-T" ? LogDirection::u_to_T : LogDirection::T_to_u);
            emit_field(ctx, s->out, s->format, g);
            ctx.summary["field"] = field_stats(g);
          }};
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app("Liouville equation toolkit: exact solutions, solvers and checks", "liouville");
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (computation is single-threaded; 1 gives bit-reproducible output)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::vector<Command> commands{exact_h(app),        exact_e(app),    blowup_exact(app),
                                blowup_curve_cmd(app), verify(app),   solve_elliptic(app),
                                gelfand(app),        blowup_approx(app), march_cmd(app),
                                backlund_cmd(app),   action_cmd(app), convert_log(app)};
  for (auto& c : commands) c.app->fallthrough();

  Context ctx{in, out, err, Json::object()};
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto parsed = app.get_subcommands();
    out << (parsed.empty() ? app.help() : parsed.front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    Json j{{"command", nullptr}, {"digest", digest(args)}, {"status", "error"},
           {"code", dynamic_cast<const CLI::ExcludesError*>(&e) ? "cli.ConflictingFlags" : "cli.UsageError"},
           {"message", e.what()}};
    err << j.dump() << '\n';
    return kValidationError;
  }

  const Command* cmd = nullptr;
  for (const auto& c : commands)
    if (c.app->parsed()) cmd = &c;

  ctx.summary["command"] = cmd->app->get_name();
  ctx.summary["digest"] = digest(args);
  ctx.summary["threads"] = threads;
  int code = kOk;
  try {
    cmd->run(ctx);
    ctx.summary["status"] = "ok";
  } catch (const Error& e) {
    ctx.summary["status"] = "error";
    ctx.summary["code"] = e.code();
    ctx.summary["message"] = e.what();
    code = e.kind() == ErrorKind::nonconvergence ? kNonConvergence : kValidationError;
  } catch (const std::exception& e) {
    ctx.summary["status"] = "error";
    ctx.summary["code"] = "cli.InternalError";
    ctx.summary["message"] = e.what();
    code = kValidationError;
  }
  // Failures report on stderr so a broken producer never feeds a pipe.
  std::ostream& summary_stream = (ctx.stdout_used || code != kOk) ? err : out;
  summary_stream << ctx.summary.dump() << '\n';
  return code;
}

}  // namespace liouville::cli
