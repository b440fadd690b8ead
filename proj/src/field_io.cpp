#include "liouville/field_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace liouville {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

namespace {

double parse_number(std::string_view token, std::size_t line) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t'))
    token.remove_prefix(1);
  while (!token.empty() &&
         (token.back() == ' ' || token.back() == '\t' || token.back() == '\r'))
    token.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw Error("fields.FormatError", "bad number '" + std::string(token) +
                                          "' on line " + std::to_string(line));
  return v;
}

void write_header(std::ostream& os, const Grid2D& g) {
  os << "# " << g.nx << ' ' << g.ny << ' ' << format_number(g.x0) << ' '
     << format_number(g.y0) << ' ' << format_number(g.hx) << ' '
     << format_number(g.hy) << '\n';
}

}  // namespace

void write_field(std::ostream& os, const Field& f) {
  write_header(os, f.grid);
  std::string row;
  for (Index j = 0; j < f.grid.ny; ++j) {
    row.clear();
    for (Index i = 0; i < f.grid.nx; ++i) {
      if (i > 0) row += ',';
      row += format_number(f(i, j));
    }
    row += '\n';
    os << row;
  }
}

Field read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("#", 0) != 0)
    throw Error("fields.FormatError", "missing '# nx ny x0 y0 hx hy' header");
  std::istringstream header(line.substr(1));
  std::array<std::string, 6> parts;
  for (auto& p : parts)
    if (!(header >> p)) throw Error("fields.FormatError", "short header line");
  const auto nx = static_cast<Index>(parse_number(parts[0], 1));
  const auto ny = static_cast<Index>(parse_number(parts[1], 1));
  Field f(Grid2D(nx, ny, parse_number(parts[2], 1), parse_number(parts[3], 1),
                 parse_number(parts[4], 1), parse_number(parts[5], 1)));
  for (Index j = 0; j < ny; ++j) {
    if (!std::getline(is, line))
      throw Error("fields.FormatError", "expected " + std::to_string(ny) + " rows");
    const auto lineno = static_cast<std::size_t>(j) + 2;
    std::string_view rest(line);
    for (Index i = 0; i < nx; ++i) {
      const std::size_t comma = rest.find(',');
      if ((comma == std::string_view::npos) != (i + 1 == nx))
        throw Error("fields.FormatError",
                    "row " + std::to_string(lineno) + " does not have nx entries");
      f(i, j) = parse_number(rest.substr(0, comma), lineno);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
  }
  return f;
}

void write_field_file(const std::string& path, const Field& f) {
  std::ofstream os(path);
  if (!os) throw Error("cli.IoError", "cannot open '" + path + "' for writing");
  write_field(os, f);
}

Field read_field_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cli.IoError", "cannot open '" + path + "'");
  return read_field(is);
}

void write_mask(std::ostream& os, const Grid2D& grid, const Mask& mask) {
  write_header(os, grid);
  for (Index j = 0; j < grid.ny; ++j) {
    for (Index i = 0; i < grid.nx; ++i) {
      if (i > 0) os << ',';
      os << (mask(i, j) ? '1' : '0');
    }
    os << '\n';
  }
}

}  // namespace liouville
