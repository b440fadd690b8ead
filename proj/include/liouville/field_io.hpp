#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "liouville/fields.hpp"

namespace liouville {

/// Blow-up masks and similar 0/1 companions of a field.
using Mask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Shortest decimal representation that parses back to the same double.
std::string format_number(double v);

/// CSV field format: a header line `# nx ny x0 y0 hx hy`, then ny rows of nx
/// comma-separated values, row j holding y = y0 + j*hy. Undefined entries are
/// written as `nan`. Reading back reproduces every value bit for bit.
void write_field(std::ostream& os, const Field& f);
Field read_field(std::istream& is);

void write_field_file(const std::string& path, const Field& f);
Field read_field_file(const std::string& path);

/// Same header, 0/1 entries.
void write_mask(std::ostream& os, const Grid2D& grid, const Mask& mask);

}  // namespace liouville
