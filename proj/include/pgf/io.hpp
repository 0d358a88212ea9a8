#pragma once

#include <string>

#include "pgf/field.hpp"
#include "pgf/forward.hpp"

namespace pgf {

/// Field file format: a JSON header at `path` ({n, m, points_per_axis,
/// half_width, representation, dtype: "complex128-little-endian", order:
/// "row-major", data: <sibling raw filename>}) plus the sibling raw file of
/// interleaved (re, im) 64-bit floats. Little-endian hosts only.
void write_field(const std::string& path, const ComplexField& f);
ComplexField read_field(const std::string& path);

/// DNMap file format: JSON metadata ({n, m, a, Kt, rows}) plus a sibling raw
/// file with the complex matrix in row-major interleaved doubles.
void write_dn_map(const std::string& path, const DNMap& dn);
DNMap read_dn_map(const std::string& path);

} // namespace pgf
