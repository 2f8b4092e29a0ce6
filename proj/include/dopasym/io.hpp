#pragma once

#include <iosfwd>
#include <string>

namespace dopasym {

inline constexpr const char* kVersion = "dopasym 0.1.0";

// 17 significant digits, enough to round-trip a double.
std::string fmt_double(double x);

// "# dopasym <version> <config>" first line of every CSV.
void write_provenance(std::ostream& os, const std::string& config);

}  // namespace dopasym
