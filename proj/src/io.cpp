#include "dopasym/io.hpp"

#include <cstdio>
#include <ostream>

namespace dopasym {

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_provenance(std::ostream& os, const std::string& config) {
  os << "# " << kVersion;
  if (!config.empty()) os << ' ' << config;
  os << '\n';
}

}  // namespace dopasym
