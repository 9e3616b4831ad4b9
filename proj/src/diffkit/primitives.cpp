#include <cstdio>
#include <string>
#include <vector>

#include "lagnet/errors.hpp"

namespace lagnet {

std::string describe_vector(const std::vector<double>& v) {
  std::string out = "(";
  char buf[32];
  for (std::size_t k = 0; k < v.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", v[k]);
    if (k) out += ", ";
    out += buf;
  }
  return out + ")";
}

}  // namespace lagnet
