#include "gmbp/gaussmix.hpp"

#include <sstream>

namespace gmbp {

std::string to_string(const VarSet& vars) {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < vars.size(); ++i) out << (i ? "," : "") << vars[i];
  out << '}';
  return out.str();
}

const char* to_string(WeightMode mode) {
  return mode == WeightMode::Exact ? "exact" : "paper";
}

}  // namespace gmbp
