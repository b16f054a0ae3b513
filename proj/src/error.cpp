#include "lesionrl/error.hpp"

namespace lesionrl {

void throw_dimension_mismatch(const std::string& what, long long expected,
                              long long got) {
  throw DimensionError(what + ": expected " + std::to_string(expected) +
                       ", got " + std::to_string(got));
}

}  // namespace lesionrl
