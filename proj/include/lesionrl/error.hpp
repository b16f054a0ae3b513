#pragma once

#include <stdexcept>
#include <string>

namespace lesionrl {

// Base of every error raised by the library. The CLI maps UsageError to exit
// code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LESIONRL_DECLARE_ERROR(Name)      \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

LESIONRL_DECLARE_ERROR(ConfigError);
LESIONRL_DECLARE_ERROR(DimensionError);
LESIONRL_DECLARE_ERROR(StateError);
LESIONRL_DECLARE_ERROR(UsageError);
LESIONRL_DECLARE_ERROR(NumericError);
LESIONRL_DECLARE_ERROR(SamplingError);
LESIONRL_DECLARE_ERROR(ValidationError);
LESIONRL_DECLARE_ERROR(IngestionError);
LESIONRL_DECLARE_ERROR(InputError);
LESIONRL_DECLARE_ERROR(DivergenceError);
LESIONRL_DECLARE_ERROR(IoError);

#undef LESIONRL_DECLARE_ERROR

[[noreturn]] void throw_dimension_mismatch(const std::string& what,
                                           long long expected, long long got);

}  // namespace lesionrl
