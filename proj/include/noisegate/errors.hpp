#pragma once

#include <stdexcept>
#include <string>

namespace noisegate {

/// Base of every error raised by the library. `kind()` is the stable class
/// name reported by the CLI on its diagnostic stream.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define NOISEGATE_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                     \
   public:                                                        \
    using Error::Error;                                           \
    const char* kind() const noexcept override { return #Name; } \
  }

NOISEGATE_DEFINE_ERROR(DimensionError);
NOISEGATE_DEFINE_ERROR(InvalidInputError);
NOISEGATE_DEFINE_ERROR(DomainError);
NOISEGATE_DEFINE_ERROR(DegenerateWeightsError);
NOISEGATE_DEFINE_ERROR(DegenerateScaleError);
NOISEGATE_DEFINE_ERROR(DegenerateFitError);
NOISEGATE_DEFINE_ERROR(DegenerateColumnError);
NOISEGATE_DEFINE_ERROR(SchemaError);
NOISEGATE_DEFINE_ERROR(ParseError);
NOISEGATE_DEFINE_ERROR(IndexError);

#undef NOISEGATE_DEFINE_ERROR

}  // namespace noisegate
