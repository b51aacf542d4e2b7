#pragma once

#include <stdexcept>
#include <string>

namespace ecgbench {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ECGBENCH_DEFINE_ERROR(Name)      \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

ECGBENCH_DEFINE_ERROR(IoError);
ECGBENCH_DEFINE_ERROR(FormatError);
ECGBENCH_DEFINE_ERROR(SpecError);
ECGBENCH_DEFINE_ERROR(RenderError);
ECGBENCH_DEFINE_ERROR(DimensionError);
ECGBENCH_DEFINE_ERROR(EmptyDelineation);
ECGBENCH_DEFINE_ERROR(UndefinedAxis);
ECGBENCH_DEFINE_ERROR(SchemaError);
ECGBENCH_DEFINE_ERROR(CycleError);
ECGBENCH_DEFINE_ERROR(DanglingFindingError);
ECGBENCH_DEFINE_ERROR(MissingFindingError);
ECGBENCH_DEFINE_ERROR(GroundingUnavailable);
ECGBENCH_DEFINE_ERROR(EndpointError);
ECGBENCH_DEFINE_ERROR(VerifierError);
ECGBENCH_DEFINE_ERROR(EmptyInput);
ECGBENCH_DEFINE_ERROR(ConfigError);

#undef ECGBENCH_DEFINE_ERROR

}  // namespace ecgbench
