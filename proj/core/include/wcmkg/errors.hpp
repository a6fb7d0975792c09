#pragma once

#include <stdexcept>
#include <string>

namespace wcmkg {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define WCMKG_DEFINE_ERROR(NAME)       \
  class NAME : public Error {          \
   public:                             \
    using Error::Error;                \
  }

// Physics / numeric domain violations.
WCMKG_DEFINE_ERROR(NonPositivePower);
WCMKG_DEFINE_ERROR(NegativeResidual);
WCMKG_DEFINE_ERROR(InvariantViolation);

// Model plumbing.
WCMKG_DEFINE_ERROR(DimensionMismatch);
WCMKG_DEFINE_ERROR(EmptyBatch);
WCMKG_DEFINE_ERROR(NonFiniteLoss);
WCMKG_DEFINE_ERROR(MissingFeature);
WCMKG_DEFINE_ERROR(VersionMismatch);

// Data ingestion and evaluation.
WCMKG_DEFINE_ERROR(SchemaError);
WCMKG_DEFINE_ERROR(TooFewSites);
WCMKG_DEFINE_ERROR(EmptyInput);
WCMKG_DEFINE_ERROR(DegenerateInput);
WCMKG_DEFINE_ERROR(IoError);
WCMKG_DEFINE_ERROR(ConfigError);

#undef WCMKG_DEFINE_ERROR

}  // namespace wcmkg
