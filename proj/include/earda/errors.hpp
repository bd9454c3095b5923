#pragma once

#include <stdexcept>
#include <string>

namespace earda {

// Root of every error the library throws. Each subclass names one failure
// category so callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EARDA_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

EARDA_DEFINE_ERROR(LengthError);
EARDA_DEFINE_ERROR(SpecError);
EARDA_DEFINE_ERROR(UnitError);
EARDA_DEFINE_ERROR(SchemaError);
EARDA_DEFINE_ERROR(DataError);
EARDA_DEFINE_ERROR(LabelError);
EARDA_DEFINE_ERROR(CorpusFormatError);
EARDA_DEFINE_ERROR(ShortageError);
EARDA_DEFINE_ERROR(ConfigError);
EARDA_DEFINE_ERROR(ShapeError);
EARDA_DEFINE_ERROR(IndexError);
EARDA_DEFINE_ERROR(ArgumentError);
EARDA_DEFINE_ERROR(CompatibilityError);
EARDA_DEFINE_ERROR(CorruptionError);
EARDA_DEFINE_ERROR(IoError);

#undef EARDA_DEFINE_ERROR

}  // namespace earda
