#pragma once

#include <stdexcept>
#include <string>

namespace gcf {

// Every library failure derives from Error and carries a category so the CLI
// can map it onto a distinct exit code.
enum class ErrorKind {
  kConfig = 2,
  kIo = 3,
  kParse = 4,
  kSchema = 5,
  kTraining = 6,
  kRange = 7,
  kModelFormat = 8,
  kUnsupported = 9,
  kInvalidArgument = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define GCF_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

GCF_DEFINE_ERROR(ConfigError, kConfig)
GCF_DEFINE_ERROR(IoError, kIo)
GCF_DEFINE_ERROR(ParseError, kParse)
GCF_DEFINE_ERROR(SchemaError, kSchema)
GCF_DEFINE_ERROR(TrainingError, kTraining)
GCF_DEFINE_ERROR(RangeError, kRange)
GCF_DEFINE_ERROR(ModelFormatError, kModelFormat)
GCF_DEFINE_ERROR(UnsupportedError, kUnsupported)
GCF_DEFINE_ERROR(InvalidArgumentError, kInvalidArgument)

#undef GCF_DEFINE_ERROR

// Specific training failures that callers may want to catch by type.
class DegenerateGpsError : public TrainingError {
 public:
  using TrainingError::TrainingError;
};

class EmptyDatasetError : public ParseError {
 public:
  using ParseError::ParseError;
};

class VersionError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

}  // namespace gcf
