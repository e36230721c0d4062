#pragma once

#include <stdexcept>
#include <string>

namespace wder {

/// Base for every error raised by the library. `kind()` is the stable,
/// machine-readable tag the CLI reports in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define WDER_DEFINE_ERROR(Name, tag)                              \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(tag, what) {}  \
  };

WDER_DEFINE_ERROR(ConfigError, "config")
WDER_DEFINE_ERROR(ShapeError, "shape")
WDER_DEFINE_ERROR(DomainError, "domain")
WDER_DEFINE_ERROR(FitError, "fit")
WDER_DEFINE_ERROR(EstimationError, "estimation")
WDER_DEFINE_ERROR(OracleScopeError, "oracle_scope")
WDER_DEFINE_ERROR(UsageError, "usage")
WDER_DEFINE_ERROR(CollectionError, "collection")
WDER_DEFINE_ERROR(TrainingError, "training")
WDER_DEFINE_ERROR(IoError, "io")

#undef WDER_DEFINE_ERROR

}  // namespace wder
