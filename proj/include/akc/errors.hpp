#pragma once

#include <stdexcept>
#include <string>

namespace akc {

/// Base class for every error raised by the library. The CLI maps these to
/// exit codes; `is_usage_error()` distinguishes configuration/usage problems
/// (exit 2) from failed computations.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what, bool usage = false)
      : std::runtime_error(what), usage_(usage) {}
  bool is_usage_error() const noexcept { return usage_; }

private:
  bool usage_;
};

#define AKC_DEFINE_ERROR(Name, usage)                                          \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& what) : Error(#Name ": " + what, usage) {} \
  }

AKC_DEFINE_ERROR(StreamExhausted, false);
AKC_DEFINE_ERROR(CertificateNotFound, false);
AKC_DEFINE_ERROR(InvalidConfig, true);
AKC_DEFINE_ERROR(InvalidArgument, true);
AKC_DEFINE_ERROR(IntegrationFailure, false);
AKC_DEFINE_ERROR(OutOfDomain, false);
AKC_DEFINE_ERROR(ModeError, true);
AKC_DEFINE_ERROR(PreconditionViolated, true);
AKC_DEFINE_ERROR(StepTooLarge, false);
AKC_DEFINE_ERROR(OrderCapExceeded, false);
AKC_DEFINE_ERROR(InsufficientStages, true);
AKC_DEFINE_ERROR(MissingStage, true);
AKC_DEFINE_ERROR(UnsupportedDimension, true);
AKC_DEFINE_ERROR(NotEvaluable, false);

#undef AKC_DEFINE_ERROR

}  // namespace akc
