#pragma once

#include <stdexcept>
#include <string>

namespace rassoc {

// Base of every error raised by the toolkit. `kind()` is the stable name used
// in protocol error frames and CLI messages.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define RASSOC_DEFINE_ERROR(Name)                                         \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

RASSOC_DEFINE_ERROR(ConfigError)
RASSOC_DEFINE_ERROR(VocabError)
RASSOC_DEFINE_ERROR(MissingSeparator)
RASSOC_DEFINE_ERROR(EmptyLabel)
RASSOC_DEFINE_ERROR(DataError)
RASSOC_DEFINE_ERROR(TrainingDiverged)
RASSOC_DEFINE_ERROR(EmptySpan)
RASSOC_DEFINE_ERROR(SpanError)
RASSOC_DEFINE_ERROR(ZeroVector)
RASSOC_DEFINE_ERROR(MetricError)
RASSOC_DEFINE_ERROR(AlignError)
RASSOC_DEFINE_ERROR(StateError)
RASSOC_DEFINE_ERROR(ProtocolError)
RASSOC_DEFINE_ERROR(ProtocolTimeout)
RASSOC_DEFINE_ERROR(VersionError)
RASSOC_DEFINE_ERROR(AttributionInconsistent)

#undef RASSOC_DEFINE_ERROR

// Error frame received from a remote target; `remote_kind()` carries the
// remote's error code (e.g. "EmptySpan").
class RemoteError : public Error {
 public:
  RemoteError(std::string remote_kind, const std::string& message)
      : Error("RemoteError", remote_kind + ": " + message),
        remote_kind_(std::move(remote_kind)) {}
  const std::string& remote_kind() const noexcept { return remote_kind_; }

 private:
  std::string remote_kind_;
};

}  // namespace rassoc
