#pragma once

#include <chrono>
#include <iosfwd>
#include <memory>
#include <string>

#include "rassoc/protocol/message.hpp"
#include "rassoc/protocol/transport.hpp"
#include "rassoc/target.hpp"

namespace rassoc::protocol {

inline constexpr std::chrono::milliseconds kDefaultTimeout{30000};

// Relative tolerance for label + rationale = total on received attributions.
inline constexpr double kDecompositionTolerance = 1e-3;

// Sends hello with `id` and waits for capabilities. Throws ProtocolTimeout
// when nothing arrives in time and VersionError on a malformed or
// mismatched reply.
TargetCapabilities handshake(Transport& transport, std::uint64_t id,
                             std::chrono::milliseconds timeout = kDefaultTimeout);

// Throws AttributionInconsistent when max |l + r - t| exceeds the tolerance
// relative to max(|l| + |r|).
void check_decomposition(const SpanAttributions& a, double tolerance = kDecompositionTolerance);

// Client side: a measurement target behind a transport. One request in flight.
class RemoteTarget final : public MeasurementTarget {
 public:
  explicit RemoteTarget(std::unique_ptr<Transport> transport,
                        std::chrono::milliseconds timeout = kDefaultTimeout,
                        std::string description = "remote");

  TargetCapabilities capabilities() const override { return caps_; }
  Tokens decode(const Tokens& source, const std::optional<NoiseSpec>& noise) override;
  SpanAttributions attribute(const Tokens& source, SpanTag required) override;
  std::string describe() const override { return description_; }

  // Sends `m` (its id is replaced by the next session id) and returns the
  // matching reply; error frames become RemoteError.
  Message call(Message m);

 private:
  std::unique_ptr<Transport> transport_;
  std::chrono::milliseconds timeout_;
  std::string description_;
  std::uint64_t next_id_ = 1;
  TargetCapabilities caps_;
};

// Server side: answers protocol lines on behalf of a target.
class ProtocolServer {
 public:
  explicit ProtocolServer(MeasurementTarget& target) : target_(target) {}

  // One request line in, one response line out. Never throws for bad input;
  // problems are reported as error frames.
  std::string handle(const std::string& line);

  // Reads requests until end of input, flushing after every response.
  void serve(std::istream& in, std::ostream& out);

 private:
  Message dispatch(const Message& m);

  MeasurementTarget& target_;
  std::uint64_t last_id_ = 0;
  bool greeted_ = false;
};

}  // namespace rassoc::protocol
