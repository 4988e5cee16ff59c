#include "rassoc/protocol/session.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "rassoc/errors.hpp"

namespace rassoc::protocol {

TargetCapabilities handshake(Transport& transport, std::uint64_t id,
                             std::chrono::milliseconds timeout) {
  transport.send(serialize(make_hello(id)));
  const auto line = transport.receive(timeout);
  if (!line) throw ProtocolTimeout("no capabilities reply within timeout");
  Message reply;
  try {
    reply = parse(*line);
  } catch (const ProtocolError& e) {
    throw VersionError(std::string("malformed handshake reply: ") + e.what());
  }
  if (reply.kind == Kind::error) {
    const ErrorFrame e = read_error(reply);
    throw VersionError("handshake refused: " + e.error_kind + ": " + e.message);
  }
  if (reply.id != id) throw VersionError("handshake reply carries the wrong id");
  return read_capabilities(reply);
}

void check_decomposition(const SpanAttributions& a, double tolerance) {
  if (a.label.size() != a.total.size() || a.rationale.size() != a.total.size()) {
    throw AttributionInconsistent("attribution rows differ in length");
  }
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.total.size(); ++i) {
    err = std::max(err, std::abs(a.label[i] + a.rationale[i] - a.total[i]));
    scale = std::max(scale, std::abs(a.label[i]) + std::abs(a.rationale[i]));
  }
  if (err > tolerance * scale || (scale == 0.0 && err > 0.0)) {
    throw AttributionInconsistent("label + rationale differs from total by " +
                                  std::to_string(err) + " (scale " + std::to_string(scale) + ")");
  }
}

RemoteTarget::RemoteTarget(std::unique_ptr<Transport> transport, std::chrono::milliseconds timeout,
                           std::string description)
    : transport_(std::move(transport)), timeout_(timeout), description_(std::move(description)) {
  caps_ = handshake(*transport_, next_id_++, timeout_);
}

Message RemoteTarget::call(Message m) {
  m.id = next_id_++;
  transport_->send(serialize(m));
  const auto line = transport_->receive(timeout_);
  if (!line) throw ProtocolTimeout("no reply to request " + std::to_string(m.id));
  Message reply = parse(*line);
  if (reply.id != m.id) {
    throw ProtocolError("reply id " + std::to_string(reply.id) + " does not match request " +
                        std::to_string(m.id));
  }
  if (reply.kind == Kind::error) {
    const ErrorFrame e = read_error(reply);
    throw RemoteError(e.error_kind, e.message);
  }
  return reply;
}

Tokens RemoteTarget::decode(const Tokens& source, const std::optional<NoiseSpec>& noise) {
  if (!caps_.supports_decode) throw StateError("target does not decode");
  if (noise && !caps_.supports_noise) throw StateError("target does not support noise");
  return read_decode_response(call(make_decode_request(0, {source, noise})));
}

SpanAttributions RemoteTarget::attribute(const Tokens& source, SpanTag required) {
  if (!caps_.supports_gradients) throw StateError("target does not provide gradients");
  SpanAttributions a = read_attribute_response(call(make_attribute_request(0, {source, required})));
  if (a.total.size() != source.size()) {
    throw ProtocolError("attribution length does not match the input");
  }
  check_decomposition(a);
  return a;
}

std::string ProtocolServer::handle(const std::string& line) {
  std::uint64_t id = 0;
  try {
    const Message m = parse(line);
    id = m.id;
    if (m.id <= last_id_) {
      return serialize(make_error(
          m.id, {"ProtocolError", "request id " + std::to_string(m.id) + " is not increasing"}));
    }
    last_id_ = m.id;
    return serialize(dispatch(m));
  } catch (const RemoteError& e) {
    return serialize(make_error(id, {e.remote_kind(), e.what()}));
  } catch (const Error& e) {
    return serialize(make_error(id, {e.kind(), e.what()}));
  } catch (const std::exception& e) {
    return serialize(make_error(id, {"InternalError", e.what()}));
  }
}

Message ProtocolServer::dispatch(const Message& m) {
  switch (m.kind) {
    case Kind::hello: {
      if (!m.payload.contains("protocol_version") ||
          m.payload["protocol_version"] != std::string(kProtocolVersion)) {
        throw VersionError("unsupported protocol version");
      }
      greeted_ = true;
      return make_capabilities(m.id, target_.capabilities());
    }
    case Kind::decode_request: {
      if (!greeted_) throw ProtocolError("hello required first");
      const DecodeRequest r = read_decode_request(m);
      return make_decode_response(m.id, target_.decode(r.tokens, r.noise));
    }
    case Kind::attribute_request: {
      if (!greeted_) throw ProtocolError("hello required first");
      const AttributeRequest r = read_attribute_request(m);
      return make_attribute_response(m.id, target_.attribute(r.tokens, r.span));
    }
    default:
      throw ProtocolError("unexpected " + std::string(to_string(m.kind)) + " from client");
  }
}

void ProtocolServer::serve(std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << handle(line) << '\n';
    out.flush();
  }
}

}  // namespace rassoc::protocol
