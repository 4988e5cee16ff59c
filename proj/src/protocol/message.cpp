#include "rassoc/protocol/message.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "rassoc/errors.hpp"

namespace rassoc::protocol {

using nlohmann::json;

namespace {

constexpr std::pair<Kind, std::string_view> kKindNames[] = {
    {Kind::hello, "hello"},
    {Kind::capabilities, "capabilities"},
    {Kind::decode_request, "decode_request"},
    {Kind::decode_response, "decode_response"},
    {Kind::attribute_request, "attribute_request"},
    {Kind::attribute_response, "attribute_response"},
    {Kind::error, "error"},
};

const json& field(const Message& m, const char* name) {
  if (!m.payload.is_object() || !m.payload.contains(name)) {
    throw ProtocolError(std::string(to_string(m.kind)) + " payload lacks '" + name + "'");
  }
  return m.payload.at(name);
}

void expect_kind(const Message& m, Kind k) {
  if (m.kind != k) {
    throw ProtocolError("expected " + std::string(to_string(k)) + ", got " +
                        std::string(to_string(m.kind)));
  }
}

Tokens read_tokens(const json& j) {
  if (!j.is_array()) throw ProtocolError("tokens must be an array");
  Tokens out;
  for (const auto& t : j) {
    if (!t.is_string()) throw ProtocolError("tokens must be strings");
    out.push_back(t.get<std::string>());
  }
  return out;
}

bool read_bool(const Message& m, const char* name) {
  const json& j = field(m, name);
  if (!j.is_boolean()) throw ProtocolError(std::string(name) + " must be a boolean");
  return j.get<bool>();
}

int read_int(const Message& m, const char* name) {
  const json& j = field(m, name);
  if (!j.is_number_integer()) throw ProtocolError(std::string(name) + " must be an integer");
  return j.get<int>();
}

}  // namespace

std::string_view to_string(Kind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  throw ProtocolError("unknown message kind");
}

Kind parse_kind(std::string_view name) {
  for (const auto& [kind, n] : kKindNames) {
    if (n == name) return kind;
  }
  throw ProtocolError("unknown message kind '" + std::string(name) + "'");
}

std::string serialize(const Message& m) {
  json j;
  j["kind"] = std::string(to_string(m.kind));
  j["id"] = m.id;
  j["payload"] = m.payload;
  return j.dump();
}

Message parse(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j.contains("id") || !j.contains("payload")) {
    throw ProtocolError("message needs kind, id and payload");
  }
  if (!j["kind"].is_string()) throw ProtocolError("kind must be a string");
  if (!j["id"].is_number_unsigned()) throw ProtocolError("id must be a non-negative integer");
  if (!j["payload"].is_object()) throw ProtocolError("payload must be an object");
  Message m;
  m.kind = parse_kind(j["kind"].get<std::string>());
  m.id = j["id"].get<std::uint64_t>();
  m.payload = j["payload"];
  return m;
}

std::string encode_number(double x) {
  if (!std::isfinite(x)) throw ProtocolError("cannot encode a non-finite number");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double decode_number(const json& j) {
  if (!j.is_string()) throw ProtocolError("numbers travel as decimal strings");
  const std::string s = j.get<std::string>();
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(x)) {
    throw ProtocolError("bad number '" + s + "'");
  }
  return x;
}

json encode_numbers(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(encode_number(x));
  return out;
}

std::vector<double> decode_numbers(const json& j) {
  if (!j.is_array()) throw ProtocolError("expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(decode_number(x));
  return out;
}

Message make_hello(std::uint64_t id) {
  return {Kind::hello, id, json{{"protocol_version", std::string(kProtocolVersion)}}};
}

Message make_capabilities(std::uint64_t id, const TargetCapabilities& caps) {
  return {Kind::capabilities, id,
          json{{"protocol_version", std::string(kProtocolVersion)},
               {"supports_decode", caps.supports_decode},
               {"supports_noise", caps.supports_noise},
               {"supports_gradients", caps.supports_gradients},
               {"embedding_dim", caps.embedding_dim},
               {"max_len", caps.max_len}}};
}

TargetCapabilities read_capabilities(const Message& m) {
  if (m.kind != Kind::capabilities) {
    throw VersionError("expected capabilities, got " + std::string(to_string(m.kind)));
  }
  if (!m.payload.contains("protocol_version") ||
      m.payload["protocol_version"] != std::string(kProtocolVersion)) {
    throw VersionError("unsupported protocol version");
  }
  TargetCapabilities caps;
  caps.supports_decode = read_bool(m, "supports_decode");
  caps.supports_noise = read_bool(m, "supports_noise");
  caps.supports_gradients = read_bool(m, "supports_gradients");
  caps.embedding_dim = read_int(m, "embedding_dim");
  caps.max_len = read_int(m, "max_len");
  try {
    caps.validate();
  } catch (const ConfigError& e) {
    throw ProtocolError(std::string("inconsistent capabilities: ") + e.what());
  }
  return caps;
}

Message make_decode_request(std::uint64_t id, const DecodeRequest& r) {
  json p{{"tokens", r.tokens}};
  if (r.noise) {
    p["sigma2"] = encode_number(r.noise->sigma2);
    p["seed"] = std::to_string(r.noise->seed);
  }
  return {Kind::decode_request, id, p};
}

DecodeRequest read_decode_request(const Message& m) {
  expect_kind(m, Kind::decode_request);
  DecodeRequest r;
  r.tokens = read_tokens(field(m, "tokens"));
  if (m.payload.contains("sigma2")) {
    NoiseSpec noise;
    noise.sigma2 = decode_number(m.payload["sigma2"]);
    const json& seed = field(m, "seed");
    if (!seed.is_string()) throw ProtocolError("seed must be a decimal string");
    const std::string s = seed.get<std::string>();
    char* end = nullptr;
    errno = 0;
    noise.seed = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s[0] == '-' || end != s.c_str() + s.size() || errno == ERANGE) {
      throw ProtocolError("bad seed '" + s + "'");
    }
    r.noise = noise;
  }
  return r;
}

Message make_decode_response(std::uint64_t id, const Tokens& decoded) {
  return {Kind::decode_response, id, json{{"tokens", decoded}}};
}

Tokens read_decode_response(const Message& m) {
  expect_kind(m, Kind::decode_response);
  return read_tokens(field(m, "tokens"));
}

Message make_attribute_request(std::uint64_t id, const AttributeRequest& r) {
  return {Kind::attribute_request, id,
          json{{"tokens", r.tokens}, {"span", std::string(to_string(r.span))}}};
}

AttributeRequest read_attribute_request(const Message& m) {
  expect_kind(m, Kind::attribute_request);
  AttributeRequest r;
  r.tokens = read_tokens(field(m, "tokens"));
  const json& span = field(m, "span");
  if (!span.is_string()) throw ProtocolError("span must be a string");
  try {
    r.span = parse_span_tag(span.get<std::string>());
  } catch (const ConfigError& e) {
    throw ProtocolError(e.what());
  }
  return r;
}

Message make_attribute_response(std::uint64_t id, const SpanAttributions& a) {
  return {Kind::attribute_response, id,
          json{{"tokens", a.decoded},
               {"label", encode_numbers(a.label)},
               {"rationale", encode_numbers(a.rationale)},
               {"total", encode_numbers(a.total)}}};
}

SpanAttributions read_attribute_response(const Message& m) {
  expect_kind(m, Kind::attribute_response);
  SpanAttributions a;
  a.decoded = read_tokens(field(m, "tokens"));
  a.label = decode_numbers(field(m, "label"));
  a.rationale = decode_numbers(field(m, "rationale"));
  a.total = decode_numbers(field(m, "total"));
  if (a.label.size() != a.total.size() || a.rationale.size() != a.total.size()) {
    throw ProtocolError("attribution arrays differ in length");
  }
  return a;
}

Message make_error(std::uint64_t id, const ErrorFrame& e) {
  return {Kind::error, id, json{{"error_kind", e.error_kind}, {"message", e.message}}};
}

ErrorFrame read_error(const Message& m) {
  expect_kind(m, Kind::error);
  const json& k = field(m, "error_kind");
  const json& msg = field(m, "message");
  if (!k.is_string() || !msg.is_string()) throw ProtocolError("error fields must be strings");
  return {k.get<std::string>(), msg.get<std::string>()};
}

}  // namespace rassoc::protocol
