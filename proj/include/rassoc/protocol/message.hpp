#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rassoc/attribution.hpp"
#include "rassoc/target.hpp"

namespace rassoc::protocol {

inline constexpr std::string_view kProtocolVersion = "1";

enum class Kind {
  hello,
  capabilities,
  decode_request,
  decode_response,
  attribute_request,
  attribute_response,
  error
};

std::string_view to_string(Kind k);
Kind parse_kind(std::string_view name);  // throws ProtocolError

// One line on the wire: {"kind": ..., "id": ..., "payload": {...}}.
struct Message {
  Kind kind = Kind::hello;
  std::uint64_t id = 0;
  nlohmann::json payload = nlohmann::json::object();

  friend bool operator==(const Message&, const Message&) = default;
};

// Compact single-line JSON, no trailing newline.
std::string serialize(const Message& m);
// Throws ProtocolError on malformed lines or unknown kinds.
Message parse(std::string_view line);

// Floats travel as decimal strings with 17 significant digits.
std::string encode_number(double x);
double decode_number(const nlohmann::json& j);  // throws ProtocolError
nlohmann::json encode_numbers(const std::vector<double>& xs);
std::vector<double> decode_numbers(const nlohmann::json& j);

// Typed payloads.
Message make_hello(std::uint64_t id);
Message make_capabilities(std::uint64_t id, const TargetCapabilities& caps);
TargetCapabilities read_capabilities(const Message& m);  // throws VersionError

struct DecodeRequest {
  Tokens tokens;
  std::optional<NoiseSpec> noise;
};
Message make_decode_request(std::uint64_t id, const DecodeRequest& r);
DecodeRequest read_decode_request(const Message& m);
Message make_decode_response(std::uint64_t id, const Tokens& decoded);
Tokens read_decode_response(const Message& m);

struct AttributeRequest {
  Tokens tokens;
  SpanTag span = SpanTag::total;
};
Message make_attribute_request(std::uint64_t id, const AttributeRequest& r);
AttributeRequest read_attribute_request(const Message& m);
Message make_attribute_response(std::uint64_t id, const SpanAttributions& a);
SpanAttributions read_attribute_response(const Message& m);

struct ErrorFrame {
  std::string error_kind;
  std::string message;
};
Message make_error(std::uint64_t id, const ErrorFrame& e);
ErrorFrame read_error(const Message& m);

}  // namespace rassoc::protocol
