#include "rassoc/target.hpp"

#include "rassoc/core/format.hpp"
#include "rassoc/errors.hpp"
#include "rassoc/robustness.hpp"

namespace rassoc {

void TargetCapabilities::validate() const {
  if (supports_gradients && !supports_decode) throw ConfigError("gradients require decode");
  if (supports_noise && !supports_decode) throw ConfigError("noise requires decode");
  if (embedding_dim < 0 || max_len < 0) throw ConfigError("negative capability size");
}

BuiltinTarget::BuiltinTarget(ModelParams params, std::size_t max_len)
    : params_(std::move(params)), vocab_(params_.vocab()), max_len_(max_len) {}

TargetCapabilities BuiltinTarget::capabilities() const {
  TargetCapabilities caps;
  caps.supports_decode = caps.supports_noise = caps.supports_gradients = true;
  caps.embedding_dim = params_.config.d_model;
  caps.max_len = static_cast<int>(max_len_);
  return caps;
}

Tokens BuiltinTarget::decode(const Tokens& source, const std::optional<NoiseSpec>& noise) {
  const TokenIds ids = vocab_.encode(source);
  ForwardTrace trace;
  if (noise && noise->sigma2 != 0.0) {
    const Matrix<double> sample = sample_noise(
        ids.size(), static_cast<std::size_t>(params_.config.d_model), noise->sigma2, noise->seed);
    trace = greedy_decode(params_, ids, &sample, max_len_);
  } else {
    if (noise && noise->sigma2 < 0.0) throw ConfigError("negative sigma^2");
    trace = greedy_decode(params_, ids, nullptr, max_len_);
  }
  return vocab_.decode(trace.decoded);
}

SpanAttributions BuiltinTarget::attribute(const Tokens& source, SpanTag required) {
  const TokenIds ids = vocab_.encode(source);
  const ForwardTrace trace = greedy_decode(params_, ids, nullptr, max_len_);
  SpanAttributions out;
  out.decoded = vocab_.decode(trace.decoded);
  const DecodedOutput parsed = parse_output(out.decoded);
  if (required == SpanTag::rationale && parsed.rationale_positions.empty()) {
    throw EmptySpan("rationale span is empty");
  }
  const std::vector<double> zeros(ids.size(), 0.0);
  out.label = parsed.label_positions.empty()
                  ? zeros
                  : attribute_span(params_, trace, parsed, SpanTag::label).values;
  out.rationale = parsed.rationale_positions.empty()
                      ? zeros
                      : attribute_span(params_, trace, parsed, SpanTag::rationale).values;
  out.total = attribute_span(params_, trace, parsed, SpanTag::total).values;
  return out;
}

}  // namespace rassoc
