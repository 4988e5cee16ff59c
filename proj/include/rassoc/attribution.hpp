#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rassoc/core/types.hpp"
#include "rassoc/model/decode.hpp"

namespace rassoc {

enum class SpanTag { label, rationale, total };

std::string_view to_string(SpanTag tag);
SpanTag parse_span_tag(std::string_view name);  // throws ConfigError

// One attribution score per input token.
struct AttributionVector {
  std::vector<double> values;
  SpanTag span = SpanTag::total;
  bool normalized = false;

  double l1_norm() const;
};

// Element-wise sum of one token's embedding gradient. Sign is kept and no
// magnitude floor is applied.
double attribute_token(std::span<const double> grad_row);

// Reduces an n x d gradient matrix to n token attributions.
std::vector<double> attribute_rows(const Matrix<double>& grad);

// Attribution of the summed decoded-token logits over the label span, the
// rationale span, or both (total), computed by one backward pass each.
// Throws EmptySpan when the requested span has no positions.
AttributionVector attribute_span(const ModelParams& params, const ForwardTrace& trace,
                                 const DecodedOutput& decoded, SpanTag span);

// Divides by sum |values|; throws ZeroVector on an all-zero vector.
AttributionVector normalize_l1(const AttributionVector& v);

// Largest |label + rationale - total| relative to max(1, max |total|).
double decomposition_error(std::span<const double> label, std::span<const double> rationale,
                           std::span<const double> total);

}  // namespace rassoc
