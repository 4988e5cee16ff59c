#include "rassoc/attribution.hpp"

#include <algorithm>
#include <cmath>

#include "rassoc/errors.hpp"

namespace rassoc {

std::string_view to_string(SpanTag tag) {
  switch (tag) {
    case SpanTag::label: return "label";
    case SpanTag::rationale: return "rationale";
    case SpanTag::total: return "total";
  }
  throw ConfigError("unknown span tag");
}

SpanTag parse_span_tag(std::string_view name) {
  if (name == "label") return SpanTag::label;
  if (name == "rationale") return SpanTag::rationale;
  if (name == "total") return SpanTag::total;
  throw ConfigError("unknown span '" + std::string(name) + "'");
}

double AttributionVector::l1_norm() const {
  double s = 0.0;
  for (double v : values) s += std::abs(v);
  return s;
}

double attribute_token(std::span<const double> grad_row) {
  double s = 0.0;
  for (double g : grad_row) s += g;
  return s;
}

std::vector<double> attribute_rows(const Matrix<double>& grad) {
  std::vector<double> out(grad.rows);
  for (std::size_t i = 0; i < grad.rows; ++i) out[i] = attribute_token(grad.row_span(i));
  return out;
}

AttributionVector attribute_span(const ModelParams& params, const ForwardTrace& trace,
                                 const DecodedOutput& decoded, SpanTag span) {
  std::vector<std::size_t> positions;
  if (span != SpanTag::rationale) positions = decoded.label_positions;
  if (span != SpanTag::label) {
    positions.insert(positions.end(), decoded.rationale_positions.begin(),
                     decoded.rationale_positions.end());
  }
  if (positions.empty()) {
    throw EmptySpan(std::string(to_string(span)) + " span is empty");
  }
  AttributionVector out;
  out.span = span;
  out.values = attribute_rows(input_gradients(params, trace, positions));
  for (double v : out.values) {
    if (!std::isfinite(v)) throw StateError("non-finite attribution");
  }
  return out;
}

AttributionVector normalize_l1(const AttributionVector& v) {
  const double norm = v.l1_norm();
  if (norm == 0.0) throw ZeroVector("cannot L1-normalize a zero vector");
  AttributionVector out = v;
  if (v.normalized) return out;
  for (double& x : out.values) x /= norm;
  out.normalized = true;
  return out;
}

double decomposition_error(std::span<const double> label, std::span<const double> rationale,
                           std::span<const double> total) {
  if (label.size() != total.size() || rationale.size() != total.size()) {
    throw AlignError("attribution rows differ in length");
  }
  double scale = 1.0, err = 0.0;
  for (double t : total) scale = std::max(scale, std::abs(t));
  for (std::size_t i = 0; i < total.size(); ++i) {
    err = std::max(err, std::abs(label[i] + rationale[i] - total[i]));
  }
  return err / scale;
}

}  // namespace rassoc
