#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rassoc/attribution.hpp"
#include "rassoc/core/types.hpp"
#include "rassoc/model/decode.hpp"
#include "rassoc/model/params.hpp"

namespace rassoc {

struct TargetCapabilities {
  bool supports_decode = false;
  bool supports_noise = false;
  bool supports_gradients = false;
  int embedding_dim = 0;
  int max_len = 0;

  // gradients and noise both require decode; throws ConfigError otherwise.
  void validate() const;

  friend bool operator==(const TargetCapabilities&, const TargetCapabilities&) = default;
};

// Gaussian perturbation of the encoder input embeddings, drawn from `seed`.
struct NoiseSpec {
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
};

// Decoded output plus per-token attributions of the label span, the rationale
// span and both together. An empty span contributes an all-zero row.
struct SpanAttributions {
  Tokens decoded;
  std::vector<double> label;
  std::vector<double> rationale;
  std::vector<double> total;
};

// A model that can be measured: the robustness and attribution pipelines only
// talk to this interface.
class MeasurementTarget {
 public:
  virtual ~MeasurementTarget() = default;

  virtual TargetCapabilities capabilities() const = 0;
  // Raw greedy emission (EOS included when produced).
  virtual Tokens decode(const Tokens& source, const std::optional<NoiseSpec>& noise) = 0;
  // Decodes cleanly and attributes; throws EmptySpan when `required` is empty
  // in the decode, and the parse errors when the emission lacks the grammar.
  virtual SpanAttributions attribute(const Tokens& source, SpanTag required) = 0;
  // Whether concurrent calls are allowed.
  virtual bool concurrent() const { return false; }
  virtual std::string describe() const = 0;
};

// The tiny model in process.
class BuiltinTarget final : public MeasurementTarget {
 public:
  explicit BuiltinTarget(ModelParams params, std::size_t max_len = kDefaultMaxDecode);

  TargetCapabilities capabilities() const override;
  Tokens decode(const Tokens& source, const std::optional<NoiseSpec>& noise) override;
  SpanAttributions attribute(const Tokens& source, SpanTag required) override;
  bool concurrent() const override { return true; }
  std::string describe() const override { return "builtin"; }

  const ModelParams& params() const { return params_; }

 private:
  ModelParams params_;
  Vocab vocab_;
  std::size_t max_len_;
};

}  // namespace rassoc
