#pragma once

#include <span>
#include <vector>

#include "rassoc/model/transformer.hpp"

namespace rassoc {

inline constexpr std::size_t kDefaultMaxDecode = 200;

// Everything needed to backpropagate from decoded-token logits to the encoder
// input embeddings. Rows of `decoder.logits` align with `decoded`.
struct ForwardTrace {
  std::vector<int> source;
  std::vector<int> decoded;
  EncoderCache<double> encoder;
  DecoderCache<double> decoder;

  std::size_t length() const { return decoded.size(); }
  const Matrix<double>& input_embeddings() const { return encoder.x; }
  const Matrix<double>& logits() const { return decoder.logits; }
};

// Greedy decoding: argmax (lowest id on ties) until EOS or `max_len` tokens.
// `noise`, when given, is added to the encoder input embeddings once and held
// for the whole decode.
ForwardTrace greedy_decode(const ModelParams& params, std::span<const int> source,
                           const Matrix<double>* noise = nullptr,
                           std::size_t max_len = kDefaultMaxDecode);

// Token-level convenience wrapper; throws VocabError on unknown tokens.
ForwardTrace greedy_decode(const ModelParams& params, const Vocab& vocab,
                           std::span<const std::string> source,
                           const Matrix<double>* noise = nullptr,
                           std::size_t max_len = kDefaultMaxDecode);

// Teacher-forced pass over a fixed output sequence (no argmax).
ForwardTrace teacher_forced_trace(const ModelParams& params, std::span<const int> source,
                                  std::span<const int> outputs);

// d(sum over k in positions of logit[k][decoded[k]]) / d(encoder inputs), n x d.
Matrix<double> input_gradients(const ModelParams& params, const ForwardTrace& trace,
                               std::span<const std::size_t> positions);

// Sum of the decoded-token logits over `positions`; the scalar whose gradient
// input_gradients returns.
double decoded_logit_sum(const ForwardTrace& trace, std::span<const std::size_t> positions);

}  // namespace rassoc
