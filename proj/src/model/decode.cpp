#include "rassoc/model/decode.hpp"

#include "rassoc/errors.hpp"

namespace rassoc {

namespace {

void check_source(const ModelParams& params, std::span<const int> source) {
  if (source.empty()) throw DataError("empty input sequence");
  if (source.size() > static_cast<std::size_t>(params.config.max_positions)) {
    throw DataError("input longer than the position table");
  }
  for (int id : source) {
    if (id < 0 || id >= params.config.vocab_size) {
      throw VocabError("token id out of range: " + std::to_string(id));
    }
  }
}

}  // namespace

ForwardTrace greedy_decode(const ModelParams& params, std::span<const int> source,
                           const Matrix<double>* noise, std::size_t max_len) {
  check_source(params, source);
  const auto d = static_cast<std::size_t>(params.config.d_model);
  if (noise && (noise->rows != source.size() || noise->cols != d)) {
    throw ConfigError("noise sample shape does not match the input");
  }
  max_len = std::min(max_len, static_cast<std::size_t>(params.config.max_positions));
  const ParamLayout layout = params.layout();
  const auto w = weights_of(params, layout);

  ForwardTrace trace;
  trace.source.assign(source.begin(), source.end());
  trace.encoder = encode(w, embed_tokens(w, source, noise));
  trace.decoder = start_decoder(w, trace.encoder);
  const auto nv = static_cast<std::size_t>(params.config.vocab_size);
  int prev = Vocab::kBos;
  while (trace.decoded.size() < max_len) {
    const double* logits = decoder_step(w, trace.decoder, prev);
    std::size_t best = 0;
    for (std::size_t j = 1; j < nv; ++j) {
      if (logits[j] > logits[best]) best = j;
    }
    prev = static_cast<int>(best);
    trace.decoded.push_back(prev);
    if (prev == Vocab::kEos) break;
  }
  return trace;
}

ForwardTrace greedy_decode(const ModelParams& params, const Vocab& vocab,
                           std::span<const std::string> source, const Matrix<double>* noise,
                           std::size_t max_len) {
  const TokenIds ids = vocab.encode(source);
  return greedy_decode(params, ids, noise, max_len);
}

ForwardTrace teacher_forced_trace(const ModelParams& params, std::span<const int> source,
                                  std::span<const int> outputs) {
  check_source(params, source);
  const ParamLayout layout = params.layout();
  const auto w = weights_of(params, layout);
  ForwardTrace trace;
  trace.source.assign(source.begin(), source.end());
  trace.decoded.assign(outputs.begin(), outputs.end());
  trace.encoder = encode(w, embed_tokens(w, source));
  trace.decoder = decode_teacher_forced(w, trace.encoder, outputs);
  return trace;
}

Matrix<double> input_gradients(const ModelParams& params, const ForwardTrace& trace,
                               std::span<const std::size_t> positions) {
  if (positions.empty()) throw EmptySpan("no decoded positions selected");
  const auto& logits = trace.logits();
  Matrix<double> dlogits(logits.rows, logits.cols);
  for (std::size_t k : positions) {
    if (k >= trace.decoded.size()) throw SpanError("position " + std::to_string(k) + " out of range");
    dlogits(k, static_cast<std::size_t>(trace.decoded[k])) += 1.0;
  }
  return backward(params, trace.encoder, trace.decoder, dlogits, trace.source, false).input;
}

double decoded_logit_sum(const ForwardTrace& trace, std::span<const std::size_t> positions) {
  double s = 0.0;
  for (std::size_t k : positions) {
    if (k >= trace.decoded.size()) throw SpanError("position out of range");
    s += trace.logits()(k, static_cast<std::size_t>(trace.decoded[k]));
  }
  return s;
}

}  // namespace rassoc
