#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rassoc/core/types.hpp"
#include "rassoc/core/vocab.hpp"

namespace rassoc {

struct ModelConfig {
  int vocab_size = 0;
  int d_model = 32;
  int d_ff = 128;
  bool use_positions = true;
  int max_positions = 512;
  double embed_init_std = 1.0;
  // Encoder input embeddings are the table row times this factor (decoder
  // inputs use the row as is). Sets where the noise sweep's transition falls
  // on the sigma^2 axis.
  double source_embed_scale = 6.0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Offset and shape of one tensor inside the flat parameter vector.
struct Slot {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

// All tensors of the one-layer encoder-decoder, laid out contiguously so the
// optimizer and gradient buffers can treat parameters as a single vector.
struct ParamLayout {
  explicit ParamLayout(const ModelConfig& cfg);

  Slot embed;  // vocab x d, shared by encoder input and decoder input
  // encoder
  Slot enc_norm1, enc_wq, enc_wk, enc_wv, enc_wo;
  Slot enc_norm2, enc_w1, enc_b1, enc_w2, enc_b2;
  Slot enc_norm_out;
  // decoder
  Slot dec_norm1, dec_self_wq, dec_self_wk, dec_self_wv, dec_self_wo;
  Slot dec_norm2, dec_cross_wq, dec_cross_wk, dec_cross_wv, dec_cross_wo;
  Slot dec_norm3, dec_w1, dec_b1, dec_w2, dec_b2;
  Slot dec_norm_out;
  // output projection
  Slot out_w, out_b;

  std::size_t total = 0;

  std::vector<std::pair<std::string, Slot>> named() const;
  bool is_gain(const Slot& s) const;
};

// Parameters of the tiny model plus the metadata needed to use them.
struct ModelParams {
  ModelConfig config;
  std::vector<std::string> vocab_tokens;
  std::optional<Mode> mode;  // set once trained
  bool trained = false;
  std::vector<double> values;

  ModelParams() = default;
  ModelParams(const ModelConfig& cfg, const Vocab& vocab);

  static ModelParams random(const ModelConfig& cfg, const Vocab& vocab, std::uint64_t seed);
  static ModelParams zeros(const ModelConfig& cfg, const Vocab& vocab);

  ParamLayout layout() const { return ParamLayout(config); }
  Vocab vocab() const { return Vocab::from_tokens(vocab_tokens); }
  bool all_finite() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

}  // namespace rassoc
