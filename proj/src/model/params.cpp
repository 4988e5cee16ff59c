#include "rassoc/model/params.hpp"

#include <cmath>
#include <random>

#include "rassoc/errors.hpp"

namespace rassoc {

ParamLayout::ParamLayout(const ModelConfig& cfg) {
  if (cfg.vocab_size < 5 || cfg.d_model < 1 || cfg.d_ff < 1 || cfg.max_positions < 1) {
    throw ConfigError("invalid model dimensions");
  }
  const auto v = static_cast<std::size_t>(cfg.vocab_size);
  const auto d = static_cast<std::size_t>(cfg.d_model);
  const auto f = static_cast<std::size_t>(cfg.d_ff);
  auto take = [this](std::size_t rows, std::size_t cols) {
    Slot s{total, rows, cols};
    total += rows * cols;
    return s;
  };
  embed = take(v, d);
  enc_norm1 = take(1, d);
  enc_wq = take(d, d);
  enc_wk = take(d, d);
  enc_wv = take(d, d);
  enc_wo = take(d, d);
  enc_norm2 = take(1, d);
  enc_w1 = take(d, f);
  enc_b1 = take(1, f);
  enc_w2 = take(f, d);
  enc_b2 = take(1, d);
  enc_norm_out = take(1, d);
  dec_norm1 = take(1, d);
  dec_self_wq = take(d, d);
  dec_self_wk = take(d, d);
  dec_self_wv = take(d, d);
  dec_self_wo = take(d, d);
  dec_norm2 = take(1, d);
  dec_cross_wq = take(d, d);
  dec_cross_wk = take(d, d);
  dec_cross_wv = take(d, d);
  dec_cross_wo = take(d, d);
  dec_norm3 = take(1, d);
  dec_w1 = take(d, f);
  dec_b1 = take(1, f);
  dec_w2 = take(f, d);
  dec_b2 = take(1, d);
  dec_norm_out = take(1, d);
  out_w = take(d, v);
  out_b = take(1, v);
}

std::vector<std::pair<std::string, Slot>> ParamLayout::named() const {
  return {{"embed", embed},
          {"enc_norm1", enc_norm1},     {"enc_wq", enc_wq},
          {"enc_wk", enc_wk},           {"enc_wv", enc_wv},
          {"enc_wo", enc_wo},           {"enc_norm2", enc_norm2},
          {"enc_w1", enc_w1},           {"enc_b1", enc_b1},
          {"enc_w2", enc_w2},           {"enc_b2", enc_b2},
          {"enc_norm_out", enc_norm_out},
          {"dec_norm1", dec_norm1},     {"dec_self_wq", dec_self_wq},
          {"dec_self_wk", dec_self_wk}, {"dec_self_wv", dec_self_wv},
          {"dec_self_wo", dec_self_wo}, {"dec_norm2", dec_norm2},
          {"dec_cross_wq", dec_cross_wq}, {"dec_cross_wk", dec_cross_wk},
          {"dec_cross_wv", dec_cross_wv}, {"dec_cross_wo", dec_cross_wo},
          {"dec_norm3", dec_norm3},     {"dec_w1", dec_w1},
          {"dec_b1", dec_b1},           {"dec_w2", dec_w2},
          {"dec_b2", dec_b2},           {"dec_norm_out", dec_norm_out},
          {"out_w", out_w},             {"out_b", out_b}};
}

bool ParamLayout::is_gain(const Slot& s) const {
  for (const Slot* g : {&enc_norm1, &enc_norm2, &enc_norm_out, &dec_norm1, &dec_norm2, &dec_norm3,
                        &dec_norm_out}) {
    if (g->offset == s.offset) return true;
  }
  return false;
}

ModelParams::ModelParams(const ModelConfig& cfg, const Vocab& vocab)
    : config(cfg), vocab_tokens(vocab.tokens()) {
  if (cfg.vocab_size != vocab.size()) throw ConfigError("vocab size mismatch");
  values.assign(ParamLayout(cfg).total, 0.0);
}

ModelParams ModelParams::zeros(const ModelConfig& cfg, const Vocab& vocab) {
  return ModelParams(cfg, vocab);
}

ModelParams ModelParams::random(const ModelConfig& cfg, const Vocab& vocab, std::uint64_t seed) {
  ModelParams p(cfg, vocab);
  const ParamLayout layout(cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& [name, slot] : layout.named()) {
    double* w = p.values.data() + slot.offset;
    if (layout.is_gain(slot)) {
      for (std::size_t i = 0; i < slot.size(); ++i) w[i] = 1.0;
      continue;
    }
    if (slot.rows == 1) continue;  // biases start at zero
    const double scale =
        slot.offset == layout.embed.offset ? cfg.embed_init_std : 1.0 / std::sqrt(double(slot.rows));
    for (std::size_t i = 0; i < slot.size(); ++i) w[i] = scale * normal(rng);
  }
  return p;
}

bool ModelParams::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace rassoc
