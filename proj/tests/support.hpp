#pragma once

// Shared fixtures for the test binaries: seeded models, small trained suites
// and an extended-precision finite-difference oracle.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <map>
#include <span>
#include <vector>

#include "rassoc/core/format.hpp"
#include "rassoc/core/taskgen.hpp"
#include "rassoc/model/checkpoint.hpp"
#include "rassoc/model/decode.hpp"
#include "rassoc/model/train.hpp"
#include "rassoc/model/transformer.hpp"

namespace rassoc::testing {

inline ModelParams random_model(std::uint64_t seed, ModelConfig cfg = {}) {
  const Vocab vocab = SyntheticWorld::standard().vocab();
  cfg.vocab_size = vocab.size();
  return ModelParams::random(cfg, vocab, seed);
}

inline Dataset toy_data(double s, std::size_t n, std::uint64_t seed, double noise = 0.0) {
  SufficiencyConfig c;
  c.s = s;
  c.n = n;
  c.seed = seed;
  c.label_noise = noise;
  return generate_dataset(c);
}

// A quickly trained model per mode on one shared small dataset. Accuracy is
// modest; tests only need a model whose outputs parse. Checkpoints are cached
// on disk because every test case runs in its own process.
inline const ModelParams& quick_model(Mode mode) {
  static std::map<Mode, ModelParams> cache;
  auto it = cache.find(mode);
  if (it != cache.end()) return it->second;
  const std::filesystem::path dir = RASSOC_TEST_CACHE_DIR;
  const auto path = dir / ("quick-" + std::string(to_string(mode)) + ".ckpt");
  if (std::filesystem::exists(path)) {
    try {
      return cache.emplace(mode, load_checkpoint(path)).first->second;
    } catch (const std::exception&) {
      // rebuilt below
    }
  }
  const Dataset data = toy_data(0.5, 400, 77);
  auto [train_set, dev_set] = split_dataset(data);
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.max_epochs = 8;
  cfg.patience = 8;
  auto result = train(train_set, dev_set, mode, cfg);
  std::filesystem::create_directories(dir);
  const auto tmp = path.string() + "." + std::to_string(::getpid());
  save_checkpoint(tmp, result.params);
  std::filesystem::rename(tmp, path);
  return cache.emplace(mode, std::move(result.params)).first->second;
}

// sum over k in positions of logit[k][outputs[k]] for encoder inputs x, with
// the outputs teacher-forced; evaluated in long double.
inline long double logit_sum_ld(const ModelParams& params, const std::vector<long double>& values,
                                const Matrix<long double>& x, std::span<const int> outputs,
                                std::span<const std::size_t> positions) {
  const ParamLayout layout = params.layout();
  const Weights<long double> w{layout, params.config, values.data()};
  const auto enc = encode(w, x);
  const auto dec = decode_teacher_forced(w, enc, outputs);
  long double s = 0;
  for (std::size_t k : positions) s += dec.logits(k, static_cast<std::size_t>(outputs[k]));
  return s;
}

// Central differences of logit_sum_ld with respect to every input entry.
inline Matrix<long double> finite_difference(const ModelParams& params, const ForwardTrace& trace,
                                             std::span<const std::size_t> positions,
                                             long double h = 1e-5L) {
  std::vector<long double> values(params.values.begin(), params.values.end());
  const auto& x0 = trace.input_embeddings();
  Matrix<long double> x(x0.rows, x0.cols);
  for (std::size_t i = 0; i < x0.data.size(); ++i) x.data[i] = x0.data[i];
  Matrix<long double> out(x0.rows, x0.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const long double keep = x.data[i];
    x.data[i] = keep + h;
    const long double up = logit_sum_ld(params, values, x, trace.decoded, positions);
    x.data[i] = keep - h;
    const long double down = logit_sum_ld(params, values, x, trace.decoded, positions);
    x.data[i] = keep;
    out.data[i] = (up - down) / (2 * h);
  }
  return out;
}

// Largest |analytic - numeric| / (|numeric| + 1e-8) over all entries.
inline double max_relative_error(const Matrix<double>& analytic, const Matrix<long double>& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.data.size(); ++i) {
    const long double n = numeric.data[i];
    const long double err = std::fabs(static_cast<long double>(analytic.data[i]) - n) /
                            (std::fabs(n) + 1e-8L);
    worst = std::max(worst, static_cast<double>(err));
  }
  return worst;
}

}  // namespace rassoc::testing
