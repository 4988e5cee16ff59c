#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rassoc/core/types.hpp"
#include "rassoc/model/params.hpp"
#include "rassoc/parallel.hpp"

namespace rassoc {

struct TrainConfig {
  double learning_rate = 3e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 40;
  std::size_t patience = 5;
  std::uint64_t seed = 13;
  std::size_t max_decode_length = 200;
  double clip_norm = 1.0;
  double weight_decay = 0.0;
  // Linear warmup over the first steps, then cosine decay to
  // min_lr_ratio * learning_rate at the last step of max_epochs.
  std::size_t warmup_steps = 100;
  double min_lr_ratio = 0.05;
  // adaptive-moment constants
  double beta1 = 0.9;
  double beta2 = 0.99;
  double adam_eps = 1e-8;
  ModelConfig model{};  // vocab_size is filled from the vocabulary
  Execution execution = Execution::parallel;

  void validate() const;
};

// One (source, target) pair in token ids; the target ends with EOS.
struct Example {
  std::vector<int> source;
  std::vector<int> target;
};

std::vector<Example> make_examples(std::span<const RationalizedInstance> data, Mode mode,
                                   const Vocab& vocab);

// Sum of per-token cross-entropy over a batch and its gradient.
struct BatchGradient {
  double loss_sum = 0.0;
  std::size_t tokens = 0;
  std::vector<double> grad;  // d(loss_sum)/d(params)
};

// Per-example gradients are computed into separate slots and added in index
// order, so serial and parallel execution give bit-identical sums.
BatchGradient batch_gradient(const ModelParams& params, std::span<const Example> batch,
                             Execution exec);

// Mean per-token loss without gradients.
double mean_loss(const ModelParams& params, std::span<const Example> examples, Execution exec);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> curve;
  std::size_t best_epoch = 0;
  double dev_accuracy = 0.0;
};

// Maximizes the conditional likelihood of the mode's targets with an
// adaptive-moment optimizer, global-norm clipping and early stopping on dev
// loss. Parameters from the best dev-loss epoch are returned.
TrainResult train(std::span<const RationalizedInstance> train_set,
                  std::span<const RationalizedInstance> dev_set, Mode mode,
                  const TrainConfig& cfg);

// Whether a decoded emission counts as correct for the configuration:
// label match for I->OR, R->O, IR->O; for I->R, the rationale together with
// the question must pin the gold label under the template oracle.
bool prediction_correct(const RationalizedInstance& instance, Mode mode,
                        std::span<const std::string> decoded);

// Greedy-decodes every instance and returns the fraction judged correct.
double evaluate_accuracy(const ModelParams& params, std::span<const RationalizedInstance> data,
                         Mode mode, Execution exec = Execution::parallel);

}  // namespace rassoc
