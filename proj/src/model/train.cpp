#include "rassoc/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "rassoc/core/format.hpp"
#include "rassoc/core/taskgen.hpp"
#include "rassoc/errors.hpp"
#include "rassoc/model/decode.hpp"

namespace rassoc {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || batch_size == 0 || max_epochs == 0 || patience == 0 ||
      max_decode_length == 0 || !(clip_norm > 0.0)) {
    throw ConfigError("training hyperparameters must be positive");
  }
  if (patience > max_epochs) throw ConfigError("patience exceeds max epochs");
  if (weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
  if (!(min_lr_ratio >= 0.0 && min_lr_ratio <= 1.0)) throw ConfigError("min_lr_ratio must lie in [0, 1]");
}

std::vector<Example> make_examples(std::span<const RationalizedInstance> data, Mode mode,
                                   const Vocab& vocab) {
  std::vector<Example> out;
  out.reserve(data.size());
  for (const auto& inst : data) {
    out.push_back({vocab.encode(source_tokens(inst, mode)), vocab.encode(target_tokens(inst, mode))});
  }
  return out;
}

namespace {

struct ExampleLoss {
  double loss = 0.0;
  std::vector<double> grad;
};

ExampleLoss example_loss(const ModelParams& params, const ParamLayout& layout, const Example& ex,
                         bool want_grad) {
  const auto w = weights_of(params, layout);
  auto enc = encode(w, embed_tokens(w, std::span<const int>(ex.source)));
  auto dec = decode_teacher_forced(w, enc, std::span<const int>(ex.target));
  const std::size_t m = ex.target.size();
  const std::size_t nv = dec.logits.cols;
  ExampleLoss out;
  Matrix<double> dlogits(m, nv);
  for (std::size_t t = 0; t < m; ++t) {
    const double* z = dec.logits.row(t);
    const double mx = *std::max_element(z, z + nv);
    double sum = 0.0;
    for (std::size_t j = 0; j < nv; ++j) sum += std::exp(z[j] - mx);
    const double log_norm = mx + std::log(sum);
    const auto gold = static_cast<std::size_t>(ex.target[t]);
    out.loss += log_norm - z[gold];
    if (want_grad) {
      double* dz = dlogits.row(t);
      for (std::size_t j = 0; j < nv; ++j) dz[j] = std::exp(z[j] - log_norm);
      dz[gold] -= 1.0;
    }
  }
  if (want_grad) {
    out.grad = backward(params, enc, dec, dlogits, ex.source, true).params;
  }
  return out;
}

}  // namespace

BatchGradient batch_gradient(const ModelParams& params, std::span<const Example> batch,
                             Execution exec) {
  const ParamLayout layout = params.layout();
  auto per_example = map_indices<ExampleLoss>(
      batch.size(), exec, [&](std::size_t i) { return example_loss(params, layout, batch[i], true); });
  BatchGradient out;
  out.grad.assign(layout.total, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.loss_sum += per_example[i].loss;
    out.tokens += batch[i].target.size();
    const auto& g = per_example[i].grad;
    for (std::size_t j = 0; j < g.size(); ++j) out.grad[j] += g[j];
  }
  return out;
}

double mean_loss(const ModelParams& params, std::span<const Example> examples, Execution exec) {
  if (examples.empty()) return 0.0;
  const ParamLayout layout = params.layout();
  auto losses = map_indices<double>(examples.size(), exec, [&](std::size_t i) {
    return example_loss(params, layout, examples[i], false).loss;
  });
  double sum = 0.0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    sum += losses[i];
    tokens += examples[i].target.size();
  }
  return sum / static_cast<double>(tokens);
}

bool prediction_correct(const RationalizedInstance& instance, Mode mode,
                        std::span<const std::string> decoded) {
  try {
    const DecodedOutput out = parse_for_mode(decoded, mode);
    if (mode == Mode::i_r) {
      auto label = template_oracle(out.rationale_tokens, instance.choices, &instance.question);
      return label && *label == instance.gold_label;
    }
    return out.label_tokens == instance.gold_label;
  } catch (const MissingSeparator&) {
    return false;
  } catch (const EmptyLabel&) {
    return false;
  }
}

double evaluate_accuracy(const ModelParams& params, std::span<const RationalizedInstance> data,
                         Mode mode, Execution exec) {
  if (data.empty()) throw DataError("empty evaluation set");
  const Vocab vocab = params.vocab();
  auto hits = map_indices<int>(data.size(), exec, [&](std::size_t i) {
    const Tokens src = source_tokens(data[i], mode);
    const ForwardTrace trace = greedy_decode(params, vocab, src);
    return prediction_correct(data[i], mode, vocab.decode(trace.decoded)) ? 1 : 0;
  });
  return static_cast<double>(std::accumulate(hits.begin(), hits.end(), 0)) /
         static_cast<double>(data.size());
}

TrainResult train(std::span<const RationalizedInstance> train_set,
                  std::span<const RationalizedInstance> dev_set, Mode mode,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw DataError("empty training set");
  const Vocab vocab = SyntheticWorld::standard().vocab();
  ModelConfig model_cfg = cfg.model;
  model_cfg.vocab_size = vocab.size();

  const auto train_examples = make_examples(train_set, mode, vocab);
  const auto dev_examples = make_examples(dev_set, mode, vocab);

  std::mt19937_64 rng(cfg.seed);
  ModelParams params = ModelParams::random(model_cfg, vocab, rng());
  params.mode = mode;
  const std::size_t total = params.values.size();
  std::vector<double> m1(total, 0.0), m2(total, 0.0);
  std::uint64_t step = 0;

  TrainResult result;
  ModelParams best = params;
  double best_dev = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train_examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Example> batch;
  const std::size_t steps_per_epoch = (order.size() + cfg.batch_size - 1) / cfg.batch_size;
  const double total_steps = static_cast<double>(std::max<std::size_t>(1, steps_per_epoch * cfg.max_epochs));

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_examples[order[i]]);
      BatchGradient bg = batch_gradient(params, batch, cfg.execution);
      if (!std::isfinite(bg.loss_sum)) {
        throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch));
      }
      epoch_loss += bg.loss_sum;
      epoch_tokens += bg.tokens;

      const double inv_tokens = 1.0 / static_cast<double>(bg.tokens);
      double norm2 = 0.0;
      for (double& g : bg.grad) {
        g *= inv_tokens;
        norm2 += g * g;
      }
      const double norm = std::sqrt(norm2);
      const double clip = norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0;
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      const double t = static_cast<double>(step);
      const double warm = cfg.warmup_steps == 0 ? 1.0 : std::min(1.0, t / static_cast<double>(cfg.warmup_steps));
      const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(1.0, t / total_steps)));
      const double lr = cfg.learning_rate * warm * (cfg.min_lr_ratio + (1.0 - cfg.min_lr_ratio) * cosine);
      for (std::size_t j = 0; j < total; ++j) {
        const double g = bg.grad[j] * clip;
        m1[j] = cfg.beta1 * m1[j] + (1.0 - cfg.beta1) * g;
        m2[j] = cfg.beta2 * m2[j] + (1.0 - cfg.beta2) * g * g;
        const double update = (m1[j] / c1) / (std::sqrt(m2[j] / c2) + cfg.adam_eps);
        params.values[j] -= lr * (update + cfg.weight_decay * params.values[j]);
      }
      if (!params.all_finite()) {
        throw TrainingDiverged("non-finite parameters at epoch " + std::to_string(epoch));
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(epoch_tokens);
    rec.dev_loss = dev_examples.empty() ? rec.train_loss
                                        : mean_loss(params, dev_examples, cfg.execution);
    if (!std::isfinite(rec.dev_loss)) throw TrainingDiverged("non-finite dev loss");
    result.curve.push_back(rec);
    if (rec.dev_loss < best_dev) {
      best_dev = rec.dev_loss;
      best = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  best.trained = true;
  best.mode = mode;
  result.params = std::move(best);
  if (!dev_set.empty()) {
    result.dev_accuracy = evaluate_accuracy(result.params, dev_set, mode, cfg.execution);
  }
  return result;
}

}  // namespace rassoc
