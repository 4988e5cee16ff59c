#include "rassoc/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rassoc/core/format.hpp"
#include "rassoc/errors.hpp"
#include "rassoc/model/train.hpp"

namespace rassoc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

void NoiseConfig::validate() const {
  if (sigma2_grid.empty()) throw ConfigError("empty sigma^2 grid");
  for (std::size_t i = 0; i < sigma2_grid.size(); ++i) {
    const double s = sigma2_grid[i];
    if (!std::isfinite(s) || s < 0.0) throw ConfigError("sigma^2 values must be finite and >= 0");
    if (i > 0 && !(s > sigma2_grid[i - 1])) throw ConfigError("sigma^2 grid must be ascending");
  }
  if (sigma2_grid.front() != 0.0) throw ConfigError("sigma^2 grid must contain 0");
  if (samples_per_instance == 0) throw ConfigError("samples_per_instance must be >= 1");
}

std::string_view to_string(StabilityCase c) {
  switch (c) {
    case StabilityCase::case1: return "Case1";
    case StabilityCase::case2: return "Case2";
    case StabilityCase::case3: return "Case3";
    case StabilityCase::case4: return "Case4";
  }
  throw ConfigError("unknown stability case");
}

StabilityCase parse_stability_case(std::string_view name) {
  for (auto c : {StabilityCase::case1, StabilityCase::case2, StabilityCase::case3,
                 StabilityCase::case4}) {
    if (name == to_string(c)) return c;
  }
  throw ConfigError("unknown stability case '" + std::string(name) + "'");
}

StabilityCase classify(double flip_rate, double proxy_drop_points, const StabilityThresholds& t) {
  const bool label_stable = flip_rate <= t.label;
  const bool rationale_stable = proxy_drop_points <= t.rationale;
  if (label_stable) return rationale_stable ? StabilityCase::case1 : StabilityCase::case3;
  return rationale_stable ? StabilityCase::case4 : StabilityCase::case2;
}

Matrix<double> sample_noise(std::size_t rows, std::size_t cols, double sigma2, std::uint64_t seed) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ConfigError("sigma^2 must be >= 0");
  Matrix<double> out(rows, cols);
  if (sigma2 == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(sigma2));
  for (double& v : out.data) v = normal(rng);
  return out;
}

Matrix<double> perturb(const Matrix<double>& x, double sigma2, std::uint64_t seed) {
  const Matrix<double> noise = sample_noise(x.rows, x.cols, sigma2, seed);
  if (sigma2 == 0.0) return x;
  Matrix<double> out = x;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += noise.data[i];
  return out;
}

std::uint64_t instance_seed(std::uint64_t base_seed, std::string_view instance_id,
                            std::size_t level, std::size_t sample) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ fnv1a(instance_id));
  h = splitmix64(h ^ static_cast<std::uint64_t>(level));
  return splitmix64(h ^ static_cast<std::uint64_t>(sample));
}

FlipStats flip_stats(std::span<const Tokens> original, std::span<const Tokens> perturbed,
                     std::span<const Tokens> gold) {
  if (original.size() != perturbed.size() || gold.size() != perturbed.size()) {
    throw AlignError("label lists differ in length");
  }
  FlipStats s;
  s.n = original.size();
  for (std::size_t i = 0; i < s.n; ++i) {
    if (perturbed[i] != original[i]) ++s.flips;
    if (perturbed[i] == gold[i]) ++s.correct;
  }
  if (s.n > 0) {
    s.flip_rate = static_cast<double>(s.flips) / static_cast<double>(s.n);
    s.accuracy = static_cast<double>(s.correct) / static_cast<double>(s.n);
  }
  return s;
}

double meaning_proxy(const ModelParams& evaluator, std::span<const Tokens> rationales,
                     std::span<const RationalizedInstance> instances, Execution exec) {
  if (!evaluator.trained) throw StateError("evaluator is untrained");
  if (evaluator.mode != Mode::r_o) throw StateError("evaluator must be an R->O model");
  if (rationales.size() != instances.size()) throw AlignError("rationales and instances differ");
  if (instances.empty()) throw DataError("no instances to evaluate");
  const Vocab vocab = evaluator.vocab();
  auto hits = map_indices<int>(instances.size(), exec, [&](std::size_t i) {
    const Tokens src = source_tokens(instances[i], Mode::r_o, &rationales[i]);
    const ForwardTrace trace = greedy_decode(evaluator, vocab, src);
    return prediction_correct(instances[i], Mode::r_o, vocab.decode(trace.decoded)) ? 1 : 0;
  });
  return static_cast<double>(std::accumulate(hits.begin(), hits.end(), 0)) /
         static_cast<double>(instances.size());
}

ReadOutput read_output(std::span<const std::string> raw) {
  ReadOutput out;
  try {
    const DecodedOutput parsed = parse_output(raw);
    out.label = parsed.label_tokens;
    out.rationale = parsed.rationale_tokens;
  } catch (const MissingSeparator&) {
    out.parse_failed = true;
  } catch (const EmptyLabel&) {
    out.parse_failed = true;
  }
  if (out.parse_failed) {
    for (const auto& t : raw) {
      if (t == kEosToken) break;
      out.label.push_back(t);
    }
  }
  return out;
}

NoiseSweepReport sweep_and_classify(MeasurementTarget& target, const ModelParams& evaluator,
                                    std::span<const RationalizedInstance> data,
                                    const NoiseConfig& cfg, const StabilityThresholds& thresholds,
                                    Execution exec) {
  cfg.validate();
  if (data.empty()) throw DataError("empty sweep dataset");
  if (!evaluator.trained) throw StateError("evaluator is untrained");
  const TargetCapabilities caps = target.capabilities();
  if (!caps.supports_decode) throw StateError("target cannot decode");
  if (cfg.sigma2_grid.size() > 1 && !caps.supports_noise) {
    throw StateError("target does not support noise injection");
  }
  if (!target.concurrent()) exec = Execution::serial;

  const std::size_t n = data.size();
  const std::size_t reps = cfg.samples_per_instance;
  std::vector<Tokens> sources(n), gold_rationales(n);
  for (std::size_t i = 0; i < n; ++i) {
    sources[i] = source_tokens(data[i], Mode::i_or);
    gold_rationales[i] = data[i].gold_rationale;
  }

  // Slot j covers instance j / reps, sample j % reps.
  auto decode_level = [&](std::size_t level) {
    const double sigma2 = cfg.sigma2_grid[level];
    return map_indices<ReadOutput>(n * reps, exec, [&](std::size_t j) {
      const auto& inst = data[j / reps];
      std::optional<NoiseSpec> noise;
      if (sigma2 != 0.0) noise = NoiseSpec{sigma2, instance_seed(cfg.base_seed, inst.id, level, j % reps)};
      return read_output(target.decode(sources[j / reps], noise));
    });
  };

  std::vector<RationalizedInstance> expanded;
  std::vector<Tokens> gold_expanded;
  for (std::size_t j = 0; j < n * reps; ++j) {
    expanded.push_back(data[j / reps]);
    gold_expanded.push_back(data[j / reps].gold_label);
  }

  NoiseSweepReport report;
  report.instances = n;
  report.target = target.describe();
  report.target_supports_noise = caps.supports_noise;
  report.proxy_accuracy_rstar = meaning_proxy(evaluator, gold_rationales, data, exec);

  const std::vector<ReadOutput> clean = decode_level(0);
  std::vector<Tokens> original(n * reps);
  for (std::size_t j = 0; j < n * reps; ++j) original[j] = clean[j].label;

  for (std::size_t level = 0; level < cfg.sigma2_grid.size(); ++level) {
    const std::vector<ReadOutput> outs = level == 0 ? clean : decode_level(level);
    std::vector<Tokens> labels(outs.size()), rationales(outs.size());
    SweepRow row;
    row.sigma2 = cfg.sigma2_grid[level];
    for (std::size_t j = 0; j < outs.size(); ++j) {
      labels[j] = outs[j].label;
      rationales[j] = outs[j].rationale;
      if (outs[j].parse_failed) ++row.parse_failures;
    }
    const FlipStats fs = flip_stats(original, labels, gold_expanded);
    row.accuracy = fs.accuracy;
    row.flip_rate = fs.flip_rate;
    row.proxy_accuracy = meaning_proxy(evaluator, rationales, expanded, exec);
    if (level == 0) report.proxy_accuracy_clean = row.proxy_accuracy;
    row.stability =
        classify(row.flip_rate, 100.0 * (report.proxy_accuracy_clean - row.proxy_accuracy), thresholds);
    report.rows.push_back(row);
  }
  return report;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw AlignError("spearman inputs differ in length");
  if (a.size() < 2) throw MetricError("spearman needs at least two points");
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw MetricError("spearman undefined for a constant input");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace rassoc
