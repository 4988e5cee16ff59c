#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rassoc/core/types.hpp"
#include "rassoc/model/matrix.hpp"
#include "rassoc/model/params.hpp"
#include "rassoc/parallel.hpp"
#include "rassoc/target.hpp"

namespace rassoc {

inline const std::vector<double> kDefaultSigma2Grid = {0, 5, 10, 15, 20, 30, 50};

struct NoiseConfig {
  std::vector<double> sigma2_grid = kDefaultSigma2Grid;
  std::uint64_t base_seed = 0;
  std::size_t samples_per_instance = 1;

  // Ascending, non-negative, containing 0; throws ConfigError.
  void validate() const;
};

struct StabilityThresholds {
  double label = 0.10;      // max flip rate for a stable label
  double rationale = 10.0;  // max proxy accuracy drop (points) for a stable rationale
};

// case1: both stable; case2: both unstable; case3: label stable, rationale
// unstable; case4: label unstable, rationale stable.
enum class StabilityCase { case1 = 1, case2 = 2, case3 = 3, case4 = 4 };

std::string_view to_string(StabilityCase c);
StabilityCase parse_stability_case(std::string_view name);  // throws ConfigError
StabilityCase classify(double flip_rate, double proxy_drop_points, const StabilityThresholds& t);

// n x d matrix of iid N(0, sigma2) draws from `seed`; all zeros at sigma2 = 0.
Matrix<double> sample_noise(std::size_t rows, std::size_t cols, double sigma2, std::uint64_t seed);

// x + sample_noise(x.rows, x.cols, sigma2, seed); x itself when sigma2 = 0.
Matrix<double> perturb(const Matrix<double>& x, double sigma2, std::uint64_t seed);

// Seed for one (instance, sigma^2 level, sample) noise draw; independent of
// evaluation order.
std::uint64_t instance_seed(std::uint64_t base_seed, std::string_view instance_id,
                            std::size_t level, std::size_t sample = 0);

struct FlipStats {
  std::size_t n = 0;
  std::size_t flips = 0;
  std::size_t correct = 0;
  double flip_rate = 0.0;
  double accuracy = 0.0;
};

// A flip is any change from the original prediction, including predictions
// outside the choice set; accuracy compares the perturbed labels with gold.
FlipStats flip_stats(std::span<const Tokens> original, std::span<const Tokens> perturbed,
                     std::span<const Tokens> gold);

// Accuracy of a frozen R->O evaluator given the rationales in place of the
// gold ones. Throws StateError unless the evaluator is a trained R->O model.
double meaning_proxy(const ModelParams& evaluator, std::span<const Tokens> rationales,
                     std::span<const RationalizedInstance> instances,
                     Execution exec = Execution::parallel);

// Label and rationale read from a raw emission; on a parse failure the label
// is the whole emission (up to EOS) and the rationale is empty.
struct ReadOutput {
  Tokens label;
  Tokens rationale;
  bool parse_failed = false;
};
ReadOutput read_output(std::span<const std::string> raw);

struct SweepRow {
  double sigma2 = 0.0;
  double accuracy = 0.0;
  double flip_rate = 0.0;
  double proxy_accuracy = 0.0;
  std::size_t parse_failures = 0;
  StabilityCase stability = StabilityCase::case1;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct NoiseSweepReport {
  std::vector<SweepRow> rows;
  double proxy_accuracy_rstar = 0.0;   // evaluator on the gold rationales
  double proxy_accuracy_clean = 0.0;   // evaluator on sigma^2 = 0 rationales
  std::size_t instances = 0;
  std::string target;                  // target description
  bool target_supports_noise = false;  // target's declaration of the noise contract

  friend bool operator==(const NoiseSweepReport&, const NoiseSweepReport&) = default;
};

// Decodes every instance (I->OR input) at each sigma^2 level and classifies
// the level. Throws StateError when the target cannot decode with noise.
NoiseSweepReport sweep_and_classify(MeasurementTarget& target, const ModelParams& evaluator,
                                    std::span<const RationalizedInstance> data,
                                    const NoiseConfig& cfg, const StabilityThresholds& thresholds,
                                    Execution exec = Execution::parallel);

// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace rassoc
