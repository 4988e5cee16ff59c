#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rassoc/core/types.hpp"
#include "rassoc/model/train.hpp"

namespace rassoc {

inline constexpr Mode kAllModes[] = {Mode::i_r, Mode::r_o, Mode::i_or, Mode::ir_o};

// Models of several configurations trained on one split with one seed.
struct ConfigSuite {
  Dataset train_set;
  Dataset dev_set;
  std::map<Mode, ModelParams> models;
  std::map<Mode, double> dev_accuracy;

  const ModelParams& model(Mode m) const;  // throws StateError when absent
};

// Splits `data` (train_fraction) and trains each requested configuration
// separately with the same TrainConfig.
ConfigSuite train_suite(const Dataset& data, const TrainConfig& cfg,
                        std::span<const Mode> modes = kAllModes, double train_fraction = 0.8,
                        Execution exec = Execution::parallel);

struct ReportRow {
  std::string config;
  double accuracy = 0.0;  // percent, 2 decimals
  std::optional<double> delta;
  std::size_t evaluated = 0;
  std::size_t parse_failures = 0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ExperimentReport {
  std::string name;
  std::vector<ReportRow> rows;

  const ReportRow& row(const std::string& config) const;  // throws DataError
  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

// b - a in percent points, both given to 2 decimals; throws MetricError
// outside [0, 100].
double compute_gap(double a, double b);

// Percent with 2 decimals.
double to_percent(double fraction);

// Frozen R->O accuracy on rationales from `rationales` (one per instance;
// nullopt marks a parse failure, excluded from the denominator).
ReportRow evaluate_rationales(const ModelParams& r_o, std::span<const RationalizedInstance> data,
                              std::span<const std::optional<Tokens>> rationales,
                              const std::string& config, Execution exec = Execution::parallel);

// Rationales generated by an I->OR or I->R model for each instance.
std::vector<std::optional<Tokens>> generate_rationales(const ModelParams& generator,
                                                       std::span<const RationalizedInstance> data,
                                                       Execution exec = Execution::parallel);

// R->O on R*, on I->OR rationales and on I->R rationales, deltas to R*.
ExperimentReport label_informedness(const ConfigSuite& suite,
                                    std::span<const RationalizedInstance> test_set,
                                    Execution exec = Execution::parallel);

// R->O and IR->O on R*, with delta IR->O minus R->O on the second row.
ExperimentReport sufficiency_gap(const ConfigSuite& suite,
                                 std::span<const RationalizedInstance> test_set,
                                 Execution exec = Execution::parallel);

}  // namespace rassoc
