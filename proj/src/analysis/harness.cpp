#include "rassoc/harness.hpp"

#include <cmath>

#include "rassoc/core/format.hpp"
#include "rassoc/core/taskgen.hpp"
#include "rassoc/errors.hpp"
#include "rassoc/model/decode.hpp"

namespace rassoc {

const ModelParams& ConfigSuite::model(Mode m) const {
  auto it = models.find(m);
  if (it == models.end()) throw StateError("suite has no " + std::string(to_string(m)) + " model");
  return it->second;
}

ConfigSuite train_suite(const Dataset& data, const TrainConfig& cfg, std::span<const Mode> modes,
                        double train_fraction, Execution exec) {
  for (const auto& inst : data) inst.validate();
  ConfigSuite suite;
  std::tie(suite.train_set, suite.dev_set) = split_dataset(data, train_fraction);
  auto results = map_indices<TrainResult>(modes.size(), exec, [&](std::size_t i) {
    return train(suite.train_set, suite.dev_set, modes[i], cfg);
  });
  for (std::size_t i = 0; i < modes.size(); ++i) {
    suite.dev_accuracy[modes[i]] = results[i].dev_accuracy;
    suite.models.emplace(modes[i], std::move(results[i].params));
  }
  return suite;
}

const ReportRow& ExperimentReport::row(const std::string& config) const {
  for (const auto& r : rows) {
    if (r.config == config) return r;
  }
  throw DataError("report " + name + " has no row " + config);
}

double compute_gap(double a, double b) {
  for (double x : {a, b}) {
    if (!(x >= 0.0 && x <= 100.0)) throw MetricError("accuracy outside [0, 100]");
  }
  return static_cast<double>(std::llround(b * 100.0) - std::llround(a * 100.0)) / 100.0;
}

double to_percent(double fraction) {
  return static_cast<double>(std::llround(fraction * 10000.0)) / 100.0;
}

ReportRow evaluate_rationales(const ModelParams& r_o, std::span<const RationalizedInstance> data,
                              std::span<const std::optional<Tokens>> rationales,
                              const std::string& config, Execution exec) {
  if (r_o.mode != Mode::r_o || !r_o.trained) throw StateError("needs a trained R->O model");
  if (data.size() != rationales.size()) throw AlignError("rationales and instances differ");
  const Vocab vocab = r_o.vocab();
  auto hits = map_indices<int>(data.size(), exec, [&](std::size_t i) {
    if (!rationales[i]) return -1;
    const Tokens src = source_tokens(data[i], Mode::r_o, &*rationales[i]);
    const ForwardTrace trace = greedy_decode(r_o, vocab, src);
    return prediction_correct(data[i], Mode::r_o, vocab.decode(trace.decoded)) ? 1 : 0;
  });
  ReportRow row;
  row.config = config;
  std::size_t correct = 0;
  for (int h : hits) {
    if (h < 0) {
      ++row.parse_failures;
      continue;
    }
    ++row.evaluated;
    correct += static_cast<std::size_t>(h);
  }
  if (row.evaluated == 0) throw DataError("no parseable rationales for " + config);
  row.accuracy = to_percent(static_cast<double>(correct) / static_cast<double>(row.evaluated));
  return row;
}

std::vector<std::optional<Tokens>> generate_rationales(const ModelParams& generator,
                                                       std::span<const RationalizedInstance> data,
                                                       Execution exec) {
  if (!generator.mode || (*generator.mode != Mode::i_or && *generator.mode != Mode::i_r)) {
    throw StateError("rationale generator must be an I->OR or I->R model");
  }
  const Mode mode = *generator.mode;
  const Vocab vocab = generator.vocab();
  return map_indices<std::optional<Tokens>>(data.size(), exec, [&](std::size_t i) {
    const ForwardTrace trace = greedy_decode(generator, vocab, source_tokens(data[i], mode));
    try {
      return std::optional<Tokens>(parse_for_mode(vocab.decode(trace.decoded), mode).rationale_tokens);
    } catch (const MissingSeparator&) {
      return std::optional<Tokens>();
    } catch (const EmptyLabel&) {
      return std::optional<Tokens>();
    }
  });
}

ExperimentReport label_informedness(const ConfigSuite& suite,
                                    std::span<const RationalizedInstance> test_set,
                                    Execution exec) {
  const ModelParams& r_o = suite.model(Mode::r_o);
  std::vector<std::optional<Tokens>> gold;
  for (const auto& inst : test_set) gold.emplace_back(inst.gold_rationale);

  ExperimentReport report;
  report.name = "label_informedness";
  report.rows.push_back(evaluate_rationales(r_o, test_set, gold, "R*", exec));
  for (Mode m : {Mode::i_or, Mode::i_r}) {
    const auto generated = generate_rationales(suite.model(m), test_set, exec);
    ReportRow row = evaluate_rationales(r_o, test_set, generated,
                                        std::string(to_string(m)) + " rationales", exec);
    row.delta = compute_gap(report.rows.front().accuracy, row.accuracy);
    report.rows.push_back(row);
  }
  return report;
}

ExperimentReport sufficiency_gap(const ConfigSuite& suite,
                                 std::span<const RationalizedInstance> test_set, Execution exec) {
  if (test_set.empty()) throw DataError("empty test set");
  ExperimentReport report;
  report.name = "sufficiency_gap";
  for (Mode m : {Mode::r_o, Mode::ir_o}) {
    ReportRow row;
    row.config = std::string(to_string(m));
    row.evaluated = test_set.size();
    row.accuracy = to_percent(evaluate_accuracy(suite.model(m), test_set, m, exec));
    report.rows.push_back(row);
  }
  report.rows[1].delta = compute_gap(report.rows[0].accuracy, report.rows[1].accuracy);
  return report;
}

}  // namespace rassoc
