#include <gtest/gtest.h>

#include "rassoc/errors.hpp"
#include "rassoc/harness.hpp"
#include "support.hpp"

using namespace rassoc;
using namespace rassoc::testing;

namespace {

ConfigSuite quick_suite() {
  ConfigSuite suite;
  for (Mode m : kAllModes) suite.models.emplace(m, quick_model(m));
  return suite;
}

}  // namespace

TEST(ComputeGap, Examples) {
  EXPECT_DOUBLE_EQ(compute_gap(85.26, 90.53), 5.27);
  EXPECT_DOUBLE_EQ(compute_gap(97.74, 90.52), -7.22);
  EXPECT_DOUBLE_EQ(compute_gap(97.74, 86.25), -11.49);
  EXPECT_EQ(compute_gap(42.5, 42.5), 0.0);
  EXPECT_THROW(compute_gap(-1.0, 50.0), MetricError);
  EXPECT_THROW(compute_gap(50.0, 100.5), MetricError);
}

TEST(ToPercent, TwoDecimals) {
  EXPECT_DOUBLE_EQ(to_percent(0.5), 50.0);
  EXPECT_DOUBLE_EQ(to_percent(1.0 / 3.0), 33.33);
  EXPECT_DOUBLE_EQ(to_percent(0.97744), 97.74);
}

TEST(TrainSuite, DeterministicAndOnSharedSplits) {
  TrainConfig cfg;
  cfg.max_epochs = 2;
  cfg.patience = 2;
  const auto data = toy_data(0.5, 60, 4);
  const Mode modes[] = {Mode::r_o, Mode::ir_o};
  const auto a = train_suite(data, cfg, modes);
  const auto b = train_suite(data, cfg, modes, 0.8, Execution::serial);
  EXPECT_EQ(a.dev_accuracy, b.dev_accuracy);
  EXPECT_EQ(a.model(Mode::r_o), b.model(Mode::r_o));
  EXPECT_EQ(a.train_set.size(), 48u);
  EXPECT_EQ(a.dev_set.size(), 12u);
  EXPECT_THROW(a.model(Mode::i_or), StateError);
}

TEST(EvaluateRationales, ParseFailuresAreExcludedAndCounted) {
  const auto data = toy_data(0.5, 10, 8);
  std::vector<std::optional<Tokens>> rs;
  for (const auto& d : data) rs.emplace_back(d.gold_rationale);
  rs[0].reset();
  rs[3].reset();
  const auto row = evaluate_rationales(quick_model(Mode::r_o), data, rs, "x");
  EXPECT_EQ(row.parse_failures, 2u);
  EXPECT_EQ(row.evaluated, 8u);
  EXPECT_GE(row.accuracy, 0.0);
  EXPECT_LE(row.accuracy, 100.0);
  EXPECT_THROW(evaluate_rationales(quick_model(Mode::i_or), data, rs, "x"), StateError);
}

TEST(EvaluateRationales, IdenticalSourcesGiveIdenticalRows) {
  const auto data = toy_data(0.5, 30, 9);
  std::vector<std::optional<Tokens>> rs;
  for (const auto& d : data) rs.emplace_back(d.gold_rationale);
  const auto a = evaluate_rationales(quick_model(Mode::r_o), data, rs, "R*");
  const auto b = evaluate_rationales(quick_model(Mode::r_o), data, rs, "R*");
  EXPECT_EQ(a, b);
  EXPECT_EQ(compute_gap(a.accuracy, b.accuracy), 0.0);
}

TEST(GenerateRationales, NeedsAGenerator) {
  const auto data = toy_data(0.5, 3, 9);
  EXPECT_THROW(generate_rationales(quick_model(Mode::r_o), data), StateError);
  EXPECT_EQ(generate_rationales(quick_model(Mode::i_r), data).size(), 3u);
}

TEST(LabelInformedness, ShapeAndDeltas) {
  const auto suite = quick_suite();
  const auto test = toy_data(0.5, 40, 10);
  const auto rep = label_informedness(suite, test);
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.rows[0].config, "R*");
  EXPECT_FALSE(rep.rows[0].delta.has_value());
  for (const char* name : {"i-or rationales", "i-r rationales"}) {
    const auto& r = rep.row(name);
    ASSERT_TRUE(r.delta.has_value());
    EXPECT_DOUBLE_EQ(*r.delta, compute_gap(rep.rows[0].accuracy, r.accuracy));
  }
  EXPECT_THROW(rep.row("nope"), DataError);
  EXPECT_EQ(rep, label_informedness(suite, test, Execution::serial));
}

TEST(SufficiencyGap, ShapeAndDelta) {
  const auto suite = quick_suite();
  const auto test = toy_data(0.5, 40, 11);
  const auto rep = sufficiency_gap(suite, test);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_EQ(rep.rows[0].config, "r-o");
  EXPECT_EQ(rep.rows[1].config, "ir-o");
  ASSERT_TRUE(rep.rows[1].delta.has_value());
  EXPECT_DOUBLE_EQ(*rep.rows[1].delta, compute_gap(rep.rows[0].accuracy, rep.rows[1].accuracy));
  EXPECT_THROW(sufficiency_gap(suite, {}), DataError);
}
