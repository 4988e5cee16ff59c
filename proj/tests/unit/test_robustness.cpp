#include <gtest/gtest.h>

#include <random>

#include "rassoc/errors.hpp"
#include "rassoc/robustness.hpp"
#include "support.hpp"

using namespace rassoc;
using namespace rassoc::testing;

namespace {

NoiseConfig small_grid() {
  NoiseConfig cfg;
  cfg.sigma2_grid = {0, 10, 50};
  cfg.base_seed = 3;
  return cfg;
}

// Counts calls and refuses concurrency, to check the sweep honours it.
class CountingTarget final : public MeasurementTarget {
 public:
  explicit CountingTarget(const ModelParams& p) : inner_(p) {}
  TargetCapabilities capabilities() const override { return inner_.capabilities(); }
  Tokens decode(const Tokens& s, const std::optional<NoiseSpec>& n) override {
    ++calls;
    return inner_.decode(s, n);
  }
  SpanAttributions attribute(const Tokens& s, SpanTag t) override { return inner_.attribute(s, t); }
  std::string describe() const override { return "counting"; }
  std::size_t calls = 0;

 private:
  BuiltinTarget inner_;
};

}  // namespace

TEST(NoiseConfig, Validation) {
  NoiseConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.sigma2_grid = {5, 10};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.sigma2_grid = {0, 10, 10};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.sigma2_grid = {0, -1};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.sigma2_grid = {0};
  cfg.samples_per_instance = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_EQ(NoiseConfig{}.sigma2_grid, (std::vector<double>{0, 5, 10, 15, 20, 30, 50}));
}

TEST(Perturb, ZeroVarianceIsIdentity) {
  Matrix<double> x(3, 4);
  for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = 0.1 * static_cast<double>(i) - 0.3;
  EXPECT_EQ(perturb(x, 0.0, 99), x);
}

TEST(Perturb, DeterministicGivenSeed) {
  const Matrix<double> x(5, 8, 1.0);
  EXPECT_EQ(perturb(x, 2.0, 7), perturb(x, 2.0, 7));
  EXPECT_NE(perturb(x, 2.0, 7), perturb(x, 2.0, 8));
  EXPECT_THROW(perturb(x, -1.0, 7), ConfigError);
}

TEST(Perturb, SampleVarianceMatches) {
  const Matrix<double> x(1000, 100, 0.5);
  const auto y = perturb(x, 4.0, 11);
  double mean = 0.0;
  for (std::size_t i = 0; i < y.data.size(); ++i) mean += y.data[i] - x.data[i];
  mean /= static_cast<double>(y.data.size());
  double var = 0.0;
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    const double d = y.data[i] - x.data[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(y.data.size() - 1);
  EXPECT_GE(var, 3.9);
  EXPECT_LE(var, 4.1);
}

TEST(InstanceSeed, DistinctAcrossInputs) {
  const auto a = instance_seed(1, "x", 0);
  EXPECT_EQ(a, instance_seed(1, "x", 0));
  EXPECT_NE(a, instance_seed(2, "x", 0));
  EXPECT_NE(a, instance_seed(1, "y", 0));
  EXPECT_NE(a, instance_seed(1, "x", 1));
  EXPECT_NE(a, instance_seed(1, "x", 0, 1));
}

TEST(FlipStats, Examples) {
  const std::vector<Tokens> orig(10, Tokens{"have_fun"});
  EXPECT_EQ(flip_stats(orig, orig, orig).flip_rate, 0.0);
  std::vector<Tokens> pert = orig;
  pert[0] = {"banana"};
  EXPECT_EQ(flip_stats(orig, pert, orig).flips, 1u);
  pert[1] = pert[2] = {"tasty"};
  const auto s = flip_stats(orig, pert, orig);
  EXPECT_DOUBLE_EQ(s.flip_rate, 0.30);
  EXPECT_DOUBLE_EQ(s.accuracy, 0.70);
  EXPECT_THROW(flip_stats(orig, std::vector<Tokens>(3), orig), AlignError);
}

TEST(Classify, Thresholds) {
  const StabilityThresholds t;
  EXPECT_EQ(classify(0.02, 30, t), StabilityCase::case3);
  EXPECT_EQ(classify(0.0, 0.0, t), StabilityCase::case1);
  EXPECT_EQ(classify(0.5, 30, t), StabilityCase::case2);
  EXPECT_EQ(classify(0.5, 2, t), StabilityCase::case4);
  EXPECT_EQ(classify(0.10, 10, t), StabilityCase::case1);
  for (auto c : {StabilityCase::case1, StabilityCase::case2, StabilityCase::case3, StabilityCase::case4}) {
    EXPECT_EQ(parse_stability_case(to_string(c)), c);
  }
  EXPECT_THROW(parse_stability_case("Case5"), ConfigError);
}

TEST(ReadOutput, ParseFailureKeepsRawLabel) {
  const auto ok = read_output(split_tokens("low explanation: low is the weight of x </s>"));
  EXPECT_FALSE(ok.parse_failed);
  EXPECT_EQ(ok.label, Tokens{"low"});
  const auto bad = read_output(split_tokens("low low high </s> extra"));
  EXPECT_TRUE(bad.parse_failed);
  EXPECT_EQ(bad.label, (Tokens{"low", "low", "high"}));
  EXPECT_TRUE(bad.rationale.empty());
}

TEST(MeaningProxy, RequiresTrainedEvaluator) {
  const auto data = toy_data(0.5, 4, 2);
  std::vector<Tokens> rs;
  for (const auto& d : data) rs.push_back(d.gold_rationale);
  EXPECT_THROW(meaning_proxy(random_model(1), rs, data), StateError);
  EXPECT_THROW(meaning_proxy(quick_model(Mode::i_or), rs, data), StateError);
  EXPECT_NO_THROW(meaning_proxy(quick_model(Mode::r_o), rs, data));
}

TEST(MeaningProxy, RandomRationalesSitNearChance) {
  const auto data = toy_data(0.5, 600, 19);
  const Vocab v = SyntheticWorld::standard().vocab();
  std::mt19937_64 rng(6);
  std::vector<Tokens> rs;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Tokens r;
    const std::size_t len = 3 + rng() % 5;
    for (std::size_t k = 0; k < len; ++k) r.push_back(v.token(4 + static_cast<int>(rng() % (v.size() - 4))));
    rs.push_back(r);
  }
  const double acc = meaning_proxy(quick_model(Mode::r_o), rs, data);
  EXPECT_NEAR(acc, 1.0 / 3.0, 0.10);
}

TEST(Sweep, ZeroLevelIsCaseOneAndDeterministic) {
  BuiltinTarget target(quick_model(Mode::i_or));
  const auto data = toy_data(0.5, 30, 23);
  const auto& eval = quick_model(Mode::r_o);
  const auto a = sweep_and_classify(target, eval, data, small_grid(), {});
  const auto b = sweep_and_classify(target, eval, data, small_grid(), {});
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.rows.size(), 3u);
  EXPECT_EQ(a.rows[0].flip_rate, 0.0);
  EXPECT_EQ(a.rows[0].stability, StabilityCase::case1);
  EXPECT_EQ(a.rows[0].proxy_accuracy, a.proxy_accuracy_clean);
  EXPECT_EQ(a.instances, 30u);
  EXPECT_EQ(a.target, "builtin");
  EXPECT_TRUE(a.target_supports_noise);
  for (const auto& r : a.rows) {
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
    EXPECT_GE(r.flip_rate, 0.0);
    EXPECT_LE(r.flip_rate, 1.0);
    EXPECT_GE(r.proxy_accuracy, 0.0);
    EXPECT_LE(r.proxy_accuracy, 1.0);
  }
}

TEST(Sweep, SerialEqualsParallel) {
  BuiltinTarget target(quick_model(Mode::i_or));
  const auto data = toy_data(0.5, 20, 29);
  const auto& eval = quick_model(Mode::r_o);
  EXPECT_EQ(sweep_and_classify(target, eval, data, small_grid(), {}, Execution::serial),
            sweep_and_classify(target, eval, data, small_grid(), {}, Execution::parallel));
}

TEST(Sweep, SamplesMultiplyDecodes) {
  CountingTarget target(quick_model(Mode::i_or));
  const auto data = toy_data(0.5, 5, 31);
  NoiseConfig cfg = small_grid();
  cfg.samples_per_instance = 2;
  sweep_and_classify(target, quick_model(Mode::r_o), data, cfg, {});
  EXPECT_EQ(target.calls, 5u * 2u * 3u);
}

TEST(Sweep, Errors) {
  BuiltinTarget target(quick_model(Mode::i_or));
  const auto data = toy_data(0.5, 5, 31);
  NoiseConfig bad;
  bad.sigma2_grid = {5, 10};
  EXPECT_THROW(sweep_and_classify(target, quick_model(Mode::r_o), data, bad, {}), ConfigError);
  EXPECT_THROW(sweep_and_classify(target, random_model(2), data, small_grid(), {}), StateError);
  EXPECT_THROW(sweep_and_classify(target, quick_model(Mode::r_o), {}, small_grid(), {}), DataError);
}

TEST(Spearman, Basics) {
  EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0);
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 1, 2, 3}), 0.9487, 1e-4);
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 1}), MetricError);
}
