#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rassoc/errors.hpp"
#include "rassoc/metrics.hpp"

using namespace rassoc;

namespace {

using Vec = std::vector<double>;

// O(n^2) tau-b by direct pair counting.
double brute_tau(const Vec& a, const Vec& b) {
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0, pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      ++pairs;
      const double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0) ++ties_a;
      if (db == 0) ++ties_b;
      if (da == 0 || db == 0) continue;
      if ((da > 0) == (db > 0)) ++concordant;
      else ++discordant;
    }
  }
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(pairs - ties_a) * static_cast<double>(pairs - ties_b));
}

Vec random_vector(std::mt19937_64& rng, std::size_t n, bool ties) {
  Vec v(n);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> small(-2, 2);
  for (auto& x : v) x = ties ? small(rng) : u(rng);
  return v;
}

}  // namespace

TEST(Kendall, Examples) {
  EXPECT_DOUBLE_EQ(kendall_tau(Vec{1, 2, 3, 4}, Vec{1, 2, 3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(Vec{1, 2, 3}, Vec{3, 2, 1}), -1.0);
  EXPECT_NEAR(kendall_tau(Vec{1, 1, 2}, Vec{1, 2, 3}), 0.8165, 1e-4);
}

TEST(Kendall, Errors) {
  EXPECT_THROW(kendall_tau(Vec{1}, Vec{1}), MetricError);
  EXPECT_THROW(kendall_tau(Vec{1, 2}, Vec{1, 2, 3}), MetricError);
  EXPECT_THROW(kendall_tau(Vec{1, 1, 1}, Vec{1, 2, 3}), MetricError);
}

TEST(Kendall, MatchesBruteForce) {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const bool ties = trial % 2 == 1;
    const std::size_t n = 2 + rng() % 49;
    const Vec a = random_vector(rng, n, ties), b = random_vector(rng, n, ties);
    double expected;
    try {
      expected = brute_tau(a, b);
    } catch (...) {
      continue;
    }
    if (!std::isfinite(expected)) {
      EXPECT_THROW(kendall_tau(a, b), MetricError);
      continue;
    }
    EXPECT_NEAR(kendall_tau(a, b), expected, 1e-12) << "trial " << trial;
    ++checked;
  }
  EXPECT_GT(checked, 950);
}

TEST(Kendall, Properties) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec a = random_vector(rng, 20, trial % 2), b = random_vector(rng, 20, false);
    EXPECT_DOUBLE_EQ(kendall_tau(a, b), kendall_tau(b, a));
    EXPECT_DOUBLE_EQ(kendall_tau(b, b), 1.0);
    Vec mono(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) mono[i] = std::exp(3 * b[i]) + 7;
    EXPECT_DOUBLE_EQ(kendall_tau(a, b), kendall_tau(a, mono));
    const double t = kendall_tau(a, b);
    EXPECT_GE(t, -1.0);
    EXPECT_LE(t, 1.0);
  }
}

TEST(Cosine, Examples) {
  EXPECT_NEAR(cosine(Vec{1, 2}, Vec{2, 4}, false), 1.0, 1e-15);
  EXPECT_EQ(cosine(Vec{1, 0}, Vec{0, 1}, false), 0.0);
  EXPECT_NEAR(cosine(Vec{1, -1}, Vec{-1, 1}, false), -1.0, 1e-15);
  EXPECT_NEAR(cosine(Vec{1, -1}, Vec{-1, 1}, true), 1.0, 1e-15);
  EXPECT_THROW(cosine(Vec{0, 0}, Vec{1, 1}, false), ZeroVector);
}

TEST(Cosine, AbsoluteDominatesRawAndScales) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec a = random_vector(rng, 2 + rng() % 30, false);
    const Vec b = random_vector(rng, a.size(), false);
    const double raw = cosine(a, b, false), abs = cosine(a, b, true);
    EXPECT_GE(abs + 1e-15, std::fabs(raw));
    EXPECT_GE(abs, 0.0);
    EXPECT_LE(abs, 1.0 + 1e-15);
    Vec neg = a;
    for (auto& x : neg) x *= -2.5;
    EXPECT_NEAR(cosine(neg, b, false), -raw, 1e-12);
  }
}

TEST(TopK, Examples) {
  const Vec v{5, 1, 4, 2, 3, 0};
  EXPECT_EQ(topk_overlap(v, v, 5), 5u);
  EXPECT_EQ(topk_overlap(Vec{9, 8, 7, 0, 0, 0}, Vec{0, 0, 0, 9, 8, 7}, 3), 0u);
  EXPECT_EQ(topk_overlap(Vec{5, 4, 3, 2}, Vec{2, 3, 4, 5}, 2), 0u);
  EXPECT_THROW(topk_overlap(v, v, 0), MetricError);
}

TEST(TopK, TiesGoToLowerIndexAndMagnitudeIsConfigurable) {
  EXPECT_EQ(topk_indices(Vec{1, 1, 1, 1}, 2), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(topk_indices(Vec{-9, 1, 2}, 1), (std::vector<std::size_t>{2}));
  EXPECT_EQ(topk_indices(Vec{-9, 1, 2}, 1, true), (std::vector<std::size_t>{0}));
}

TEST(Jsd, Examples) {
  EXPECT_NEAR(jsd_uniform(Vec{1, 1, 1, 1}), 0.0, 1e-15);
  EXPECT_NEAR(jsd_uniform(Vec{1, 0}), 0.2158, 1e-4);
  EXPECT_NEAR(jsd_uniform(Vec{-1, 0}), 0.2158, 1e-4);
  EXPECT_THROW(jsd_uniform(Vec{0, 0}), ZeroVector);
}

TEST(Jsd, BoundedByLn2) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    Vec v = random_vector(rng, 1 + rng() % 60, trial % 3 == 0);
    v[0] = 1.0;
    const double j = jsd_uniform(v);
    EXPECT_GE(j, 0.0);
    EXPECT_LE(j, 0.6932);
  }
  Vec spike(100000, 0.0);
  spike[0] = 1.0;
  EXPECT_LE(jsd_uniform(spike), std::log(2.0));
}

TEST(Associate, ScaleInvariance) {
  std::mt19937_64 rng(3);
  const Vec a = random_vector(rng, 12, false), b = random_vector(rng, 12, false);
  Vec a2 = a;
  for (auto& x : a2) x *= 0.01;
  const auto r1 = associate("x", a, b), r2 = associate("x", a2, b);
  EXPECT_DOUBLE_EQ(r1.kendall_tau_raw, r2.kendall_tau_raw);
  EXPECT_NEAR(r1.cosine_raw, r2.cosine_raw, 1e-14);
  EXPECT_NEAR(r1.cosine_abs, r2.cosine_abs, 1e-14);
  EXPECT_EQ(r1.topk_overlap, r2.topk_overlap);
  EXPECT_NEAR(r1.jsd_label_uniform, r2.jsd_label_uniform, 1e-14);
  EXPECT_LE(r1.topk_overlap, kDefaultTopK);
}

TEST(Summarize, SingleRecordIsItsOwnMean) {
  AssociationRecord r;
  r.instance_id = "a";
  r.kendall_tau_raw = 0.25;
  r.cosine_abs = 0.5;
  r.l1_norm_label = 3.0;
  r.l1_norm_rationale = 4.0;
  r.topk_overlap = 2;
  const auto s = summarize(std::vector<AssociationRecord>{r});
  EXPECT_EQ(s.means.at("kendall_tau_raw"), 0.25);
  EXPECT_EQ(s.means.at("cosine_abs"), 0.5);
  EXPECT_EQ(s.means.at("l1_norm_label"), 3.0);
  EXPECT_EQ(s.means.at("l1_norm_rationale"), 4.0);
  EXPECT_EQ(s.topk_counts.at(2), 1u);
}

TEST(Summarize, ZeroTauLandsInZeroBin) {
  std::vector<AssociationRecord> recs(7);
  const auto s = summarize(recs, 2, 1);
  EXPECT_EQ(s.parse_failures, 2u);
  EXPECT_EQ(s.skipped, 1u);
  for (const auto& h : s.histograms) {
    if (h.metric != "kendall_tau_raw") continue;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      EXPECT_EQ(h.counts[i], (h.bin_lo(i) <= 0.0 && 0.0 < h.bin_hi(i)) ? 7u : 0u);
    }
  }
  EXPECT_THROW(summarize(std::vector<AssociationRecord>{}), MetricError);
}

TEST(Histogram, BinsCoverTheRange) {
  Histogram h("x", 0.0, std::log(2.0), kHistogramBinWidth);
  h.add(0.0);
  h.add(std::log(2.0));
  h.add(0.05);
  EXPECT_EQ(h.counts.front(), 1u);
  EXPECT_EQ(h.counts.back(), 1u);
  EXPECT_EQ(h.counts[1], 1u);
  EXPECT_DOUBLE_EQ(h.bin_hi(h.counts.size() - 1), std::log(2.0));
}
