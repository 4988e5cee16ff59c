#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rassoc {

// Tie-corrected Kendall rank correlation (tau-b), O(n log n).
double kendall_tau(std::span<const double> a, std::span<const double> b);

// Cosine similarity; with `absolute` the entries are replaced by |.| first.
double cosine(std::span<const double> a, std::span<const double> b, bool absolute);

// |top-k(a) intersect top-k(b)|; ties go to the lower index. With `by_magnitude`
// the ranking uses |values|.
std::size_t topk_overlap(std::span<const double> a, std::span<const double> b, std::size_t k,
                         bool by_magnitude = false);
std::vector<std::size_t> topk_indices(std::span<const double> v, std::size_t k,
                                      bool by_magnitude = false);

// Jensen-Shannon divergence (natural log) between |v| / sum|v| and the uniform
// distribution over v's entries. Lies in [0, ln 2].
double jsd_uniform(std::span<const double> v);

// Per-instance comparison of one label and one rationale attribution vector.
struct AssociationRecord {
  std::string instance_id;
  double kendall_tau_raw = 0.0;
  double kendall_tau_abs = 0.0;
  double cosine_raw = 0.0;
  double cosine_abs = 0.0;
  std::size_t topk_overlap = 0;
  double jsd_label_uniform = 0.0;
  double jsd_rationale_uniform = 0.0;
  double l1_norm_label = 0.0;
  double l1_norm_rationale = 0.0;

  friend bool operator==(const AssociationRecord&, const AssociationRecord&) = default;
};

inline constexpr std::size_t kDefaultTopK = 5;

AssociationRecord associate(const std::string& id, std::span<const double> label,
                            std::span<const double> rationale, std::size_t k = kDefaultTopK);

// Fixed-width histogram over [lo, hi]; the last bin is closed on the right.
struct Histogram {
  std::string metric;
  double lo = 0.0;
  double hi = 0.0;
  double width = 0.0;
  std::vector<std::size_t> counts;

  Histogram() = default;
  Histogram(std::string name, double lo, double hi, double width);
  void add(double x);
  double bin_lo(std::size_t i) const { return lo + width * static_cast<double>(i); }
  double bin_hi(std::size_t i) const;
};

inline constexpr double kHistogramBinWidth = 0.05;

struct CorpusSummary {
  std::size_t instances = 0;
  std::size_t parse_failures = 0;
  std::size_t skipped = 0;  // parsed but excluded (e.g. empty rationale)
  std::map<std::string, double> means;
  std::map<std::string, double> medians;
  std::vector<Histogram> histograms;
  std::map<std::size_t, std::size_t> topk_counts;
};

// Means, medians and histograms over a corpus of records; throws MetricError
// when `records` is empty.
CorpusSummary summarize(std::span<const AssociationRecord> records, std::size_t parse_failures = 0,
                        std::size_t skipped = 0);

}  // namespace rassoc
