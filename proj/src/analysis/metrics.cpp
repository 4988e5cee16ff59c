#include "rassoc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "rassoc/errors.hpp"

namespace rassoc {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw MetricError(std::string(what) + ": non-finite entry");
  }
}

// Sum over runs of equal keys of t*(t-1)/2; `idx` must be sorted by `key`.
template <typename Eq>
std::int64_t tied_pairs(const std::vector<std::size_t>& idx, Eq&& same) {
  std::int64_t total = 0;
  std::int64_t run = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (same(idx[i - 1], idx[i])) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total + run * (run - 1) / 2;
}

// Merge sort of `idx` by b[.] counting strict inversions.
std::int64_t sort_count_swaps(std::vector<std::size_t>& idx, std::span<const double> b) {
  std::int64_t swaps = 0;
  std::vector<std::size_t> buf(idx.size());
  for (std::size_t width = 1; width < idx.size(); width *= 2) {
    for (std::size_t lo = 0; lo < idx.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, idx.size());
      const std::size_t hi = std::min(lo + 2 * width, idx.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (b[idx[j]] < b[idx[i]]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = idx[j++];
        } else {
          buf[k++] = idx[i++];
        }
      }
      while (i < mid) buf[k++] = idx[i++];
      while (j < hi) buf[k++] = idx[j++];
    }
    std::swap(idx, buf);
  }
  return swaps;
}

}  // namespace

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw MetricError("kendall_tau: length mismatch");
  if (a.size() < 2) throw MetricError("kendall_tau: need at least two entries");
  require_finite(a, "kendall_tau");
  require_finite(b, "kendall_tau");
  const std::size_t n = a.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    return a[i] < a[j] || (a[i] == a[j] && b[i] < b[j]);
  });
  const auto n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t ties_a = tied_pairs(idx, [&](std::size_t i, std::size_t j) { return a[i] == a[j]; });
  const std::int64_t ties_ab =
      tied_pairs(idx, [&](std::size_t i, std::size_t j) { return a[i] == a[j] && b[i] == b[j]; });
  const std::int64_t swaps = sort_count_swaps(idx, b);
  const std::int64_t ties_b = tied_pairs(idx, [&](std::size_t i, std::size_t j) { return b[i] == b[j]; });
  // concordant - discordant
  const std::int64_t numerator = n0 - ties_a - ties_b + ties_ab - 2 * swaps;
  if (n0 == ties_a || n0 == ties_b) throw MetricError("kendall_tau: constant input");
  const double tau = static_cast<double>(numerator) /
                     std::sqrt(static_cast<double>(n0 - ties_a) * static_cast<double>(n0 - ties_b));
  return std::clamp(tau, -1.0, 1.0);
}

double cosine(std::span<const double> a, std::span<const double> b, bool absolute) {
  if (a.size() != b.size()) throw MetricError("cosine: length mismatch");
  require_finite(a, "cosine");
  require_finite(b, "cosine");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = absolute ? std::abs(a[i]) : a[i];
    const double y = absolute ? std::abs(b[i]) : b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), absolute ? 0.0 : -1.0, 1.0);
}

std::vector<std::size_t> topk_indices(std::span<const double> v, std::size_t k, bool by_magnitude) {
  if (k == 0) throw MetricError("top-k: k must be positive");
  if (k > v.size()) throw MetricError("top-k: k exceeds vector length");
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto key = [&](std::size_t i) { return by_magnitude ? std::abs(v[i]) : v[i]; };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return key(i) > key(j); });
  idx.resize(k);
  return idx;
}

std::size_t topk_overlap(std::span<const double> a, std::span<const double> b, std::size_t k,
                         bool by_magnitude) {
  if (a.size() != b.size()) throw MetricError("top-k: length mismatch");
  auto ta = topk_indices(a, k, by_magnitude);
  auto tb = topk_indices(b, k, by_magnitude);
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  std::vector<std::size_t> common;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
  return common.size();
}

double jsd_uniform(std::span<const double> v) {
  require_finite(v, "jsd_uniform");
  double total = 0.0;
  for (double x : v) total += std::abs(x);
  if (total == 0.0) throw ZeroVector("jsd of a zero vector");
  const double u = 1.0 / static_cast<double>(v.size());
  double kl_p = 0.0, kl_u = 0.0;
  for (double x : v) {
    const double p = std::abs(x) / total;
    const double m = 0.5 * (p + u);
    if (p > 0.0) kl_p += p * std::log(p / m);
    kl_u += u * std::log(u / m);
  }
  return std::clamp(0.5 * (kl_p + kl_u), 0.0, std::log(2.0));
}

AssociationRecord associate(const std::string& id, std::span<const double> label,
                            std::span<const double> rationale, std::size_t k) {
  if (label.size() != rationale.size()) throw MetricError("associate: length mismatch");
  std::vector<double> abs_l(label.size()), abs_r(rationale.size());
  double l1_l = 0.0, l1_r = 0.0;
  for (std::size_t i = 0; i < label.size(); ++i) {
    abs_l[i] = std::abs(label[i]);
    abs_r[i] = std::abs(rationale[i]);
    l1_l += abs_l[i];
    l1_r += abs_r[i];
  }
  AssociationRecord r;
  r.instance_id = id;
  r.kendall_tau_raw = kendall_tau(label, rationale);
  r.kendall_tau_abs = kendall_tau(abs_l, abs_r);
  r.cosine_raw = cosine(label, rationale, false);
  r.cosine_abs = cosine(label, rationale, true);
  r.topk_overlap = topk_overlap(label, rationale, std::min(k, label.size()));
  r.jsd_label_uniform = jsd_uniform(label);
  r.jsd_rationale_uniform = jsd_uniform(rationale);
  r.l1_norm_label = l1_l;
  r.l1_norm_rationale = l1_r;
  return r;
}

Histogram::Histogram(std::string name, double lo_, double hi_, double width_)
    : metric(std::move(name)), lo(lo_), hi(hi_), width(width_) {
  if (!(hi > lo) || !(width > 0.0)) throw MetricError("histogram: invalid range");
  const auto bins = static_cast<std::size_t>(std::ceil((hi - lo) / width - 1e-9));
  counts.assign(std::max<std::size_t>(bins, 1), 0);
}

void Histogram::add(double x) {
  if (!std::isfinite(x)) throw MetricError("histogram: non-finite value");
  const double pos = std::floor((x - lo) / width + 1e-9);
  const auto last = static_cast<double>(counts.size() - 1);
  counts[static_cast<std::size_t>(std::clamp(pos, 0.0, last))] += 1;
}

double Histogram::bin_hi(std::size_t i) const {
  return std::min(hi, lo + width * static_cast<double>(i + 1));
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CorpusSummary summarize(std::span<const AssociationRecord> records, std::size_t parse_failures,
                        std::size_t skipped) {
  if (records.empty()) throw MetricError("summarize: no records");
  struct Field {
    const char* name;
    double AssociationRecord::*member;
    double lo, hi;
  };
  const double ln2 = std::log(2.0);
  const Field fields[] = {
      {"kendall_tau_raw", &AssociationRecord::kendall_tau_raw, -1.0, 1.0},
      {"kendall_tau_abs", &AssociationRecord::kendall_tau_abs, -1.0, 1.0},
      {"cosine_raw", &AssociationRecord::cosine_raw, -1.0, 1.0},
      {"cosine_abs", &AssociationRecord::cosine_abs, 0.0, 1.0},
      {"jsd_label_uniform", &AssociationRecord::jsd_label_uniform, 0.0, ln2},
      {"jsd_rationale_uniform", &AssociationRecord::jsd_rationale_uniform, 0.0, ln2},
  };
  CorpusSummary out;
  out.instances = records.size();
  out.parse_failures = parse_failures;
  out.skipped = skipped;
  const double n = static_cast<double>(records.size());
  for (const auto& f : fields) {
    Histogram h(f.name, f.lo, f.hi, kHistogramBinWidth);
    std::vector<double> values;
    values.reserve(records.size());
    double sum = 0.0;
    for (const auto& r : records) {
      const double x = r.*(f.member);
      values.push_back(x);
      sum += x;
      h.add(x);
    }
    out.means[f.name] = sum / n;
    out.medians[f.name] = median(std::move(values));
    out.histograms.push_back(std::move(h));
  }
  double l1_l = 0.0, l1_r = 0.0, topk = 0.0;
  std::vector<double> tk;
  for (const auto& r : records) {
    l1_l += r.l1_norm_label;
    l1_r += r.l1_norm_rationale;
    topk += static_cast<double>(r.topk_overlap);
    tk.push_back(static_cast<double>(r.topk_overlap));
    out.topk_counts[r.topk_overlap] += 1;
  }
  out.means["l1_norm_label"] = l1_l / n;
  out.means["l1_norm_rationale"] = l1_r / n;
  out.means["topk_overlap"] = topk / n;
  out.medians["topk_overlap"] = median(std::move(tk));
  return out;
}

}  // namespace rassoc
