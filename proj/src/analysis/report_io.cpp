#include "rassoc/report_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "rassoc/errors.hpp"

namespace rassoc {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string format_fixed2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::size_t parse_count(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s[0] == '-' || end != s.c_str() + s.size() || errno == ERANGE) {
    throw DataError("bad count '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError("csv has no column '" + name + "'");
}

void write_csv(std::ostream& os, const CsvTable& table) {
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].find_first_of(",\n\r") != std::string::npos) {
        throw DataError("csv field contains a separator: " + fields[i]);
      }
      if (i) os << ',';
      os << fields[i];
    }
    os << '\n';
  };
  for (const auto& c : table.comments) os << "# " << c << '\n';
  line(table.header);
  for (const auto& r : table.rows) {
    if (r.size() != table.header.size()) throw DataError("csv row width differs from header");
    line(r);
  }
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string c = line.substr(1);
      if (!c.empty() && c[0] == ' ') c.erase(0, 1);
      t.comments.push_back(c);
      continue;
    }
    auto fields = split_fields(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) throw DataError("ragged csv row: " + line);
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) throw DataError("csv has no header");
  return t;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw DataError("bad number '" + s + "'");
  }
  return x;
}

CsvTable sweep_table(const NoiseSweepReport& report) {
  CsvTable t;
  t.header = {"sigma2", "accuracy", "flip_rate", "proxy_accuracy", "proxy_accuracy_rstar", "case"};
  for (const auto& r : report.rows) {
    t.rows.push_back({format_double(r.sigma2), format_double(r.accuracy),
                      format_double(r.flip_rate), format_double(r.proxy_accuracy),
                      format_double(report.proxy_accuracy_rstar),
                      std::string(to_string(r.stability))});
  }
  return t;
}

std::vector<SweepRow> sweep_rows(const CsvTable& table) {
  const std::size_t c_s = table.column("sigma2"), c_a = table.column("accuracy"),
                    c_f = table.column("flip_rate"), c_p = table.column("proxy_accuracy"),
                    c_c = table.column("case");
  std::vector<SweepRow> out;
  for (const auto& r : table.rows) {
    SweepRow row;
    row.sigma2 = parse_double(r[c_s]);
    row.accuracy = parse_double(r[c_a]);
    row.flip_rate = parse_double(r[c_f]);
    row.proxy_accuracy = parse_double(r[c_p]);
    row.stability = parse_stability_case(r[c_c]);
    out.push_back(row);
  }
  return out;
}

CsvTable association_table(std::span<const AssociationRecord> records) {
  CsvTable t;
  t.header = {"instance_id",       "kendall_tau_raw",       "kendall_tau_abs", "cosine_raw",
              "cosine_abs",        "topk_overlap",          "jsd_label_uniform",
              "jsd_rationale_uniform", "l1_norm_label",     "l1_norm_rationale"};
  for (const auto& r : records) {
    t.rows.push_back({r.instance_id, format_double(r.kendall_tau_raw),
                      format_double(r.kendall_tau_abs), format_double(r.cosine_raw),
                      format_double(r.cosine_abs), std::to_string(r.topk_overlap),
                      format_double(r.jsd_label_uniform), format_double(r.jsd_rationale_uniform),
                      format_double(r.l1_norm_label), format_double(r.l1_norm_rationale)});
  }
  return t;
}

std::vector<AssociationRecord> association_records(const CsvTable& table) {
  std::vector<AssociationRecord> out;
  auto col = [&](const char* name) { return table.column(name); };
  const std::size_t c_id = col("instance_id"), c_tr = col("kendall_tau_raw"),
                    c_ta = col("kendall_tau_abs"), c_cr = col("cosine_raw"),
                    c_ca = col("cosine_abs"), c_k = col("topk_overlap"),
                    c_jl = col("jsd_label_uniform"), c_jr = col("jsd_rationale_uniform"),
                    c_ll = col("l1_norm_label"), c_lr = col("l1_norm_rationale");
  for (const auto& r : table.rows) {
    AssociationRecord a;
    a.instance_id = r[c_id];
    a.kendall_tau_raw = parse_double(r[c_tr]);
    a.kendall_tau_abs = parse_double(r[c_ta]);
    a.cosine_raw = parse_double(r[c_cr]);
    a.cosine_abs = parse_double(r[c_ca]);
    a.topk_overlap = parse_count(r[c_k]);
    a.jsd_label_uniform = parse_double(r[c_jl]);
    a.jsd_rationale_uniform = parse_double(r[c_jr]);
    a.l1_norm_label = parse_double(r[c_ll]);
    a.l1_norm_rationale = parse_double(r[c_lr]);
    out.push_back(std::move(a));
  }
  return out;
}

CsvTable histogram_table(const Histogram& h) {
  CsvTable t;
  t.header = {"metric", "bin_lo", "bin_hi", "count"};
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    t.rows.push_back({h.metric, format_double(h.bin_lo(i)), format_double(h.bin_hi(i)),
                      std::to_string(h.counts[i])});
  }
  return t;
}

CsvTable topk_table(const CorpusSummary& summary) {
  CsvTable t;
  t.header = {"overlap", "count"};
  std::size_t max_k = 0;
  for (const auto& [k, n] : summary.topk_counts) max_k = std::max(max_k, k);
  for (std::size_t k = 0; k <= max_k; ++k) {
    auto it = summary.topk_counts.find(k);
    t.rows.push_back({std::to_string(k), std::to_string(it == summary.topk_counts.end() ? 0 : it->second)});
  }
  return t;
}

CsvTable experiment_table(const ExperimentReport& report) {
  CsvTable t;
  t.header = {"config", "accuracy", "delta", "evaluated", "parse_failures"};
  for (const auto& r : report.rows) {
    t.rows.push_back({r.config, format_fixed2(r.accuracy), r.delta ? format_fixed2(*r.delta) : "",
                      std::to_string(r.evaluated), std::to_string(r.parse_failures)});
  }
  return t;
}

ExperimentReport experiment_report(const CsvTable& table, const std::string& name) {
  ExperimentReport report;
  report.name = name;
  const std::size_t c_c = table.column("config"), c_a = table.column("accuracy"),
                    c_d = table.column("delta"), c_e = table.column("evaluated"),
                    c_p = table.column("parse_failures");
  for (const auto& r : table.rows) {
    ReportRow row;
    row.config = r[c_c];
    row.accuracy = parse_double(r[c_a]);
    if (!r[c_d].empty()) row.delta = parse_double(r[c_d]);
    row.evaluated = parse_count(r[c_e]);
    row.parse_failures = parse_count(r[c_p]);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace rassoc
