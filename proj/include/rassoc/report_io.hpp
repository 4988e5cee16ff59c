#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rassoc/harness.hpp"
#include "rassoc/metrics.hpp"
#include "rassoc/robustness.hpp"

namespace rassoc {

// Comma-separated table. Lines starting with '#' are comments; the first
// other line is the header.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws DataError
  friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

void write_csv(std::ostream& os, const CsvTable& table);  // throws DataError on ',' in fields
CsvTable read_csv(std::istream& is);                      // throws DataError on ragged rows

std::string format_double(double x);   // 17 significant digits
double parse_double(const std::string& s);  // throws DataError

CsvTable sweep_table(const NoiseSweepReport& report);
std::vector<SweepRow> sweep_rows(const CsvTable& table);

CsvTable association_table(std::span<const AssociationRecord> records);
std::vector<AssociationRecord> association_records(const CsvTable& table);

CsvTable histogram_table(const Histogram& h);
CsvTable topk_table(const CorpusSummary& summary);

// Columns config, accuracy, delta (empty when absent), evaluated, parse_failures.
CsvTable experiment_table(const ExperimentReport& report);
ExperimentReport experiment_report(const CsvTable& table, const std::string& name);

}  // namespace rassoc
