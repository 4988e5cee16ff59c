#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rassoc/core/types.hpp"
#include "rassoc/errors.hpp"
#include "rassoc/metrics.hpp"
#include "rassoc/parallel.hpp"
#include "rassoc/target.hpp"

namespace rassoc {

// Attributions of one instance's joint (I->OR) decode.
struct CorpusEntry {
  std::string id;
  Tokens source;
  SpanAttributions attributions;
};

struct AttributionCorpus {
  std::vector<CorpusEntry> entries;           // every instance that produced attributions
  std::vector<AssociationRecord> records;     // entries whose metrics are defined
  std::vector<std::string> parse_failure_ids; // emission lacked the label/rationale grammar
  std::vector<std::string> skipped_ids;       // empty rationale or undefined metric
  CorpusSummary summary;
};

// Error code of a toolkit error, looking through RemoteError.
std::string error_code(const Error& e);

// Attributes every instance through `target` and compares the label and
// rationale attribution vectors.
AttributionCorpus run_attribution_corpus(MeasurementTarget& target,
                                         std::span<const RationalizedInstance> data,
                                         std::size_t k = kDefaultTopK,
                                         Execution exec = Execution::parallel);

// One JSON object per entry: id, source, decoded, label, rationale, total.
void write_corpus_jsonl(std::ostream& os, const AttributionCorpus& corpus);

}  // namespace rassoc
