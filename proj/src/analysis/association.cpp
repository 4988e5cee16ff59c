#include "rassoc/association.hpp"

#include <optional>
#include <ostream>

#include "json.hpp"
#include "rassoc/core/format.hpp"
#include "rassoc/errors.hpp"

namespace rassoc {

std::string error_code(const Error& e) {
  if (const auto* remote = dynamic_cast<const RemoteError*>(&e)) return remote->remote_kind();
  return e.kind();
}

namespace {

enum class Outcome { ok, parse_failure, skipped };

struct InstanceResult {
  Outcome outcome = Outcome::ok;
  std::optional<CorpusEntry> entry;
  std::optional<AssociationRecord> record;
};

}  // namespace

AttributionCorpus run_attribution_corpus(MeasurementTarget& target,
                                         std::span<const RationalizedInstance> data,
                                         std::size_t k, Execution exec) {
  if (data.empty()) throw DataError("empty attribution dataset");
  if (!target.capabilities().supports_gradients) {
    throw StateError("target does not provide gradients");
  }
  if (!target.concurrent()) exec = Execution::serial;

  auto slots = map_indices<InstanceResult>(data.size(), exec, [&](std::size_t i) {
    InstanceResult slot;
    CorpusEntry entry;
    entry.id = data[i].id;
    entry.source = source_tokens(data[i], Mode::i_or);
    try {
      entry.attributions = target.attribute(entry.source, SpanTag::rationale);
    } catch (const Error& e) {
      const std::string code = error_code(e);
      if (code == "MissingSeparator" || code == "EmptyLabel") {
        slot.outcome = Outcome::parse_failure;
        return slot;
      }
      if (code == "EmptySpan") {
        slot.outcome = Outcome::skipped;
        return slot;
      }
      throw;
    }
    try {
      slot.record = associate(entry.id, entry.attributions.label, entry.attributions.rationale, k);
    } catch (const MetricError&) {
      slot.outcome = Outcome::skipped;
    } catch (const ZeroVector&) {
      slot.outcome = Outcome::skipped;
    }
    slot.entry = std::move(entry);
    return slot;
  });

  AttributionCorpus out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& s = slots[i];
    if (s.entry) out.entries.push_back(std::move(*s.entry));
    switch (s.outcome) {
      case Outcome::ok: out.records.push_back(std::move(*s.record)); break;
      case Outcome::parse_failure: out.parse_failure_ids.push_back(data[i].id); break;
      case Outcome::skipped: out.skipped_ids.push_back(data[i].id); break;
    }
  }
  if (out.records.empty()) throw DataError("no instance produced comparable attributions");
  out.summary = summarize(out.records, out.parse_failure_ids.size(), out.skipped_ids.size());
  return out;
}

void write_corpus_jsonl(std::ostream& os, const AttributionCorpus& corpus) {
  auto numbers = [](const std::vector<double>& xs) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : xs) a.push_back(x);
    return a;
  };
  for (const auto& e : corpus.entries) {
    nlohmann::json j;
    j["id"] = e.id;
    j["source"] = e.source;
    j["decoded"] = e.attributions.decoded;
    j["label"] = numbers(e.attributions.label);
    j["rationale"] = numbers(e.attributions.rationale);
    j["total"] = numbers(e.attributions.total);
    os << j.dump() << '\n';
  }
}

}  // namespace rassoc
