#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rassoc/core/types.hpp"

namespace rassoc {

// Attribute-lookup world behind the synthetic task. Every entity belongs to a
// kind, and each kind assigns a distinct value (low/medium/high) to each of the
// three attributes, so the three answer choices are always the entity's own
// three values. The six kinds cover the six possible assignments.
class SyntheticWorld {
 public:
  static constexpr std::size_t kAttributes = 3;

  static const SyntheticWorld& standard();

  const std::vector<std::string>& entities() const { return entities_; }
  const std::array<std::string, kAttributes>& attributes() const { return attributes_; }
  const std::array<std::string, kAttributes>& values() const { return values_; }
  const std::vector<std::string>& kinds() const { return kinds_; }
  std::size_t kind_of(std::size_t entity) const { return entity_kind_.at(entity); }

  // Value of `attribute` (index) for `entity` (index).
  const std::string& lookup(std::size_t entity, std::size_t attribute) const;
  std::optional<std::size_t> entity_index(const std::string& name) const;
  std::optional<std::size_t> attribute_index(const std::string& name) const;

  // Every word the task can emit; feed to Vocab.
  std::vector<std::string> words() const;
  Vocab vocab() const { return Vocab(words()); }

  Tokens question(std::size_t entity, std::size_t attribute) const;
  Tokens sufficient_rationale(const Tokens& value, std::size_t entity, std::size_t attribute) const;
  Tokens complementary_rationale(std::size_t entity) const;

 private:
  SyntheticWorld(std::size_t n_entities, std::uint64_t world_seed);

  std::vector<std::string> entities_;
  std::array<std::string, kAttributes> attributes_{"weight", "height", "speed"};
  std::array<std::string, kAttributes> values_{"low", "medium", "high"};
  std::vector<std::string> kinds_{"bird", "fish", "rock", "tree", "cart", "boat"};
  std::vector<std::size_t> entity_kind_;
  std::vector<std::array<std::size_t, kAttributes>> table_;  // kind -> value index per attribute
};

// Deterministic dataset; exactly floor(s*n) instances carry a sufficient
// rationale, the rest a complementary one.
Dataset generate_dataset(const SufficiencyConfig& cfg);

// Rule-based decoder of the generator's rationale templates. Returns the
// label the rationale (plus question, when given) pins among `choices`, or
// nullopt (Undetermined).
std::optional<Tokens> template_oracle(std::span<const std::string> rationale,
                                      std::span<const Tokens> choices,
                                      const Tokens* question = nullptr);

// Deterministic train/dev split: the first `train_fraction` of the list trains.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction = 0.8);

}  // namespace rassoc
