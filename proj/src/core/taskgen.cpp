#include "rassoc/core/taskgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "rassoc/errors.hpp"

namespace rassoc {

namespace {

constexpr std::size_t kEntityCount = 120;
constexpr std::uint64_t kWorldSeed = 0x5eed'0f'7a5cULL;

const std::vector<std::string> kFunctionWords = {
    "explain", "qa", "nli", "question:", "choice:", "hypothesis:", "premise:",
    "what", "is", "the", "of", "?", "ranks"};

}  // namespace

SyntheticWorld::SyntheticWorld(std::size_t n_entities, std::uint64_t world_seed) {
  static constexpr std::string_view consonants = "bdfgklmnprstvz";
  static constexpr std::string_view vowels = "aeiou";
  std::mt19937_64 rng(world_seed);
  std::set<std::string> seen;
  while (entities_.size() < n_entities) {
    std::string name;
    name += consonants[rng() % consonants.size()];
    name += vowels[rng() % vowels.size()];
    name += consonants[rng() % consonants.size()];
    if (seen.insert(name).second) entities_.push_back(name);
  }
  std::array<std::size_t, kAttributes> perm{};
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    table_.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::shuffle(table_.begin(), table_.end(), rng);
  entity_kind_.resize(n_entities);
  for (std::size_t e = 0; e < n_entities; ++e) entity_kind_[e] = e % kinds_.size();
  std::shuffle(entity_kind_.begin(), entity_kind_.end(), rng);
}

const SyntheticWorld& SyntheticWorld::standard() {
  static const SyntheticWorld world(kEntityCount, kWorldSeed);
  return world;
}

const std::string& SyntheticWorld::lookup(std::size_t entity, std::size_t attribute) const {
  return values_.at(table_.at(entity_kind_.at(entity)).at(attribute));
}

std::optional<std::size_t> SyntheticWorld::entity_index(const std::string& name) const {
  auto it = std::find(entities_.begin(), entities_.end(), name);
  if (it == entities_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - entities_.begin());
}

std::optional<std::size_t> SyntheticWorld::attribute_index(const std::string& name) const {
  auto it = std::find(attributes_.begin(), attributes_.end(), name);
  if (it == attributes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - attributes_.begin());
}

std::vector<std::string> SyntheticWorld::words() const {
  std::vector<std::string> out = kFunctionWords;
  out.insert(out.end(), attributes_.begin(), attributes_.end());
  out.insert(out.end(), values_.begin(), values_.end());
  out.insert(out.end(), kinds_.begin(), kinds_.end());
  out.insert(out.end(), entities_.begin(), entities_.end());
  return out;
}

Tokens SyntheticWorld::question(std::size_t entity, std::size_t attribute) const {
  return {"what", "is", "the", attributes_.at(attribute), "of", "the",
          kinds_.at(kind_of(entity)), entities_.at(entity), "?"};
}

Tokens SyntheticWorld::sufficient_rationale(const Tokens& value, std::size_t entity,
                                            std::size_t attribute) const {
  Tokens out = value;
  for (const auto& t : {std::string("is"), std::string("the"), attributes_.at(attribute),
                        std::string("of"), entities_.at(entity)}) {
    out.push_back(t);
  }
  return out;
}

Tokens SyntheticWorld::complementary_rationale(std::size_t entity) const {
  Tokens out = {entities_.at(entity), "ranks"};
  for (std::size_t a = 0; a < kAttributes; ++a) out.push_back(lookup(entity, a));
  return out;
}

Dataset generate_dataset(const SufficiencyConfig& cfg) {
  cfg.validate();
  const auto& world = SyntheticWorld::standard();
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = cfg.n;
  const auto n_sufficient =
      static_cast<std::size_t>(std::floor(cfg.s * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  // Noisy instances come first in the shuffled order and never receive a
  // sufficient rationale; the sufficient ones are taken from the clean rest.
  const auto n_noisy =
      static_cast<std::size_t>(std::floor(cfg.label_noise * static_cast<double>(n)));
  std::vector<bool> sufficient(n, false);
  std::vector<std::size_t> noise_offset(n, 0);
  for (std::size_t i = 0; i < n_noisy; ++i) noise_offset[order[i]] = 1 + i % 2;
  for (std::size_t i = n_noisy; i < n_noisy + n_sufficient; ++i) sufficient[order[i]] = true;

  std::uniform_int_distribution<std::size_t> pick_entity(0, world.entities().size() - 1);
  std::uniform_int_distribution<std::size_t> pick_attribute(0, SyntheticWorld::kAttributes - 1);

  Dataset out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t e = pick_entity(rng);
    const std::size_t a = pick_attribute(rng);
    std::array<std::string, 3> values = world.values();
    std::shuffle(values.begin(), values.end(), rng);

    RationalizedInstance inst;
    inst.id = "syn-" + std::to_string(cfg.seed) + "-" + std::to_string(i);
    inst.question = world.question(e, a);
    for (const auto& v : values) inst.choices.push_back({v});
    inst.gold_label = {world.lookup(e, a)};
    // A noisy gold is the entity's value for one of the other two attributes,
    // alternating, so the true value stays the majority answer to a question.
    if (noise_offset[i] != 0) {
      inst.gold_label = {world.lookup(e, (a + noise_offset[i]) % SyntheticWorld::kAttributes)};
    }
    inst.sufficient = sufficient[i];
    inst.gold_rationale = inst.sufficient ? world.sufficient_rationale(inst.gold_label, e, a)
                                          : world.complementary_rationale(e);
    out.push_back(std::move(inst));
  }
  return out;
}

std::optional<Tokens> template_oracle(std::span<const std::string> rationale,
                                      std::span<const Tokens> choices, const Tokens* question) {
  const auto& world = SyntheticWorld::standard();
  auto in_choices = [&](const Tokens& t) {
    return std::find(choices.begin(), choices.end(), t) != choices.end();
  };
  const std::size_t n = rationale.size();

  // "<value> is the <attribute> of <entity>"
  if (n >= 6 && rationale[n - 5] == "is" && rationale[n - 4] == "the" &&
      world.attribute_index(rationale[n - 3]) && rationale[n - 2] == "of" &&
      world.entity_index(rationale[n - 1])) {
    Tokens value(rationale.begin(), rationale.end() - 5);
    if (in_choices(value)) return value;
    return std::nullopt;
  }

  // "<entity> ranks <v_weight> <v_height> <v_speed>"
  if (n == 2 + SyntheticWorld::kAttributes && rationale[1] == "ranks" &&
      world.entity_index(rationale[0])) {
    if (question) {
      const Tokens& q = *question;
      if (q.size() == 9 && q[0] == "what" && q[7] == rationale[0]) {
        if (auto attr = world.attribute_index(q[3])) {
          Tokens value{rationale[2 + *attr]};
          if (in_choices(value)) return value;
        }
      }
      return std::nullopt;
    }
    std::optional<Tokens> found;
    for (std::size_t i = 2; i < n; ++i) {
      Tokens value{rationale[i]};
      if (!in_choices(value) || (found && *found == value)) continue;
      if (found) return std::nullopt;
      found = value;
    }
    return found;
  }
  return std::nullopt;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0,1)");
  }
  auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(data.size())));
  return {Dataset(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(cut)),
          Dataset(data.begin() + static_cast<std::ptrdiff_t>(cut), data.end())};
}

}  // namespace rassoc
