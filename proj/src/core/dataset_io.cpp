#include "rassoc/core/dataset_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "rassoc/errors.hpp"

namespace rassoc {

using nlohmann::json;

void write_dataset(std::ostream& os, const Dataset& data) {
  for (const auto& inst : data) {
    json j;
    j["id"] = inst.id;
    j["question"] = join_tokens(inst.question);
    json choices = json::array();
    for (const auto& c : inst.choices) choices.push_back(join_tokens(c));
    j["choices"] = std::move(choices);
    j["label"] = join_tokens(inst.gold_label);
    j["rationale"] = join_tokens(inst.gold_rationale);
    j["sufficient"] = inst.sufficient;
    os << j.dump() << '\n';
  }
}

Dataset read_dataset(std::istream& is) {
  Dataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      RationalizedInstance inst;
      inst.id = j.at("id").get<std::string>();
      inst.question = split_tokens(j.at("question").get<std::string>());
      for (const auto& c : j.at("choices")) inst.choices.push_back(split_tokens(c.get<std::string>()));
      inst.gold_label = split_tokens(j.at("label").get<std::string>());
      inst.gold_rationale = split_tokens(j.at("rationale").get<std::string>());
      inst.sufficient = j.at("sufficient").get<bool>();
      inst.validate();
      out.push_back(std::move(inst));
    } catch (const json::exception& e) {
      throw DataError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  write_dataset(os, data);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read " + path.string());
  return read_dataset(is);
}

}  // namespace rassoc
