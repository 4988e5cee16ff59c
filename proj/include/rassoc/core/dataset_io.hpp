#pragma once

#include <filesystem>
#include <iosfwd>

#include "rassoc/core/types.hpp"

namespace rassoc {

// Line-delimited JSON, one record per line with fields id, question, choices,
// label, rationale, sufficient. Token sequences are space-joined strings.
void write_dataset(std::ostream& os, const Dataset& data);
Dataset read_dataset(std::istream& is);

void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace rassoc
