#pragma once

#include <filesystem>
#include <iosfwd>

#include "rassoc/model/params.hpp"

namespace rassoc {

inline constexpr int kCheckpointVersion = 1;

// Versioned text container: header with shapes and metadata, the vocabulary,
// then one hexadecimal float per parameter (bit-exact round trip).
void write_checkpoint(std::ostream& os, const ModelParams& params);
ModelParams read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace rassoc
