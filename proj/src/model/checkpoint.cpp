#include "rassoc/model/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "rassoc/errors.hpp"

namespace rassoc {

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw DataError("bad float '" + s + "' in checkpoint");
  return v;
}

std::string expect_key(std::istream& is, const std::string& key) {
  std::string k, v;
  if (!(is >> k >> v) || k != key) throw DataError("checkpoint: expected '" + key + "'");
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& os, const ModelParams& params) {
  const auto& c = params.config;
  os << "rassoc-checkpoint " << kCheckpointVersion << '\n'
     << "vocab_size " << c.vocab_size << '\n'
     << "d_model " << c.d_model << '\n'
     << "d_ff " << c.d_ff << '\n'
     << "use_positions " << (c.use_positions ? 1 : 0) << '\n'
     << "max_positions " << c.max_positions << '\n'
     << "embed_init_std " << hex(c.embed_init_std) << '\n'
     << "source_embed_scale " << hex(c.source_embed_scale) << '\n'
     << "trained " << (params.trained ? 1 : 0) << '\n'
     << "mode " << (params.mode ? std::string(to_string(*params.mode)) : std::string("none")) << '\n'
     << "vocab " << params.vocab_tokens.size() << '\n';
  for (const auto& t : params.vocab_tokens) os << t << '\n';
  os << "values " << params.values.size() << '\n';
  for (double v : params.values) os << hex(v) << '\n';
}

ModelParams read_checkpoint(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "rassoc-checkpoint") {
    throw DataError("not a checkpoint file");
  }
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  ModelParams p;
  p.config.vocab_size = std::stoi(expect_key(is, "vocab_size"));
  p.config.d_model = std::stoi(expect_key(is, "d_model"));
  p.config.d_ff = std::stoi(expect_key(is, "d_ff"));
  p.config.use_positions = expect_key(is, "use_positions") == "1";
  p.config.max_positions = std::stoi(expect_key(is, "max_positions"));
  p.config.embed_init_std = parse_hex(expect_key(is, "embed_init_std"));
  p.config.source_embed_scale = parse_hex(expect_key(is, "source_embed_scale"));
  p.trained = expect_key(is, "trained") == "1";
  const std::string mode = expect_key(is, "mode");
  if (mode != "none") p.mode = parse_mode(mode);
  const auto n_vocab = std::stoul(expect_key(is, "vocab"));
  p.vocab_tokens.resize(n_vocab);
  for (auto& t : p.vocab_tokens) {
    if (!(is >> t)) throw DataError("checkpoint: truncated vocabulary");
  }
  const auto n_values = std::stoul(expect_key(is, "values"));
  if (n_values != ParamLayout(p.config).total) throw DataError("checkpoint: shape mismatch");
  if (static_cast<int>(n_vocab) != p.config.vocab_size) throw DataError("checkpoint: vocab size mismatch");
  p.values.resize(n_values);
  std::string tok;
  for (auto& v : p.values) {
    if (!(is >> tok)) throw DataError("checkpoint: truncated values");
    v = parse_hex(tok);
  }
  Vocab::from_tokens(p.vocab_tokens);  // validates
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  write_checkpoint(os, params);
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read " + path.string());
  return read_checkpoint(is);
}

}  // namespace rassoc
