#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rassoc/core/vocab.hpp"

namespace rassoc {

// One problem: question, answer choices, gold label and gold rationale (R*).
struct RationalizedInstance {
  std::string id;
  Tokens question;
  std::vector<Tokens> choices;
  Tokens gold_label;
  Tokens gold_rationale;
  bool sufficient = false;  // generator bookkeeping: rationale alone pins the label

  // Checks gold_label in choices, non-empty sequences, distinct choices.
  void validate() const;

  friend bool operator==(const RationalizedInstance&, const RationalizedInstance&) = default;
};

using Dataset = std::vector<RationalizedInstance>;

// Parsed model emission of the "[label] explanation: [rationale]" grammar.
// Positions index into `raw`; SEP and EOS belong to neither span.
struct DecodedOutput {
  Tokens raw;
  Tokens label_tokens;
  Tokens rationale_tokens;
  std::vector<std::size_t> label_positions;
  std::vector<std::size_t> rationale_positions;
  std::ptrdiff_t sep_position = -1;
  std::ptrdiff_t eos_position = -1;

  bool rationale_empty() const { return rationale_tokens.empty(); }
};

struct SufficiencyConfig {
  double s = 0.5;            // fraction of instances with a sufficient rationale
  std::uint64_t seed = 0;
  std::size_t n = 0;
  // Fraction of instances whose gold is swapped to another choice; those
  // always get the complementary rationale. Requires s + label_noise <= 1.
  double label_noise = 0.0;

  void validate() const;
};

enum class InputFormat { qa, nli };

// The four model configurations: joint (I->OR), pipeline halves (I->R, R->O)
// and the input+rationale predictor (IR->O).
enum class Mode { i_or, i_r, r_o, ir_o };

InputFormat parse_input_format(std::string_view name);  // throws ConfigError
std::string_view to_string(InputFormat f);
Mode parse_mode(std::string_view name);                 // throws ConfigError
std::string_view to_string(Mode m);

}  // namespace rassoc
