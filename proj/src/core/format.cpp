#include "rassoc/core/format.hpp"

#include <algorithm>

#include "rassoc/errors.hpp"

namespace rassoc {

void RationalizedInstance::validate() const {
  if (question.empty()) throw DataError(id + ": empty question");
  if (choices.empty()) throw DataError(id + ": no choices");
  if (gold_label.empty()) throw DataError(id + ": empty gold label");
  if (gold_rationale.empty()) throw DataError(id + ": empty gold rationale");
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (choices[i].empty()) throw DataError(id + ": empty choice");
    for (std::size_t j = 0; j < i; ++j) {
      if (choices[i] == choices[j]) throw DataError(id + ": duplicate choices");
    }
  }
  if (std::find(choices.begin(), choices.end(), gold_label) == choices.end()) {
    throw DataError(id + ": gold label not among choices");
  }
}

void SufficiencyConfig::validate() const {
  if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("sufficiency s must lie in [0,1]");
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) {
    throw ConfigError("label_noise must lie in [0,1]");
  }
  if (s + label_noise > 1.0 + 1e-12) throw ConfigError("s + label_noise must not exceed 1");
}

InputFormat parse_input_format(std::string_view name) {
  if (name == "qa") return InputFormat::qa;
  if (name == "nli") return InputFormat::nli;
  throw ConfigError("unknown input format '" + std::string(name) + "'");
}

std::string_view to_string(InputFormat f) {
  switch (f) {
    case InputFormat::qa: return "qa";
    case InputFormat::nli: return "nli";
  }
  throw ConfigError("unknown input format");
}

Mode parse_mode(std::string_view name) {
  if (name == "i-or" || name == "I->OR") return Mode::i_or;
  if (name == "i-r" || name == "I->R") return Mode::i_r;
  if (name == "r-o" || name == "R->O") return Mode::r_o;
  if (name == "ir-o" || name == "IR->O") return Mode::ir_o;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::i_or: return "i-or";
    case Mode::i_r: return "i-r";
    case Mode::r_o: return "r-o";
    case Mode::ir_o: return "ir-o";
  }
  throw ConfigError("unknown mode");
}

namespace {

void append(Tokens& out, const Tokens& more) { out.insert(out.end(), more.begin(), more.end()); }

// Index of the first EOS, or raw.size() when absent.
std::size_t eos_index(std::span<const std::string> raw) {
  auto it = std::find(raw.begin(), raw.end(), kEosToken);
  return static_cast<std::size_t>(it - raw.begin());
}

void finish_eos(DecodedOutput& out, std::span<const std::string> raw) {
  std::size_t end = eos_index(raw);
  out.raw.assign(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(std::min(end + 1, raw.size())));
  out.eos_position = end < raw.size() ? static_cast<std::ptrdiff_t>(end) : -1;
}

}  // namespace

Tokens format_input(const RationalizedInstance& instance, InputFormat format) {
  Tokens out;
  switch (format) {
    case InputFormat::qa:
      out = {"explain", "qa", "question:"};
      append(out, instance.question);
      for (const auto& c : instance.choices) {
        out.emplace_back(kChoiceMarker);
        append(out, c);
      }
      return out;
    case InputFormat::nli:
      out = {"explain", "nli", "hypothesis:"};
      append(out, instance.question);
      out.emplace_back("premise:");
      for (const auto& c : instance.choices) append(out, c);
      return out;
  }
  throw ConfigError("unknown input format");
}

DecodedOutput parse_output(std::span<const std::string> raw) {
  DecodedOutput out;
  finish_eos(out, raw);
  std::size_t end = out.eos_position >= 0 ? static_cast<std::size_t>(out.eos_position) : out.raw.size();
  auto sep = std::find(out.raw.begin(), out.raw.begin() + static_cast<std::ptrdiff_t>(end), kSepToken);
  if (sep == out.raw.begin() + static_cast<std::ptrdiff_t>(end)) {
    throw MissingSeparator("no '" + std::string(kSepToken) + "' in decoded output");
  }
  std::size_t sep_at = static_cast<std::size_t>(sep - out.raw.begin());
  if (sep_at == 0) throw EmptyLabel("separator at position 0");
  out.sep_position = static_cast<std::ptrdiff_t>(sep_at);
  for (std::size_t i = 0; i < sep_at; ++i) {
    out.label_tokens.push_back(out.raw[i]);
    out.label_positions.push_back(i);
  }
  for (std::size_t i = sep_at + 1; i < end; ++i) {
    out.rationale_tokens.push_back(out.raw[i]);
    out.rationale_positions.push_back(i);
  }
  return out;
}

DecodedOutput parse_rationale_only(std::span<const std::string> raw) {
  DecodedOutput out;
  finish_eos(out, raw);
  std::size_t end = out.eos_position >= 0 ? static_cast<std::size_t>(out.eos_position) : out.raw.size();
  for (std::size_t i = 0; i < end; ++i) {
    out.rationale_tokens.push_back(out.raw[i]);
    out.rationale_positions.push_back(i);
  }
  return out;
}

DecodedOutput parse_label_only(std::span<const std::string> raw) {
  DecodedOutput out;
  finish_eos(out, raw);
  std::size_t end = out.eos_position >= 0 ? static_cast<std::size_t>(out.eos_position) : out.raw.size();
  if (end == 0) throw EmptyLabel("empty label");
  for (std::size_t i = 0; i < end; ++i) {
    out.label_tokens.push_back(out.raw[i]);
    out.label_positions.push_back(i);
  }
  return out;
}

DecodedOutput parse_for_mode(std::span<const std::string> raw, Mode mode) {
  switch (mode) {
    case Mode::i_or: return parse_output(raw);
    case Mode::i_r: return parse_rationale_only(raw);
    case Mode::r_o:
    case Mode::ir_o: return parse_label_only(raw);
  }
  throw ConfigError("unknown mode");
}

Tokens source_tokens(const RationalizedInstance& instance, Mode mode, const Tokens* rationale) {
  const Tokens& r = rationale ? *rationale : instance.gold_rationale;
  Tokens out;
  switch (mode) {
    case Mode::i_or:
    case Mode::i_r:
      return format_input(instance, InputFormat::qa);
    case Mode::r_o:
      // No question tokens: the pipeline predictor sees choices and rationale only.
      out = {"qa"};
      for (const auto& c : instance.choices) {
        out.emplace_back(kChoiceMarker);
        append(out, c);
      }
      out.emplace_back(kSepToken);
      append(out, r);
      return out;
    case Mode::ir_o:
      out = format_input(instance, InputFormat::qa);
      out.emplace_back(kSepToken);
      append(out, r);
      return out;
  }
  throw ConfigError("unknown mode");
}

Tokens target_tokens(const RationalizedInstance& instance, Mode mode) {
  Tokens out;
  switch (mode) {
    case Mode::i_or:
      out = instance.gold_label;
      out.emplace_back(kSepToken);
      append(out, instance.gold_rationale);
      break;
    case Mode::i_r:
      out = instance.gold_rationale;
      break;
    case Mode::r_o:
    case Mode::ir_o:
      out = instance.gold_label;
      break;
    default:
      throw ConfigError("unknown mode");
  }
  out.emplace_back(kEosToken);
  return out;
}

}  // namespace rassoc
