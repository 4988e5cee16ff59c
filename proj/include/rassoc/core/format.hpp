#pragma once

#include <optional>
#include <span>

#include "rassoc/core/types.hpp"

namespace rassoc {

inline constexpr std::string_view kChoiceMarker = "choice:";

// "explain qa question: <q> choice: <c0> choice: <c1> choice: <c2>", or the NLI
// shape "explain nli hypothesis: <q> premise: <c0> <c1> <c2>".
Tokens format_input(const RationalizedInstance& instance, InputFormat format);

// Splits at the first SEP; the label precedes it, the rationale runs up to
// (excluding) the first EOS. Anything after EOS is dropped from `raw`.
DecodedOutput parse_output(std::span<const std::string> raw);

// Outputs of I->R (rationale only) and of R->O / IR->O (label only).
DecodedOutput parse_rationale_only(std::span<const std::string> raw);
DecodedOutput parse_label_only(std::span<const std::string> raw);

// Mode-aware parse of a raw decoder emission.
DecodedOutput parse_for_mode(std::span<const std::string> raw, Mode mode);

// Encoder input for a model configuration. `rationale` overrides the gold
// rationale for the R->O and IR->O inputs (e.g. generated rationales).
Tokens source_tokens(const RationalizedInstance& instance, Mode mode,
                     const Tokens* rationale = nullptr);

// Training target for a configuration, EOS-terminated.
Tokens target_tokens(const RationalizedInstance& instance, Mode mode);

}  // namespace rassoc
