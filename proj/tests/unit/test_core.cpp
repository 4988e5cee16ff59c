#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "rassoc/core/dataset_io.hpp"
#include "rassoc/core/format.hpp"
#include "rassoc/core/taskgen.hpp"
#include "rassoc/errors.hpp"

using namespace rassoc;

namespace {

RationalizedInstance eating_instance() {
  RationalizedInstance inst;
  inst.id = "ex";
  inst.question = split_tokens("while eating a hamburger with friends , what are people trying to do ?");
  inst.choices = {{"have_fun"}, {"tasty"}, {"indigestion"}};
  inst.gold_label = {"have_fun"};
  inst.gold_rationale = split_tokens("usually a hamburger with friends indicates a good time");
  return inst;
}

SufficiencyConfig config(double s, std::size_t n, std::uint64_t seed, double noise = 0.0) {
  SufficiencyConfig c;
  c.s = s;
  c.n = n;
  c.seed = seed;
  c.label_noise = noise;
  return c;
}

}  // namespace

TEST(Vocab, ReservedTokensComeFirst) {
  const Vocab v({"a", "b"});
  EXPECT_EQ(v.size(), 6);
  EXPECT_EQ(v.token(Vocab::kPad), kPadToken);
  EXPECT_EQ(v.token(Vocab::kEos), kEosToken);
  EXPECT_EQ(v.token(Vocab::kSep), kSepToken);
  EXPECT_EQ(v.id("a"), 4);
}

TEST(Vocab, IsABijection) {
  const Vocab v = SyntheticWorld::standard().vocab();
  std::set<std::string> seen;
  for (int i = 0; i < v.size(); ++i) {
    EXPECT_EQ(v.id(v.token(i)), i);
    EXPECT_TRUE(seen.insert(v.token(i)).second);
  }
  EXPECT_GE(v.size(), 100);
  EXPECT_LE(v.size(), 300);
}

TEST(Vocab, RejectsDuplicatesAndUnknowns) {
  EXPECT_THROW(Vocab({"a", "a"}), VocabError);
  EXPECT_THROW(Vocab({"explanation:"}), VocabError);
  const Vocab v({"a"});
  EXPECT_THROW(v.id("zzz"), VocabError);
  EXPECT_THROW(v.token(99), VocabError);
}

TEST(Vocab, FromTokensRoundTrips) {
  const Vocab v = SyntheticWorld::standard().vocab();
  EXPECT_EQ(Vocab::from_tokens(v.tokens()), v);
  EXPECT_THROW(Vocab::from_tokens({"a", "b"}), VocabError);
}

TEST(FormatInput, QaTemplate) {
  const Tokens got = format_input(eating_instance(), InputFormat::qa);
  EXPECT_EQ(join_tokens(got),
            "explain qa question: while eating a hamburger with friends , what are people trying "
            "to do ? choice: have_fun choice: tasty choice: indigestion");
}

TEST(FormatInput, NliTemplate) {
  const Tokens got = format_input(eating_instance(), InputFormat::nli);
  EXPECT_EQ(join_tokens(got).rfind("explain nli hypothesis: while eating", 0), 0u);
  EXPECT_NE(join_tokens(got).find("premise: have_fun tasty indigestion"), std::string::npos);
}

TEST(FormatInput, Deterministic) {
  EXPECT_EQ(format_input(eating_instance(), InputFormat::qa),
            format_input(eating_instance(), InputFormat::qa));
}

TEST(FormatInput, PermutedChoicesOnlyReorderChoices) {
  RationalizedInstance a = eating_instance(), b = eating_instance();
  std::swap(b.choices[0], b.choices[2]);
  const Tokens fa = format_input(a, InputFormat::qa), fb = format_input(b, InputFormat::qa);
  ASSERT_EQ(fa.size(), fb.size());
  const auto first_choice = std::find(fa.begin(), fa.end(), "choice:") - fa.begin();
  EXPECT_TRUE(std::equal(fa.begin(), fa.begin() + first_choice, fb.begin()));
  std::multiset<std::string> ta(fa.begin() + first_choice, fa.end());
  std::multiset<std::string> tb(fb.begin() + first_choice, fb.end());
  EXPECT_EQ(ta, tb);
  EXPECT_NE(fa, fb);
}

TEST(FormatInput, UnknownConfigIsConfigError) {
  EXPECT_THROW(parse_input_format("cos_e"), ConfigError);
  EXPECT_THROW(format_input(eating_instance(), static_cast<InputFormat>(7)), ConfigError);
}

TEST(ParseOutput, SplitsAtSeparator) {
  const auto out = parse_output(split_tokens("entailment explanation: child does not imply daughter"));
  EXPECT_EQ(out.label_tokens, Tokens{"entailment"});
  EXPECT_EQ(join_tokens(out.rationale_tokens), "child does not imply daughter");
  EXPECT_EQ(out.sep_position, 1);
}

TEST(ParseOutput, EmptyRationaleIsFlaggedNotAnError) {
  const auto out = parse_output(split_tokens("have_fun explanation:"));
  EXPECT_EQ(out.label_tokens, Tokens{"have_fun"});
  EXPECT_TRUE(out.rationale_empty());
}

TEST(ParseOutput, Errors) {
  EXPECT_THROW(parse_output(split_tokens("no separator here")), MissingSeparator);
  EXPECT_THROW(parse_output(split_tokens("explanation: because")), EmptyLabel);
  EXPECT_THROW(parse_output(Tokens{}), MissingSeparator);
}

TEST(ParseOutput, StopsAtFirstEos) {
  const auto out = parse_output(split_tokens("a b explanation: c d </s> e f"));
  EXPECT_EQ(out.label_tokens, (Tokens{"a", "b"}));
  EXPECT_EQ(out.rationale_tokens, (Tokens{"c", "d"}));
  EXPECT_EQ(out.eos_position, 5);
  EXPECT_EQ(out.raw.size(), 6u);
}

TEST(ParseOutput, PositionsPartitionTheSequence) {
  for (const char* text : {"a explanation: b c </s>", "a b explanation: </s>", "x explanation: y"}) {
    const auto out = parse_output(split_tokens(text));
    std::vector<int> hits(out.raw.size(), 0);
    for (auto p : out.label_positions) ++hits.at(p);
    for (auto p : out.rationale_positions) ++hits.at(p);
    ++hits.at(static_cast<std::size_t>(out.sep_position));
    if (out.eos_position >= 0) ++hits.at(static_cast<std::size_t>(out.eos_position));
    for (int h : hits) EXPECT_EQ(h, 1) << text;
  }
}

TEST(ParseOutput, RoundTripsGeneratedTargets) {
  for (const auto& inst : generate_dataset(config(0.5, 200, 3))) {
    const auto out = parse_output(target_tokens(inst, Mode::i_or));
    EXPECT_EQ(out.label_tokens, inst.gold_label);
    EXPECT_EQ(out.rationale_tokens, inst.gold_rationale);
  }
}

TEST(Serialization, ModesSeeTheRightInputs) {
  const auto& w = SyntheticWorld::standard();
  for (const auto& inst : generate_dataset(config(0.5, 50, 5))) {
    const Tokens r_o = source_tokens(inst, Mode::r_o);
    for (const char* q : {"what", "?", "question:"}) {
      EXPECT_EQ(std::find(r_o.begin(), r_o.end(), q), r_o.end()) << q;
    }
    for (const auto& kind : w.kinds()) {
      EXPECT_EQ(std::find(r_o.begin(), r_o.end(), kind), r_o.end()) << kind;
    }
    EXPECT_EQ(join_tokens(target_tokens(inst, Mode::r_o)), join_tokens(inst.gold_label) + " </s>");
    EXPECT_EQ(join_tokens(target_tokens(inst, Mode::i_r)),
              join_tokens(inst.gold_rationale) + " </s>");
    const Tokens i = source_tokens(inst, Mode::i_or);
    const Tokens ir_o = source_tokens(inst, Mode::ir_o);
    ASSERT_EQ(ir_o.size(), i.size() + 1 + inst.gold_rationale.size());
    EXPECT_TRUE(std::equal(i.begin(), i.end(), ir_o.begin()));
    const Tokens other = split_tokens("low is the weight of x");
    EXPECT_EQ(source_tokens(inst, Mode::r_o, &other).back(), "x");
  }
}

TEST(Generate, SufficientDataAlwaysDeterminesLabel) {
  for (const auto& inst : generate_dataset(config(1.0, 1000, 7))) {
    EXPECT_EQ(template_oracle(inst.gold_rationale, inst.choices), inst.gold_label);
  }
}

TEST(Generate, ComplementaryDataNeedsTheQuestion) {
  for (const auto& inst : generate_dataset(config(0.0, 1000, 7))) {
    EXPECT_FALSE(template_oracle(inst.gold_rationale, inst.choices).has_value());
    EXPECT_EQ(template_oracle(inst.gold_rationale, inst.choices, &inst.question), inst.gold_label);
  }
}

TEST(Generate, EmptyDatasetIsNotAnError) {
  EXPECT_TRUE(generate_dataset(config(0.5, 0, 1)).empty());
}

TEST(Generate, ExactSufficientCount) {
  for (double s : {0.0, 0.25, 0.5, 0.73, 1.0}) {
    const auto data = generate_dataset(config(s, 999, 11));
    std::size_t oracle_sufficient = 0, flagged = 0;
    for (const auto& inst : data) {
      if (template_oracle(inst.gold_rationale, inst.choices)) ++oracle_sufficient;
      if (inst.sufficient) ++flagged;
    }
    const auto expected = static_cast<std::size_t>(std::floor(s * 999));
    EXPECT_EQ(oracle_sufficient, expected) << s;
    EXPECT_EQ(flagged, expected) << s;
  }
}

TEST(Generate, PureFunctionOfConfig) {
  std::ostringstream a, b;
  write_dataset(a, generate_dataset(config(0.5, 300, 9)));
  write_dataset(b, generate_dataset(config(0.5, 300, 9)));
  EXPECT_EQ(a.str(), b.str());
  std::ostringstream c;
  write_dataset(c, generate_dataset(config(0.5, 300, 10)));
  EXPECT_NE(a.str(), c.str());
}

TEST(Generate, LabelsRoughlyUniform) {
  std::map<Tokens, int> counts;
  for (const auto& inst : generate_dataset(config(0.5, 3000, 2))) ++counts[inst.gold_label];
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& [label, c] : counts) {
    EXPECT_GT(c, 850);
    EXPECT_LT(c, 1150);
  }
}

TEST(Generate, InstancesValid) {
  for (const auto& inst : generate_dataset(config(0.4, 500, 4, 0.3))) {
    EXPECT_NO_THROW(inst.validate());
    EXPECT_EQ(inst.choices.size(), 3u);
  }
}

TEST(Generate, LabelNoiseSwapsToAnotherChoiceWithComplementaryRationale) {
  const auto clean = generate_dataset(config(0.3, 1000, 21));
  const auto noisy = generate_dataset(config(0.3, 1000, 21, 0.4));
  std::size_t swapped = 0, sufficient = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    EXPECT_EQ(clean[i].question, noisy[i].question);
    if (noisy[i].sufficient) ++sufficient;
    if (clean[i].gold_label != noisy[i].gold_label) {
      ++swapped;
      EXPECT_FALSE(noisy[i].sufficient);
      EXPECT_EQ(template_oracle(noisy[i].gold_rationale, noisy[i].choices, &noisy[i].question),
                clean[i].gold_label);
    }
  }
  EXPECT_EQ(swapped, 400u);
  EXPECT_EQ(sufficient, 300u);
}

TEST(Generate, RejectsBadConfig) {
  EXPECT_THROW(generate_dataset(config(1.5, 10, 1)), ConfigError);
  EXPECT_THROW(generate_dataset(config(-0.1, 10, 1)), ConfigError);
  EXPECT_THROW(generate_dataset(config(0.7, 10, 1, 0.5)), ConfigError);
}

TEST(TemplateOracle, Examples) {
  const auto& w = SyntheticWorld::standard();
  const std::vector<Tokens> choices = {{"low"}, {"medium"}, {"high"}};
  const Tokens suff = w.sufficient_rationale({w.lookup(0, 1)}, 0, 1);
  EXPECT_EQ(template_oracle(suff, choices), Tokens{w.lookup(0, 1)});
  const Tokens comp = w.complementary_rationale(0);
  EXPECT_FALSE(template_oracle(comp, choices).has_value());
  const Tokens q = w.question(0, 2);
  EXPECT_EQ(template_oracle(comp, choices, &q), Tokens{w.lookup(0, 2)});
  EXPECT_FALSE(template_oracle(split_tokens("nothing to see"), choices).has_value());
  const Tokens other_q = w.question(1, 2);
  EXPECT_FALSE(template_oracle(comp, choices, &other_q).has_value());
}

TEST(Instance, ValidateRejectsBrokenInstances) {
  RationalizedInstance inst = eating_instance();
  inst.gold_label = {"pizza"};
  EXPECT_THROW(inst.validate(), DataError);
  inst = eating_instance();
  inst.choices[1] = inst.choices[0];
  EXPECT_THROW(inst.validate(), DataError);
  inst = eating_instance();
  inst.gold_rationale.clear();
  EXPECT_THROW(inst.validate(), DataError);
}

TEST(DatasetIo, RoundTrip) {
  const auto data = generate_dataset(config(0.5, 50, 8));
  std::stringstream ss;
  write_dataset(ss, data);
  EXPECT_EQ(read_dataset(ss), data);
}

TEST(DatasetIo, MalformedLinesAreDataErrors) {
  std::stringstream bad("{\"id\": 1}\n");
  EXPECT_THROW(read_dataset(bad), DataError);
  std::stringstream garbage("not json\n");
  EXPECT_THROW(read_dataset(garbage), DataError);
}

TEST(Split, FirstFractionTrains) {
  const auto data = generate_dataset(config(0.5, 10, 1));
  auto [train, dev] = split_dataset(data, 0.8);
  EXPECT_EQ(train.size(), 8u);
  EXPECT_EQ(dev.size(), 2u);
  EXPECT_EQ(dev.front(), data[8]);
  EXPECT_THROW(split_dataset(data, 1.0), ConfigError);
}

TEST(Mode, ParseAndPrint) {
  for (Mode m : {Mode::i_or, Mode::i_r, Mode::r_o, Mode::ir_o}) {
    EXPECT_EQ(parse_mode(to_string(m)), m);
  }
  EXPECT_EQ(parse_mode("I->OR"), Mode::i_or);
  EXPECT_THROW(parse_mode("io-r"), ConfigError);
}
