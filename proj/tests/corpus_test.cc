// Copyright 2026 The sentiknow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sentiknow/corpus.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "sentiknow/errors.h"
#include "sentiknow/rng.h"

namespace sk = sentiknow;

namespace {

sk::KnowledgeToken tok(const std::string& w, sk::Polarity pol = sk::Polarity::kNeutral,
                       double s = 0.0, sk::Pos5 pos = sk::Pos5::kNoun) {
  sk::KnowledgeToken t;
  t.word = w;
  t.pos = pos;
  t.polarity = pol;
  t.score = s;
  t.sense_count = s == 0.0 ? 0 : 2;
  return t;
}

sk::KnowledgeSequence seq_of(std::initializer_list<const char*> words,
                             std::optional<int> label = std::nullopt) {
  sk::KnowledgeSequence s;
  for (const char* w : words) s.tokens.push_back(tok(w));
  s.label = label;
  s.id = "t";
  return s;
}

std::string describe(const sk::MaskedExample& ex) {
  std::ostringstream o;
  auto list = [&](const char* name, const auto& v) {
    o << name;
    for (auto x : v) o << ' ' << static_cast<int>(x);
    o << '\n';
  };
  list("input", ex.input_ids);
  list("pos", ex.input_pos_ids);
  list("polar", ex.input_polar_ids);
  list("segment", ex.segment_ids);
  list("mask", ex.mask_flags);
  for (const auto& t : ex.targets) {
    o << "target " << t.position << ' ' << t.word_id << ' ' << t.pos_id << ' ' << t.polar_id
      << '\n';
  }
  o << "route " << (ex.route == sk::Route::kEarlyFusion ? "ef" : "ls") << '\n';
  o << "label " << ex.label.value_or(-1) << '\n';
  return o.str();
}

// Documented 8-token example for the golden masking file.
sk::KnowledgeSequence golden_sequence() {
  sk::KnowledgeSequence s;
  s.tokens = {tok("the", sk::Polarity::kNeutral, 0, sk::Pos5::kOther),
              tok("pasta", sk::Polarity::kNeutral, 0, sk::Pos5::kNoun),
              tok("was", sk::Polarity::kNeutral, 0, sk::Pos5::kVerb),
              tok("wonderful", sk::Polarity::kPositive, 0.5, sk::Pos5::kAdjective),
              tok("but", sk::Polarity::kNeutral, 0, sk::Pos5::kOther),
              tok("service", sk::Polarity::kNeutral, 0, sk::Pos5::kNoun),
              tok("felt", sk::Polarity::kNeutral, 0, sk::Pos5::kVerb),
              tok("slow", sk::Polarity::kNegative, -0.25, sk::Pos5::kAdjective)};
  s.label = 3;
  s.id = "golden";
  return s;
}

}  // namespace

TEST(Vocab, ThresholdAndOrdering) {
  std::vector<sk::KnowledgeSequence> corpus{seq_of({"a", "a", "b"}), seq_of({"a"})};
  const auto v = sk::Vocab::build(corpus, 2);
  EXPECT_EQ(v.size(), 6);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_EQ(v.id("b"), sk::kUnkId);
  EXPECT_EQ(v.token(sk::kMaskId), "[MASK]");
  EXPECT_EQ(v.token(sk::kPadId), "[PAD]");

  std::vector<sk::KnowledgeSequence> tie{seq_of({"b", "a", "b", "a", "c"})};
  const auto t = sk::Vocab::build(tie, 1);
  EXPECT_EQ(t.id("a"), 5);
  EXPECT_EQ(t.id("b"), 6);
  EXPECT_EQ(t.id("c"), 7);
}

TEST(Vocab, EmptyCorpus) {
  EXPECT_THROW(sk::Vocab::build(std::vector<sk::KnowledgeSequence>{}, 1), sk::EmptyCorpus);
}

TEST(Vocab, SaveLoadRoundTrip) {
  std::vector<sk::KnowledgeSequence> corpus{seq_of({"x", "y", "y"})};
  const auto v = sk::Vocab::build(corpus, 1);
  std::stringstream io;
  v.save(io);
  EXPECT_EQ(sk::Vocab::load(io), v);
}

TEST(Encode, LayoutAndTruncation) {
  std::vector<sk::KnowledgeSequence> corpus{seq_of({"w"})};
  const auto v = sk::Vocab::build(corpus, 1);
  const auto one = sk::encode(seq_of({"w"}), v, 128);
  EXPECT_EQ(one.size(), 3u);
  EXPECT_EQ(one.token_ids.front(), sk::kClsId);
  EXPECT_EQ(one.token_ids.back(), sk::kSepId);
  EXPECT_EQ(one.polar_ids.front(), sk::kPolarNeutral);
  EXPECT_EQ(one.pos_ids.front(), sk::kPosOther);

  sk::KnowledgeSequence long_seq;
  for (int i = 0; i < 200; ++i) long_seq.tokens.push_back(tok("w"));
  const auto cut = sk::encode(long_seq, v, 128);
  EXPECT_EQ(cut.size(), 128u);
  EXPECT_EQ(cut.truncated, 74u);
  for (int s : cut.segment_ids) EXPECT_EQ(s, 0);
}

TEST(Encode, PairSegments) {
  std::vector<sk::KnowledgeSequence> corpus{seq_of({"a", "b", "c"})};
  const auto v = sk::Vocab::build(corpus, 1);
  const auto p = sk::encode_pair(seq_of({"a"}), seq_of({"b", "c"}), v, 32);
  EXPECT_EQ(p.token_ids, (std::vector<int>{sk::kClsId, v.id("a"), sk::kSepId, v.id("b"),
                                           v.id("c"), sk::kSepId}));
  EXPECT_EQ(p.segment_ids, (std::vector<int>{0, 0, 0, 1, 1, 1}));
  const auto cut = sk::encode_pair(seq_of({"a", "a", "a", "a"}), seq_of({"b"}), v, 6);
  EXPECT_EQ(cut.size(), 6u);
  EXPECT_EQ(cut.truncated, 2u);
}

TEST(Encode, PadToUsesSpecialTokens) {
  std::vector<sk::KnowledgeSequence> corpus{seq_of({"a"})};
  const auto v = sk::Vocab::build(corpus, 1);
  auto e = sk::encode(seq_of({"a"}), v, 8);
  sk::pad_to(e, 6);
  EXPECT_EQ(e.size(), 6u);
  EXPECT_EQ(e.token_ids[5], sk::kPadId);
  EXPECT_TRUE(sk::is_special_token(sk::kPadId));
  EXPECT_FALSE(sk::is_special_token(sk::kReservedTokens));
}

TEST(MaskExample, DegeneratePolicyMasksNothing) {
  std::vector<sk::KnowledgeSequence> corpus{seq_of({"a", "b", "c"})};
  const auto v = sk::Vocab::build(corpus, 1);
  const auto enc = sk::encode(seq_of({"a", "b", "c"}), v, 16);
  sk::MaskPolicy policy;
  policy.p_neutral = 0;
  policy.p_sentiment = 0;
  policy.force_select = false;
  sk::Rng rng(1);
  const auto ex = sk::mask_example(enc, policy, rng, v.size());
  EXPECT_TRUE(ex.targets.empty());
  for (auto m : ex.mask_flags) EXPECT_EQ(m, 0);
  EXPECT_EQ(ex.input_ids, enc.token_ids);

  policy.force_select = true;
  const auto forced = sk::mask_example(enc, policy, rng, v.size());
  EXPECT_EQ(forced.targets.size(), 1u);
}

TEST(MaskExample, ForceSelectPrefersSentimentPositions) {
  const auto g = golden_sequence();
  std::vector<sk::KnowledgeSequence> corpus{g};
  const auto v = sk::Vocab::build(corpus, 1);
  const auto enc = sk::encode(g, v, 16);
  sk::MaskPolicy policy;
  policy.p_neutral = 0;
  policy.p_sentiment = 1e-12;
  for (std::uint64_t s = 0; s < 50; ++s) {
    sk::Rng rng(s);
    const auto ex = sk::mask_example(enc, policy, rng, v.size());
    ASSERT_EQ(ex.targets.size(), 1u);
    const int p = ex.targets[0].position;
    EXPECT_TRUE(p == 4 || p == 8) << p;
  }
}

TEST(MaskExample, NeutralSelectionRateWithinBinomialBand) {
  sk::KnowledgeSequence s;
  for (int i = 0; i < 10000; ++i) s.tokens.push_back(tok("n"));
  std::vector<sk::KnowledgeSequence> corpus{seq_of({"n"})};
  const auto v = sk::Vocab::build(corpus, 1);
  const auto enc = sk::encode(s, v, 10002);
  sk::Rng rng(77);
  const auto ex = sk::mask_example(enc, sk::MaskPolicy{}, rng, v.size());
  const double rate = static_cast<double>(ex.targets.size()) / 10000.0;
  EXPECT_NEAR(rate, 0.15, 3 * std::sqrt(0.15 * 0.85 / 10000));
}

TEST(MaskExample, InvariantsOverManyDraws) {
  const auto g = golden_sequence();
  std::vector<sk::KnowledgeSequence> corpus{g};
  const auto v = sk::Vocab::build(corpus, 1);
  auto enc = sk::encode(g, v, 16);
  sk::pad_to(enc, 14);
  const sk::MaskPolicy policy;
  std::size_t masked_tokens = 0, random_tokens = 0, kept_tokens = 0;
  for (std::uint64_t i = 0; i < 1000000; ++i) {
    sk::Rng rng = sk::Rng::derive(3, 2, i);
    const auto ex = sk::mask_example(enc, policy, rng, v.size());
    std::size_t flagged = 0;
    for (std::size_t p = 0; p < ex.size(); ++p) {
      if (ex.mask_flags[p]) {
        ++flagged;
        ASSERT_FALSE(sk::is_special_token(enc.token_ids[p]));
        ASSERT_EQ(ex.input_pos_ids[p], sk::kPosMaskId);
        ASSERT_EQ(ex.input_polar_ids[p], sk::kPolarMaskId);
      } else {
        ASSERT_EQ(ex.input_ids[p], enc.token_ids[p]);
        ASSERT_EQ(ex.input_pos_ids[p], enc.pos_ids[p]);
      }
    }
    ASSERT_EQ(flagged, ex.targets.size());
    ASSERT_GE(flagged, 1u);
    for (const auto& t : ex.targets) {
      ASSERT_EQ(t.word_id, enc.token_ids[t.position]);
      ASSERT_EQ(t.pos_id, enc.pos_ids[t.position]);
      ASSERT_EQ(t.polar_id, enc.polar_ids[t.position]);
      const int in = ex.input_ids[t.position];
      if (in == sk::kMaskId) {
        ++masked_tokens;
      } else if (in == t.word_id) {
        ++kept_tokens;
      } else {
        ASSERT_GE(in, sk::kReservedTokens);
        ++random_tokens;
      }
    }
  }
  const double total = static_cast<double>(masked_tokens + random_tokens + kept_tokens);
  EXPECT_NEAR(masked_tokens / total, 0.8, 0.01);
  // A random replacement can coincide with the original token.
  EXPECT_NEAR((random_tokens + kept_tokens) / total, 0.2, 0.01);
}

TEST(MaskExample, GoldenSeededExample) {
  const auto g = golden_sequence();
  std::vector<sk::KnowledgeSequence> corpus{g};
  const auto v = sk::Vocab::build(corpus, 1);
  const auto enc = sk::encode(g, v, 16);
  sk::Rng rng = sk::Rng::derive(20240601, 2, 0);
  auto ex = sk::mask_example(enc, sk::MaskPolicy{}, rng, v.size());
  sk::Rng route_rng = sk::Rng::derive(20240601, 3, 0);
  ex.route = sk::route_example(0.8, route_rng);
  const std::string path = std::string(SENTIKNOW_TESTDATA) + "/mask_golden.txt";
  if (std::getenv("SENTIKNOW_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(path) << describe(ex);
  }
  std::ifstream in(path);
  ASSERT_TRUE(in) << path;
  std::stringstream expected;
  expected << in.rdbuf();
  EXPECT_EQ(describe(ex), expected.str());
}

TEST(Routing, ExtremesAndRate) {
  std::vector<sk::MaskedExample> ex(10000);
  sk::Rng rng(5);
  sk::route_partition(ex, 1.0, rng);
  for (const auto& e : ex) EXPECT_EQ(e.route, sk::Route::kEarlyFusion);
  sk::route_partition(ex, 0.0, rng);
  for (const auto& e : ex) EXPECT_EQ(e.route, sk::Route::kLateSupervision);
  sk::route_partition(ex, 0.8, rng);
  const auto ef = std::count_if(ex.begin(), ex.end(),
                                [](const auto& e) { return e.route == sk::Route::kEarlyFusion; });
  EXPECT_NEAR(static_cast<double>(ef), 8000.0, 120.0);
}

TEST(Routing, Reproducible) {
  std::vector<sk::MaskedExample> a(500), b(500);
  sk::Rng r1(9), r2(9);
  sk::route_partition(a, 0.8, r1);
  sk::route_partition(b, 0.8, r2);
  EXPECT_EQ(a, b);
}

TEST(Jsonl, RoundTrip) {
  sk::KnowledgeSequence s = golden_sequence();
  s.tokens[3].score = 1.0 / 3.0;
  s.tokens[7].score = -0.123456789012345;
  std::vector<sk::KnowledgeSequence> corpus{s, seq_of({"x"})};
  std::stringstream io;
  sk::write_jsonl(io, corpus);
  const auto back = sk::read_jsonl(io);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], corpus[0]);
  EXPECT_EQ(back[1], corpus[1]);
}

TEST(Jsonl, SchemaErrors) {
  auto field_of = [](const std::string& line) {
    try {
      sk::parse_jsonl_line(line, 4);
    } catch (const sk::SchemaError& e) {
      EXPECT_EQ(e.line(), 4u);
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of(R"({"id":"a"})"), "tokens");
  EXPECT_EQ(field_of("not json"), "<json>");
  EXPECT_EQ(field_of(R"({"id":"a","tokens":[{"w":"x","pos":"q","pol":"neutral","s":0}]})"),
            "pos");
  EXPECT_EQ(field_of(R"({"id":"a","tokens":[{"w":"x","pos":"n","pol":"neutral","s":0.5}]})"),
            "pol");
  EXPECT_EQ(field_of(R"({"id":"a","tokens":[{"w":"x","pos":"n","pol":"neutral","s":0}]})"),
            "<none>");
}
