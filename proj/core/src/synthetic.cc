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

#include "sentiknow/synthetic.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "sentiknow/errors.h"
#include "sentiknow/rng.h"

namespace sentiknow {
namespace {

std::vector<std::string> numbered(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%03zu", prefix, i);
    out.emplace_back(buf);
  }
  return out;
}

int draw_between(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

RawSentence draw_sentence(const SyntheticSpec& spec,
                          const std::vector<std::string>& positive,
                          const std::vector<std::string>& negative, Rng& rng) {
  for (;;) {
    const int k = draw_between(rng, spec.min_sentiment, spec.max_sentiment);
    const int f = draw_between(rng, spec.min_fillers, spec.max_fillers);
    std::vector<std::pair<std::string, std::string>> words;
    int balance = 0;
    for (int i = 0; i < k; ++i) {
      if (rng.bernoulli(0.5)) {
        words.emplace_back(positive[rng.below(positive.size())], "JJ");
        ++balance;
      } else {
        words.emplace_back(negative[rng.below(negative.size())], "JJ");
        --balance;
      }
    }
    if (balance == 0) continue;
    for (int i = 0; i < f; ++i) {
      words.emplace_back(spec.fillers[rng.below(spec.fillers.size())], "NN");
    }
    for (std::size_t i = words.size(); i > 1; --i) {
      std::swap(words[i - 1], words[rng.below(i)]);
    }
    RawSentence s;
    std::vector<std::string> tags;
    for (auto& [w, t] : words) {
      s.tokens.push_back(std::move(w));
      tags.push_back(std::move(t));
    }
    s.tags = std::move(tags);
    s.label = balance > 0 ? kSyntheticPositive : kSyntheticNegative;
    return s;
  }
}

}  // namespace

SyntheticSpec SyntheticSpec::generated(std::size_t words_per_set,
                                       std::size_t fillers) {
  SyntheticSpec s;
  s.positive_train = numbered("ptr", words_per_set);
  s.negative_train = numbered("ntr", words_per_set);
  s.positive_test = numbered("pte", words_per_set);
  s.negative_test = numbered("nte", words_per_set);
  s.fillers = numbered("fil", fillers);
  return s;
}

void SyntheticSpec::validate(bool vocab_disjoint) const {
  if (positive_train.empty() || negative_train.empty()) {
    throw InvalidSpec("training sentiment word sets must be non-empty");
  }
  if (vocab_disjoint && (positive_test.empty() || negative_test.empty())) {
    throw InvalidSpec("disjoint test sentiment word sets must be non-empty");
  }
  if (!(magnitude > 0.0 && magnitude <= 1.0)) {
    throw InvalidSpec("magnitude must be in (0, 1]");
  }
  if (min_sentiment < 1 || max_sentiment < min_sentiment) {
    throw InvalidSpec("bad sentiment word count range");
  }
  if (min_fillers < 0 || max_fillers < min_fillers) {
    throw InvalidSpec("bad filler count range");
  }
  if (max_fillers > 0 && fillers.empty()) throw InvalidSpec("filler set is empty");
  std::set<std::string> seen;
  for (const auto* set : {&positive_train, &negative_train, &positive_test,
                          &negative_test, &fillers}) {
    for (const std::string& w : *set) {
      if (w.empty() || w.find_first_of(" \t\n") != std::string::npos) {
        throw InvalidSpec("words must be non-empty and contain no whitespace");
      }
      if (!seen.insert(w).second) throw InvalidSpec("word '" + w + "' appears twice");
    }
  }
}

SyntheticData make_synthetic(const SyntheticSpec& spec, std::size_t n_train,
                             std::size_t n_test, std::uint64_t seed,
                             bool vocab_disjoint) {
  spec.validate(vocab_disjoint);
  SyntheticData data;
  Rng train_rng = Rng::derive(seed, 1, 0);
  Rng test_rng = Rng::derive(seed, 2, 0);
  for (std::size_t i = 0; i < n_train; ++i) {
    data.train.push_back(
        draw_sentence(spec, spec.positive_train, spec.negative_train, train_rng));
    data.train.back().id = "train" + std::to_string(i + 1);
  }
  const auto& pos = vocab_disjoint ? spec.positive_test : spec.positive_train;
  const auto& neg = vocab_disjoint ? spec.negative_test : spec.negative_train;
  for (std::size_t i = 0; i < n_test; ++i) {
    data.test.push_back(draw_sentence(spec, pos, neg, test_rng));
    data.test.back().id = "test" + std::to_string(i + 1);
  }

  int synset = 1;
  auto add = [&](const std::string& w, Pos5 p, double ps, double ns,
                 const char* gloss) {
    char id[16];
    std::snprintf(id, sizeof id, "%08d", synset++);
    data.lexicon.push_back(SenseRecord{p, id, ps, ns, {SenseTerm{w, 1}}, gloss});
  };
  for (const auto& w : spec.positive_train) add(w, Pos5::kAdjective, spec.magnitude, 0.0, "pleasing");
  for (const auto& w : spec.positive_test) add(w, Pos5::kAdjective, spec.magnitude, 0.0, "pleasing");
  for (const auto& w : spec.negative_train) add(w, Pos5::kAdjective, 0.0, spec.magnitude, "unpleasant");
  for (const auto& w : spec.negative_test) add(w, Pos5::kAdjective, 0.0, spec.magnitude, "unpleasant");
  for (const auto& w : spec.fillers) add(w, Pos5::kNoun, 0.0, 0.0, "an object");
  return data;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("lexicon.txt");
    write_sentiwordnet(out, data.lexicon);
  }
  {
    auto out = open("train.tagged");
    write_tagged_sentences(out, data.train);
  }
  {
    auto out = open("test.tagged");
    write_tagged_sentences(out, data.test);
  }
}

std::vector<EncodedSequence> random_sequences(int vocab_size, std::size_t count,
                                              std::size_t length, int label_count,
                                              std::uint64_t seed) {
  if (vocab_size <= kReservedTokens || length < 1 || label_count < 1) {
    throw InvalidSpec("random sequences need words, length and labels");
  }
  Rng rng(seed);
  const auto words = static_cast<std::uint64_t>(vocab_size - kReservedTokens);
  const std::size_t shortest = std::max<std::size_t>(1, length / 2);
  std::vector<EncodedSequence> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = shortest + rng.below(length - shortest + 1);
    EncodedSequence e;
    e.token_ids.push_back(kClsId);
    e.pos_ids.push_back(kPosOther);
    e.polar_ids.push_back(kPolarNeutral);
    for (std::size_t t = 0; t < n; ++t) {
      e.token_ids.push_back(kReservedTokens + static_cast<int>(rng.below(words)));
      e.pos_ids.push_back(static_cast<int>(rng.below(kPos5Count)));
      e.polar_ids.push_back(static_cast<int>(rng.below(kPolarityCount)));
    }
    e.token_ids.push_back(kSepId);
    e.pos_ids.push_back(kPosOther);
    e.polar_ids.push_back(kPolarNeutral);
    e.segment_ids.assign(e.token_ids.size(), 0);
    e.label = static_cast<int>(rng.below(static_cast<std::uint64_t>(label_count)));
    pad_to(e, length + 2);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace sentiknow
