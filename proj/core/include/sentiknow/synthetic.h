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

#ifndef SENTIKNOW_SYNTHETIC_H_
#define SENTIKNOW_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>
#include <string>

#include "sentiknow/acquisition.h"
#include "sentiknow/corpus.h"
#include "sentiknow/lexicon.h"

namespace sentiknow {

// Word sets for the toy task. Sentiment words are single-sense adjectives
// with score +magnitude or -magnitude; fillers are objective nouns.
struct SyntheticSpec {
  std::vector<std::string> positive_train;
  std::vector<std::string> negative_train;
  // Used for the test split when vocab_disjoint is set.
  std::vector<std::string> positive_test;
  std::vector<std::string> negative_test;
  std::vector<std::string> fillers;
  double magnitude = 0.5;
  int min_sentiment = 1;
  int max_sentiment = 3;
  int min_fillers = 2;
  int max_fillers = 6;

  // Generated word lists of the given sizes.
  static SyntheticSpec generated(std::size_t words_per_set, std::size_t fillers);
  // Throws InvalidSpec.
  void validate(bool vocab_disjoint) const;
};

// Label of a generated sentence: 1 when the scores sum above zero, else 0.
inline constexpr int kSyntheticPositive = 1;
inline constexpr int kSyntheticNegative = 0;

struct SyntheticData {
  std::vector<RawSentence> train;
  std::vector<RawSentence> test;
  // Toy lexicon covering every word of both splits.
  std::vector<SenseRecord> lexicon;
};

// Random sentences of sentiment words and fillers with treebank tags (JJ for
// sentiment words, NN for fillers). Sentences whose scores sum to zero are
// redrawn. With vocab_disjoint, test sentences draw sentiment words only
// from the test sets.
SyntheticData make_synthetic(const SyntheticSpec& spec, std::size_t n_train,
                             std::size_t n_test, std::uint64_t seed,
                             bool vocab_disjoint);

// Writes lexicon.txt, train.tagged and test.tagged into `dir`.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

// Random encoded sequences for gradient checks and benchmarks: content
// lengths uniform in [max(1, length / 2), length], random non-reserved word
// ids, POS and polarity classes, labels in [0, label_count), all padded to
// length + 2.
std::vector<EncodedSequence> random_sequences(int vocab_size, std::size_t count,
                                              std::size_t length, int label_count,
                                              std::uint64_t seed);

}  // namespace sentiknow

#endif  // SENTIKNOW_SYNTHETIC_H_
