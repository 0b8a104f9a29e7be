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

#ifndef SENTIKNOW_ACQUISITION_H_
#define SENTIKNOW_ACQUISITION_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sentiknow/embeddings.h"
#include "sentiknow/lexicon.h"

namespace sentiknow {

// Word-level polarity. Values double as the polarity channel ids.
enum class Polarity : std::uint8_t {
  kPositive = 0,
  kNegative = 1,
  kNeutral = 2,
};

inline constexpr int kPolarityCount = 3;

std::string_view polarity_name(Polarity p);
std::optional<Polarity> polarity_from_name(std::string_view name);

struct KnowledgeToken {
  std::string word;
  Pos5 pos = Pos5::kOther;
  Polarity polarity = Polarity::kNeutral;
  double score = 0.0;
  int sense_count = 0;

  bool operator==(const KnowledgeToken&) const = default;
};

struct KnowledgeSequence {
  std::vector<KnowledgeToken> tokens;
  std::optional<int> label;
  std::string id;

  bool operator==(const KnowledgeSequence&) const = default;
};

// Treebank tag -> coarse class:
//   VB*  -> v      NN*  -> n      JJ*  -> a      RB*  -> r
//   anything else (including unknown strings) -> o
Pos5 collapse_pos(std::string_view treebank_tag);

// Most-frequent-class tagger learned from "token<TAB>tag" lines. Unknown
// words fall back to suffix_guess().
class FrequencyTagger {
 public:
  void add(std::string_view word, Pos5 pos);
  void train(std::istream& tagged);
  static FrequencyTagger load(const std::filesystem::path& path);

  Pos5 tag(std::string_view word) const;
  std::size_t known_words() const { return counts_.size(); }

  // Suffix table, first match wins:
  //   -ly -> r
  //   -ing, -ed -> v
  //   -ous, -ful, -ive, -able, -ible, -al, -ic, -less, -ish -> a
  //   -tion, -sion, -ness, -ment, -ity, -ism, -s -> n
  //   otherwise o
  static Pos5 suffix_guess(std::string_view word);

 private:
  std::unordered_map<std::string, std::array<std::size_t, kPos5Count>> counts_;
};

// One Pos5 per token from caller-supplied treebank tags.
// Throws TagCountMismatch when the lengths differ.
std::vector<Pos5> tag_tokens(std::span<const std::string> treebank_tags,
                             std::span<const std::string> tokens);
std::vector<Pos5> tag_tokens(const FrequencyTagger& tagger,
                             std::span<const std::string> tokens);

// Candidate lemmas: the word itself, then morphy-style detachment rules for
// the POS, then undoubled final consonants ("runn" -> "run"). Order is
// preserved and duplicates dropped.
//   n: -ses>-s -xes>-x -zes>-z -ches>-ch -shes>-sh -men>-man -ies>-y -s>
//   v: -ies>-y -es>-e -es> -ed>-e -ed> -ing>-e -ing> -s>
//   a: -er> -est> -er>-e -est>-e
//   r: none
std::vector<std::string> lemmatize(std::string_view word, Pos5 pos);

// softmax_j(sim_j / rank_j). Throws EmptySenses / LengthMismatch.
std::vector<double> sense_attention(std::span<const double> context_sim,
                                    std::span<const int> sense_ranks);

// Normalized reciprocal ranks, the context-free prior.
std::vector<double> context_free_weights(std::span<const int> sense_ranks);

// sum_j w_j (P_j - N_j), clamped to [-1, 1].
double sentiment_score(std::span<const double> weights,
                       std::span<const SenseMatch> senses);

// Strict sign test; there is no tolerance band around zero.
Polarity assign_polarity(double score);

enum class AttentionMode { kContextAware, kContextFreePrior };

// Tokens entering the pipeline, optionally with their treebank tags.
struct RawSentence {
  std::vector<std::string> tokens;
  std::optional<std::vector<std::string>> tags;
  std::optional<int> label;
  std::string id;
};

// Lowercases and splits text into word runs ([A-Za-z0-9'-]) and single
// punctuation characters.
std::vector<std::string> tokenize_text(std::string_view text);

// One sentence per non-blank line; with `labeled`, lines are
// "label<TAB>text". Ids are "<prefix><n>" with n counting from 1.
std::vector<RawSentence> read_raw_sentences(std::istream& in, bool labeled,
                                            std::string_view id_prefix = "s");

// "token<TAB>tag" per line, blank line between sentences. Comment lines
// "# label=<int>" and "# id=<text>" apply to the sentence that follows.
std::vector<RawSentence> read_tagged_sentences(std::istream& in,
                                               std::string_view id_prefix = "s");
void write_tagged_sentences(std::ostream& out,
                            std::span<const RawSentence> sentences);

struct AnnotatorOptions {
  AttentionMode mode = AttentionMode::kContextAware;
  // Context fed to the similarity: 0 means the whole sequence, otherwise
  // the `context_window` tokens on either side of the word.
  std::size_t context_window = 0;
};

// Produces knowledge-enhanced sequences. Stateless apart from the gloss
// embedding cache, so one instance can serve many threads.
class Annotator {
 public:
  // `similarity` may be empty for the context-free prior. `tagger` may be
  // null when every input carries tags.
  Annotator(const Lexicon& lexicon, std::optional<SimilaritySource> similarity,
            const FrequencyTagger* tagger, AnnotatorOptions options = {});

  // Appends every similarity it computes to `log` when non-null.
  KnowledgeSequence annotate(const RawSentence& input,
                             std::vector<SimilarityEntry>* log = nullptr) const;

  std::vector<KnowledgeSequence> annotate_all(
      std::span<const RawSentence> inputs, std::size_t workers = 1,
      std::vector<SimilarityEntry>* log = nullptr) const;

  const AnnotatorOptions& options() const { return options_; }

 private:
  std::string context_key(const RawSentence& input, std::size_t index) const;

  const Lexicon& lexicon_;
  std::optional<SimilaritySource> similarity_;
  const FrequencyTagger* tagger_;
  AnnotatorOptions options_;
};

}  // namespace sentiknow

#endif  // SENTIKNOW_ACQUISITION_H_
