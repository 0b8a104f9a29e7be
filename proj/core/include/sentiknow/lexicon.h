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

#ifndef SENTIKNOW_LEXICON_H_
#define SENTIKNOW_LEXICON_H_

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

namespace sentiknow {

// Coarse part-of-speech class: verb, noun, adjective, adverb, other.
// The numeric values double as the POS channel ids fed to the encoder.
enum class Pos5 : std::uint8_t {
  kVerb = 0,
  kNoun = 1,
  kAdjective = 2,
  kAdverb = 3,
  kOther = 4,
};

inline constexpr int kPos5Count = 5;

char pos5_letter(Pos5 pos);
std::optional<Pos5> pos5_from_letter(char letter);

struct SenseTerm {
  std::string lemma;
  int sense_rank = 0;

  bool operator==(const SenseTerm&) const = default;
};

// One line of a SentiWordNet 3.0 file.
struct SenseRecord {
  Pos5 pos = Pos5::kNoun;
  std::string synset_id;
  double pscore = 0.0;
  double nscore = 0.0;
  std::vector<SenseTerm> terms;
  std::string gloss;

  bool operator==(const SenseRecord&) const = default;
};

// One sense of a (lemma, POS) key.
struct SenseMatch {
  int sense_rank = 0;
  double pscore = 0.0;
  double nscore = 0.0;
  std::string gloss;
  std::string synset_id;
  Pos5 pos = Pos5::kNoun;

  // Key used for gloss caches and precomputed similarity tables. Synset
  // offsets are only unique within one POS, so the POS letter is prefixed:
  // "a00001740".
  std::string gloss_key() const;

  bool operator==(const SenseMatch&) const = default;
};

// Parses one non-comment line. Throws ParseError.
SenseRecord parse_sense_line(std::string_view line, std::size_t line_number);

// Writes records in the release layout (POS, ID, PosScore, NegScore,
// SynsetTerms, Gloss), preceded by a one-line comment header.
void write_sentiwordnet(std::ostream& out, std::span<const SenseRecord> records);

// Immutable (lemma, POS) -> senses index over a SentiWordNet file.
//
// Lines starting with '#' and blank lines are skipped. Every other line is one
// synset; it is fanned out to one entry per term it lists. Satellite
// adjectives ('s') are filed under 'a'. Lemmas are lowercased at parse and at
// query time. Each key's senses are ordered by ascending sense rank.
class Lexicon {
 public:
  Lexicon() = default;

  static Lexicon parse(std::istream& in);
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon from_records(std::span<const SenseRecord> records);

  // Empty span when the key is unknown. Never mutates.
  std::span<const SenseMatch> lookup(std::string_view lemma, Pos5 pos) const;

  // Number of synset lines parsed.
  std::size_t entry_count() const { return entry_count_; }
  // Number of distinct (lemma, POS) keys.
  std::size_t key_count() const { return index_.size(); }

  template <typename Fn>
  void for_each_key(Fn&& fn) const {
    for (const auto& [key, senses] : index_) {
      fn(std::string_view(key).substr(2), *pos5_from_letter(key[0]),
         std::span<const SenseMatch>(senses));
    }
  }

 private:
  void add(const SenseRecord& record, std::size_t line_number);
  void finish();

  // Key layout: "<pos letter>:<lemma>".
  std::unordered_map<std::string, std::vector<SenseMatch>> index_;
  std::size_t entry_count_ = 0;
};

}  // namespace sentiknow

#endif  // SENTIKNOW_LEXICON_H_
