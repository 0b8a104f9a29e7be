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

#ifndef SENTIKNOW_CORPUS_H_
#define SENTIKNOW_CORPUS_H_

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

#include "sentiknow/acquisition.h"
#include "sentiknow/rng.h"

namespace sentiknow {

// Reserved token ids.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;
inline constexpr int kMaskId = 4;
inline constexpr int kReservedTokens = 5;

// Mask indices of the knowledge channels (one past the real classes).
inline constexpr int kPosMaskId = kPos5Count;         // 5
inline constexpr int kPolarMaskId = kPolarityCount;   // 3

inline constexpr int kPosOther = static_cast<int>(Pos5::kOther);
inline constexpr int kPolarNeutral = static_cast<int>(Polarity::kNeutral);

// Word-level vocabulary. Ids 0..4 are [PAD] [UNK] [CLS] [SEP] [MASK]; the
// rest follow descending frequency, ties broken lexicographically.
class Vocab {
 public:
  Vocab();

  static Vocab build(std::span<const KnowledgeSequence> corpus,
                     std::size_t min_freq);
  static Vocab from_counts(const std::unordered_map<std::string, std::size_t>& counts,
                           std::size_t min_freq);

  // "token<TAB>id" per line, ids in order.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static Vocab load(std::istream& in);
  static Vocab load(const std::filesystem::path& path);

  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  void append(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct EncodedSequence {
  std::vector<int> token_ids;
  std::vector<int> pos_ids;
  std::vector<int> polar_ids;
  std::vector<int> segment_ids;
  std::optional<int> label;
  // Content tokens dropped by truncation.
  std::size_t truncated = 0;

  std::size_t size() const { return token_ids.size(); }
  bool operator==(const EncodedSequence&) const = default;
};

// [CLS] x_1..x_k [SEP] with k = min(n, max_len - 2). Special tokens carry
// pos=o and polarity=neutral. Throws InvalidConfig when max_len < 3.
EncodedSequence encode(const KnowledgeSequence& seq, const Vocab& vocab,
                       std::size_t max_len);

// [CLS] a_1..a_l [SEP] x_1..x_n [SEP]; segment 0 through the first [SEP],
// 1 after. Truncates the longer side first. The label is taken from
// `second`. Throws InvalidConfig when max_len < 5.
EncodedSequence encode_pair(const KnowledgeSequence& first,
                            const KnowledgeSequence& second, const Vocab& vocab,
                            std::size_t max_len);

// Appends [PAD] positions up to `length`.
void pad_to(EncodedSequence& seq, std::size_t length);

bool is_special_token(int id);

enum class Route : std::uint8_t { kEarlyFusion, kLateSupervision };

struct MaskTarget {
  int position = 0;
  int word_id = 0;
  int pos_id = 0;
  int polar_id = 0;

  bool operator==(const MaskTarget&) const = default;
};

struct MaskedExample {
  std::vector<int> input_ids;
  std::vector<int> input_pos_ids;
  std::vector<int> input_polar_ids;
  std::vector<int> segment_ids;
  std::vector<std::uint8_t> mask_flags;
  std::vector<MaskTarget> targets;
  Route route = Route::kEarlyFusion;
  std::optional<int> label;

  std::size_t size() const { return input_ids.size(); }
  bool operator==(const MaskedExample&) const = default;
};

// Selection and corruption probabilities for masked-token training.
struct MaskPolicy {
  double p_neutral = 0.15;
  double p_sentiment = 0.30;
  double mask_fraction = 0.8;
  double random_fraction = 0.1;
  double keep_fraction = 0.1;
  // When sampling selects nothing, select one of the highest-probability
  // positions so every example carries a target.
  bool force_select = true;

  void validate() const;
};

// Wraps an unmasked sequence (no targets); used for fine-tuning inputs.
MaskedExample unmasked(const EncodedSequence& enc);

// Each content position is selected independently with p_sentiment when its
// polarity is positive/negative and p_neutral otherwise. Selected words are
// replaced by [MASK] / a random non-reserved id / kept per the corruption
// split; the pos and polarity channels of every selected position are set to
// their mask ids regardless of the branch.
MaskedExample mask_example(const EncodedSequence& enc, const MaskPolicy& policy,
                           Rng& rng, int vocab_size);

Route route_example(double ef_fraction, Rng& rng);

// Independent Bernoulli(ef_fraction) route per example.
void route_partition(std::span<MaskedExample> examples, double ef_fraction,
                     Rng& rng);

// JSONL corpus: {"id":..,"tokens":[{"w","pos","pol","s","m"}..],"label":..}
// "label" is omitted when absent; "m" (sense count) is optional on read.
std::string to_jsonl_line(const KnowledgeSequence& seq);
KnowledgeSequence parse_jsonl_line(std::string_view line, std::size_t line_number);
void write_jsonl(std::ostream& out, std::span<const KnowledgeSequence> corpus);
void write_jsonl(const std::filesystem::path& path,
                 std::span<const KnowledgeSequence> corpus);
std::vector<KnowledgeSequence> read_jsonl(std::istream& in);
std::vector<KnowledgeSequence> read_jsonl(const std::filesystem::path& path);

}  // namespace sentiknow

#endif  // SENTIKNOW_CORPUS_H_
