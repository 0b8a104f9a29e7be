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

#ifndef SENTIKNOW_EMBEDDINGS_H_
#define SENTIKNOW_EMBEDDINGS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace sentiknow {

using Vector = std::vector<double>;

// Pre-trained word vectors in the GloVe text layout: a word followed by
// `dim` whitespace-separated floats per line. The first data line fixes
// `dim`; duplicate words keep their first vector.
class VectorStore {
 public:
  VectorStore() = default;

  static VectorStore parse(std::istream& in);
  static VectorStore load(const std::filesystem::path& path);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }

  // nullptr when the word is absent. Spans dim() doubles.
  const double* find(std::string_view word) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> rows_;
  std::vector<double> data_;
};

struct SentenceEmbedding {
  Vector mean;
  std::size_t coverage = 0;
};

// Mean of the in-store token vectors; the zero vector when none are found.
SentenceEmbedding sentence_embedding(const VectorStore& store,
                                     std::span<const std::string> tokens);

// u.v / (|u||v|); 0 when either norm is zero. Throws LengthMismatch.
double cosine(std::span<const double> u, std::span<const double> v);

// Lowercase and split on runs of non-alphanumeric characters.
std::vector<std::string> tokenize_gloss(std::string_view gloss);

// Gloss embeddings keyed by gloss key, filled on first use.
class GlossEmbeddingCache {
 public:
  explicit GlossEmbeddingCache(std::shared_ptr<const VectorStore> store)
      : store_(std::move(store)) {}

  const SentenceEmbedding& get(std::string_view gloss_key,
                               std::string_view gloss) const;

 private:
  std::shared_ptr<const VectorStore> store_;
  mutable std::shared_mutex mutex_;
  // unique_ptr keeps references stable across rehashes.
  mutable std::unordered_map<std::string, std::unique_ptr<SentenceEmbedding>>
      cache_;
};

struct WordVectorAverage {
  std::shared_ptr<const VectorStore> store;
  std::shared_ptr<GlossEmbeddingCache> gloss_cache;

  explicit WordVectorAverage(std::shared_ptr<const VectorStore> s)
      : store(s), gloss_cache(std::make_shared<GlossEmbeddingCache>(s)) {}
};

// Externally computed similarities (for example from a neural sentence
// encoder). Scores must lie in [-1, 1]; absent pairs are an error.
struct Precomputed {
  std::unordered_map<std::string, double> table;

  void insert(std::string_view context_key, std::string_view gloss_key,
              double score);
  const double* find(std::string_view context_key,
                     std::string_view gloss_key) const;
};

using SimilaritySource = std::variant<WordVectorAverage, Precomputed>;

// Tab-separated "context_key<TAB>gloss_key<TAB>score" lines.
Precomputed load_precomputed(std::istream& in);
Precomputed load_precomputed(const std::filesystem::path& path);

struct SimilarityEntry {
  std::string context_key;
  std::string gloss_key;
  double score = 0.0;
};

// Scores are written with round-trip precision so that reloading them
// reproduces the exact doubles.
void write_precomputed(std::ostream& out,
                       std::span<const SimilarityEntry> entries);

// sim(context, gloss). Throws MissingSimilarity for absent precomputed pairs.
double similarity(const SimilaritySource& source,
                  std::span<const std::string> context_tokens,
                  std::string_view context_key,
                  std::span<const std::string> gloss_tokens,
                  std::string_view gloss_key);

}  // namespace sentiknow

#endif  // SENTIKNOW_EMBEDDINGS_H_
