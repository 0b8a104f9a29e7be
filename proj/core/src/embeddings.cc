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

#include "sentiknow/embeddings.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "sentiknow/errors.h"
#include "text_util.h"

namespace sentiknow {
namespace {

std::string pair_key(std::string_view context_key, std::string_view gloss_key) {
  std::string key(context_key);
  key.push_back('\t');
  key.append(gloss_key);
  return key;
}

}  // namespace

VectorStore VectorStore::parse(std::istream& in) {
  VectorStore store;
  std::string line;
  std::size_t line_number = 0;
  Vector row;
  while (std::getline(in, line)) {
    ++line_number;
    auto fields = text::split_whitespace(line);
    if (fields.empty()) continue;
    const std::size_t count = fields.size() - 1;
    if (store.dim_ == 0) {
      if (count == 0) throw ParseError(line_number, "word without a vector");
      store.dim_ = count;
    } else if (count != store.dim_) {
      throw ParseError(line_number, "expected " + std::to_string(store.dim_) +
                                        " floats, found " +
                                        std::to_string(count));
    }
    row.clear();
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto value = text::parse_double(fields[i]);
      if (!value) {
        throw ParseError(line_number,
                         "bad float '" + std::string(fields[i]) + "'");
      }
      row.push_back(*value);
    }
    auto [it, inserted] =
        store.rows_.try_emplace(std::string(fields[0]), store.rows_.size());
    if (inserted) store.data_.insert(store.data_.end(), row.begin(), row.end());
  }
  return store;
}

VectorStore VectorStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vector file " + path.string());
  return parse(in);
}

const double* VectorStore::find(std::string_view word) const {
  auto it = rows_.find(std::string(word));
  if (it == rows_.end()) return nullptr;
  return data_.data() + it->second * dim_;
}

SentenceEmbedding sentence_embedding(const VectorStore& store,
                                     std::span<const std::string> tokens) {
  SentenceEmbedding out;
  out.mean.assign(store.dim(), 0.0);
  for (const std::string& token : tokens) {
    const double* v = store.find(token);
    if (v == nullptr) continue;
    for (std::size_t i = 0; i < store.dim(); ++i) out.mean[i] += v[i];
    ++out.coverage;
  }
  if (out.coverage > 0) {
    const double inv = 1.0 / static_cast<double>(out.coverage);
    for (double& x : out.mean) x *= inv;
  }
  return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw LengthMismatch(u.size(), v.size());
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  const double c = dot / std::sqrt(uu * vv);
  return std::clamp(c, -1.0, 1.0);
}

std::vector<std::string> tokenize_gloss(std::string_view gloss) {
  std::vector<std::string> out;
  std::string current;
  for (char c : gloss) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

const SentenceEmbedding& GlossEmbeddingCache::get(
    std::string_view gloss_key, std::string_view gloss) const {
  const std::string key(gloss_key);
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  auto embedding = std::make_unique<SentenceEmbedding>(
      sentence_embedding(*store_, tokenize_gloss(gloss)));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = cache_.try_emplace(key, std::move(embedding));
  return *it->second;
}

void Precomputed::insert(std::string_view context_key,
                         std::string_view gloss_key, double score) {
  table.insert_or_assign(pair_key(context_key, gloss_key), score);
}

const double* Precomputed::find(std::string_view context_key,
                                std::string_view gloss_key) const {
  auto it = table.find(pair_key(context_key, gloss_key));
  return it == table.end() ? nullptr : &it->second;
}

Precomputed load_precomputed(std::istream& in) {
  Precomputed out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != 3) throw ParseError(line_number, "expected 3 fields");
    auto score = text::parse_double(fields[2]);
    if (!score) throw ParseError(line_number, "bad score");
    if (!(*score >= -1.0 && *score <= 1.0)) {
      throw ParseError(line_number, "score outside [-1,1]");
    }
    out.insert(fields[0], fields[1], *score);
  }
  return out;
}

Precomputed load_precomputed(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open similarity file " + path.string());
  return load_precomputed(in);
}

void write_precomputed(std::ostream& out,
                       std::span<const SimilarityEntry> entries) {
  for (const SimilarityEntry& e : entries) {
    out << e.context_key << '\t' << e.gloss_key << '\t'
        << text::format_double(e.score) << '\n';
  }
}

double similarity(const SimilaritySource& source,
                  std::span<const std::string> context_tokens,
                  std::string_view context_key,
                  std::span<const std::string> gloss_tokens,
                  std::string_view gloss_key) {
  if (const auto* pre = std::get_if<Precomputed>(&source)) {
    const double* score = pre->find(context_key, gloss_key);
    if (score == nullptr) {
      throw MissingSimilarity(std::string(context_key), std::string(gloss_key));
    }
    return *score;
  }
  const auto& wva = std::get<WordVectorAverage>(source);
  const SentenceEmbedding context = sentence_embedding(*wva.store, context_tokens);
  const SentenceEmbedding gloss = sentence_embedding(*wva.store, gloss_tokens);
  return cosine(context.mean, gloss.mean);
}

}  // namespace sentiknow
