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

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "sentiknow/errors.h"
#include "text_util.h"

namespace sentiknow {
namespace {

constexpr const char* kReservedNames[kReservedTokens] = {
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};

void push_special(EncodedSequence& out, int id, int segment) {
  out.token_ids.push_back(id);
  out.pos_ids.push_back(kPosOther);
  out.polar_ids.push_back(kPolarNeutral);
  out.segment_ids.push_back(segment);
}

void push_tokens(EncodedSequence& out, const KnowledgeSequence& seq,
                 std::size_t count, const Vocab& vocab, int segment) {
  for (std::size_t i = 0; i < count; ++i) {
    const KnowledgeToken& t = seq.tokens[i];
    out.token_ids.push_back(vocab.id(t.word));
    out.pos_ids.push_back(static_cast<int>(t.pos));
    out.polar_ids.push_back(static_cast<int>(t.polarity));
    out.segment_ids.push_back(segment);
  }
}

}  // namespace

Vocab::Vocab() {
  for (const char* name : kReservedNames) append(name);
}

void Vocab::append(std::string token) {
  ids_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocab Vocab::from_counts(
    const std::unordered_map<std::string, std::size_t>& counts,
    std::size_t min_freq) {
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, count] : counts) {
    if (count >= min_freq && count > 0) kept.emplace_back(token, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocab vocab;
  for (auto& [token, count] : kept) {
    if (!vocab.contains(token)) vocab.append(std::move(token));
  }
  return vocab;
}

Vocab Vocab::build(std::span<const KnowledgeSequence> corpus,
                   std::size_t min_freq) {
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const KnowledgeSequence& seq : corpus) {
    for (const KnowledgeToken& t : seq.tokens) {
      ++counts[t.word];
      ++total;
    }
  }
  if (total == 0) throw EmptyCorpus();
  return from_counts(counts, min_freq);
}

void Vocab::save(std::ostream& out) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i] << '\t' << i << '\n';
  }
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary " + path.string());
  save(out);
}

Vocab Vocab::load(std::istream& in) {
  Vocab vocab;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != 2) throw ParseError(line_number, "expected token<TAB>id");
    auto id = text::parse_int<int>(fields[1]);
    if (!id) throw ParseError(line_number, "bad id");
    if (*id < kReservedTokens) {
      if (fields[0] != kReservedNames[*id]) {
        throw ParseError(line_number, "reserved id " + std::to_string(*id) +
                                          " must be " + kReservedNames[*id]);
      }
      continue;
    }
    if (*id != vocab.size()) throw ParseError(line_number, "ids must be dense");
    if (vocab.contains(fields[0])) throw ParseError(line_number, "duplicate token");
    vocab.append(std::string(fields[0]));
  }
  return vocab;
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary " + path.string());
  return load(in);
}

int Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return ids_.find(std::string(token)) != ids_.end();
}

bool is_special_token(int id) {
  return id == kPadId || id == kClsId || id == kSepId;
}

EncodedSequence encode(const KnowledgeSequence& seq, const Vocab& vocab,
                       std::size_t max_len) {
  if (max_len < 3) throw InvalidConfig("max_len must be at least 3");
  EncodedSequence out;
  const std::size_t keep = std::min(seq.tokens.size(), max_len - 2);
  out.truncated = seq.tokens.size() - keep;
  push_special(out, kClsId, 0);
  push_tokens(out, seq, keep, vocab, 0);
  push_special(out, kSepId, 0);
  out.label = seq.label;
  return out;
}

EncodedSequence encode_pair(const KnowledgeSequence& first,
                            const KnowledgeSequence& second, const Vocab& vocab,
                            std::size_t max_len) {
  if (max_len < 5) throw InvalidConfig("max_len must be at least 5 for pairs");
  std::size_t a = first.tokens.size();
  std::size_t b = second.tokens.size();
  while (a + b > max_len - 3) {
    if (a >= b) {
      --a;
    } else {
      --b;
    }
  }
  EncodedSequence out;
  out.truncated = first.tokens.size() - a + second.tokens.size() - b;
  push_special(out, kClsId, 0);
  push_tokens(out, first, a, vocab, 0);
  push_special(out, kSepId, 0);
  push_tokens(out, second, b, vocab, 1);
  push_special(out, kSepId, 1);
  out.label = second.label;
  return out;
}

void pad_to(EncodedSequence& seq, std::size_t length) {
  while (seq.size() < length) push_special(seq, kPadId, 0);
}

void MaskPolicy::validate() const {
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(p_neutral) || !in_unit(p_sentiment) || !in_unit(mask_fraction) ||
      !in_unit(random_fraction) || !in_unit(keep_fraction)) {
    throw InvalidConfig("mask probabilities must lie in [0,1]");
  }
  if (std::abs(mask_fraction + random_fraction + keep_fraction - 1.0) > 1e-9) {
    throw InvalidConfig("mask/random/keep split must sum to 1");
  }
}

MaskedExample unmasked(const EncodedSequence& enc) {
  MaskedExample ex;
  ex.input_ids = enc.token_ids;
  ex.input_pos_ids = enc.pos_ids;
  ex.input_polar_ids = enc.polar_ids;
  ex.segment_ids = enc.segment_ids;
  ex.mask_flags.assign(enc.size(), 0);
  ex.label = enc.label;
  return ex;
}

MaskedExample mask_example(const EncodedSequence& enc, const MaskPolicy& policy,
                           Rng& rng, int vocab_size) {
  MaskedExample ex = unmasked(enc);
  const std::size_t n = enc.size();
  std::vector<double> prob(n, 0.0);
  std::vector<std::size_t> selected;
  double best = -1.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (is_special_token(enc.token_ids[t])) continue;
    const int polar = enc.polar_ids[t];
    const bool sentiment = polar == static_cast<int>(Polarity::kPositive) ||
                           polar == static_cast<int>(Polarity::kNegative);
    prob[t] = sentiment ? policy.p_sentiment : policy.p_neutral;
    best = std::max(best, prob[t]);
    if (rng.bernoulli(prob[t])) selected.push_back(t);
  }
  if (selected.empty() && policy.force_select && best >= 0.0) {
    std::vector<std::size_t> top;
    for (std::size_t t = 0; t < n; ++t) {
      if (!is_special_token(enc.token_ids[t]) && prob[t] == best) top.push_back(t);
    }
    selected.push_back(top[rng.below(top.size())]);
  }

  const int random_span = vocab_size - kReservedTokens;
  for (std::size_t t : selected) {
    ex.targets.push_back({static_cast<int>(t), enc.token_ids[t], enc.pos_ids[t],
                          enc.polar_ids[t]});
    ex.mask_flags[t] = 1;
    ex.input_pos_ids[t] = kPosMaskId;
    ex.input_polar_ids[t] = kPolarMaskId;
    const double r = rng.uniform();
    if (r < policy.mask_fraction) {
      ex.input_ids[t] = kMaskId;
    } else if (r < policy.mask_fraction + policy.random_fraction) {
      ex.input_ids[t] = random_span > 0
          ? kReservedTokens + static_cast<int>(rng.below(
                                  static_cast<std::uint64_t>(random_span)))
          : kMaskId;
    }
  }
  return ex;
}

Route route_example(double ef_fraction, Rng& rng) {
  return rng.bernoulli(ef_fraction) ? Route::kEarlyFusion
                                    : Route::kLateSupervision;
}

void route_partition(std::span<MaskedExample> examples, double ef_fraction,
                     Rng& rng) {
  if (!(ef_fraction >= 0.0 && ef_fraction <= 1.0)) {
    throw InvalidConfig("ef_fraction must lie in [0,1]");
  }
  for (MaskedExample& ex : examples) ex.route = route_example(ef_fraction, rng);
}

std::string to_jsonl_line(const KnowledgeSequence& seq) {
  nlohmann::ordered_json j;
  j["id"] = seq.id;
  auto tokens = nlohmann::ordered_json::array();
  for (const KnowledgeToken& t : seq.tokens) {
    nlohmann::ordered_json tok;
    tok["w"] = t.word;
    tok["pos"] = std::string(1, pos5_letter(t.pos));
    tok["pol"] = polarity_name(t.polarity);
    tok["s"] = t.score;
    tok["m"] = t.sense_count;
    tokens.push_back(std::move(tok));
  }
  j["tokens"] = std::move(tokens);
  if (seq.label) j["label"] = *seq.label;
  return j.dump();
}

KnowledgeSequence parse_jsonl_line(std::string_view line,
                                   std::size_t line_number) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw SchemaError(line_number, "<json>");
  }
  if (!j.is_object()) throw SchemaError(line_number, "<object>");

  KnowledgeSequence seq;
  if (j.contains("id")) {
    if (!j["id"].is_string()) throw SchemaError(line_number, "id");
    seq.id = j["id"].get<std::string>();
  }
  if (j.contains("label") && !j["label"].is_null()) {
    if (!j["label"].is_number_integer() || j["label"].get<int>() < 0) {
      throw SchemaError(line_number, "label");
    }
    seq.label = j["label"].get<int>();
  }
  if (!j.contains("tokens") || !j["tokens"].is_array()) {
    throw SchemaError(line_number, "tokens");
  }
  for (const auto& tok : j["tokens"]) {
    if (!tok.is_object()) throw SchemaError(line_number, "tokens");
    KnowledgeToken t;
    if (!tok.contains("w") || !tok["w"].is_string()) {
      throw SchemaError(line_number, "w");
    }
    t.word = tok["w"].get<std::string>();
    if (!tok.contains("pos") || !tok["pos"].is_string() ||
        tok["pos"].get<std::string>().size() != 1) {
      throw SchemaError(line_number, "pos");
    }
    const auto pos = pos5_from_letter(tok["pos"].get<std::string>()[0]);
    if (!pos || tok["pos"].get<std::string>() == "s") {
      throw SchemaError(line_number, "pos");
    }
    t.pos = *pos;
    if (!tok.contains("pol") || !tok["pol"].is_string()) {
      throw SchemaError(line_number, "pol");
    }
    const auto pol = polarity_from_name(tok["pol"].get<std::string>());
    if (!pol) throw SchemaError(line_number, "pol");
    t.polarity = *pol;
    if (!tok.contains("s") || !tok["s"].is_number()) {
      throw SchemaError(line_number, "s");
    }
    t.score = tok["s"].get<double>();
    if (!(t.score >= -1.0 && t.score <= 1.0)) throw SchemaError(line_number, "s");
    if (assign_polarity(t.score) != t.polarity) {
      throw SchemaError(line_number, "pol");
    }
    if (tok.contains("m")) {
      if (!tok["m"].is_number_integer() || tok["m"].get<int>() < 0) {
        throw SchemaError(line_number, "m");
      }
      t.sense_count = tok["m"].get<int>();
    } else {
      t.sense_count = t.score == 0.0 ? 0 : 1;
    }
    if (t.sense_count == 0 && t.score != 0.0) throw SchemaError(line_number, "m");
    seq.tokens.push_back(std::move(t));
  }
  if (seq.tokens.empty()) throw SchemaError(line_number, "tokens");
  return seq;
}

void write_jsonl(std::ostream& out, std::span<const KnowledgeSequence> corpus) {
  for (const KnowledgeSequence& seq : corpus) out << to_jsonl_line(seq) << '\n';
}

void write_jsonl(const std::filesystem::path& path,
                 std::span<const KnowledgeSequence> corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_jsonl(out, corpus);
}

std::vector<KnowledgeSequence> read_jsonl(std::istream& in) {
  std::vector<KnowledgeSequence> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (text::trim(line).empty()) continue;
    out.push_back(parse_jsonl_line(line, line_number));
  }
  return out;
}

std::vector<KnowledgeSequence> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_jsonl(in);
}

}  // namespace sentiknow
