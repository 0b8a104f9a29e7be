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

#include "sentiknow/lexicon.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "sentiknow/errors.h"
#include "text_util.h"

namespace sentiknow {
namespace {

std::string index_key(Pos5 pos, std::string_view lemma) {
  std::string key;
  key.reserve(lemma.size() + 2);
  key.push_back(pos5_letter(pos));
  key.push_back(':');
  key.append(lemma);
  return key;
}

double parse_score(std::string_view field, std::size_t line_number,
                   const char* name) {
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw ParseError(line_number,
                     std::string("non-numeric ") + name + " '" +
                         std::string(field) + "'");
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ParseError(line_number,
                     std::string(name) + " outside [0,1]: " + std::string(field));
  }
  return value;
}

}  // namespace

char pos5_letter(Pos5 pos) {
  switch (pos) {
    case Pos5::kVerb: return 'v';
    case Pos5::kNoun: return 'n';
    case Pos5::kAdjective: return 'a';
    case Pos5::kAdverb: return 'r';
    case Pos5::kOther: return 'o';
  }
  return 'o';
}

std::optional<Pos5> pos5_from_letter(char letter) {
  switch (letter) {
    case 'v': return Pos5::kVerb;
    case 'n': return Pos5::kNoun;
    case 'a': return Pos5::kAdjective;
    case 's': return Pos5::kAdjective;
    case 'r': return Pos5::kAdverb;
    case 'o': return Pos5::kOther;
    default: return std::nullopt;
  }
}

std::string SenseMatch::gloss_key() const {
  std::string key(1, pos5_letter(pos));
  key += synset_id;
  return key;
}

SenseRecord parse_sense_line(std::string_view line, std::size_t line_number) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields = text::split(line, '\t');
  if (fields.size() < 6) throw ParseError(line_number, "expected 6 fields");

  SenseRecord record;
  const std::string_view pos_field = text::trim(fields[0]);
  std::optional<Pos5> pos;
  if (pos_field.size() == 1) pos = pos5_from_letter(pos_field[0]);
  if (!pos || *pos == Pos5::kOther) {
    throw ParseError(line_number,
                     "unknown POS '" + std::string(pos_field) + "'");
  }
  record.pos = *pos;
  record.synset_id = std::string(text::trim(fields[1]));
  if (record.synset_id.empty()) throw ParseError(line_number, "empty synset id");
  record.pscore = parse_score(text::trim(fields[2]), line_number, "PosScore");
  record.nscore = parse_score(text::trim(fields[3]), line_number, "NegScore");
  if (record.pscore + record.nscore > 1.0 + 1e-12) {
    throw ParseError(line_number, "PosScore + NegScore exceeds 1");
  }

  for (std::string_view term : text::split_whitespace(fields[4])) {
    const auto hash = term.rfind('#');
    if (hash == std::string_view::npos || hash == 0 ||
        hash + 1 == term.size()) {
      throw ParseError(line_number,
                       "term '" + std::string(term) + "' lacks '#rank' suffix");
    }
    int rank = 0;
    const std::string_view digits = term.substr(hash + 1);
    auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), rank);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || rank < 1) {
      throw ParseError(line_number,
                       "term '" + std::string(term) + "' has a bad rank");
    }
    record.terms.push_back({text::to_lower(term.substr(0, hash)), rank});
  }
  if (record.terms.empty()) throw ParseError(line_number, "no synset terms");

  // Tabs inside a gloss are kept.
  std::string gloss(fields[5]);
  for (std::size_t i = 6; i < fields.size(); ++i) {
    gloss.push_back('\t');
    gloss.append(fields[i]);
  }
  record.gloss = std::move(gloss);
  return record;
}

void write_sentiwordnet(std::ostream& out,
                        std::span<const SenseRecord> records) {
  out << "# POS\tID\tPosScore\tNegScore\tSynsetTerms\tGloss\n";
  for (const SenseRecord& r : records) {
    out << pos5_letter(r.pos) << '\t' << r.synset_id << '\t'
        << text::format_double(r.pscore) << '\t'
        << text::format_double(r.nscore) << '\t';
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
      if (i > 0) out << ' ';
      out << r.terms[i].lemma << '#' << r.terms[i].sense_rank;
    }
    out << '\t' << r.gloss << '\n';
  }
}

void Lexicon::add(const SenseRecord& record, std::size_t line_number) {
  for (const SenseTerm& term : record.terms) {
    auto& senses = index_[index_key(record.pos, term.lemma)];
    for (const SenseMatch& existing : senses) {
      if (existing.sense_rank == term.sense_rank) {
        throw ParseError(line_number, "duplicate sense rank " +
                                          std::to_string(term.sense_rank) +
                                          " for '" + term.lemma + "'");
      }
    }
    senses.push_back(SenseMatch{term.sense_rank, record.pscore, record.nscore,
                                record.gloss, record.synset_id, record.pos});
  }
  ++entry_count_;
}

void Lexicon::finish() {
  for (auto& [key, senses] : index_) {
    std::sort(senses.begin(), senses.end(),
              [](const SenseMatch& a, const SenseMatch& b) {
                return a.sense_rank < b.sense_rank;
              });
  }
}

Lexicon Lexicon::parse(std::istream& in) {
  Lexicon lexicon;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line[0] == '#') continue;
    if (text::trim(line).empty()) continue;
    lexicon.add(parse_sense_line(line, line_number), line_number);
  }
  lexicon.finish();
  return lexicon;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon file " + path.string());
  return parse(in);
}

Lexicon Lexicon::from_records(std::span<const SenseRecord> records) {
  Lexicon lexicon;
  std::size_t n = 0;
  for (const SenseRecord& r : records) lexicon.add(r, ++n);
  lexicon.finish();
  return lexicon;
}

std::span<const SenseMatch> Lexicon::lookup(std::string_view lemma,
                                            Pos5 pos) const {
  if (pos == Pos5::kOther) return {};
  auto it = index_.find(index_key(pos, text::to_lower(lemma)));
  if (it == index_.end()) return {};
  return it->second;
}

}  // namespace sentiknow
