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

#include "sentiknow/acquisition.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <thread>

#include "sentiknow/errors.h"
#include "text_util.h"

namespace sentiknow {
namespace {

struct SuffixRule {
  std::string_view suffix;
  std::string_view replacement;
};

constexpr SuffixRule kNounRules[] = {
    {"ses", "s"}, {"xes", "x"}, {"zes", "z"}, {"ches", "ch"},
    {"shes", "sh"}, {"men", "man"}, {"ies", "y"}, {"s", ""},
};
constexpr SuffixRule kVerbRules[] = {
    {"ies", "y"}, {"es", "e"}, {"es", ""}, {"ed", "e"},
    {"ed", ""}, {"ing", "e"}, {"ing", ""}, {"s", ""},
};
constexpr SuffixRule kAdjectiveRules[] = {
    {"er", ""}, {"est", ""}, {"er", "e"}, {"est", "e"},
};

std::span<const SuffixRule> rules_for(Pos5 pos) {
  switch (pos) {
    case Pos5::kNoun: return kNounRules;
    case Pos5::kVerb: return kVerbRules;
    case Pos5::kAdjective: return kAdjectiveRules;
    default: return {};
  }
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

void push_unique(std::vector<std::string>& out, std::string candidate) {
  if (candidate.empty()) return;
  if (std::find(out.begin(), out.end(), candidate) == out.end()) {
    out.push_back(std::move(candidate));
  }
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '-';
}

}  // namespace

std::string_view polarity_name(Polarity p) {
  switch (p) {
    case Polarity::kPositive: return "positive";
    case Polarity::kNegative: return "negative";
    case Polarity::kNeutral: return "neutral";
  }
  return "neutral";
}

std::optional<Polarity> polarity_from_name(std::string_view name) {
  if (name == "positive") return Polarity::kPositive;
  if (name == "negative") return Polarity::kNegative;
  if (name == "neutral") return Polarity::kNeutral;
  return std::nullopt;
}

Pos5 collapse_pos(std::string_view tag) {
  if (text::starts_with(tag, "VB")) return Pos5::kVerb;
  if (text::starts_with(tag, "NN")) return Pos5::kNoun;
  if (text::starts_with(tag, "JJ")) return Pos5::kAdjective;
  if (text::starts_with(tag, "RB")) return Pos5::kAdverb;
  return Pos5::kOther;
}

void FrequencyTagger::add(std::string_view word, Pos5 pos) {
  auto [it, inserted] = counts_.try_emplace(text::to_lower(word));
  if (inserted) it->second.fill(0);
  ++it->second[static_cast<std::size_t>(pos)];
}

void FrequencyTagger::train(std::istream& tagged) {
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(tagged, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line[0] == '#') continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != 2) {
      throw ParseError(line_number, "expected token<TAB>tag");
    }
    add(fields[0], collapse_pos(text::trim(fields[1])));
  }
}

FrequencyTagger FrequencyTagger::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tagged file " + path.string());
  FrequencyTagger tagger;
  tagger.train(in);
  return tagger;
}

Pos5 FrequencyTagger::tag(std::string_view word) const {
  auto it = counts_.find(text::to_lower(word));
  if (it == counts_.end()) return suffix_guess(text::to_lower(word));
  const auto& counts = it->second;
  // Ties go to the lower class id.
  return static_cast<Pos5>(std::max_element(counts.begin(), counts.end()) -
                           counts.begin());
}

Pos5 FrequencyTagger::suffix_guess(std::string_view word) {
  struct Guess {
    std::string_view suffix;
    Pos5 pos;
  };
  static constexpr Guess kTable[] = {
      {"ly", Pos5::kAdverb},       {"ing", Pos5::kVerb},
      {"ed", Pos5::kVerb},         {"ous", Pos5::kAdjective},
      {"ful", Pos5::kAdjective},   {"ive", Pos5::kAdjective},
      {"able", Pos5::kAdjective},  {"ible", Pos5::kAdjective},
      {"al", Pos5::kAdjective},    {"ic", Pos5::kAdjective},
      {"less", Pos5::kAdjective},  {"ish", Pos5::kAdjective},
      {"tion", Pos5::kNoun},       {"sion", Pos5::kNoun},
      {"ness", Pos5::kNoun},       {"ment", Pos5::kNoun},
      {"ity", Pos5::kNoun},        {"ism", Pos5::kNoun},
      {"s", Pos5::kNoun},
  };
  const bool alphabetic = !word.empty() &&
      std::all_of(word.begin(), word.end(), [](char c) {
        return std::isalpha(static_cast<unsigned char>(c)) != 0;
      });
  if (!alphabetic) return Pos5::kOther;
  for (const Guess& g : kTable) {
    if (word.size() > g.suffix.size() + 1 && text::ends_with(word, g.suffix)) {
      return g.pos;
    }
  }
  return Pos5::kOther;
}

std::vector<Pos5> tag_tokens(std::span<const std::string> treebank_tags,
                             std::span<const std::string> tokens) {
  if (treebank_tags.size() != tokens.size()) {
    throw TagCountMismatch(tokens.size(), treebank_tags.size());
  }
  std::vector<Pos5> out;
  out.reserve(tokens.size());
  for (const std::string& tag : treebank_tags) out.push_back(collapse_pos(tag));
  return out;
}

std::vector<Pos5> tag_tokens(const FrequencyTagger& tagger,
                             std::span<const std::string> tokens) {
  std::vector<Pos5> out;
  out.reserve(tokens.size());
  for (const std::string& token : tokens) out.push_back(tagger.tag(token));
  return out;
}

std::vector<std::string> lemmatize(std::string_view word, Pos5 pos) {
  std::vector<std::string> out;
  push_unique(out, std::string(word));
  std::vector<std::string> detached;
  for (const SuffixRule& rule : rules_for(pos)) {
    if (word.size() <= rule.suffix.size() || !text::ends_with(word, rule.suffix)) {
      continue;
    }
    std::string base(word.substr(0, word.size() - rule.suffix.size()));
    base.append(rule.replacement);
    detached.push_back(base);
    push_unique(out, std::move(base));
  }
  for (const std::string& base : detached) {
    const std::size_t n = base.size();
    if (n >= 3 && base[n - 1] == base[n - 2] && !is_vowel(base[n - 1]) &&
        std::isalpha(static_cast<unsigned char>(base[n - 1]))) {
      push_unique(out, base.substr(0, n - 1));
    }
  }
  return out;
}

std::vector<double> sense_attention(std::span<const double> context_sim,
                                    std::span<const int> sense_ranks) {
  if (context_sim.size() != sense_ranks.size()) {
    throw LengthMismatch(context_sim.size(), sense_ranks.size());
  }
  if (context_sim.empty()) throw EmptySenses();
  std::vector<double> logits(context_sim.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    logits[j] = context_sim[j] / static_cast<double>(sense_ranks[j]);
  }
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& x : logits) {
    x = std::exp(x - max_logit);
    total += x;
  }
  for (double& x : logits) x /= total;
  return logits;
}

std::vector<double> context_free_weights(std::span<const int> sense_ranks) {
  if (sense_ranks.empty()) throw EmptySenses();
  std::vector<double> weights(sense_ranks.size());
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    weights[j] = 1.0 / static_cast<double>(sense_ranks[j]);
    total += weights[j];
  }
  for (double& w : weights) w /= total;
  return weights;
}

double sentiment_score(std::span<const double> weights,
                       std::span<const SenseMatch> senses) {
  if (weights.size() != senses.size()) {
    throw LengthMismatch(weights.size(), senses.size());
  }
  double s = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    s += weights[j] * (senses[j].pscore - senses[j].nscore);
  }
  return std::clamp(s, -1.0, 1.0);
}

Polarity assign_polarity(double score) {
  if (score > 0.0) return Polarity::kPositive;
  if (score < 0.0) return Polarity::kNegative;
  return Polarity::kNeutral;
}

std::vector<std::string> tokenize_text(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (is_word_char(c)) {
      const std::size_t start = i;
      while (i < text.size() && is_word_char(text[i])) ++i;
      out.push_back(text::to_lower(text.substr(start, i - start)));
    } else {
      out.emplace_back(1, c);
      ++i;
    }
  }
  return out;
}

std::vector<RawSentence> read_raw_sentences(std::istream& in, bool labeled,
                                            std::string_view id_prefix) {
  std::vector<RawSentence> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (text::trim(line).empty()) continue;
    RawSentence sentence;
    std::string_view body = line;
    if (labeled) {
      const auto tab = body.find('\t');
      if (tab == std::string_view::npos) {
        throw ParseError(line_number, "expected label<TAB>text");
      }
      auto label = text::parse_int<int>(body.substr(0, tab));
      if (!label || *label < 0) throw ParseError(line_number, "bad label");
      sentence.label = *label;
      body = body.substr(tab + 1);
    }
    sentence.tokens = tokenize_text(body);
    if (sentence.tokens.empty()) throw ParseError(line_number, "no tokens");
    sentence.id = std::string(id_prefix) + std::to_string(out.size() + 1);
    out.push_back(std::move(sentence));
  }
  return out;
}

std::vector<RawSentence> read_tagged_sentences(std::istream& in,
                                               std::string_view id_prefix) {
  std::vector<RawSentence> out;
  RawSentence current;
  current.tags.emplace();
  auto flush = [&] {
    if (current.tokens.empty()) return;
    if (current.id.empty()) {
      current.id = std::string(id_prefix) + std::to_string(out.size() + 1);
    }
    out.push_back(std::move(current));
    current = RawSentence{};
    current.tags.emplace();
  };

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::string_view body = text::trim(std::string_view(line).substr(1));
      if (text::starts_with(body, "label=")) {
        auto label = text::parse_int<int>(body.substr(6));
        if (!label || *label < 0) throw ParseError(line_number, "bad label");
        current.label = *label;
      } else if (text::starts_with(body, "id=")) {
        current.id = std::string(text::trim(body.substr(3)));
      }
      continue;
    }
    auto fields = text::split(line, '\t');
    if (fields.size() != 2 || fields[0].empty()) {
      throw ParseError(line_number, "expected token<TAB>tag");
    }
    current.tokens.emplace_back(fields[0]);
    current.tags->emplace_back(text::trim(fields[1]));
  }
  flush();
  return out;
}

void write_tagged_sentences(std::ostream& out,
                            std::span<const RawSentence> sentences) {
  bool first = true;
  for (const RawSentence& s : sentences) {
    if (!first) out << '\n';
    first = false;
    if (!s.id.empty()) out << "# id=" << s.id << '\n';
    if (s.label) out << "# label=" << *s.label << '\n';
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out << s.tokens[i] << '\t' << (s.tags ? (*s.tags)[i] : "NN") << '\n';
    }
  }
}

Annotator::Annotator(const Lexicon& lexicon,
                     std::optional<SimilaritySource> similarity,
                     const FrequencyTagger* tagger, AnnotatorOptions options)
    : lexicon_(lexicon),
      similarity_(std::move(similarity)),
      tagger_(tagger),
      options_(options) {
  if (options_.mode == AttentionMode::kContextAware && !similarity_) {
    throw InvalidConfig("context-aware attention needs a similarity source");
  }
}

std::string Annotator::context_key(const RawSentence& input,
                                   std::size_t index) const {
  if (options_.context_window == 0) return input.id;
  return input.id + "@" + std::to_string(index);
}

KnowledgeSequence Annotator::annotate(const RawSentence& input,
                                      std::vector<SimilarityEntry>* log) const {
  if (input.tokens.empty()) throw InvalidConfig("cannot annotate an empty sentence");
  std::vector<std::string> words;
  words.reserve(input.tokens.size());
  for (const std::string& t : input.tokens) words.push_back(text::to_lower(t));

  std::vector<Pos5> tags;
  if (input.tags) {
    tags = tag_tokens(*input.tags, words);
  } else if (tagger_ != nullptr) {
    tags = tag_tokens(*tagger_, words);
  } else {
    throw InvalidConfig("sentence '" + input.id + "' has no tags and no tagger");
  }

  const auto* vectors = similarity_ ? std::get_if<WordVectorAverage>(&*similarity_)
                                    : nullptr;
  const auto* precomputed =
      similarity_ ? std::get_if<Precomputed>(&*similarity_) : nullptr;
  std::optional<SentenceEmbedding> whole_context;

  KnowledgeSequence out;
  out.id = input.id;
  out.label = input.label;
  out.tokens.reserve(words.size());
  std::vector<double> sims;
  std::vector<int> ranks;

  for (std::size_t i = 0; i < words.size(); ++i) {
    KnowledgeToken token;
    token.word = words[i];
    token.pos = tags[i];
    std::span<const SenseMatch> senses;
    if (token.pos != Pos5::kOther) {
      for (const std::string& lemma : lemmatize(token.word, token.pos)) {
        senses = lexicon_.lookup(lemma, token.pos);
        if (!senses.empty()) break;
      }
    }
    if (senses.empty()) {
      out.tokens.push_back(std::move(token));
      continue;
    }

    ranks.clear();
    for (const SenseMatch& s : senses) ranks.push_back(s.sense_rank);
    std::vector<double> weights;
    if (options_.mode == AttentionMode::kContextFreePrior) {
      weights = context_free_weights(ranks);
    } else {
      const std::string ckey = context_key(input, i);
      sims.clear();
      if (vectors != nullptr) {
        const SentenceEmbedding* context = nullptr;
        std::optional<SentenceEmbedding> local;
        if (options_.context_window == 0) {
          if (!whole_context) {
            whole_context = sentence_embedding(*vectors->store, words);
          }
          context = &*whole_context;
        } else {
          const std::size_t lo =
              i >= options_.context_window ? i - options_.context_window : 0;
          const std::size_t hi =
              std::min(words.size(), i + options_.context_window + 1);
          local = sentence_embedding(
              *vectors->store,
              std::span<const std::string>(words).subspan(lo, hi - lo));
          context = &*local;
        }
        for (const SenseMatch& s : senses) {
          const SentenceEmbedding& gloss =
              vectors->gloss_cache->get(s.gloss_key(), s.gloss);
          sims.push_back(cosine(context->mean, gloss.mean));
        }
      } else {
        for (const SenseMatch& s : senses) {
          const double* score = precomputed->find(ckey, s.gloss_key());
          if (score == nullptr) throw MissingSimilarity(ckey, s.gloss_key());
          sims.push_back(*score);
        }
      }
      if (log != nullptr) {
        for (std::size_t j = 0; j < senses.size(); ++j) {
          log->push_back({ckey, senses[j].gloss_key(), sims[j]});
        }
      }
      weights = sense_attention(sims, ranks);
    }
    token.sense_count = static_cast<int>(senses.size());
    token.score = sentiment_score(weights, senses);
    token.polarity = assign_polarity(token.score);
    out.tokens.push_back(std::move(token));
  }
  return out;
}

std::vector<KnowledgeSequence> Annotator::annotate_all(
    std::span<const RawSentence> inputs, std::size_t workers,
    std::vector<SimilarityEntry>* log) const {
  std::vector<KnowledgeSequence> out(inputs.size());
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, inputs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < inputs.size(); ++i) out[i] = annotate(inputs[i], log);
    return out;
  }

  std::vector<std::vector<SimilarityEntry>> logs(log ? inputs.size() : 0);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < inputs.size(); i += workers) {
            out[i] = annotate(inputs[i], log ? &logs[i] : nullptr);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (log != nullptr) {
    for (auto& l : logs) log->insert(log->end(), l.begin(), l.end());
  }
  return out;
}

}  // namespace sentiknow
