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

// Acceptance suite. Prints one [PASS]/[FAIL]/[SKIP] line per criterion and
// exits non-zero when any criterion fails. Tolerances are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sentiknow/acquisition.h"
#include "sentiknow/corpus.h"
#include "sentiknow/embeddings.h"
#include "sentiknow/lexicon.h"
#include "sentiknow/model.h"
#include "sentiknow/synthetic.h"
#include "sentiknow/tasks.h"
#include "sentiknow/training.h"
#include "swn_release.h"

namespace sk = sentiknow;

namespace {

// Tolerances and budgets.
constexpr double kScoreTolerance = 1e-9;
constexpr double kAttentionTolerance = 1e-9;
constexpr double kGradTolerance = 1e-4;
constexpr double kGradStep = 1e-4;
constexpr std::size_t kGradSamples = 500;
constexpr long kOverfitMaxSteps = 2000;
constexpr double kSigmas = 3.0;
constexpr double kFullAccuracyFloor = 0.95;
constexpr double kAblatedAccuracyCeiling = 0.60;
constexpr double kProbeSumTolerance = 1e-9;

constexpr double kBudgetOracle = 5.0;
constexpr double kBudgetGradCheck = 60.0;
constexpr double kBudgetOverfit = 600.0;
constexpr double kBudgetSynthetic = 1200.0;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool skipped = false;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ------------------------------------------------------------------ 1

// Handcrafted lemmas as (rank, P, N) senses, 45 in total.
struct OracleSense {
  int rank;
  double p;
  double n;
};
struct OracleLemma {
  const char* word;
  char pos;
  std::vector<OracleSense> senses;
};

const std::vector<OracleLemma>& oracle_lemmas() {
  static const std::vector<OracleLemma> lemmas = {
      {"bright", 'a', {{1, 0.625, 0.0}, {2, 0.0, 0.25}, {3, 0.5, 0.125}, {4, 0.0, 0.0}}},
      {"cold", 'a', {{1, 0.0, 0.75}, {2, 0.125, 0.5}, {3, 0.25, 0.0}, {4, 0.0, 0.375},
                     {5, 0.5, 0.5}, {6, 0.0, 0.125}}},
      {"light", 'n', {{1, 0.0, 0.0}, {2, 0.375, 0.0}, {3, 0.0, 0.625}, {4, 0.125, 0.125},
                      {5, 0.25, 0.0}, {6, 0.0, 0.0}, {7, 0.875, 0.0}, {8, 0.0, 0.875}}},
      {"break", 'v', {{1, 0.0, 0.5}, {2, 0.25, 0.25}, {3, 0.0, 0.0}, {4, 0.625, 0.0},
                      {5, 0.0, 0.375}}},
      {"fine", 'a', {{1, 0.75, 0.0}, {2, 0.0, 0.0}, {3, 0.5, 0.25}, {4, 0.0, 0.125},
                     {5, 0.125, 0.0}, {6, 1.0, 0.0}, {7, 0.0, 1.0}}},
      {"well", 'r', {{1, 0.5, 0.0}, {2, 0.0, 0.25}, {3, 0.375, 0.375}}},
      {"charge", 'n', {{1, 0.0, 0.0}, {2, 0.0, 0.5}, {3, 0.25, 0.0}, {4, 0.0, 0.125},
                       {5, 0.625, 0.125}, {6, 0.0, 0.0}}},
      {"run", 'v', {{1, 0.0, 0.0}, {2, 0.125, 0.0}, {3, 0.0, 0.25}, {4, 0.5, 0.0},
                    {5, 0.0, 0.0}, {6, 0.25, 0.625}}},
  };
  return lemmas;
}

std::string oracle_lexicon_text() {
  std::ostringstream out;
  out << "# POS\tID\tPosScore\tNegScore\tSynsetTerms\tGloss\n";
  int id = 1000;
  for (const OracleLemma& l : oracle_lemmas()) {
    for (const OracleSense& s : l.senses) {
      out << l.pos << '\t' << fmt("%08d", id++) << '\t' << s.p << '\t' << s.n << '\t'
          << l.word << '#' << s.rank << '\t' << "gloss of " << l.word << " sense "
          << s.rank << '\n';
    }
  }
  return out.str();
}

const char* treebank_tag(char pos) {
  switch (pos) {
    case 'a': return "JJ";
    case 'n': return "NN";
    case 'v': return "VB";
    case 'r': return "RB";
    default: return "DT";
  }
}

Outcome criterion_oracle() {
  const auto start = Clock::now();
  std::istringstream lex_in(oracle_lexicon_text());
  const sk::Lexicon lexicon = sk::Lexicon::parse(lex_in);
  std::size_t sense_total = 0;
  for (const auto& l : oracle_lemmas()) sense_total += l.senses.size();

  sk::Rng rng(20261018);
  sk::Precomputed table;
  std::vector<sk::RawSentence> inputs;
  // Independent similarity record: context id -> (lemma, rank) -> sim.
  std::map<std::string, std::map<std::pair<std::string, int>, double>> sims;
  for (int c = 0; c < 100; ++c) {
    sk::RawSentence s;
    s.id = "ctx" + std::to_string(c);
    std::vector<std::string> tags;
    const int n = 1 + static_cast<int>(rng.below(8));
    for (int t = 0; t < n; ++t) {
      if (rng.bernoulli(0.2)) {
        s.tokens.push_back("the");
        tags.push_back("DT");
        continue;
      }
      const OracleLemma& l = oracle_lemmas()[rng.below(oracle_lemmas().size())];
      s.tokens.push_back(l.word);
      tags.push_back(treebank_tag(l.pos));
    }
    s.tags = tags;
    for (const OracleLemma& l : oracle_lemmas()) {
      for (const sk::SenseMatch& m : lexicon.lookup(l.word, *sk::pos5_from_letter(l.pos))) {
        const double sim = 2.0 * rng.uniform() - 1.0;
        table.insert(s.id, m.gloss_key(), sim);
        sims[s.id][{l.word, m.sense_rank}] = sim;
      }
    }
    inputs.push_back(std::move(s));
  }

  const sk::Annotator annotator(lexicon, sk::SimilaritySource(table), nullptr);
  double worst = 0.0;
  std::size_t scored = 0;
  bool polarity_ok = true;
  for (const sk::RawSentence& in : inputs) {
    const sk::KnowledgeSequence out = annotator.annotate(in);
    for (std::size_t t = 0; t < in.tokens.size(); ++t) {
      const sk::KnowledgeToken& tok = out.tokens[t];
      double expected = 0.0;
      if (in.tokens[t] != "the") {
        const OracleLemma* lemma = nullptr;
        for (const auto& l : oracle_lemmas()) {
          if (in.tokens[t] == l.word) lemma = &l;
        }
        long double denom = 0.0L;
        std::vector<long double> e;
        for (const OracleSense& s : lemma->senses) {
          const long double x =
              static_cast<long double>(sims[in.id][{lemma->word, s.rank}]) / s.rank;
          e.push_back(std::exp(x));
          denom += e.back();
        }
        long double acc = 0.0L;
        for (std::size_t j = 0; j < e.size(); ++j) {
          acc += e[j] / denom *
                 (static_cast<long double>(lemma->senses[j].p) - lemma->senses[j].n);
        }
        expected = static_cast<double>(std::clamp(acc, -1.0L, 1.0L));
      }
      worst = std::max(worst, std::abs(tok.score - expected));
      const sk::Polarity want = expected > 0   ? sk::Polarity::kPositive
                                : expected < 0 ? sk::Polarity::kNegative
                                               : sk::Polarity::kNeutral;
      if (std::abs(expected) > 1e-12 && tok.polarity != want) polarity_ok = false;
      ++scored;
    }
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = sense_total <= 50 && worst <= kScoreTolerance && polarity_ok &&
           elapsed < kBudgetOracle;
  o.detail = fmt("%zu senses, %zu tokens in 100 contexts, max |score - oracle| = %.3e "
                 "(tol %.0e), polarity %s, %.2f s",
                 sense_total, scored, worst, kScoreTolerance,
                 polarity_ok ? "consistent" : "MISMATCH", elapsed);
  return o;
}

// ------------------------------------------------------------------ 2

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Outcome criterion_attention(std::string& note) {
  sk::Rng rng(777);
  double worst_sum = 0.0, worst_shift = 0.0, min_alpha = 1.0;
  double literal_equal_ranks = 0.0, literal_mixed = 0.0;
  for (int inst = 0; inst < 10000; ++inst) {
    const std::size_t m = 1 + rng.below(12);
    std::vector<double> sim(m);
    std::vector<int> ranks(m);
    for (std::size_t j = 0; j < m; ++j) {
      sim[j] = 2.0 * rng.uniform() - 1.0;
      ranks[j] = 1 + static_cast<int>(rng.below(30));
    }
    const double c = 20.0 * rng.uniform() - 10.0;
    const auto alpha = sk::sense_attention(sim, ranks);
    const double total = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    for (double a : alpha) min_alpha = std::min(min_alpha, a);

    // A constant added to every softmax input: sim_j / rank_j + c.
    std::vector<double> shifted(m);
    for (std::size_t j = 0; j < m; ++j) shifted[j] = sim[j] + c * ranks[j];
    worst_shift = std::max(worst_shift, max_abs_diff(alpha, sk::sense_attention(shifted, ranks)));

    // The same constant added to the raw similarities.
    std::vector<double> raw(m);
    for (std::size_t j = 0; j < m; ++j) raw[j] = sim[j] + c;
    const double d = max_abs_diff(alpha, sk::sense_attention(raw, ranks));
    const bool equal_ranks = std::all_of(ranks.begin(), ranks.end(),
                                         [&](int r) { return r == ranks[0]; });
    (equal_ranks ? literal_equal_ranks : literal_mixed) =
        std::max(equal_ranks ? literal_equal_ranks : literal_mixed, d);
  }
  // Equal-rank instances are rare in the draw above; add a dedicated batch.
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t m = 1 + rng.below(12);
    const int r = 1 + static_cast<int>(rng.below(30));
    std::vector<double> sim(m), raw(m);
    const std::vector<int> ranks(m, r);
    const double c = 20.0 * rng.uniform() - 10.0;
    for (std::size_t j = 0; j < m; ++j) {
      sim[j] = 2.0 * rng.uniform() - 1.0;
      raw[j] = sim[j] + c;
    }
    literal_equal_ranks = std::max(
        literal_equal_ranks,
        max_abs_diff(sk::sense_attention(sim, ranks), sk::sense_attention(raw, ranks)));
  }
  note = fmt("raw-similarity shift sim + c: max |d alpha| = %.3e with equal ranks, "
             "%.3e with mixed ranks (logits are sim / rank, so only equal ranks are "
             "shift-invariant in raw similarity)",
             literal_equal_ranks, literal_mixed);
  Outcome o;
  o.pass = worst_sum <= kAttentionTolerance && min_alpha > 0.0 &&
           worst_shift <= kAttentionTolerance && literal_equal_ranks <= kAttentionTolerance;
  o.detail = fmt("10000 instances: max |sum - 1| = %.3e, min alpha = %.3e, "
                 "max softmax-input shift change = %.3e (tol %.0e)",
                 worst_sum, min_alpha, worst_shift, kAttentionTolerance);
  return o;
}

// ------------------------------------------------------------------ 3

Outcome criterion_gradcheck() {
  const auto start = Clock::now();
  sk::ModelConfig cfg;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.dim = 16;
  cfg.vocab_size = 97;
  cfg.label_count = 5;
  cfg.max_len = 32;
  cfg.seed = 3;
  const sk::Model model = sk::init_model(cfg);
  const auto seqs = sk::random_sequences(cfg.vocab_size, 4, 10, cfg.label_count, 11);
  sk::GradCheckOptions opts;
  opts.step = kGradStep;
  opts.samples = kGradSamples;
  double worst[2] = {0.0, 0.0};
  std::size_t coords[2] = {0, 0};
  for (int r = 0; r < 2; ++r) {
    std::vector<sk::MaskedExample> batch;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      sk::Rng rng = sk::Rng::derive(5, sk::kMaskStream, i);
      batch.push_back(sk::mask_example(seqs[i], sk::MaskPolicy{}, rng, cfg.vocab_size));
      batch.back().route = r == 0 ? sk::Route::kEarlyFusion : sk::Route::kLateSupervision;
    }
    const auto report = sk::grad_check(model, batch, sk::LossOptions{}, opts);
    worst[r] = report.max_relative_error;
    coords[r] = report.entries.size();
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = worst[0] < kGradTolerance && worst[1] < kGradTolerance &&
           coords[0] >= kGradSamples && coords[1] >= kGradSamples &&
           elapsed < kBudgetGradCheck;
  o.detail = fmt("L=2 H=2 d=16 V=97 K=5, batch 4, h=%.0e: EF max rel err %.3e over %zu "
                 "coords, LS %.3e over %zu coords (tol %.0e), %.1f s",
                 kGradStep, worst[0], coords[0], worst[1], coords[1], kGradTolerance, elapsed);
  return o;
}

// ------------------------------------------------------------------ 4

struct Annotated {
  std::vector<sk::KnowledgeSequence> train;
  std::vector<sk::KnowledgeSequence> test;
};

Annotated annotate_synthetic(const sk::SyntheticData& data) {
  const sk::Lexicon lexicon = sk::Lexicon::from_records(data.lexicon);
  sk::AnnotatorOptions opts;
  opts.mode = sk::AttentionMode::kContextFreePrior;
  const sk::Annotator annotator(lexicon, std::nullopt, nullptr, opts);
  return {annotator.annotate_all(data.train), annotator.annotate_all(data.test)};
}

std::vector<sk::EncodedSequence> encode_all(const std::vector<sk::KnowledgeSequence>& seqs,
                                            const sk::Vocab& vocab, std::size_t max_len) {
  std::vector<sk::EncodedSequence> out;
  for (const auto& s : seqs) out.push_back(sk::encode(s, vocab, max_len));
  return out;
}

Outcome criterion_overfit() {
  const auto start = Clock::now();
  const auto data = sk::make_synthetic(sk::SyntheticSpec::generated(12, 24), 32, 0, 404, true);
  const Annotated corpus = annotate_synthetic(data);
  const sk::Vocab vocab = sk::Vocab::build(corpus.train, 1);
  const auto encoded = encode_all(corpus.train, vocab, 16);

  sk::PretrainOptions opts;
  opts.model.layers = 2;
  opts.model.heads = 4;
  opts.model.dim = 64;
  opts.model.vocab_size = vocab.size();
  opts.model.max_len = 16;
  opts.model.label_count = 5;
  opts.model.seed = 17;
  // Eight independently masked views of each sequence per step.
  opts.batch_size = 256;
  opts.steps = kOverfitMaxSteps;
  opts.peak_lr = 1e-3;
  opts.warmup_ratio = 0.05;
  opts.seed = 29;
  opts.eval_every = 50;

  sk::PretrainAccuracy reached;
  long reached_step = -1;
  opts.on_eval = [&](const sk::Model& model, long step) {
    const auto acc = sk::evaluate_pretraining(model, encoded, opts.mask, opts.ablation, 91);
    if (acc.word == 1.0 && acc.pos == 1.0 && acc.polar == 1.0 && acc.label == 1.0) {
      reached = acc;
      reached_step = step;
      return true;
    }
    reached = acc;
    return false;
  };
  const sk::PretrainResult result = sk::pretrain(opts, encoded);

  // 20-step moving average over the first 200 steps.
  bool decreasing = result.curve.size() >= 200;
  double prev = 1e300;
  for (std::size_t i = 19; decreasing && i < 200; ++i) {
    double avg = 0.0;
    for (std::size_t k = i - 19; k <= i; ++k) avg += result.curve[k].loss.total();
    avg /= 20.0;
    if (!(avg < prev)) decreasing = false;
    prev = avg;
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = reached_step > 0 && reached_step <= kOverfitMaxSteps && decreasing &&
           elapsed < kBudgetOverfit;
  o.detail = fmt("32 sequences x 8 views, V=%d: word %.3f pos %.3f polar %.3f label %.3f at step %ld "
                 "(limit %ld); 20-step moving loss average over first 200 steps %s; %.1f s",
                 vocab.size(), reached.word, reached.pos, reached.polar,
                 reached.label.value_or(-1.0), reached_step, kOverfitMaxSteps,
                 decreasing ? "strictly decreasing" : "NOT strictly decreasing", elapsed);
  return o;
}

// ------------------------------------------------------------------ 5

Outcome criterion_masking() {
  sk::Rng build(55);
  std::vector<sk::EncodedSequence> seqs;
  for (int s = 0; s < 2000; ++s) {
    sk::EncodedSequence e;
    e.token_ids.push_back(sk::kClsId);
    e.pos_ids.push_back(sk::kPosOther);
    e.polar_ids.push_back(sk::kPolarNeutral);
    for (int t = 0; t < 126; ++t) {
      e.token_ids.push_back(sk::kReservedTokens + static_cast<int>(build.below(500)));
      e.pos_ids.push_back(static_cast<int>(build.below(sk::kPos5Count)));
      e.polar_ids.push_back(static_cast<int>(build.below(sk::kPolarityCount)));
    }
    e.token_ids.push_back(sk::kSepId);
    e.pos_ids.push_back(sk::kPosOther);
    e.polar_ids.push_back(sk::kPolarNeutral);
    e.segment_ids.assign(e.token_ids.size(), 0);
    seqs.push_back(std::move(e));
  }
  const sk::MaskPolicy policy;
  double sel[2] = {0, 0}, tot[2] = {0, 0};
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    sk::Rng rng = sk::Rng::derive(8, sk::kMaskStream, i);
    const sk::MaskedExample ex = sk::mask_example(seqs[i], policy, rng, 505);
    for (std::size_t t = 1; t + 1 < seqs[i].size(); ++t) {
      const int cls = seqs[i].polar_ids[t] == sk::kPolarNeutral ? 0 : 1;
      tot[cls] += 1;
      sel[cls] += ex.mask_flags[t];
    }
  }
  const double want[2] = {policy.p_neutral, policy.p_sentiment};
  bool ok = tot[0] + tot[1] >= 100000;
  double rate[2], sigma[2];
  for (int c = 0; c < 2; ++c) {
    rate[c] = sel[c] / tot[c];
    sigma[c] = std::sqrt(want[c] * (1 - want[c]) / tot[c]);
    ok = ok && std::abs(rate[c] - want[c]) <= kSigmas * sigma[c];
  }
  double ef = 0;
  const int n_route = 10000;
  for (int i = 0; i < n_route; ++i) {
    sk::Rng rng = sk::Rng::derive(8, sk::kRouteStream, static_cast<std::uint64_t>(i));
    ef += sk::route_example(0.8, rng) == sk::Route::kEarlyFusion;
  }
  const double ef_rate = ef / n_route;
  const double ef_sigma = std::sqrt(0.8 * 0.2 / n_route);
  ok = ok && std::abs(ef_rate - 0.8) <= kSigmas * ef_sigma;
  Outcome o;
  o.pass = ok;
  o.detail = fmt("%.0f draws: sentiment %.4f (0.30 +- %.4f), neutral %.4f (0.15 +- %.4f); "
                 "EF %.4f over %d (0.80 +- %.4f)",
                 tot[0] + tot[1], rate[1], kSigmas * sigma[1], rate[0], kSigmas * sigma[0],
                 ef_rate, n_route, kSigmas * ef_sigma);
  return o;
}

// ------------------------------------------------------------------ 6, 10

struct SeparationRun {
  double full = 0.0;
  double ablated = 0.0;
  sk::Model full_model;
  sk::Vocab vocab;
  std::vector<sk::KnowledgeSequence> test;
};

constexpr std::size_t kSynMaxLen = 16;

double pretrain_and_finetune(const std::vector<sk::EncodedSequence>& corpus,
                             const std::vector<sk::EncodedTaskExample>& train,
                             const std::vector<sk::EncodedTaskExample>& test,
                             int vocab_size, sk::Ablation ablation, std::uint64_t seed,
                             sk::Model* keep) {
  sk::PretrainOptions opts;
  opts.model.layers = 2;
  opts.model.heads = 2;
  opts.model.dim = 32;
  opts.model.vocab_size = vocab_size;
  opts.model.max_len = static_cast<int>(kSynMaxLen);
  opts.model.label_count = 2;
  opts.model.seed = seed;
  opts.ablation = ablation;
  opts.batch_size = 32;
  opts.steps = 300;
  opts.peak_lr = 1e-3;
  opts.seed = seed + 1;
  const sk::PretrainResult pre = sk::pretrain(opts, corpus);

  const sk::TaskSpec spec{sk::TaskKind::kSsc, 2, {}};
  sk::FineTuneOptions ft;
  ft.epochs = 3;
  ft.batch_size = 16;
  ft.peak_lr = 5e-4;
  ft.seed = seed + 2;
  sk::FineTuneResult tuned = sk::finetune(pre.model, spec, train, {}, ft);
  const double acc = *sk::evaluate(tuned.model, spec, test).accuracy;
  if (keep != nullptr) *keep = std::move(tuned.model);
  return acc;
}

SeparationRun separation_run(std::uint64_t seed) {
  const auto data =
      sk::make_synthetic(sk::SyntheticSpec::generated(20, 40), 2000, 500, seed, true);
  const Annotated corpus = annotate_synthetic(data);
  SeparationRun run;
  run.vocab = sk::Vocab::build(corpus.train, 1);
  run.test = corpus.test;
  const auto encoded = encode_all(corpus.train, run.vocab, kSynMaxLen);
  const sk::TaskSpec spec{sk::TaskKind::kSsc, 2, {}};
  const auto train = sk::encode_task_examples(spec, sk::ssc_examples(corpus.train),
                                              run.vocab, kSynMaxLen);
  const auto test = sk::encode_task_examples(spec, sk::ssc_examples(corpus.test),
                                             run.vocab, kSynMaxLen);
  run.full = pretrain_and_finetune(encoded, train, test, run.vocab.size(),
                                   sk::Ablation::kFull, seed, &run.full_model);
  run.ablated = pretrain_and_finetune(encoded, train, test, run.vocab.size(),
                                      sk::Ablation::kNoPosNoPol, seed, nullptr);
  return run;
}

Outcome criterion_separation(std::vector<SeparationRun>& runs) {
  const auto start = Clock::now();
  bool ok = true;
  std::string per_seed;
  for (std::uint64_t seed : {101u, 202u, 303u}) {
    runs.push_back(separation_run(seed));
    const auto& r = runs.back();
    ok = ok && r.full >= kFullAccuracyFloor && r.ablated <= kAblatedAccuracyCeiling;
    per_seed += fmt(" seed %llu: full %.3f, -POS-POL %.3f;",
                    static_cast<unsigned long long>(seed), r.full, r.ablated);
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = ok && elapsed < kBudgetSynthetic;
  o.detail = fmt("disjoint test sentiment words (full >= %.2f, ablated <= %.2f):%s %.1f s",
                 kFullAccuracyFloor, kAblatedAccuracyCeiling, per_seed.c_str(), elapsed);
  return o;
}

Outcome criterion_probe(const std::vector<SeparationRun>& runs) {
  const sk::TaskSpec spec{sk::TaskKind::kSsc, 2, {}};
  double worst_sum = 0.0;
  bool final_equal = true;
  std::size_t probed = 0, rows = 0;
  for (const auto& run : runs) {
    for (std::size_t i = 0; i < 50 && i < run.test.size(); ++i) {
      const auto& seq = run.test[i];
      const auto dist = sk::probe_prefixes(run.full_model, spec, seq, run.vocab, kSynMaxLen);
      for (const auto& row : dist) {
        worst_sum = std::max(worst_sum,
                             std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0));
      }
      const auto full = sk::predict(run.full_model, spec,
                                    sk::unmasked(sk::encode(seq, run.vocab, kSynMaxLen)));
      final_equal = final_equal && dist.size() == seq.tokens.size() &&
                    dist.back() == full.probabilities;
      ++probed;
      rows += dist.size();
    }
  }
  Outcome o;
  o.pass = probed > 0 && worst_sum <= kProbeSumTolerance && final_equal;
  o.detail = fmt("%zu sequences, %zu prefix rows: max |row sum - 1| = %.3e (tol %.0e), "
                 "final row %s the full-sequence prediction",
                 probed, rows, worst_sum, kProbeSumTolerance,
                 final_equal ? "equals" : "DIFFERS FROM");
  return o;
}

// ------------------------------------------------------------------ 7

Outcome criterion_identity() {
  sk::ModelConfig cfg;
  cfg.layers = 2;
  cfg.heads = 4;
  cfg.dim = 32;
  cfg.vocab_size = 60;
  cfg.max_len = 24;
  cfg.seed = 12;
  sk::Model model = sk::init_model(cfg);
  model.params.label.setZero();
  const auto seqs = sk::random_sequences(cfg.vocab_size, 16, 20, cfg.label_count, 4);
  std::size_t compared = 0;
  bool equal = true;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    sk::Rng rng(i);
    const auto ex = sk::mask_example(seqs[i], sk::MaskPolicy{}, rng, cfg.vocab_size);
    const auto ef = sk::encode(model, ex, sk::Mode::kEarlyFusion);
    const auto ls = sk::encode(model, ex, sk::Mode::kLateSupervision);
    equal = equal && ef.hidden.size() == ls.hidden.size() &&
            std::memcmp(ef.hidden.data(), ls.hidden.data(),
                        sizeof(double) * static_cast<std::size_t>(ef.hidden.size())) == 0;
    compared += static_cast<std::size_t>(ef.hidden.size());
  }
  Outcome o;
  o.pass = equal;
  o.detail = fmt("label table zeroed, 16 padded sequences, %zu hidden values: %s",
                 compared, equal ? "bitwise equal" : "DIFFER");
  return o;
}

// ------------------------------------------------------------------ 8

Outcome criterion_precomputed() {
  // Lexicon with multi-sense words and distinct glosses.
  const char* lexicon_text =
      "a\t00000001\t0.625\t0\tbright#1\tshining with light\n"
      "a\t00000002\t0\t0.25\tbright#2\tsharp and clever mind\n"
      "a\t00000003\t0.125\t0.5\tbright#3\tloud harsh colour\n"
      "n\t00000004\t0\t0\tfood#1\tany meal eaten\n"
      "n\t00000005\t0.25\t0\tfood#2\tmental nourishment idea\n"
      "a\t00000006\t0\t0.75\tcold#1\tlow temperature weather\n"
      "a\t00000007\t0.25\t0.125\tcold#2\tcalm clever mind\n"
      "v\t00000008\t0.5\t0\tshine#1\temit light\n"
      "v\t00000009\t0\t0.125\tshine#2\tbe clever and sharp\n";
  std::istringstream lex_in(lexicon_text);
  const sk::Lexicon lexicon = sk::Lexicon::parse(lex_in);

  const char* words[] = {"shining", "with", "light", "sharp", "and", "clever", "mind",
                         "loud", "harsh", "colour", "any", "meal", "eaten", "mental",
                         "nourishment", "idea", "low", "temperature", "weather", "calm",
                         "emit", "be", "the", "food", "was", "bright", "cold", "shine"};
  std::ostringstream vec_text;
  sk::Rng rng(8);
  for (const char* w : words) {
    vec_text << w;
    for (int k = 0; k < 12; ++k) vec_text << ' ' << rng.normal();
    vec_text << '\n';
  }
  std::istringstream vec_in(vec_text.str());
  auto store = std::make_shared<const sk::VectorStore>(sk::VectorStore::parse(vec_in));

  std::vector<sk::RawSentence> inputs;
  const std::vector<std::vector<std::string>> sentences = {
      {"the", "food", "was", "bright"},  {"cold", "weather", "and", "cold", "food"},
      {"bright", "mind", "shine"},       {"the", "meal", "was", "cold"},
      {"shine", "with", "bright", "light"}};
  const std::vector<std::vector<std::string>> tags = {
      {"DT", "NN", "VBD", "JJ"}, {"JJ", "NN", "CC", "JJ", "NN"}, {"JJ", "NN", "VB"},
      {"DT", "NN", "VBD", "JJ"}, {"VB", "IN", "JJ", "NN"}};
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    sk::RawSentence s;
    s.tokens = sentences[i];
    s.tags = tags[i];
    s.id = "doc" + std::to_string(i);
    s.label = static_cast<int>(i % 2);
    inputs.push_back(s);
  }

  bool identical = true;
  std::size_t logged_total = 0;
  for (std::size_t window : {std::size_t{0}, std::size_t{1}}) {
    sk::AnnotatorOptions opts;
    opts.context_window = window;
    const sk::Annotator direct(lexicon, sk::WordVectorAverage(store), nullptr, opts);
    std::vector<sk::SimilarityEntry> log;
    const auto a = direct.annotate_all(inputs, 1, &log);
    std::ostringstream dump;
    sk::write_precomputed(dump, log);
    std::istringstream reload(dump.str());
    const sk::Annotator replay(lexicon, sk::load_precomputed(reload), nullptr, opts);
    const auto b = replay.annotate_all(inputs, 1);
    std::ostringstream ja, jb;
    sk::write_jsonl(ja, a);
    sk::write_jsonl(jb, b);
    identical = identical && ja.str() == jb.str();
    logged_total += log.size();
  }
  Outcome o;
  o.pass = identical && logged_total > 0;
  o.detail = fmt("%zu logged cosine similarities (whole-sequence and windowed context): "
                 "JSONL %s",
                 logged_total, identical ? "byte-identical" : "DIFFERS");
  return o;
}

// ------------------------------------------------------------------ 9

Outcome criterion_release_file() {
  Outcome o;
  const auto path = swn_release::locate();
  if (!path) {
    o.skipped = true;
    o.detail = "SentiWordNet 3.0 release file not found (set " +
               std::string(swn_release::kEnvVar) + "); not verified";
    return o;
  }
  const swn_release::Result r = swn_release::check(*path);
  o.pass = r.pass;
  o.detail = r.detail;
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    const char* tag = o.skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
    if (!o.skipped && !o.pass) ++failures;
    std::printf("[%s] %2d %s: %s\n", tag, id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "knowledge-math oracle", criterion_oracle());
  std::string note;
  report(2, "attention invariants", criterion_attention(note));
  std::printf("       note: %s\n", note.c_str());
  report(3, "gradient check", criterion_gradcheck());
  report(4, "overfit", criterion_overfit());
  report(5, "masking statistics", criterion_masking());
  std::vector<SeparationRun> runs;
  report(6, "synthetic knowledge transfer", criterion_separation(runs));
  report(7, "EF/LS encoder identity", criterion_identity());
  report(8, "precomputed similarity replay", criterion_precomputed());
  report(9, "SentiWordNet release parse", criterion_release_file());
  report(10, "prefix probe contract", criterion_probe(runs));
  std::printf("%s: %d failing criteria\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
