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

#include <benchmark/benchmark.h>

#include <memory>
#include <sstream>

#include "sentiknow/acquisition.h"
#include "sentiknow/corpus.h"
#include "sentiknow/embeddings.h"
#include "sentiknow/lexicon.h"
#include "sentiknow/model.h"
#include "sentiknow/rng.h"
#include "sentiknow/synthetic.h"

namespace sk = sentiknow;

namespace {

constexpr int kVocab = 1000;

sk::Model bench_model(int max_len) {
  sk::ModelConfig cfg;
  cfg.layers = 2;
  cfg.heads = 4;
  cfg.dim = 64;
  cfg.vocab_size = kVocab;
  cfg.max_len = max_len + 2;
  cfg.label_count = 5;
  return sk::init_model(cfg);
}

std::vector<sk::MaskedExample> bench_batch(std::size_t count, std::size_t length,
                                           sk::Route route) {
  const auto seqs = sk::random_sequences(kVocab, count, length, 5, 11);
  std::vector<sk::MaskedExample> out;
  sk::Rng rng(5);
  for (const auto& s : seqs) {
    auto ex = sk::mask_example(s, sk::MaskPolicy{}, rng, kVocab);
    ex.route = route;
    out.push_back(std::move(ex));
  }
  return out;
}

const sk::SyntheticData& synthetic() {
  static const sk::SyntheticData data =
      sk::make_synthetic(sk::SyntheticSpec::generated(200, 400), 256, 0, 3, false);
  return data;
}

std::shared_ptr<const sk::VectorStore> random_vectors(const sk::Lexicon& lexicon) {
  std::ostringstream text;
  sk::Rng rng(9);
  auto emit = [&](std::string_view word) {
    text << word;
    for (int i = 0; i < 50; ++i) text << ' ' << rng.normal();
    text << '\n';
  };
  lexicon.for_each_key([&](std::string_view lemma, sk::Pos5, auto) { emit(lemma); });
  std::istringstream in(text.str());
  return std::make_shared<const sk::VectorStore>(sk::VectorStore::parse(in));
}

void BM_Forward(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const auto model = bench_model(static_cast<int>(length));
  const auto batch = bench_batch(1, length, sk::Route::kEarlyFusion);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sk::forward(model, batch[0], sk::Mode::kEarlyFusion));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(length));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(128);

void BM_ForwardBackward(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const auto model = bench_model(static_cast<int>(length));
  const auto route = state.range(1) ? sk::Route::kLateSupervision : sk::Route::kEarlyFusion;
  const auto batch = bench_batch(1, length, route);
  auto grad = sk::Parameters::zeros(model.config);
  for (auto _ : state) {
    grad.set_zero();
    benchmark::DoNotOptimize(sk::example_gradient(model, batch[0], {}, grad));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(length));
}
BENCHMARK(BM_ForwardBackward)->Args({32, 0})->Args({32, 1})->Args({128, 0});

void BM_BatchGradient(benchmark::State& state) {
  const auto model = bench_model(64);
  const auto batch =
      bench_batch(static_cast<std::size_t>(state.range(0)), 64, sk::Route::kEarlyFusion);
  auto grad = sk::Parameters::zeros(model.config);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sk::batch_gradient(model, batch, {}, grad));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchGradient)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_MaskExample(benchmark::State& state) {
  const auto seqs = sk::random_sequences(kVocab, 1, 128, 5, 2);
  sk::Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sk::mask_example(seqs[0], sk::MaskPolicy{}, rng, kVocab));
  }
}
BENCHMARK(BM_MaskExample);

void BM_LexiconLookup(benchmark::State& state) {
  const auto lexicon = sk::Lexicon::from_records(synthetic().lexicon);
  std::vector<std::string> words;
  lexicon.for_each_key([&](std::string_view lemma, sk::Pos5, auto) { words.emplace_back(lemma); });
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lexicon.lookup(words[i], sk::Pos5::kAdjective));
    i = (i + 1) % words.size();
  }
}
BENCHMARK(BM_LexiconLookup);

void BM_Annotate(benchmark::State& state) {
  const bool context = state.range(0) != 0;
  const auto& data = synthetic();
  const auto lexicon = sk::Lexicon::from_records(data.lexicon);
  std::optional<sk::SimilaritySource> source;
  sk::AnnotatorOptions options;
  options.mode = sk::AttentionMode::kContextFreePrior;
  if (context) {
    source = sk::WordVectorAverage(random_vectors(lexicon));
    options.mode = sk::AttentionMode::kContextAware;
  }
  const sk::Annotator annotator(lexicon, source, nullptr, options);
  std::size_t tokens = 0;
  for (const auto& s : data.train) tokens += s.tokens.size();
  for (auto _ : state) {
    benchmark::DoNotOptimize(annotator.annotate_all(data.train));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(tokens));
}
BENCHMARK(BM_Annotate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
