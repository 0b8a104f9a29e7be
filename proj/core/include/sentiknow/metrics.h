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

#ifndef SENTIKNOW_METRICS_H_
#define SENTIKNOW_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sentiknow {

// Throw EmptyDataset on empty input and LengthMismatch on unequal lengths.
double accuracy(std::span<const int> predicted, std::span<const int> gold);

// Unweighted mean of per-class F1 over the classes that occur in either
// sequence.
double macro_f1(std::span<const int> predicted, std::span<const int> gold);

struct PrfScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Tag ids: 0 = B, 1 = I, 2 = O. An I that does not continue a span opens one.
// Returns half-open [begin, end) spans.
std::vector<std::pair<int, int>> bio_spans(std::span<const int> tags);

// Exact-match span scores pooled over all sequences. Both empty counts as a
// perfect score.
PrfScores span_f1(const std::vector<std::vector<int>>& predicted,
                  const std::vector<std::vector<int>>& gold);

// Micro-averaged scores over multi-hot rows.
PrfScores multilabel_f1(const std::vector<std::vector<int>>& predicted,
                        const std::vector<std::vector<int>>& gold);

// Correlations; 0 when either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);
// Pearson over average ranks.
double spearman(std::span<const double> x, std::span<const double> y);
std::vector<double> average_ranks(std::span<const double> values);

struct Metrics {
  std::size_t count = 0;
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> pearson;
  std::optional<double> spearman;

  // The number used for model selection.
  double primary() const;
  // Single-line JSON object with the set fields.
  std::string to_json() const;
};

}  // namespace sentiknow

#endif  // SENTIKNOW_METRICS_H_
