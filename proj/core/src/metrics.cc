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

#include "sentiknow/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "sentiknow/errors.h"

namespace sentiknow {
namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a == 0 || b == 0) throw EmptyDataset();
  if (a != b) throw LengthMismatch(a, b);
}

PrfScores prf(std::size_t hits, std::size_t predicted, std::size_t gold) {
  PrfScores s;
  if (predicted == 0 && gold == 0) return {1.0, 1.0, 1.0};
  s.precision = predicted ? static_cast<double>(hits) / static_cast<double>(predicted) : 0.0;
  s.recall = gold ? static_cast<double>(hits) / static_cast<double>(gold) : 0.0;
  s.f1 = s.precision + s.recall > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

}  // namespace

double accuracy(std::span<const int> predicted, std::span<const int> gold) {
  check_lengths(predicted.size(), gold.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += predicted[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double macro_f1(std::span<const int> predicted, std::span<const int> gold) {
  check_lengths(predicted.size(), gold.size());
  std::set<int> classes(gold.begin(), gold.end());
  classes.insert(predicted.begin(), predicted.end());
  double sum = 0.0;
  for (int c : classes) {
    std::size_t tp = 0, pc = 0, gc = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      pc += predicted[i] == c;
      gc += gold[i] == c;
      tp += predicted[i] == c && gold[i] == c;
    }
    sum += prf(tp, pc, gc).f1;
  }
  return sum / static_cast<double>(classes.size());
}

std::vector<std::pair<int, int>> bio_spans(std::span<const int> tags) {
  std::vector<std::pair<int, int>> spans;
  int start = -1;
  const int n = static_cast<int>(tags.size());
  for (int i = 0; i < n; ++i) {
    const int t = tags[static_cast<std::size_t>(i)];
    if (t == 0 || (t == 1 && start < 0)) {
      if (start >= 0) spans.emplace_back(start, i);
      start = i;
    } else if (t != 1) {
      if (start >= 0) spans.emplace_back(start, i);
      start = -1;
    }
  }
  if (start >= 0) spans.emplace_back(start, n);
  return spans;
}

PrfScores span_f1(const std::vector<std::vector<int>>& predicted,
                  const std::vector<std::vector<int>>& gold) {
  check_lengths(predicted.size(), gold.size());
  std::size_t hits = 0, pc = 0, gc = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto p = bio_spans(predicted[i]);
    const auto g = bio_spans(gold[i]);
    pc += p.size();
    gc += g.size();
    const std::set<std::pair<int, int>> gs(g.begin(), g.end());
    for (const auto& s : p) hits += gs.count(s);
  }
  return prf(hits, pc, gc);
}

PrfScores multilabel_f1(const std::vector<std::vector<int>>& predicted,
                        const std::vector<std::vector<int>>& gold) {
  check_lengths(predicted.size(), gold.size());
  std::size_t hits = 0, pc = 0, gc = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i].size() != gold[i].size()) {
      throw LengthMismatch(predicted[i].size(), gold[i].size());
    }
    for (std::size_t j = 0; j < gold[i].size(); ++j) {
      pc += predicted[i][j] != 0;
      gc += gold[i][j] != 0;
      hits += predicted[i][j] != 0 && gold[i][j] != 0;
    }
  }
  return prf(hits, pc, gc);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size());
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size());
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double Metrics::primary() const {
  if (f1) return *f1;
  if (accuracy) return *accuracy;
  if (pearson) return *pearson;
  return 0.0;
}

std::string Metrics::to_json() const {
  nlohmann::ordered_json j;
  j["count"] = count;
  const std::tuple<const char*, const std::optional<double>*> fields[] = {
      {"accuracy", &accuracy}, {"macro_f1", &macro_f1}, {"precision", &precision},
      {"recall", &recall},     {"f1", &f1},             {"pearson", &pearson},
      {"spearman", &spearman}};
  for (const auto& [name, value] : fields) {
    if (value->has_value()) j[name] = **value;
  }
  return j.dump();
}

}  // namespace sentiknow
