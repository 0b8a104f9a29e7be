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

#ifndef SENTIKNOW_TASKS_H_
#define SENTIKNOW_TASKS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentiknow/acquisition.h"
#include "sentiknow/corpus.h"
#include "sentiknow/metrics.h"
#include "sentiknow/model.h"

namespace sentiknow {

enum class TaskKind : std::uint8_t {
  kSsc,                // sentence-level classification
  kAte,                // aspect term extraction, BIO per token
  kAtsc,               // aspect term sentiment classification
  kAcd,                // aspect category detection, multi-label
  kAcsc,               // aspect category sentiment classification
  kTextMatchClassify,  // sentence pair, K-way label
  kTextMatchRegress,   // sentence pair, real-valued score
};

std::string_view task_name(TaskKind kind);
std::optional<TaskKind> task_from_name(std::string_view name);

// BIO tag ids for extraction.
inline constexpr int kTagB = 0;
inline constexpr int kTagI = 1;
inline constexpr int kTagO = 2;

struct TaskSpec {
  TaskKind kind = TaskKind::kSsc;
  // Classes for the softmax tasks.
  int class_count = 2;
  // Category names for detection.
  std::vector<std::string> categories;

  TaskHeadKind head() const;
  int outputs() const;
  bool two_segment() const;
  bool classification() const;
  // Throws InvalidConfig.
  void validate() const;
};

// One task-file row before annotation.
//
// Columns (tab-separated), per kind:
//   ssc                  label  text
//   ate                  text   tags        (space-separated B/I/O per token)
//   atsc, acsc           aspect text  label
//   acd                  text   categories  (comma-separated, may be empty)
//   text_match_classify  text_a text_b label
//   text_match_regress   text_a text_b score
struct TaskRecord {
  RawSentence first;
  std::optional<RawSentence> second;
  int label = -1;
  double score = 0.0;
  std::vector<int> tags;
  std::vector<int> categories;  // multi-hot
};

// Throws FormatError with the offending line.
std::vector<TaskRecord> read_task_tsv(std::istream& in, const TaskSpec& spec);
std::vector<TaskRecord> read_task_tsv(const std::filesystem::path& path,
                                      const TaskSpec& spec);

struct TaskExample {
  KnowledgeSequence first;
  std::optional<KnowledgeSequence> second;
  int label = -1;
  double score = 0.0;
  std::vector<int> tags;
  std::vector<int> categories;
};

std::vector<TaskExample> annotate_task(const Annotator& annotator,
                                       std::span<const TaskRecord> records,
                                       std::size_t workers = 1);

// Sentence-classification examples from a labeled corpus.
std::vector<TaskExample> ssc_examples(std::span<const KnowledgeSequence> corpus);

struct EncodedTaskExample {
  MaskedExample input;
  int label = -1;
  double score = 0.0;
  std::vector<int> tags;  // one per content position
  std::vector<int> categories;
};

// Single-segment tasks use [CLS] x [SEP]; pair tasks [CLS] a [SEP] x [SEP].
// Extraction tags are truncated along with the text. Throws FormatError on
// out-of-range targets or a tag/token count mismatch.
EncodedTaskExample encode_task_example(const TaskSpec& spec,
                                       const TaskExample& example,
                                       const Vocab& vocab, std::size_t max_len);
std::vector<EncodedTaskExample> encode_task_examples(
    const TaskSpec& spec, std::span<const TaskExample> examples,
    const Vocab& vocab, std::size_t max_len);

struct TaskPrediction {
  int label = -1;
  double score = 0.0;
  std::vector<int> tags;
  std::vector<int> categories;
  std::vector<double> probabilities;  // classification only
};

TaskPrediction predict(const Model& model, const TaskSpec& spec,
                       const MaskedExample& input);

// Task loss of one example; adds scale * gradient to `grad` when non-null.
//   classification: softmax cross-entropy on h_cls
//   regression: squared error of a scalar head on h_cls
//   extraction: per-token 3-way cross-entropy, averaged over tokens
//   detection: per-category sigmoid cross-entropy, summed
double task_loss(const Model& model, const TaskSpec& spec,
                 const EncodedTaskExample& example, Parameters* grad = nullptr,
                 double scale = 1.0);

// Throws EmptyDataset. Classification: accuracy, macro-F1. Extraction: span
// P/R/F1. Detection: micro P/R/F1. Regression: Pearson, Spearman.
Metrics evaluate(const Model& model, const TaskSpec& spec,
                 std::span<const EncodedTaskExample> data);

struct FineTuneOptions {
  int epochs = 3;
  int batch_size = 16;
  double peak_lr = 2e-5;
  double warmup_ratio = 0.1;
  double max_grad_norm = 1.0;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 42;
};

struct FineTuneResult {
  Model model;
  // Validation metrics of the kept snapshot; empty without validation data.
  std::optional<Metrics> valid;
  int best_epoch = 0;
  std::vector<double> loss_curve;
};

// Attaches a fresh task head to a copy of `pretrained` and trains every
// parameter. The encoder runs without the label embedding. With validation
// data, the epoch with the best Metrics::primary() is kept.
FineTuneResult finetune(const Model& pretrained, const TaskSpec& spec,
                        std::span<const EncodedTaskExample> train,
                        std::span<const EncodedTaskExample> valid,
                        const FineTuneOptions& options);

// Class distribution for every prefix "[CLS] x_1..x_t [SEP]", t = 1..n.
// Needs a sentence-classification model. Throws InvalidConfig otherwise.
std::vector<std::vector<double>> probe_prefixes(const Model& model,
                                                const TaskSpec& spec,
                                                const KnowledgeSequence& sequence,
                                                const Vocab& vocab,
                                                std::size_t max_len);

}  // namespace sentiknow

#endif  // SENTIKNOW_TASKS_H_
