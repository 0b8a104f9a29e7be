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

#ifndef SENTIKNOW_MODEL_H_
#define SENTIKNOW_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sentiknow/corpus.h"
#include "sentiknow/rng.h"

namespace sentiknow {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// Shape of the task head attached for fine-tuning.
enum class TaskHeadKind : std::uint8_t {
  kNone = 0,
  kSequence = 1,  // reads h_cls
  kToken = 2,     // reads h_1..h_n
};

struct ModelConfig {
  int layers = 2;
  int heads = 4;
  int dim = 64;
  int ffn_dim = 0;  // 0 means 4 * dim
  int vocab_size = 0;
  int max_len = 128;
  int label_count = 5;
  double layer_norm_eps = 1e-5;
  double init_scale = 0.02;
  std::uint64_t seed = 42;
  bool tie_word_head = false;
  // Knowledge channels. Disabling one leaves its table at zero gradient.
  bool use_pos_channel = true;
  bool use_polar_channel = true;
  TaskHeadKind task_head = TaskHeadKind::kNone;
  int task_outputs = 0;

  int ffn() const { return ffn_dim > 0 ? ffn_dim : 4 * dim; }
  int head_dim() const { return dim / heads; }
  // Throws InvalidConfig.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

// The key projection has no bias: attention is invariant to it.
struct LayerParameters {
  Matrix ln1_gain, ln1_bias;
  Matrix wq, bq, wk, wv, bv, wo, bo;
  Matrix ln2_gain, ln2_bias;
  Matrix w1, b1, w2, b2;
};

// Every trainable tensor. Biases and gains are 1 x n matrices. Gradients and
// optimizer moments reuse this type.
struct Parameters {
  // Input embeddings.
  Matrix token;      // V x d
  Matrix position;   // max_len x d
  Matrix segment;    // 2 x d
  Matrix pos_tag;    // 6 x d (five classes + mask)
  Matrix polarity;   // 4 x d (three classes + mask)
  Matrix label;      // K x d, added at every position in early fusion

  std::vector<LayerParameters> layers;
  Matrix final_gain, final_bias;

  // Pre-training heads.
  Matrix word_w, word_b;    // d x V (empty when tied), 1 x V
  Matrix pos_w, pos_b;      // d x 5
  Matrix polar_w, polar_b;  // d x 3
  Matrix label_w, label_b;  // d x K

  // Fine-tuning head, d x task_outputs (empty without a task).
  Matrix task_w, task_b;

  // All-zero tensors shaped for `config`.
  static Parameters zeros(const ModelConfig& config);

  // fn(std::string_view name, Matrix& tensor) over every non-empty tensor in
  // a fixed order.
  template <typename Fn>
  void for_each(Fn&& fn) { visit(*this, fn); }
  template <typename Fn>
  void for_each(Fn&& fn) const { visit(*this, fn); }

  std::size_t count() const;
  void set_zero();

 private:
  template <typename Self, typename Fn>
  static void visit(Self& self, Fn& fn);
};

// Gaussian(0, init_scale^2) weights and embeddings, zero biases, unit
// layer-norm gains. Deterministic in the generator state.
Parameters init_params(const ModelConfig& config, Rng& rng);

// Closed-form parameter count for `config`.
std::size_t parameter_count(const ModelConfig& config);

struct Model {
  ModelConfig config;
  Parameters params;
};

Model init_model(const ModelConfig& config);

// Replaces the task head with a freshly initialized one.
void attach_task_head(Model& model, TaskHeadKind kind, int outputs, Rng& rng);

enum class Mode : std::uint8_t { kEarlyFusion, kLateSupervision, kFineTune };

Mode mode_for(Route route);

struct EncoderOutput {
  Matrix hidden;  // one row per input position
};

struct HeadOutputs {
  std::vector<int> positions;  // masked positions, in order
  Matrix word_logits;          // |positions| x V
  Matrix pos_logits;           // |positions| x 5
  Matrix polar_logits;         // |positions| x 3
  RowVector label_logits;      // K in late supervision, empty otherwise
  Matrix task_logits;          // fine-tuning: 1 x T or n_content x T
};

// Per-layer activations kept for the backward pass.
struct LayerCache {
  Matrix input;
  Matrix ln1_hat;
  Eigen::VectorXd ln1_rstd;
  Matrix ln1_out;
  Matrix q, k, v;
  std::vector<Matrix> probs;
  Matrix context;
  Matrix mid;
  Matrix ln2_hat;
  Eigen::VectorXd ln2_rstd;
  Matrix ln2_out;
  Matrix pre_act;
  Matrix act;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  Matrix final_hat;
  Eigen::VectorXd final_rstd;
};

// Input embedding sum -> pre-LN blocks -> final layer norm. [PAD] keys are
// masked out of attention. Early fusion adds the label embedding at every
// position. Throws ShapeError for out-of-range ids or length, MissingLabel
// for early fusion without a label.
EncoderOutput encode(const Model& model, const MaskedExample& example, Mode mode,
                     ForwardCache* cache = nullptr);

// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(hidden).
void encode_backward(const Model& model, const MaskedExample& example,
                     Mode mode, const ForwardCache& cache,
                     const Matrix& d_hidden, Parameters& grad);

// Head logits. Word/POS/polarity rows at masked positions in the
// pre-training modes, label logits from h_cls in late supervision, task
// logits in fine-tuning.
HeadOutputs compute_heads(const Model& model, const Matrix& hidden,
                          const MaskedExample& example, Mode mode);

struct ForwardResult {
  EncoderOutput encoder;
  HeadOutputs heads;
};

ForwardResult forward(const Model& model, const MaskedExample& example,
                      Mode mode);
std::vector<ForwardResult> forward_batch(const Model& model,
                                         std::span<const MaskedExample> batch,
                                         Mode mode);

// Content positions (not [CLS]/[SEP]/[PAD]) in order.
std::vector<int> content_positions(const MaskedExample& example);

struct LossTerms {
  bool word = true;
  bool pos = true;
  bool polar = true;
  bool label = true;
};

struct LossOptions {
  LossTerms terms;
  // Masked-position terms are averaged over the masked count; false gives
  // the plain sum.
  bool mean_over_masked = true;
};

// Loss split by term. total() is their sum.
struct LossBreakdown {
  double word = 0.0;
  double pos = 0.0;
  double polar = 0.0;
  double label = 0.0;

  double total() const { return word + pos + polar + label; }
  LossBreakdown& operator+=(const LossBreakdown& other);
  LossBreakdown scaled(double s) const;
};

// -sum_t m_t [log P(word) + log P(pos) + log P(polar)], divided by the number
// of masked positions unless options.mean_over_masked is false.
// Throws NoMaskedPositions.
LossBreakdown loss_ef(const HeadOutputs& heads, std::span<const MaskTarget> targets,
                      const LossOptions& options = {});

// loss_ef plus -log P(label | h_cls), which is never divided.
// Throws NoMaskedPositions, MissingLabel.
LossBreakdown loss_ls(const HeadOutputs& heads, std::span<const MaskTarget> targets,
                      std::optional<int> label, const LossOptions& options = {});

// Loss of one example under its route.
LossBreakdown example_loss(const Model& model, const MaskedExample& example,
                           const LossOptions& options = {});

// Same, accumulating scale * gradient into `grad`.
LossBreakdown example_gradient(const Model& model, const MaskedExample& example,
                               const LossOptions& options, Parameters& grad,
                               double scale = 1.0);

// Mean over the batch.
LossBreakdown batch_loss(const Model& model, std::span<const MaskedExample> batch,
                         const LossOptions& options = {});
// Mean over the batch; `grad` is overwritten.
LossBreakdown batch_gradient(const Model& model,
                             std::span<const MaskedExample> batch,
                             const LossOptions& options, Parameters& grad);

struct GradCheckOptions {
  double step = 1e-4;
  std::size_t samples = 500;
  std::uint64_t seed = 7;
};

struct GradCheckEntry {
  std::string tensor;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::vector<GradCheckEntry> entries;
};

// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double analytic, double numeric);

// Central differences on a seeded, per-tensor stratified sample of at least
// options.samples coordinates.
GradCheckReport grad_check(const Model& model,
                           std::span<const MaskedExample> batch,
                           const LossOptions& loss_options,
                           const GradCheckOptions& options = {});

// As grad_check, but against a caller-supplied analytic gradient.
GradCheckReport compare_gradients(const Model& model,
                                  std::span<const MaskedExample> batch,
                                  const LossOptions& loss_options,
                                  const Parameters& analytic,
                                  const GradCheckOptions& options = {});

// Row-wise softmax / log-softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);
Matrix log_softmax_rows(const Matrix& logits);

template <typename Self, typename Fn>
void Parameters::visit(Self& self, Fn& fn) {
  auto call = [&fn](std::string_view name, auto& tensor) {
    if (tensor.size() > 0) fn(name, tensor);
  };
  call("embeddings.token", self.token);
  call("embeddings.position", self.position);
  call("embeddings.segment", self.segment);
  call("embeddings.pos_tag", self.pos_tag);
  call("embeddings.polarity", self.polarity);
  call("embeddings.label", self.label);
  std::string prefix;
  for (std::size_t i = 0; i < self.layers.size(); ++i) {
    auto& layer = self.layers[i];
    prefix = "layers." + std::to_string(i) + ".";
    call(prefix + "ln1_gain", layer.ln1_gain);
    call(prefix + "ln1_bias", layer.ln1_bias);
    call(prefix + "wq", layer.wq);
    call(prefix + "bq", layer.bq);
    call(prefix + "wk", layer.wk);
    call(prefix + "wv", layer.wv);
    call(prefix + "bv", layer.bv);
    call(prefix + "wo", layer.wo);
    call(prefix + "bo", layer.bo);
    call(prefix + "ln2_gain", layer.ln2_gain);
    call(prefix + "ln2_bias", layer.ln2_bias);
    call(prefix + "w1", layer.w1);
    call(prefix + "b1", layer.b1);
    call(prefix + "w2", layer.w2);
    call(prefix + "b2", layer.b2);
  }
  call("final.gain", self.final_gain);
  call("final.bias", self.final_bias);
  call("heads.word_w", self.word_w);
  call("heads.word_b", self.word_b);
  call("heads.pos_w", self.pos_w);
  call("heads.pos_b", self.pos_b);
  call("heads.polar_w", self.polar_w);
  call("heads.polar_b", self.polar_b);
  call("heads.label_w", self.label_w);
  call("heads.label_b", self.label_b);
  call("task.w", self.task_w);
  call("task.b", self.task_b);
}

}  // namespace sentiknow

#endif  // SENTIKNOW_MODEL_H_
