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

#ifndef SENTIKNOW_TRAINING_H_
#define SENTIKNOW_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sentiknow/corpus.h"
#include "sentiknow/model.h"

namespace sentiknow {

// Linear warmup from 0 to peak over warmup_ratio * total_steps, then linear
// decay to 0 at total_steps.
struct Schedule {
  double peak_lr = 5e-5;
  double warmup_ratio = 0.1;
  long total_steps = 0;

  long warmup_steps() const;
  double lr(long step) const;
};

struct AdamState {
  Parameters m;
  Parameters v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double max_grad_norm = 1.0;

  static AdamState for_model(const ModelConfig& config);
};

double global_norm(const Parameters& grads);

// Rescales `grads` so its global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_global_norm(Parameters& grads, double max_norm);

// Clip, then one bias-corrected Adam update at lr = schedule.lr(step + 1).
// `grads` is clipped in place. Throws ShapeError on layout mismatch.
void adam_step(Parameters& params, Parameters& grads, AdamState& state,
               const Schedule& schedule);

// Pre-training variants: the full objective and its ablations.
enum class Ablation : std::uint8_t {
  kFull,
  kNoEf,         // every example goes to late supervision
  kNoLs,         // every example goes to early fusion
  kNoEfNoLs,     // plain masked LM: word head only, no label anywhere
  kNoPos,        // POS channel and POS head removed
  kNoPol,        // polarity channel and polarity head removed
  kNoPosNoPol,   // both knowledge channels removed
};

std::string_view ablation_name(Ablation a);
std::optional<Ablation> ablation_from_name(std::string_view name);

struct AblationSettings {
  double ef_fraction = 0.8;
  LossTerms terms;
  bool use_pos_channel = true;
  bool use_polar_channel = true;
};

AblationSettings resolve_ablation(Ablation ablation, double ef_fraction);

// Fisher-Yates permutation of 0..n-1 for one epoch.
std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed,
                                        long epoch);

struct StepLog {
  long step = 0;
  double lr = 0.0;
  double grad_norm = 0.0;
  LossBreakdown loss;
};

// "step,total,word,pos,polar,label" with a header row.
void write_loss_csv(std::ostream& out, std::span<const StepLog> curve);

struct PretrainOptions {
  ModelConfig model;
  MaskPolicy mask;
  double ef_fraction = 0.8;
  Ablation ablation = Ablation::kFull;
  int batch_size = 400;
  // Total optimizer steps; 0 derives it from epochs.
  long steps = 0;
  int epochs = 1;
  double peak_lr = 5e-5;
  double warmup_ratio = 0.1;
  double max_grad_norm = 1.0;
  double adam_epsilon = 1e-8;
  bool mean_over_masked = true;
  std::uint64_t seed = 42;

  // Called every eval_every steps (and after the last one) when set;
  // returning true stops training early.
  long eval_every = 0;
  std::function<bool(const Model&, long step)> on_eval;
};

struct PretrainResult {
  Model model;
  AdamState optim;
  std::vector<StepLog> curve;
};

// Masks and routes each drawn example from (seed, epoch, index), so results
// do not depend on batch preparation order. Starts from `init` when given,
// otherwise from a fresh model.
PretrainResult pretrain(const PretrainOptions& options,
                        std::span<const EncodedSequence> corpus,
                        const Model* init = nullptr);

struct PretrainAccuracy {
  double word = 0.0;
  double pos = 0.0;
  double polar = 0.0;
  std::optional<double> label;
  std::size_t masked_positions = 0;
};

// Accuracy of the pre-training heads on one fixed masking of `corpus` (seeded
// by `seed`). Token heads are scored under every route the ablation uses;
// label accuracy comes from late supervision.
PretrainAccuracy evaluate_pretraining(const Model& model,
                                      std::span<const EncodedSequence> corpus,
                                      const MaskPolicy& mask, Ablation ablation,
                                      std::uint64_t seed);

// Per-purpose random streams.
inline constexpr std::uint64_t kShuffleStream = 1;
inline constexpr std::uint64_t kMaskStream = 2;
inline constexpr std::uint64_t kRouteStream = 3;
inline constexpr std::uint64_t kEvalStream = 4;
inline constexpr std::uint64_t kHeadStream = 5;

}  // namespace sentiknow

#endif  // SENTIKNOW_TRAINING_H_
