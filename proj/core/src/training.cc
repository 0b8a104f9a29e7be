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

#include "sentiknow/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "sentiknow/errors.h"
#include "text_util.h"

namespace sentiknow {
namespace {

template <typename Fn>
void zip_tensors(Parameters& a, const Parameters& b, Fn&& fn) {
  std::vector<Matrix*> lhs;
  a.for_each([&](std::string_view, Matrix& m) { lhs.push_back(&m); });
  std::vector<const Matrix*> rhs;
  b.for_each([&](std::string_view, const Matrix& m) { rhs.push_back(&m); });
  if (lhs.size() != rhs.size()) throw ShapeError("parameter layouts differ");
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (lhs[i]->rows() != rhs[i]->rows() || lhs[i]->cols() != rhs[i]->cols()) {
      throw ShapeError("parameter shapes differ");
    }
    fn(*lhs[i], *rhs[i]);
  }
}

}  // namespace

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed,
                                     long epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::derive(seed, kShuffleStream, static_cast<std::uint64_t>(epoch));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  return order;
}

long Schedule::warmup_steps() const {
  return std::lround(warmup_ratio * static_cast<double>(total_steps));
}

double Schedule::lr(long step) const {
  if (total_steps <= 0 || step < 0 || step >= total_steps) return 0.0;
  const long warmup = warmup_steps();
  if (step < warmup) {
    return peak_lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  return peak_lr * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup);
}

AdamState AdamState::for_model(const ModelConfig& config) {
  AdamState s;
  s.m = Parameters::zeros(config);
  s.v = Parameters::zeros(config);
  return s;
}

double global_norm(const Parameters& grads) {
  double sq = 0.0;
  grads.for_each([&](std::string_view, const Matrix& m) { sq += m.squaredNorm(); });
  return std::sqrt(sq);
}

double clip_global_norm(Parameters& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    grads.for_each([&](std::string_view, Matrix& m) { m *= factor; });
  }
  return norm;
}

void adam_step(Parameters& params, Parameters& grads, AdamState& state,
               const Schedule& schedule) {
  clip_global_norm(grads, state.max_grad_norm);
  ++state.step;
  const double lr = schedule.lr(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  zip_tensors(state.m, grads, [&](Matrix& m, const Matrix& g) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
  });
  zip_tensors(state.v, grads, [&](Matrix& v, const Matrix& g) {
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
  });
  if (lr == 0.0) return;

  std::vector<Matrix*> p;
  params.for_each([&](std::string_view, Matrix& m) { p.push_back(&m); });
  std::vector<const Matrix*> m;
  state.m.for_each([&](std::string_view, const Matrix& x) { m.push_back(&x); });
  std::vector<const Matrix*> v;
  state.v.for_each([&](std::string_view, const Matrix& x) { v.push_back(&x); });
  if (p.size() != m.size()) throw ShapeError("parameter layouts differ");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i]->size() != m[i]->size()) throw ShapeError("parameter shapes differ");
    p[i]->array() -= lr * (m[i]->array() / c1) /
                     ((v[i]->array() / c2).sqrt() + state.epsilon);
  }
}

std::string_view ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kNoEf: return "no_ef";
    case Ablation::kNoLs: return "no_ls";
    case Ablation::kNoEfNoLs: return "no_ef_no_ls";
    case Ablation::kNoPos: return "no_pos";
    case Ablation::kNoPol: return "no_pol";
    case Ablation::kNoPosNoPol: return "no_pos_no_pol";
  }
  return "full";
}

std::optional<Ablation> ablation_from_name(std::string_view name) {
  for (Ablation a : {Ablation::kFull, Ablation::kNoEf, Ablation::kNoLs,
                     Ablation::kNoEfNoLs, Ablation::kNoPos, Ablation::kNoPol,
                     Ablation::kNoPosNoPol}) {
    if (ablation_name(a) == name) return a;
  }
  return std::nullopt;
}

AblationSettings resolve_ablation(Ablation ablation, double ef_fraction) {
  AblationSettings s;
  s.ef_fraction = ef_fraction;
  switch (ablation) {
    case Ablation::kFull:
      break;
    case Ablation::kNoEf:
      s.ef_fraction = 0.0;
      break;
    case Ablation::kNoLs:
      s.ef_fraction = 1.0;
      break;
    case Ablation::kNoEfNoLs:
      // Late-supervision routing without the label term: no label embedding
      // and no label head.
      s.ef_fraction = 0.0;
      s.terms = LossTerms{true, false, false, false};
      break;
    case Ablation::kNoPos:
      s.use_pos_channel = false;
      s.terms.pos = false;
      break;
    case Ablation::kNoPol:
      s.use_polar_channel = false;
      s.terms.polar = false;
      break;
    case Ablation::kNoPosNoPol:
      s.use_pos_channel = false;
      s.use_polar_channel = false;
      s.terms.pos = false;
      s.terms.polar = false;
      break;
  }
  return s;
}

void write_loss_csv(std::ostream& out, std::span<const StepLog> curve) {
  out << "step,total,word,pos,polar,label\n";
  for (const StepLog& s : curve) {
    out << s.step << ',' << text::format_double(s.loss.total()) << ','
        << text::format_double(s.loss.word) << ','
        << text::format_double(s.loss.pos) << ','
        << text::format_double(s.loss.polar) << ','
        << text::format_double(s.loss.label) << '\n';
  }
}

PretrainResult pretrain(const PretrainOptions& options,
                        std::span<const EncodedSequence> corpus,
                        const Model* init) {
  if (corpus.empty()) throw EmptyCorpus();
  if (options.batch_size < 1) throw InvalidConfig("batch_size must be positive");
  options.mask.validate();
  const AblationSettings ablation =
      resolve_ablation(options.ablation, options.ef_fraction);

  PretrainResult result;
  if (init != nullptr) {
    result.model = *init;
  } else {
    ModelConfig cfg = options.model;
    cfg.use_pos_channel = ablation.use_pos_channel;
    cfg.use_polar_channel = ablation.use_polar_channel;
    result.model = init_model(cfg);
  }
  Model& model = result.model;
  result.optim = AdamState::for_model(model.config);
  result.optim.epsilon = options.adam_epsilon;
  result.optim.max_grad_norm = options.max_grad_norm;

  const std::size_t n = corpus.size();
  const auto batch = static_cast<std::size_t>(options.batch_size);
  const long derived_steps = static_cast<long>(
      (n * static_cast<std::size_t>(std::max(options.epochs, 1)) + batch - 1) / batch);
  Schedule schedule{options.peak_lr, options.warmup_ratio,
                    options.steps > 0 ? options.steps : derived_steps};

  const LossOptions loss_options{ablation.terms, options.mean_over_masked};
  long epoch = 0;
  std::size_t cursor = 0;
  std::vector<std::size_t> order = shuffled_order(n, options.seed, epoch);
  std::vector<MaskedExample> examples;
  Parameters grads;

  for (long step = 0; step < schedule.total_steps; ++step) {
    // Batches are consecutive slices of the stream of epoch permutations, so
    // a batch larger than the corpus holds several maskings of each sequence.
    examples.clear();
    for (std::size_t drawn = 0; drawn < batch; ++drawn, ++cursor) {
      if (cursor >= n) {
        ++epoch;
        cursor = 0;
        order = shuffled_order(n, options.seed, epoch);
      }
      const std::size_t index = order[cursor];
      const std::uint64_t draw = static_cast<std::uint64_t>(epoch) * n + index;
      Rng mask_rng = Rng::derive(options.seed, kMaskStream, draw);
      Rng route_rng = Rng::derive(options.seed, kRouteStream, draw);
      MaskedExample ex = mask_example(corpus[index], options.mask, mask_rng,
                                      model.config.vocab_size);
      ex.route = route_example(ablation.ef_fraction, route_rng);
      if (ex.targets.empty()) continue;
      examples.push_back(std::move(ex));
    }
    if (examples.empty()) continue;

    StepLog log;
    log.step = step;
    log.loss = batch_gradient(model, examples, loss_options, grads);
    log.grad_norm = global_norm(grads);
    adam_step(model.params, grads, result.optim, schedule);
    log.lr = schedule.lr(result.optim.step);
    result.curve.push_back(log);

    const bool last = step + 1 == schedule.total_steps;
    if (options.on_eval && options.eval_every > 0 &&
        ((step + 1) % options.eval_every == 0 || last)) {
      if (options.on_eval(model, step + 1)) break;
    }
  }
  return result;
}

PretrainAccuracy evaluate_pretraining(const Model& model,
                                      std::span<const EncodedSequence> corpus,
                                      const MaskPolicy& mask, Ablation ablation,
                                      std::uint64_t seed) {
  const AblationSettings settings = resolve_ablation(ablation, 0.5);
  std::vector<Mode> modes;
  if (settings.ef_fraction > 0.0) modes.push_back(Mode::kEarlyFusion);
  if (settings.ef_fraction < 1.0) modes.push_back(Mode::kLateSupervision);

  PretrainAccuracy acc;
  std::size_t word = 0, pos = 0, polar = 0, scored = 0;
  std::size_t label_hits = 0, label_total = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Rng rng = Rng::derive(seed, kEvalStream, i);
    const MaskedExample ex = mask_example(corpus[i], mask, rng, model.config.vocab_size);
    if (ex.targets.empty()) continue;
    for (Mode mode : modes) {
      const ForwardResult r = forward(model, ex, mode);
      for (std::size_t j = 0; j < ex.targets.size(); ++j) {
        const auto row = static_cast<Eigen::Index>(j);
        Eigen::Index arg;
        r.heads.word_logits.row(row).maxCoeff(&arg);
        word += arg == ex.targets[j].word_id;
        r.heads.pos_logits.row(row).maxCoeff(&arg);
        pos += arg == ex.targets[j].pos_id;
        r.heads.polar_logits.row(row).maxCoeff(&arg);
        polar += arg == ex.targets[j].polar_id;
        ++scored;
      }
      if (mode == Mode::kLateSupervision && settings.terms.label && ex.label) {
        Eigen::Index arg;
        r.heads.label_logits.maxCoeff(&arg);
        label_hits += arg == *ex.label;
        ++label_total;
      }
    }
  }
  if (scored > 0) {
    acc.word = static_cast<double>(word) / static_cast<double>(scored);
    acc.pos = static_cast<double>(pos) / static_cast<double>(scored);
    acc.polar = static_cast<double>(polar) / static_cast<double>(scored);
  }
  acc.masked_positions = scored;
  if (label_total > 0) {
    acc.label = static_cast<double>(label_hits) / static_cast<double>(label_total);
  }
  return acc;
}

}  // namespace sentiknow
