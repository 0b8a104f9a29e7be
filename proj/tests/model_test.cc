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

#include "sentiknow/model.h"

#include <gtest/gtest.h>

#include <cmath>

#include "sentiknow/corpus.h"
#include "sentiknow/errors.h"
#include "sentiknow/synthetic.h"

namespace sk = sentiknow;

namespace {

sk::ModelConfig small_config() {
  sk::ModelConfig c;
  c.layers = 2;
  c.heads = 2;
  c.dim = 16;
  c.vocab_size = 97;
  c.max_len = 16;
  c.label_count = 5;
  c.seed = 3;
  // Larger weights than the default make every gradient path non-trivial.
  c.init_scale = 0.2;
  return c;
}

std::vector<sk::MaskedExample> masked_batch(const sk::ModelConfig& cfg, std::size_t n,
                                            std::uint64_t seed, sk::Route route) {
  const auto seqs = sk::random_sequences(cfg.vocab_size, n, 10, cfg.label_count, seed);
  std::vector<sk::MaskedExample> out;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    sk::Rng rng = sk::Rng::derive(seed, 2, i);
    out.push_back(sk::mask_example(seqs[i], sk::MaskPolicy{}, rng, cfg.vocab_size));
    out.back().route = route;
  }
  return out;
}

sk::HeadOutputs hand_heads(int rows, int v, int k) {
  sk::HeadOutputs h;
  h.word_logits = sk::Matrix::Zero(rows, v);
  h.pos_logits = sk::Matrix::Zero(rows, 5);
  h.polar_logits = sk::Matrix::Zero(rows, 3);
  h.label_logits = sk::RowVector::Zero(k);
  return h;
}

// Cross-entropy computed in long double from the definition.
double oracle_ce(const std::vector<double>& logits, int target) {
  long double z = 0;
  for (double x : logits) z += std::exp(static_cast<long double>(x));
  return static_cast<double>(std::log(z) - logits[static_cast<std::size_t>(target)]);
}

}  // namespace

TEST(Config, Validation) {
  auto c = small_config();
  EXPECT_NO_THROW(c.validate());
  c.heads = 3;
  EXPECT_THROW(c.validate(), sk::InvalidConfig);
  c = small_config();
  c.vocab_size = 0;
  EXPECT_THROW(c.validate(), sk::InvalidConfig);
}

TEST(Init, DeterministicAndZeroScale) {
  const auto a = sk::init_model(small_config());
  const auto b = sk::init_model(small_config());
  std::vector<const sk::Matrix*> ta, tb;
  a.params.for_each([&](std::string_view, const sk::Matrix& m) { ta.push_back(&m); });
  b.params.for_each([&](std::string_view, const sk::Matrix& m) { tb.push_back(&m); });
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) EXPECT_TRUE(*ta[i] == *tb[i]);

  auto c = small_config();
  c.init_scale = 0.0;
  const auto z = sk::init_model(c);
  EXPECT_EQ(z.params.token.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(z.params.layers[0].wq.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(z.params.layers[0].ln1_gain.minCoeff(), 1.0);
  EXPECT_EQ(z.params.layers[1].b1.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Init, ParameterCountClosedForm) {
  sk::ModelConfig c;
  c.layers = 2;
  c.heads = 2;
  c.dim = 16;
  c.vocab_size = 100;
  c.max_len = 128;
  c.label_count = 5;
  // embeddings (100+128+2+6+4+5)*16 = 3920; per layer 3264; final 32; heads 1921.
  EXPECT_EQ(sk::parameter_count(c), 12401u);
  EXPECT_EQ(sk::init_model(c).params.count(), 12401u);
  c.tie_word_head = true;
  EXPECT_EQ(sk::parameter_count(c), 12401u - 1600u);
  EXPECT_EQ(sk::init_model(c).params.count(), 12401u - 1600u);
}

TEST(Forward, SoftmaxRowsSumToOne) {
  const auto model = sk::init_model(small_config());
  for (auto route : {sk::Route::kEarlyFusion, sk::Route::kLateSupervision}) {
    const auto batch = masked_batch(model.config, 6, 11, route);
    for (const auto& r : sk::forward_batch(model, batch, sk::mode_for(route))) {
      for (const sk::Matrix* m :
           {&r.heads.word_logits, &r.heads.pos_logits, &r.heads.polar_logits}) {
        const sk::Matrix p = sk::softmax_rows(*m);
        for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-9);
        EXPECT_TRUE(m->allFinite());
      }
      if (route == sk::Route::kLateSupervision) {
        EXPECT_NEAR(sk::softmax_rows(r.heads.label_logits).sum(), 1.0, 1e-9);
      } else {
        EXPECT_EQ(r.heads.label_logits.size(), 0);
      }
    }
  }
}

TEST(Forward, LogSoftmaxMatchesSoftmaxForLargeLogits) {
  sk::Matrix x(1, 3);
  x << 1000.0, 999.0, -1000.0;
  const sk::Matrix p = sk::softmax_rows(x);
  const sk::Matrix lp = sk::log_softmax_rows(x);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(std::exp(lp(0, 1)), p(0, 1), 1e-15);
  EXPECT_NEAR(p(0, 0), 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
}

TEST(Forward, EarlyFusionWithZeroLabelTableMatchesLateSupervision) {
  auto model = sk::init_model(small_config());
  model.params.label.setZero();
  for (const auto& ex : masked_batch(model.config, 5, 21, sk::Route::kEarlyFusion)) {
    const auto ef = sk::encode(model, ex, sk::Mode::kEarlyFusion);
    const auto ls = sk::encode(model, ex, sk::Mode::kLateSupervision);
    EXPECT_TRUE(ef.hidden == ls.hidden);
  }
}

TEST(Forward, LabelChangesEarlyFusionOnly) {
  const auto model = sk::init_model(small_config());
  auto ex = masked_batch(model.config, 1, 5, sk::Route::kEarlyFusion)[0];
  ex.label = 0;
  const auto a = sk::encode(model, ex, sk::Mode::kEarlyFusion);
  const auto la = sk::encode(model, ex, sk::Mode::kLateSupervision);
  ex.label = 4;
  const auto b = sk::encode(model, ex, sk::Mode::kEarlyFusion);
  const auto lb = sk::encode(model, ex, sk::Mode::kLateSupervision);
  EXPECT_FALSE(a.hidden == b.hidden);
  EXPECT_TRUE(la.hidden == lb.hidden);
}

TEST(Forward, PaddingInvariance) {
  const auto model = sk::init_model(small_config());
  const auto seqs = sk::random_sequences(model.config.vocab_size, 8, 9, 5, 31);
  for (const auto& seq : seqs) {
    // Strip any padding the generator added, then pad to the full length.
    sk::EncodedSequence tight = seq;
    while (tight.token_ids.back() == sk::kPadId) {
      tight.token_ids.pop_back();
      tight.pos_ids.pop_back();
      tight.polar_ids.pop_back();
      tight.segment_ids.pop_back();
    }
    sk::EncodedSequence padded = tight;
    sk::pad_to(padded, 16);
    for (auto mode : {sk::Mode::kEarlyFusion, sk::Mode::kLateSupervision}) {
      const auto h1 = sk::encode(model, sk::unmasked(tight), mode).hidden;
      const auto h2 = sk::encode(model, sk::unmasked(padded), mode).hidden;
      ASSERT_EQ(h2.rows(), 16);
      EXPECT_LT((h1 - h2.topRows(h1.rows())).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Forward, BatchPermutationPermutesOutputs) {
  const auto model = sk::init_model(small_config());
  auto batch = masked_batch(model.config, 5, 41, sk::Route::kLateSupervision);
  const auto out = sk::forward_batch(model, batch, sk::Mode::kLateSupervision);
  std::vector<sk::MaskedExample> reversed(batch.rbegin(), batch.rend());
  const auto rout = sk::forward_batch(model, reversed, sk::Mode::kLateSupervision);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& a = out[i];
    const auto& b = rout[batch.size() - 1 - i];
    EXPECT_TRUE(a.encoder.hidden == b.encoder.hidden);
    EXPECT_TRUE(a.heads.word_logits == b.heads.word_logits);
    EXPECT_TRUE(a.heads.label_logits == b.heads.label_logits);
  }
}

TEST(Forward, RejectsOutOfRangeIds) {
  const auto model = sk::init_model(small_config());
  auto ex = masked_batch(model.config, 1, 3, sk::Route::kEarlyFusion)[0];
  ex.input_ids[1] = model.config.vocab_size;
  EXPECT_THROW(sk::forward(model, ex, sk::Mode::kEarlyFusion), sk::ShapeError);
}

TEST(Loss, UniformWordHeadGivesLogV) {
  const int v = 97;
  auto h = hand_heads(3, v, 5);
  std::vector<sk::MaskTarget> targets(3);
  for (int i = 0; i < 3; ++i) {
    targets[i] = {i + 1, 10 + i, 2, 1};
    h.pos_logits(i, 2) = 1e4;
    h.polar_logits(i, 1) = 1e4;
  }
  const auto l = sk::loss_ef(h, targets);
  EXPECT_NEAR(l.word, std::log(97.0), 1e-12);
  EXPECT_NEAR(l.pos, 0.0, 1e-12);
  EXPECT_NEAR(l.polar, 0.0, 1e-12);
  EXPECT_EQ(l.label, 0.0);
}

TEST(Loss, PerfectHeadsGiveZero) {
  auto h = hand_heads(1, 10, 4);
  std::vector<sk::MaskTarget> targets{{1, 7, 3, 0}};
  h.word_logits(0, 7) = 1e4;
  h.pos_logits(0, 3) = 1e4;
  h.polar_logits(0, 0) = 1e4;
  h.label_logits(2) = 1e4;
  EXPECT_NEAR(sk::loss_ef(h, targets).total(), 0.0, 1e-12);
  EXPECT_NEAR(sk::loss_ls(h, targets, 2).total(), 0.0, 1e-12);
}

TEST(Loss, UniformLabelPerfectTokensGivesLogK) {
  auto h = hand_heads(2, 6, 5);
  std::vector<sk::MaskTarget> targets{{1, 5, 0, 2}, {2, 4, 1, 2}};
  for (int i = 0; i < 2; ++i) {
    h.word_logits(i, targets[i].word_id) = 1e4;
    h.pos_logits(i, targets[i].pos_id) = 1e4;
    h.polar_logits(i, 2) = 1e4;
  }
  EXPECT_NEAR(sk::loss_ls(h, targets, 3).total(), std::log(5.0), 1e-12);
}

TEST(Loss, HandSetTwoTokenCaseMatchesOracle) {
  auto h = hand_heads(2, 4, 3);
  const std::vector<std::vector<double>> word{{0.5, -1.0, 2.0, 0.0}, {1.5, 0.25, -0.75, 3.0}};
  const std::vector<std::vector<double>> pos{{0.1, 0.2, 0.3, 0.4, 0.5}, {-2, 0, 2, 0, -2}};
  const std::vector<std::vector<double>> pol{{1, 0, -1}, {0.3, 0.3, 0.9}};
  const std::vector<double> lab{0.2, -0.4, 1.1};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 4; ++j) h.word_logits(i, j) = word[i][j];
    for (int j = 0; j < 5; ++j) h.pos_logits(i, j) = pos[i][j];
    for (int j = 0; j < 3; ++j) h.polar_logits(i, j) = pol[i][j];
  }
  for (int j = 0; j < 3; ++j) h.label_logits(j) = lab[j];
  std::vector<sk::MaskTarget> targets{{1, 2, 4, 0}, {3, 1, 2, 2}};

  const double word_sum = oracle_ce(word[0], 2) + oracle_ce(word[1], 1);
  const double pos_sum = oracle_ce(pos[0], 4) + oracle_ce(pos[1], 2);
  const double pol_sum = oracle_ce(pol[0], 0) + oracle_ce(pol[1], 2);
  const double label = oracle_ce(lab, 1);

  const auto ef = sk::loss_ef(h, targets);
  EXPECT_NEAR(ef.word, word_sum / 2, 1e-9);
  EXPECT_NEAR(ef.pos, pos_sum / 2, 1e-9);
  EXPECT_NEAR(ef.polar, pol_sum / 2, 1e-9);
  const auto ls = sk::loss_ls(h, targets, 1);
  EXPECT_NEAR(ls.total(), (word_sum + pos_sum + pol_sum) / 2 + label, 1e-9);

  sk::LossOptions sum_opts;
  sum_opts.mean_over_masked = false;
  EXPECT_NEAR(sk::loss_ls(h, targets, 1, sum_opts).total(),
              word_sum + pos_sum + pol_sum + label, 1e-9);
}

TEST(Loss, Errors) {
  const auto h = hand_heads(0, 4, 3);
  EXPECT_THROW(sk::loss_ef(h, {}), sk::NoMaskedPositions);
  const auto h1 = hand_heads(1, 4, 3);
  std::vector<sk::MaskTarget> t{{1, 0, 0, 0}};
  EXPECT_THROW(sk::loss_ls(h1, t, std::nullopt), sk::MissingLabel);
}

TEST(Backward, LabelTableGradientZeroInLateSupervision) {
  const auto model = sk::init_model(small_config());
  const auto batch = masked_batch(model.config, 4, 9, sk::Route::kLateSupervision);
  sk::Parameters grad;
  sk::batch_gradient(model, batch, {}, grad);
  EXPECT_EQ(grad.label.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(grad.label_w.cwiseAbs().maxCoeff(), 0.0);

  const auto ef = masked_batch(model.config, 4, 9, sk::Route::kEarlyFusion);
  sk::batch_gradient(model, ef, {}, grad);
  EXPECT_GT(grad.label.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(grad.label_w.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, DisabledChannelGetsZeroGradient) {
  auto cfg = small_config();
  cfg.use_pos_channel = false;
  const auto model = sk::init_model(cfg);
  const auto batch = masked_batch(cfg, 3, 2, sk::Route::kEarlyFusion);
  sk::Parameters grad;
  sk::batch_gradient(model, batch, {}, grad);
  EXPECT_EQ(grad.pos_tag.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(grad.polarity.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, ScaleIsLinear) {
  const auto model = sk::init_model(small_config());
  const auto ex = masked_batch(model.config, 1, 13, sk::Route::kLateSupervision)[0];
  auto g1 = sk::Parameters::zeros(model.config);
  auto g2 = sk::Parameters::zeros(model.config);
  sk::example_gradient(model, ex, {}, g1, 1.0);
  sk::example_gradient(model, ex, {}, g2, 2.0);
  std::vector<sk::Matrix*> a, b;
  g1.for_each([&](std::string_view, sk::Matrix& m) { a.push_back(&m); });
  g2.for_each([&](std::string_view, sk::Matrix& m) { b.push_back(&m); });
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(*b[i] == 2.0 * *a[i]);
}

TEST(Backward, Reproducible) {
  const auto model = sk::init_model(small_config());
  const auto batch = masked_batch(model.config, 3, 19, sk::Route::kEarlyFusion);
  sk::Parameters g1, g2;
  const auto l1 = sk::batch_gradient(model, batch, {}, g1);
  const auto l2 = sk::batch_gradient(model, batch, {}, g2);
  EXPECT_EQ(l1.total(), l2.total());
  EXPECT_TRUE(g1.token == g2.token);
  EXPECT_TRUE(g1.layers[1].w2 == g2.layers[1].w2);
}

TEST(GradCheck, BothModesPass) {
  const auto model = sk::init_model(small_config());
  for (auto route : {sk::Route::kEarlyFusion, sk::Route::kLateSupervision}) {
    const auto batch = masked_batch(model.config, 4, 17, route);
    const auto report = sk::grad_check(model, batch, {});
    EXPECT_GE(report.entries.size(), 500u);
    EXPECT_LT(report.max_relative_error, 1e-4);
  }
}

TEST(GradCheck, SumLossPasses) {
  const auto model = sk::init_model(small_config());
  const auto batch = masked_batch(model.config, 2, 23, sk::Route::kLateSupervision);
  sk::LossOptions opts;
  opts.mean_over_masked = false;
  EXPECT_LT(sk::grad_check(model, batch, opts).max_relative_error, 1e-4);
}

TEST(GradCheck, DetectsCorruptedEntry) {
  const auto model = sk::init_model(small_config());
  const auto batch = masked_batch(model.config, 4, 17, sk::Route::kEarlyFusion);
  sk::Parameters grad;
  sk::batch_gradient(model, batch, {}, grad);
  const auto clean = sk::compare_gradients(model, batch, {}, grad);
  // Corrupt the largest sampled coordinate of the first FFN weight.
  const sk::GradCheckEntry* pick = nullptr;
  for (const auto& e : clean.entries) {
    if (e.tensor == "layers.0.w1" && (!pick || std::abs(e.analytic) > std::abs(pick->analytic))) {
      pick = &e;
    }
  }
  ASSERT_NE(pick, nullptr);
  grad.layers[0].w1.data()[pick->index] *= 1.01;
  const auto corrupted = sk::compare_gradients(model, batch, {}, grad);
  EXPECT_GT(corrupted.max_relative_error, 1e-3);
}

TEST(GradCheck, RelativeErrorDefinition) {
  EXPECT_EQ(sk::relative_error(1.0, 1.0), 0.0);
  EXPECT_NEAR(sk::relative_error(1.0, 0.99), 0.01, 1e-15);
  EXPECT_NEAR(sk::relative_error(1e-12, 0.0), 1e-4, 1e-18);
}

TEST(TaskHead, FineTuneHasNoPretrainingHeads) {
  auto model = sk::init_model(small_config());
  sk::Rng rng(4);
  sk::attach_task_head(model, sk::TaskHeadKind::kSequence, 3, rng);
  const auto ex = sk::unmasked(sk::random_sequences(97, 1, 8, 5, 2)[0]);
  const auto r = sk::forward(model, ex, sk::Mode::kFineTune);
  EXPECT_EQ(r.heads.task_logits.rows(), 1);
  EXPECT_EQ(r.heads.task_logits.cols(), 3);
  EXPECT_EQ(r.heads.word_logits.size(), 0);
  EXPECT_EQ(r.heads.label_logits.size(), 0);

  sk::attach_task_head(model, sk::TaskHeadKind::kToken, 3, rng);
  const auto t = sk::forward(model, ex, sk::Mode::kFineTune);
  EXPECT_EQ(t.heads.task_logits.rows(),
            static_cast<Eigen::Index>(sk::content_positions(ex).size()));
}
