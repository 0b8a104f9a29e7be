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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sentiknow/errors.h"

namespace sentiknow {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double sigma, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sigma * rng.normal();
  return m;
}

Matrix constant_row(Eigen::Index n, double value) {
  return Matrix::Constant(1, n, value);
}

double gelu(double z) { return 0.5 * z * (1.0 + std::erf(z * kInvSqrt2)); }

double gelu_grad(double z) {
  return 0.5 * (1.0 + std::erf(z * kInvSqrt2)) +
         z * kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

void add_bias(Matrix& m, const Matrix& bias) { m.rowwise() += bias.row(0); }

void layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias,
                double eps, Matrix& hat, Eigen::VectorXd& rstd, Matrix& out) {
  const Eigen::Index n = x.rows();
  const double d = static_cast<double>(x.cols());
  hat.resize(n, x.cols());
  rstd.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = x.row(i).sum() / d;
    const double var = (x.row(i).array() - mean).square().sum() / d;
    rstd(i) = 1.0 / std::sqrt(var + eps);
    hat.row(i) = (x.row(i).array() - mean) * rstd(i);
  }
  out = hat.array().rowwise() * gain.row(0).array();
  add_bias(out, bias);
}

Matrix layer_norm_backward(const Matrix& d_out, const Matrix& hat,
                           const Eigen::VectorXd& rstd, const Matrix& gain,
                           Matrix& d_gain, Matrix& d_bias) {
  d_gain += (d_out.array() * hat.array()).colwise().sum().matrix();
  d_bias += d_out.colwise().sum();
  const Matrix d_hat = d_out.array().rowwise() * gain.row(0).array();
  const double d = static_cast<double>(hat.cols());
  Matrix d_x(hat.rows(), hat.cols());
  for (Eigen::Index i = 0; i < hat.rows(); ++i) {
    const double mean_dhat = d_hat.row(i).sum() / d;
    const double mean_dhat_hat = d_hat.row(i).dot(hat.row(i)) / d;
    d_x.row(i) = rstd(i) * (d_hat.row(i).array() - mean_dhat -
                            hat.row(i).array() * mean_dhat_hat);
  }
  return d_x;
}

void check_id(int id, Eigen::Index rows, const char* what) {
  if (id < 0 || id >= rows) {
    throw ShapeError(std::string(what) + " id " + std::to_string(id) +
                     " out of range [0," + std::to_string(rows) + ")");
  }
}

void check_example(const Model& model, const MaskedExample& ex, Mode mode) {
  const std::size_t n = ex.input_ids.size();
  if (n == 0) throw ShapeError("empty input");
  if (ex.input_pos_ids.size() != n || ex.input_polar_ids.size() != n ||
      ex.segment_ids.size() != n) {
    throw ShapeError("input channels differ in length");
  }
  if (n > static_cast<std::size_t>(model.config.max_len)) {
    throw ShapeError("input length " + std::to_string(n) + " exceeds max_len " +
                     std::to_string(model.config.max_len));
  }
  const Parameters& p = model.params;
  for (std::size_t t = 0; t < n; ++t) {
    check_id(ex.input_ids[t], p.token.rows(), "token");
    check_id(ex.input_pos_ids[t], p.pos_tag.rows(), "pos");
    check_id(ex.input_polar_ids[t], p.polarity.rows(), "polarity");
    check_id(ex.segment_ids[t], p.segment.rows(), "segment");
  }
  if (mode == Mode::kEarlyFusion) {
    if (!ex.label) throw MissingLabel();
    check_id(*ex.label, p.label.rows(), "label");
  }
}

Matrix embed(const Model& model, const MaskedExample& ex, Mode mode) {
  const Parameters& p = model.params;
  const auto n = static_cast<Eigen::Index>(ex.input_ids.size());
  Matrix x(n, model.config.dim);
  for (Eigen::Index t = 0; t < n; ++t) {
    x.row(t) = p.token.row(ex.input_ids[t]) + p.position.row(t) +
               p.segment.row(ex.segment_ids[t]);
    if (model.config.use_pos_channel) x.row(t) += p.pos_tag.row(ex.input_pos_ids[t]);
    if (model.config.use_polar_channel) {
      x.row(t) += p.polarity.row(ex.input_polar_ids[t]);
    }
    if (mode == Mode::kEarlyFusion) x.row(t) += p.label.row(*ex.label);
  }
  return x;
}

void embed_backward(const Model& model, const MaskedExample& ex, Mode mode,
                    const Matrix& d_x, Parameters& g) {
  for (Eigen::Index t = 0; t < d_x.rows(); ++t) {
    g.token.row(ex.input_ids[t]) += d_x.row(t);
    g.position.row(t) += d_x.row(t);
    g.segment.row(ex.segment_ids[t]) += d_x.row(t);
    if (model.config.use_pos_channel) g.pos_tag.row(ex.input_pos_ids[t]) += d_x.row(t);
    if (model.config.use_polar_channel) {
      g.polarity.row(ex.input_polar_ids[t]) += d_x.row(t);
    }
    if (mode == Mode::kEarlyFusion) g.label.row(*ex.label) += d_x.row(t);
  }
}

Matrix layer_forward(const ModelConfig& cfg, const LayerParameters& L,
                     const Matrix& x, const std::vector<char>& valid,
                     LayerCache& c) {
  const Eigen::Index n = x.rows();
  const int dh = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  c.input = x;
  layer_norm(x, L.ln1_gain, L.ln1_bias, cfg.layer_norm_eps, c.ln1_hat,
             c.ln1_rstd, c.ln1_out);
  c.q = c.ln1_out * L.wq;
  add_bias(c.q, L.bq);
  c.k = c.ln1_out * L.wk;
  c.v = c.ln1_out * L.wv;
  add_bias(c.v, L.bv);

  c.context.resize(n, cfg.dim);
  c.probs.resize(static_cast<std::size_t>(cfg.heads));
  for (int h = 0; h < cfg.heads; ++h) {
    const auto qh = c.q.middleCols(h * dh, dh);
    const auto kh = c.k.middleCols(h * dh, dh);
    const auto vh = c.v.middleCols(h * dh, dh);
    Matrix s = (qh * kh.transpose()) * scale;
    for (Eigen::Index i = 0; i < n; ++i) {
      double max_score = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (valid[static_cast<std::size_t>(j)]) max_score = std::max(max_score, s(i, j));
      }
      double total = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (valid[static_cast<std::size_t>(j)]) {
          s(i, j) = std::exp(s(i, j) - max_score);
          total += s(i, j);
        } else {
          s(i, j) = 0.0;
        }
      }
      s.row(i) /= total;
    }
    c.context.middleCols(h * dh, dh) = s * vh;
    c.probs[static_cast<std::size_t>(h)] = std::move(s);
  }
  Matrix attn = c.context * L.wo;
  add_bias(attn, L.bo);
  c.mid = x + attn;

  layer_norm(c.mid, L.ln2_gain, L.ln2_bias, cfg.layer_norm_eps, c.ln2_hat,
             c.ln2_rstd, c.ln2_out);
  c.pre_act = c.ln2_out * L.w1;
  add_bias(c.pre_act, L.b1);
  c.act = c.pre_act.unaryExpr([](double z) { return gelu(z); });
  Matrix ffn = c.act * L.w2;
  add_bias(ffn, L.b2);
  return c.mid + ffn;
}

Matrix layer_backward(const ModelConfig& cfg, const LayerParameters& L,
                      const LayerCache& c, const Matrix& d_out,
                      LayerParameters& g) {
  const int dh = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // Feed-forward sub-block.
  Matrix d_mid = d_out;
  g.w2 += c.act.transpose() * d_out;
  g.b2 += d_out.colwise().sum();
  Matrix d_pre = d_out * L.w2.transpose();
  d_pre.array() *= c.pre_act.unaryExpr([](double z) { return gelu_grad(z); }).array();
  g.w1 += c.ln2_out.transpose() * d_pre;
  g.b1 += d_pre.colwise().sum();
  const Matrix d_ln2 = d_pre * L.w1.transpose();
  d_mid += layer_norm_backward(d_ln2, c.ln2_hat, c.ln2_rstd, L.ln2_gain,
                               g.ln2_gain, g.ln2_bias);

  // Attention sub-block.
  Matrix d_x = d_mid;
  g.wo += c.context.transpose() * d_mid;
  g.bo += d_mid.colwise().sum();
  const Matrix d_context = d_mid * L.wo.transpose();

  const Eigen::Index n = c.input.rows();
  Matrix d_q(n, cfg.dim), d_k(n, cfg.dim), d_v(n, cfg.dim);
  for (int h = 0; h < cfg.heads; ++h) {
    const Matrix& p = c.probs[static_cast<std::size_t>(h)];
    const auto d_ctx_h = d_context.middleCols(h * dh, dh);
    const Matrix d_p = d_ctx_h * c.v.middleCols(h * dh, dh).transpose();
    d_v.middleCols(h * dh, dh) = p.transpose() * d_ctx_h;
    const Eigen::VectorXd row_dot = (d_p.array() * p.array()).rowwise().sum();
    Matrix d_s = p.array() * (d_p.colwise() - row_dot).array();
    d_s *= scale;
    d_q.middleCols(h * dh, dh) = d_s * c.k.middleCols(h * dh, dh);
    d_k.middleCols(h * dh, dh) = d_s.transpose() * c.q.middleCols(h * dh, dh);
  }
  g.wq += c.ln1_out.transpose() * d_q;
  g.bq += d_q.colwise().sum();
  g.wk += c.ln1_out.transpose() * d_k;
  g.wv += c.ln1_out.transpose() * d_v;
  g.bv += d_v.colwise().sum();
  const Matrix d_ln1 =
      d_q * L.wq.transpose() + d_k * L.wk.transpose() + d_v * L.wv.transpose();
  d_x += layer_norm_backward(d_ln1, c.ln1_hat, c.ln1_rstd, L.ln1_gain,
                             g.ln1_gain, g.ln1_bias);
  return d_x;
}

std::vector<char> key_validity(const MaskedExample& ex) {
  std::vector<char> valid(ex.input_ids.size());
  for (std::size_t t = 0; t < valid.size(); ++t) valid[t] = ex.input_ids[t] != kPadId;
  return valid;
}

// Cross-entropy of one logit row; fills d_logits with softmax - onehot.
double cross_entropy_row(const Eigen::Ref<const RowVector>& logits, int target,
                         RowVector* d_logits) {
  if (target < 0 || target >= logits.size()) {
    throw ShapeError("target " + std::to_string(target) + " outside " +
                     std::to_string(logits.size()) + " classes");
  }
  const double max_logit = logits.maxCoeff();
  const RowVector shifted = logits.array() - max_logit;
  const double log_z = std::log(shifted.array().exp().sum());
  if (d_logits != nullptr) {
    *d_logits = (shifted.array() - log_z).exp().matrix();
    (*d_logits)(target) -= 1.0;
  }
  return log_z - shifted(target);
}

Matrix word_logits(const Model& model, const Matrix& rows) {
  const Parameters& p = model.params;
  Matrix out = model.config.tie_word_head ? Matrix(rows * p.token.transpose())
                                          : Matrix(rows * p.word_w);
  add_bias(out, p.word_b);
  return out;
}

}  // namespace

void ModelConfig::validate() const {
  if (layers < 1 || heads < 1 || dim < 1 || ffn() < 1 || max_len < 1 ||
      label_count < 1) {
    throw InvalidConfig("model dimensions must be positive");
  }
  if (vocab_size <= kReservedTokens) {
    throw InvalidConfig("vocab_size must exceed the 5 reserved tokens");
  }
  if (dim % heads != 0) throw InvalidConfig("dim must be divisible by heads");
  if (!(layer_norm_eps > 0.0)) throw InvalidConfig("layer_norm_eps must be positive");
  if (!(init_scale >= 0.0)) throw InvalidConfig("init_scale must be non-negative");
  if ((task_head == TaskHeadKind::kNone) != (task_outputs == 0) || task_outputs < 0) {
    throw InvalidConfig("task head kind and output count disagree");
  }
}

Parameters Parameters::zeros(const ModelConfig& cfg) {
  const int d = cfg.dim;
  const int f = cfg.ffn();
  Parameters p;
  p.token = Matrix::Zero(cfg.vocab_size, d);
  p.position = Matrix::Zero(cfg.max_len, d);
  p.segment = Matrix::Zero(2, d);
  p.pos_tag = Matrix::Zero(kPos5Count + 1, d);
  p.polarity = Matrix::Zero(kPolarityCount + 1, d);
  p.label = Matrix::Zero(cfg.label_count, d);
  p.layers.resize(static_cast<std::size_t>(cfg.layers));
  for (LayerParameters& L : p.layers) {
    L.ln1_gain = Matrix::Zero(1, d);
    L.ln1_bias = Matrix::Zero(1, d);
    L.wq = Matrix::Zero(d, d);
    L.bq = Matrix::Zero(1, d);
    L.wk = Matrix::Zero(d, d);
    L.wv = Matrix::Zero(d, d);
    L.bv = Matrix::Zero(1, d);
    L.wo = Matrix::Zero(d, d);
    L.bo = Matrix::Zero(1, d);
    L.ln2_gain = Matrix::Zero(1, d);
    L.ln2_bias = Matrix::Zero(1, d);
    L.w1 = Matrix::Zero(d, f);
    L.b1 = Matrix::Zero(1, f);
    L.w2 = Matrix::Zero(f, d);
    L.b2 = Matrix::Zero(1, d);
  }
  p.final_gain = Matrix::Zero(1, d);
  p.final_bias = Matrix::Zero(1, d);
  if (!cfg.tie_word_head) p.word_w = Matrix::Zero(d, cfg.vocab_size);
  p.word_b = Matrix::Zero(1, cfg.vocab_size);
  p.pos_w = Matrix::Zero(d, kPos5Count);
  p.pos_b = Matrix::Zero(1, kPos5Count);
  p.polar_w = Matrix::Zero(d, kPolarityCount);
  p.polar_b = Matrix::Zero(1, kPolarityCount);
  p.label_w = Matrix::Zero(d, cfg.label_count);
  p.label_b = Matrix::Zero(1, cfg.label_count);
  if (cfg.task_outputs > 0) {
    p.task_w = Matrix::Zero(d, cfg.task_outputs);
    p.task_b = Matrix::Zero(1, cfg.task_outputs);
  }
  return p;
}

std::size_t Parameters::count() const {
  std::size_t total = 0;
  for_each([&](std::string_view, const Matrix& m) {
    total += static_cast<std::size_t>(m.size());
  });
  return total;
}

void Parameters::set_zero() {
  for_each([](std::string_view, Matrix& m) { m.setZero(); });
}

Parameters init_params(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  const double s = cfg.init_scale;
  Parameters p = Parameters::zeros(cfg);
  p.token = gaussian(p.token.rows(), p.token.cols(), s, rng);
  p.position = gaussian(p.position.rows(), p.position.cols(), s, rng);
  p.segment = gaussian(p.segment.rows(), p.segment.cols(), s, rng);
  p.pos_tag = gaussian(p.pos_tag.rows(), p.pos_tag.cols(), s, rng);
  p.polarity = gaussian(p.polarity.rows(), p.polarity.cols(), s, rng);
  p.label = gaussian(p.label.rows(), p.label.cols(), s, rng);
  for (LayerParameters& L : p.layers) {
    L.ln1_gain.setOnes();
    L.ln2_gain.setOnes();
    L.wq = gaussian(L.wq.rows(), L.wq.cols(), s, rng);
    L.wk = gaussian(L.wk.rows(), L.wk.cols(), s, rng);
    L.wv = gaussian(L.wv.rows(), L.wv.cols(), s, rng);
    L.wo = gaussian(L.wo.rows(), L.wo.cols(), s, rng);
    L.w1 = gaussian(L.w1.rows(), L.w1.cols(), s, rng);
    L.w2 = gaussian(L.w2.rows(), L.w2.cols(), s, rng);
  }
  p.final_gain.setOnes();
  if (!cfg.tie_word_head) p.word_w = gaussian(p.word_w.rows(), p.word_w.cols(), s, rng);
  p.pos_w = gaussian(p.pos_w.rows(), p.pos_w.cols(), s, rng);
  p.polar_w = gaussian(p.polar_w.rows(), p.polar_w.cols(), s, rng);
  p.label_w = gaussian(p.label_w.rows(), p.label_w.cols(), s, rng);
  if (cfg.task_outputs > 0) {
    p.task_w = gaussian(p.task_w.rows(), p.task_w.cols(), s, rng);
  }
  return p;
}

std::size_t parameter_count(const ModelConfig& cfg) {
  const std::size_t d = static_cast<std::size_t>(cfg.dim);
  const std::size_t f = static_cast<std::size_t>(cfg.ffn());
  const std::size_t v = static_cast<std::size_t>(cfg.vocab_size);
  const std::size_t k = static_cast<std::size_t>(cfg.label_count);
  const std::size_t t = static_cast<std::size_t>(cfg.task_outputs);
  const std::size_t embeddings =
      (v + static_cast<std::size_t>(cfg.max_len) + 2 + 6 + 4 + k) * d;
  const std::size_t per_layer = 4 * d + 4 * d * d + 3 * d + 2 * d * f + f + d;
  const std::size_t heads = (cfg.tie_word_head ? 0 : d * v) + v + 5 * d + 5 +
                            3 * d + 3 + k * d + k;
  const std::size_t task = t > 0 ? d * t + t : 0;
  return embeddings + static_cast<std::size_t>(cfg.layers) * per_layer + 2 * d +
         heads + task;
}

Model init_model(const ModelConfig& config) {
  Rng rng(config.seed);
  return Model{config, init_params(config, rng)};
}

void attach_task_head(Model& model, TaskHeadKind kind, int outputs, Rng& rng) {
  model.config.task_head = kind;
  model.config.task_outputs = kind == TaskHeadKind::kNone ? 0 : outputs;
  model.config.validate();
  if (model.config.task_outputs == 0) {
    model.params.task_w.resize(0, 0);
    model.params.task_b.resize(0, 0);
    return;
  }
  model.params.task_w =
      gaussian(model.config.dim, outputs, model.config.init_scale, rng);
  model.params.task_b = Matrix::Zero(1, outputs);
}

Mode mode_for(Route route) {
  return route == Route::kEarlyFusion ? Mode::kEarlyFusion : Mode::kLateSupervision;
}

EncoderOutput encode(const Model& model, const MaskedExample& example, Mode mode,
                     ForwardCache* cache) {
  check_example(model, example, mode);
  const ModelConfig& cfg = model.config;
  const std::vector<char> valid = key_validity(example);

  ForwardCache local;
  ForwardCache& c = cache != nullptr ? *cache : local;
  c.layers.resize(static_cast<std::size_t>(cfg.layers));

  Matrix x = embed(model, example, mode);
  for (std::size_t l = 0; l < c.layers.size(); ++l) {
    x = layer_forward(cfg, model.params.layers[l], x, valid, c.layers[l]);
  }
  EncoderOutput out;
  layer_norm(x, model.params.final_gain, model.params.final_bias,
             cfg.layer_norm_eps, c.final_hat, c.final_rstd, out.hidden);
  return out;
}

void encode_backward(const Model& model, const MaskedExample& example,
                     Mode mode, const ForwardCache& cache,
                     const Matrix& d_hidden, Parameters& grad) {
  const ModelConfig& cfg = model.config;
  Matrix d_x = layer_norm_backward(d_hidden, cache.final_hat, cache.final_rstd,
                                   model.params.final_gain, grad.final_gain,
                                   grad.final_bias);
  for (std::size_t l = cache.layers.size(); l-- > 0;) {
    d_x = layer_backward(cfg, model.params.layers[l], cache.layers[l], d_x,
                         grad.layers[l]);
  }
  embed_backward(model, example, mode, d_x, grad);
}

std::vector<int> content_positions(const MaskedExample& example) {
  std::vector<int> out;
  for (std::size_t t = 0; t < example.input_ids.size(); ++t) {
    if (!is_special_token(example.input_ids[t])) out.push_back(static_cast<int>(t));
  }
  return out;
}

HeadOutputs compute_heads(const Model& model, const Matrix& hidden,
                          const MaskedExample& example, Mode mode) {
  const Parameters& p = model.params;
  HeadOutputs out;
  if (mode == Mode::kFineTune) {
    if (model.config.task_head == TaskHeadKind::kSequence) {
      out.task_logits = hidden.topRows(1) * p.task_w;
      add_bias(out.task_logits, p.task_b);
    } else if (model.config.task_head == TaskHeadKind::kToken) {
      const std::vector<int> rows = content_positions(example);
      Matrix h(static_cast<Eigen::Index>(rows.size()), hidden.cols());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        h.row(static_cast<Eigen::Index>(i)) = hidden.row(rows[i]);
      }
      out.task_logits = h * p.task_w;
      add_bias(out.task_logits, p.task_b);
      out.positions = rows;
    }
    return out;
  }

  const auto m = static_cast<Eigen::Index>(example.targets.size());
  Matrix h(m, hidden.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    const int pos = example.targets[static_cast<std::size_t>(i)].position;
    if (pos < 0 || pos >= hidden.rows()) throw ShapeError("target position out of range");
    out.positions.push_back(pos);
    h.row(i) = hidden.row(pos);
  }
  out.word_logits = word_logits(model, h);
  out.pos_logits = h * p.pos_w;
  add_bias(out.pos_logits, p.pos_b);
  out.polar_logits = h * p.polar_w;
  add_bias(out.polar_logits, p.polar_b);
  if (mode == Mode::kLateSupervision) {
    out.label_logits = hidden.row(0) * p.label_w + p.label_b;
  }
  return out;
}

ForwardResult forward(const Model& model, const MaskedExample& example,
                      Mode mode) {
  ForwardResult r;
  r.encoder = encode(model, example, mode);
  r.heads = compute_heads(model, r.encoder.hidden, example, mode);
  return r;
}

std::vector<ForwardResult> forward_batch(const Model& model,
                                         std::span<const MaskedExample> batch,
                                         Mode mode) {
  std::vector<ForwardResult> out;
  out.reserve(batch.size());
  for (const MaskedExample& ex : batch) out.push_back(forward(model, ex, mode));
  return out;
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
  word += o.word;
  pos += o.pos;
  polar += o.polar;
  label += o.label;
  return *this;
}

LossBreakdown LossBreakdown::scaled(double s) const {
  return {word * s, pos * s, polar * s, label * s};
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const RowVector e = (logits.row(i).array() - logits.row(i).maxCoeff()).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const RowVector shifted = logits.row(i).array() - logits.row(i).maxCoeff();
    out.row(i) = shifted.array() - std::log(shifted.array().exp().sum());
  }
  return out;
}

LossBreakdown loss_ef(const HeadOutputs& heads, std::span<const MaskTarget> targets,
                      const LossOptions& options) {
  if (targets.empty()) throw NoMaskedPositions();
  if (heads.word_logits.rows() != static_cast<Eigen::Index>(targets.size())) {
    throw ShapeError("head rows do not match targets");
  }
  LossBreakdown out;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (options.terms.word) {
      out.word += cross_entropy_row(heads.word_logits.row(r), targets[i].word_id, nullptr);
    }
    if (options.terms.pos) {
      out.pos += cross_entropy_row(heads.pos_logits.row(r), targets[i].pos_id, nullptr);
    }
    if (options.terms.polar) {
      out.polar +=
          cross_entropy_row(heads.polar_logits.row(r), targets[i].polar_id, nullptr);
    }
  }
  if (options.mean_over_masked) out = out.scaled(1.0 / static_cast<double>(targets.size()));
  return out;
}

LossBreakdown loss_ls(const HeadOutputs& heads, std::span<const MaskTarget> targets,
                      std::optional<int> label, const LossOptions& options) {
  LossBreakdown out = loss_ef(heads, targets, options);
  if (options.terms.label) {
    if (!label) throw MissingLabel();
    out.label = cross_entropy_row(heads.label_logits, *label, nullptr);
  }
  return out;
}

LossBreakdown example_loss(const Model& model, const MaskedExample& example,
                           const LossOptions& options) {
  const Mode mode = mode_for(example.route);
  const ForwardResult r = forward(model, example, mode);
  return mode == Mode::kEarlyFusion
             ? loss_ef(r.heads, example.targets, options)
             : loss_ls(r.heads, example.targets, example.label, options);
}

LossBreakdown example_gradient(const Model& model, const MaskedExample& example,
                               const LossOptions& options, Parameters& grad,
                               double scale) {
  const Mode mode = mode_for(example.route);
  if (example.targets.empty()) throw NoMaskedPositions();
  if (mode == Mode::kLateSupervision && options.terms.label && !example.label) {
    throw MissingLabel();
  }
  ForwardCache cache;
  const EncoderOutput enc = encode(model, example, mode, &cache);
  const HeadOutputs heads = compute_heads(model, enc.hidden, example, mode);
  const Parameters& p = model.params;

  const auto m = static_cast<Eigen::Index>(example.targets.size());
  const double coef =
      scale * (options.mean_over_masked ? 1.0 / static_cast<double>(m) : 1.0);
  Matrix h(m, enc.hidden.cols());
  for (Eigen::Index i = 0; i < m; ++i) h.row(i) = enc.hidden.row(heads.positions[i]);
  Matrix d_h = Matrix::Zero(m, enc.hidden.cols());

  LossBreakdown loss;
  RowVector d_row;
  auto head_term = [&](const Matrix& logits, auto target_of, const Matrix& w,
                       Matrix& g_w, Matrix& g_b) {
    Matrix d_logits(m, logits.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      total += cross_entropy_row(logits.row(i),
                                 target_of(example.targets[static_cast<std::size_t>(i)]),
                                 &d_row);
      d_logits.row(i) = d_row * coef;
    }
    g_w += h.transpose() * d_logits;
    g_b += d_logits.colwise().sum();
    d_h += d_logits * w.transpose();
    return total;
  };

  if (options.terms.word) {
    if (model.config.tie_word_head) {
      Matrix d_logits(m, heads.word_logits.cols());
      double total = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        total += cross_entropy_row(heads.word_logits.row(i),
                                   example.targets[static_cast<std::size_t>(i)].word_id,
                                   &d_row);
        d_logits.row(i) = d_row * coef;
      }
      grad.token += d_logits.transpose() * h;
      grad.word_b += d_logits.colwise().sum();
      d_h += d_logits * p.token;
      loss.word = total;
    } else {
      loss.word = head_term(heads.word_logits,
                            [](const MaskTarget& t) { return t.word_id; }, p.word_w,
                            grad.word_w, grad.word_b);
    }
  }
  if (options.terms.pos) {
    loss.pos = head_term(heads.pos_logits,
                         [](const MaskTarget& t) { return t.pos_id; }, p.pos_w,
                         grad.pos_w, grad.pos_b);
  }
  if (options.terms.polar) {
    loss.polar = head_term(heads.polar_logits,
                           [](const MaskTarget& t) { return t.polar_id; },
                           p.polar_w, grad.polar_w, grad.polar_b);
  }
  if (options.mean_over_masked) loss = loss.scaled(1.0 / static_cast<double>(m));

  Matrix d_hidden = Matrix::Zero(enc.hidden.rows(), enc.hidden.cols());
  for (Eigen::Index i = 0; i < m; ++i) d_hidden.row(heads.positions[i]) += d_h.row(i);

  if (mode == Mode::kLateSupervision && options.terms.label) {
    loss.label = cross_entropy_row(heads.label_logits, *example.label, &d_row);
    d_row *= scale;
    grad.label_w += enc.hidden.row(0).transpose() * d_row;
    grad.label_b += d_row;
    d_hidden.row(0) += d_row * p.label_w.transpose();
  }

  encode_backward(model, example, mode, cache, d_hidden, grad);
  return loss;
}

LossBreakdown batch_loss(const Model& model, std::span<const MaskedExample> batch,
                         const LossOptions& options) {
  if (batch.empty()) throw ShapeError("empty batch");
  LossBreakdown total;
  for (const MaskedExample& ex : batch) total += example_loss(model, ex, options);
  return total.scaled(1.0 / static_cast<double>(batch.size()));
}

LossBreakdown batch_gradient(const Model& model,
                             std::span<const MaskedExample> batch,
                             const LossOptions& options, Parameters& grad) {
  if (batch.empty()) throw ShapeError("empty batch");
  grad = Parameters::zeros(model.config);
  const double scale = 1.0 / static_cast<double>(batch.size());
  LossBreakdown total;
  for (const MaskedExample& ex : batch) {
    total += example_gradient(model, ex, options, grad, scale);
  }
  return total.scaled(scale);
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport compare_gradients(const Model& model,
                                  std::span<const MaskedExample> batch,
                                  const LossOptions& loss_options,
                                  const Parameters& analytic,
                                  const GradCheckOptions& options) {
  Model probe = model;
  std::vector<std::pair<std::string, Matrix*>> tensors;
  probe.params.for_each([&](std::string_view name, Matrix& m) {
    tensors.emplace_back(std::string(name), &m);
  });
  std::vector<const Matrix*> grads;
  analytic.for_each([&](std::string_view, const Matrix& m) { grads.push_back(&m); });
  if (grads.size() != tensors.size()) throw ShapeError("gradient layout mismatch");

  std::size_t total = 0;
  for (const auto& [name, m] : tensors) total += static_cast<std::size_t>(m->size());

  Rng rng(options.seed);
  GradCheckReport report;
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    Matrix& m = *tensors[ti].second;
    const auto size = static_cast<std::size_t>(m.size());
    if (static_cast<std::size_t>(grads[ti]->size()) != size) {
      throw ShapeError("gradient shape mismatch for " + tensors[ti].first);
    }
    // Proportional share, at least three coordinates per tensor.
    const std::size_t share =
        (options.samples * size + total - 1) / std::max<std::size_t>(total, 1);
    const std::size_t k = std::min(size, std::max<std::size_t>(share, 3));
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(idx[i], idx[i + rng.below(size - i)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());

    for (std::size_t index : idx) {
      double& theta = m.data()[index];
      const double saved = theta;
      theta = saved + options.step;
      const double up = batch_loss(probe, batch, loss_options).total();
      theta = saved - options.step;
      const double down = batch_loss(probe, batch, loss_options).total();
      theta = saved;
      GradCheckEntry e;
      e.tensor = tensors[ti].first;
      e.index = index;
      e.analytic = grads[ti]->data()[index];
      e.numeric = (up - down) / (2.0 * options.step);
      e.relative_error = relative_error(e.analytic, e.numeric);
      report.max_relative_error = std::max(report.max_relative_error, e.relative_error);
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

GradCheckReport grad_check(const Model& model,
                           std::span<const MaskedExample> batch,
                           const LossOptions& loss_options,
                           const GradCheckOptions& options) {
  Parameters analytic;
  batch_gradient(model, batch, loss_options, analytic);
  return compare_gradients(model, batch, loss_options, analytic, options);
}

}  // namespace sentiknow
