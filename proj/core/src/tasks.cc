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

#include "sentiknow/tasks.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>

#include "sentiknow/errors.h"
#include "sentiknow/training.h"
#include "text_util.h"

namespace sentiknow {
namespace {

RawSentence raw_from_text(std::string_view text, std::string id) {
  RawSentence r;
  r.tokens = tokenize_text(text);
  r.id = std::move(id);
  return r;
}

int parse_tag(std::string_view t, std::size_t line) {
  if (t == "B" || t == "b") return kTagB;
  if (t == "I" || t == "i") return kTagI;
  if (t == "O" || t == "o") return kTagO;
  throw FormatError(line, "bad BIO tag '" + std::string(t) + "'");
}

int parse_label(std::string_view field, const TaskSpec& spec, std::size_t line) {
  const auto v = text::parse_int<int>(text::trim(field));
  if (!v || *v < 0 || *v >= spec.class_count) {
    throw FormatError(line, "label must be an integer in [0, " +
                                std::to_string(spec.class_count) + ")");
  }
  return *v;
}

double log_sum_exp(const Eigen::Ref<const RowVector>& row) {
  const double mx = row.maxCoeff();
  return mx + std::log((row.array() - mx).exp().sum());
}

// Cross-entropy of one logit row; writes softmax - onehot into d_row.
double row_cross_entropy(const Eigen::Ref<const RowVector>& row, int target,
                         Eigen::Ref<RowVector> d_row) {
  const double lse = log_sum_exp(row);
  d_row = (row.array() - lse).exp().matrix();
  d_row(target) -= 1.0;
  return lse - row(target);
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

std::string_view task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::kSsc: return "ssc";
    case TaskKind::kAte: return "ate";
    case TaskKind::kAtsc: return "atsc";
    case TaskKind::kAcd: return "acd";
    case TaskKind::kAcsc: return "acsc";
    case TaskKind::kTextMatchClassify: return "text_match_classify";
    case TaskKind::kTextMatchRegress: return "text_match_regress";
  }
  return "ssc";
}

std::optional<TaskKind> task_from_name(std::string_view name) {
  const std::string lower = text::to_lower(name);
  for (TaskKind k : {TaskKind::kSsc, TaskKind::kAte, TaskKind::kAtsc, TaskKind::kAcd,
                     TaskKind::kAcsc, TaskKind::kTextMatchClassify,
                     TaskKind::kTextMatchRegress}) {
    if (task_name(k) == lower) return k;
  }
  return std::nullopt;
}

TaskHeadKind TaskSpec::head() const {
  return kind == TaskKind::kAte ? TaskHeadKind::kToken : TaskHeadKind::kSequence;
}

int TaskSpec::outputs() const {
  switch (kind) {
    case TaskKind::kAte: return 3;
    case TaskKind::kAcd: return static_cast<int>(categories.size());
    case TaskKind::kTextMatchRegress: return 1;
    default: return class_count;
  }
}

bool TaskSpec::two_segment() const {
  return kind == TaskKind::kAtsc || kind == TaskKind::kAcsc ||
         kind == TaskKind::kTextMatchClassify || kind == TaskKind::kTextMatchRegress;
}

bool TaskSpec::classification() const {
  return kind == TaskKind::kSsc || kind == TaskKind::kAtsc ||
         kind == TaskKind::kAcsc || kind == TaskKind::kTextMatchClassify;
}

void TaskSpec::validate() const {
  if (classification() && class_count < 2) {
    throw InvalidConfig("task needs at least two classes");
  }
  if (kind == TaskKind::kAcd && categories.empty()) {
    throw InvalidConfig("aspect category detection needs a category list");
  }
}

std::vector<TaskRecord> read_task_tsv(std::istream& in, const TaskSpec& spec) {
  spec.validate();
  std::vector<TaskRecord> out;
  std::string line;
  std::size_t line_number = 0;
  const std::size_t want = spec.two_segment() ? 3 : 2;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const std::vector<std::string_view> f = text::split(line, '\t');
    // A detection row with no categories may lose its trailing tab.
    if (f.size() != want && !(spec.kind == TaskKind::kAcd && f.size() == 1)) {
      throw FormatError(line_number, "expected " + std::to_string(want) +
                                         " tab-separated fields");
    }
    TaskRecord r;
    const std::string id = "r" + std::to_string(out.size() + 1);
    switch (spec.kind) {
      case TaskKind::kSsc:
        r.label = parse_label(f[0], spec, line_number);
        r.first = raw_from_text(f[1], id);
        break;
      case TaskKind::kAte: {
        r.first = raw_from_text(f[0], id);
        for (std::string_view t : text::split_whitespace(f[1])) {
          r.tags.push_back(parse_tag(t, line_number));
        }
        if (r.tags.size() != r.first.tokens.size()) {
          throw FormatError(line_number,
                            "tag count " + std::to_string(r.tags.size()) +
                                " does not match token count " +
                                std::to_string(r.first.tokens.size()));
        }
        break;
      }
      case TaskKind::kAcd: {
        r.first = raw_from_text(f[0], id);
        r.categories.assign(spec.categories.size(), 0);
        if (f.size() > 1) {
          for (std::string_view c : text::split(f[1], ',')) {
            const std::string name(text::trim(c));
            if (name.empty()) continue;
            const auto it = std::find(spec.categories.begin(), spec.categories.end(), name);
            if (it == spec.categories.end()) {
              throw FormatError(line_number, "unknown category '" + name + "'");
            }
            r.categories[static_cast<std::size_t>(it - spec.categories.begin())] = 1;
          }
        }
        break;
      }
      case TaskKind::kAtsc:
      case TaskKind::kAcsc:
      case TaskKind::kTextMatchClassify:
        r.first = raw_from_text(f[0], id + "a");
        r.second = raw_from_text(f[1], id + "b");
        r.label = parse_label(f[2], spec, line_number);
        break;
      case TaskKind::kTextMatchRegress: {
        r.first = raw_from_text(f[0], id + "a");
        r.second = raw_from_text(f[1], id + "b");
        const auto v = text::parse_double(text::trim(f[2]));
        if (!v || !std::isfinite(*v)) throw FormatError(line_number, "bad score");
        r.score = *v;
        break;
      }
    }
    if (r.first.tokens.empty() && spec.kind != TaskKind::kAtsc &&
        spec.kind != TaskKind::kAcsc) {
      throw FormatError(line_number, "empty text");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TaskRecord> read_task_tsv(const std::filesystem::path& path,
                                      const TaskSpec& spec) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_task_tsv(in, spec);
}

std::vector<TaskExample> annotate_task(const Annotator& annotator,
                                       std::span<const TaskRecord> records,
                                       std::size_t workers) {
  std::vector<RawSentence> inputs;
  for (const TaskRecord& r : records) {
    inputs.push_back(r.first);
    if (r.second) inputs.push_back(*r.second);
  }
  std::vector<KnowledgeSequence> seqs = annotator.annotate_all(inputs, workers);
  std::vector<TaskExample> out;
  std::size_t k = 0;
  for (const TaskRecord& r : records) {
    TaskExample ex;
    ex.first = std::move(seqs[k++]);
    if (r.second) ex.second = std::move(seqs[k++]);
    ex.label = r.label;
    ex.score = r.score;
    ex.tags = r.tags;
    ex.categories = r.categories;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<TaskExample> ssc_examples(std::span<const KnowledgeSequence> corpus) {
  std::vector<TaskExample> out;
  out.reserve(corpus.size());
  for (const KnowledgeSequence& s : corpus) {
    if (!s.label) throw MissingLabel();
    TaskExample ex;
    ex.first = s;
    ex.label = *s.label;
    out.push_back(std::move(ex));
  }
  return out;
}

EncodedTaskExample encode_task_example(const TaskSpec& spec,
                                       const TaskExample& example,
                                       const Vocab& vocab, std::size_t max_len) {
  EncodedTaskExample out;
  EncodedSequence enc;
  if (spec.two_segment()) {
    if (!example.second) throw FormatError(0, "pair task needs two segments");
    enc = encode_pair(example.first, *example.second, vocab, max_len);
  } else {
    enc = encode(example.first, vocab, max_len);
  }
  enc.label.reset();
  out.input = unmasked(enc);

  if (spec.classification() &&
      (example.label < 0 || example.label >= spec.class_count)) {
    throw FormatError(0, "label out of range");
  }
  out.label = example.label;
  out.score = example.score;
  if (spec.kind == TaskKind::kAte) {
    if (example.tags.size() != example.first.tokens.size()) {
      throw FormatError(0, "tag count does not match token count");
    }
    const std::size_t kept = enc.size() - 2;
    out.tags.assign(example.tags.begin(),
                    example.tags.begin() + static_cast<std::ptrdiff_t>(kept));
  }
  if (spec.kind == TaskKind::kAcd) {
    if (example.categories.size() != spec.categories.size()) {
      throw FormatError(0, "category vector has the wrong width");
    }
    out.categories = example.categories;
  }
  return out;
}

std::vector<EncodedTaskExample> encode_task_examples(
    const TaskSpec& spec, std::span<const TaskExample> examples,
    const Vocab& vocab, std::size_t max_len) {
  std::vector<EncodedTaskExample> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    try {
      out.push_back(encode_task_example(spec, examples[i], vocab, max_len));
    } catch (const FormatError& e) {
      const std::string what = e.what();
      throw FormatError(i + 1, what.substr(what.find(": ") + 2));
    }
  }
  return out;
}

TaskPrediction predict(const Model& model, const TaskSpec& spec,
                       const MaskedExample& input) {
  const EncoderOutput enc = encode(model, input, Mode::kFineTune);
  const HeadOutputs heads = compute_heads(model, enc.hidden, input, Mode::kFineTune);
  const Matrix& z = heads.task_logits;
  TaskPrediction p;
  if (spec.classification()) {
    const Matrix probs = softmax_rows(z);
    p.probabilities.assign(probs.data(), probs.data() + probs.size());
    Eigen::Index arg;
    z.row(0).maxCoeff(&arg);
    p.label = static_cast<int>(arg);
  } else if (spec.kind == TaskKind::kTextMatchRegress) {
    p.score = z(0, 0);
  } else if (spec.kind == TaskKind::kAte) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      Eigen::Index arg;
      z.row(i).maxCoeff(&arg);
      p.tags.push_back(static_cast<int>(arg));
    }
  } else {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      p.categories.push_back(sigmoid(z(0, j)) >= 0.5 ? 1 : 0);
    }
  }
  return p;
}

double task_loss(const Model& model, const TaskSpec& spec,
                 const EncodedTaskExample& example, Parameters* grad,
                 double scale) {
  ForwardCache cache;
  const EncoderOutput enc =
      encode(model, example.input, Mode::kFineTune, grad ? &cache : nullptr);
  const HeadOutputs heads =
      compute_heads(model, enc.hidden, example.input, Mode::kFineTune);
  const Matrix& z = heads.task_logits;
  Matrix dz = Matrix::Zero(z.rows(), z.cols());
  double loss = 0.0;

  if (spec.classification()) {
    RowVector d(z.cols());
    loss = row_cross_entropy(z.row(0), example.label, d);
    dz.row(0) = d;
  } else if (spec.kind == TaskKind::kTextMatchRegress) {
    const double diff = z(0, 0) - example.score;
    loss = diff * diff;
    dz(0, 0) = 2.0 * diff;
  } else if (spec.kind == TaskKind::kAte) {
    if (static_cast<std::size_t>(z.rows()) != example.tags.size()) {
      throw ShapeError("tag count does not match content positions");
    }
    const double n = static_cast<double>(z.rows());
    RowVector d(z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      loss += row_cross_entropy(z.row(i), example.tags[static_cast<std::size_t>(i)], d) / n;
      dz.row(i) = d / n;
    }
  } else {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double x = z(0, j);
      const double y = example.categories[static_cast<std::size_t>(j)];
      loss += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
      dz(0, j) = sigmoid(x) - y;
    }
  }
  if (grad == nullptr) return loss;

  dz *= scale;
  const Parameters& p = model.params;
  Matrix d_hidden = Matrix::Zero(enc.hidden.rows(), enc.hidden.cols());
  if (model.config.task_head == TaskHeadKind::kSequence) {
    grad->task_w.noalias() += enc.hidden.topRows(1).transpose() * dz;
    d_hidden.topRows(1) = dz * p.task_w.transpose();
  } else {
    const std::vector<int>& rows = heads.positions;
    Matrix h(static_cast<Eigen::Index>(rows.size()), enc.hidden.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      h.row(static_cast<Eigen::Index>(i)) = enc.hidden.row(rows[i]);
    }
    grad->task_w.noalias() += h.transpose() * dz;
    const Matrix dh = dz * p.task_w.transpose();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      d_hidden.row(rows[i]) += dh.row(static_cast<Eigen::Index>(i));
    }
  }
  grad->task_b += dz.colwise().sum();
  encode_backward(model, example.input, Mode::kFineTune, cache, d_hidden, *grad);
  return loss;
}

Metrics evaluate(const Model& model, const TaskSpec& spec,
                 std::span<const EncodedTaskExample> data) {
  if (data.empty()) throw EmptyDataset();
  Metrics m;
  m.count = data.size();
  if (spec.classification()) {
    std::vector<int> pred, gold;
    for (const auto& ex : data) {
      pred.push_back(predict(model, spec, ex.input).label);
      gold.push_back(ex.label);
    }
    m.accuracy = accuracy(pred, gold);
    m.macro_f1 = macro_f1(pred, gold);
  } else if (spec.kind == TaskKind::kTextMatchRegress) {
    std::vector<double> pred, gold;
    for (const auto& ex : data) {
      pred.push_back(predict(model, spec, ex.input).score);
      gold.push_back(ex.score);
    }
    m.pearson = pearson(pred, gold);
    m.spearman = spearman(pred, gold);
  } else {
    std::vector<std::vector<int>> pred, gold;
    for (const auto& ex : data) {
      TaskPrediction p = predict(model, spec, ex.input);
      if (spec.kind == TaskKind::kAte) {
        pred.push_back(std::move(p.tags));
        gold.push_back(ex.tags);
      } else {
        pred.push_back(std::move(p.categories));
        gold.push_back(ex.categories);
      }
    }
    const PrfScores s = spec.kind == TaskKind::kAte ? span_f1(pred, gold)
                                                    : multilabel_f1(pred, gold);
    m.precision = s.precision;
    m.recall = s.recall;
    m.f1 = s.f1;
  }
  return m;
}

FineTuneResult finetune(const Model& pretrained, const TaskSpec& spec,
                        std::span<const EncodedTaskExample> train,
                        std::span<const EncodedTaskExample> valid,
                        const FineTuneOptions& options) {
  spec.validate();
  if (train.empty()) throw EmptyDataset();
  if (options.batch_size < 1 || options.epochs < 1) {
    throw InvalidConfig("fine-tuning needs positive batch size and epochs");
  }
  FineTuneResult result;
  result.model = pretrained;
  Model& model = result.model;
  Rng head_rng = Rng::derive(options.seed, kHeadStream, 0);
  attach_task_head(model, spec.head(), spec.outputs(), head_rng);

  AdamState optim = AdamState::for_model(model.config);
  optim.epsilon = options.adam_epsilon;
  optim.max_grad_norm = options.max_grad_norm;
  const std::size_t n = train.size();
  const auto batch = static_cast<std::size_t>(options.batch_size);
  const long per_epoch = static_cast<long>((n + batch - 1) / batch);
  const Schedule schedule{options.peak_lr, options.warmup_ratio,
                          per_epoch * options.epochs};

  Parameters grad = Parameters::zeros(model.config);
  std::optional<Model> best;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffled_order(n, options.seed, epoch);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const double inv = 1.0 / static_cast<double>(end - start);
      grad.set_zero();
      double loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        loss += task_loss(model, spec, train[order[i]], &grad, inv);
      }
      adam_step(model.params, grad, optim, schedule);
      result.loss_curve.push_back(loss * inv);
    }
    if (!valid.empty()) {
      Metrics m = evaluate(model, spec, valid);
      if (!result.valid || m.primary() > result.valid->primary()) {
        result.valid = m;
        result.best_epoch = epoch + 1;
        best = model;
      }
    }
  }
  if (best) {
    result.model = std::move(*best);
  } else {
    result.best_epoch = options.epochs;
  }
  return result;
}

std::vector<std::vector<double>> probe_prefixes(const Model& model,
                                                const TaskSpec& spec,
                                                const KnowledgeSequence& sequence,
                                                const Vocab& vocab,
                                                std::size_t max_len) {
  if (spec.kind != TaskKind::kSsc || model.config.task_head != TaskHeadKind::kSequence) {
    throw InvalidConfig("prefix probe needs a sentence-classification model");
  }
  const std::size_t n = std::min(sequence.tokens.size(), max_len < 2 ? 0 : max_len - 2);
  std::vector<std::vector<double>> rows;
  KnowledgeSequence prefix;
  prefix.id = sequence.id;
  for (std::size_t t = 0; t < n; ++t) {
    prefix.tokens.push_back(sequence.tokens[t]);
    const EncodedSequence enc = encode(prefix, vocab, max_len);
    rows.push_back(predict(model, spec, unmasked(enc)).probabilities);
  }
  return rows;
}

}  // namespace sentiknow
