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

#include "sentiknow/config.h"

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "sentiknow/errors.h"
#include "text_util.h"

namespace sentiknow {
namespace {

using T = ConfigType;

// Search spaces for the fine-tuning keys: learning rate {1e-5..5e-5},
// epochs 3..8, batch size {12, 16, 24, 32}.
constexpr std::array kKeys = {
    // Inputs and outputs.
    ConfigKey{"lexicon", T::kPath, "", "SentiWordNet-format lexicon"},
    ConfigKey{"vectors", T::kPath, "", "word vectors, one 'word f1 .. fd' per line"},
    ConfigKey{"similarities", T::kPath, "", "precomputed context/gloss similarity table"},
    ConfigKey{"tagger_train", T::kPath, "", "token<TAB>tag file for the frequency tagger"},
    ConfigKey{"corpus", T::kPath, "", "pre-training corpus (JSONL)"},
    ConfigKey{"vocab", T::kPath, "", "vocabulary file"},
    ConfigKey{"checkpoint", T::kPath, "", "pre-trained checkpoint"},
    ConfigKey{"task_checkpoint", T::kPath, "", "fine-tuned checkpoint"},
    ConfigKey{"loss_csv", T::kPath, "", "per-step pre-training loss log"},
    ConfigKey{"train_data", T::kPath, "", "task training data (TSV, or JSONL for ssc)"},
    ConfigKey{"valid_data", T::kPath, "", "task validation data"},
    ConfigKey{"test_data", T::kPath, "", "task evaluation data"},
    ConfigKey{"metrics_out", T::kPath, "", "key=value metrics report"},
    // Knowledge acquisition.
    ConfigKey{"attention_mode", T::kChoice, "context", "sense weighting", "context|prior"},
    ConfigKey{"context_window", T::kInt, "0", "context tokens on each side, 0 = whole sequence"},
    ConfigKey{"workers", T::kInt, "1", "annotation threads"},
    // Vocabulary and model.
    ConfigKey{"min_freq", T::kInt, "1", "minimum token count for the vocabulary"},
    ConfigKey{"layers", T::kInt, "2", "transformer blocks"},
    ConfigKey{"heads", T::kInt, "4", "attention heads"},
    ConfigKey{"dim", T::kInt, "64", "hidden size"},
    ConfigKey{"ffn_dim", T::kInt, "0", "feed-forward size, 0 = 4 * dim"},
    ConfigKey{"max_len", T::kInt, "128", "maximum sequence length"},
    ConfigKey{"label_count", T::kInt, "5", "sentence-level label classes"},
    ConfigKey{"layer_norm_eps", T::kDouble, "1e-5", "layer-norm epsilon"},
    ConfigKey{"init_scale", T::kDouble, "0.02", "initialization standard deviation"},
    ConfigKey{"tie_word_head", T::kBool, "false", "share token embeddings with the word head"},
    // Masking and routing.
    ConfigKey{"p_neutral", T::kDouble, "0.15", "selection probability, neutral words"},
    ConfigKey{"p_sentiment", T::kDouble, "0.30", "selection probability, sentiment words"},
    ConfigKey{"mask_fraction", T::kDouble, "0.8", "selected words replaced by [MASK]"},
    ConfigKey{"random_fraction", T::kDouble, "0.1", "selected words replaced at random"},
    ConfigKey{"keep_fraction", T::kDouble, "0.1", "selected words kept"},
    ConfigKey{"force_select", T::kBool, "true", "select one position when none is drawn"},
    ConfigKey{"ef_fraction", T::kDouble, "0.8", "share of examples routed to early fusion"},
    ConfigKey{"ablation", T::kChoice, "full", "pre-training variant",
              "full|no_ef|no_ls|no_ef_no_ls|no_pos|no_pol|no_pos_no_pol"},
    // Pre-training schedule.
    ConfigKey{"learning_rate", T::kDouble, "5e-5", "peak learning rate"},
    ConfigKey{"warmup_ratio", T::kDouble, "0.1", "warmup share of total steps"},
    ConfigKey{"batch_size", T::kInt, "400", "sequences per step"},
    ConfigKey{"epochs", T::kInt, "1", "passes over the corpus"},
    ConfigKey{"steps", T::kInt, "0", "total steps, 0 = derive from epochs"},
    ConfigKey{"max_grad_norm", T::kDouble, "1.0", "global gradient-norm clip"},
    ConfigKey{"adam_epsilon", T::kDouble, "1e-8", "Adam epsilon"},
    ConfigKey{"mean_loss", T::kBool, "true", "average token terms over masked positions"},
    ConfigKey{"seed", T::kInt, "42", "seed for every random stream"},
    // Fine-tuning.
    ConfigKey{"task", T::kChoice, "ssc", "downstream task",
              "ssc|ate|atsc|acd|acsc|text_match_classify|text_match_regress"},
    ConfigKey{"task_classes", T::kInt, "2", "classes for classification tasks"},
    ConfigKey{"task_categories", T::kList, "", "comma-separated categories for acd"},
    ConfigKey{"ft_learning_rate", T::kDouble, "2e-5", "fine-tuning peak learning rate"},
    ConfigKey{"ft_warmup_ratio", T::kDouble, "0.1", "fine-tuning warmup share"},
    ConfigKey{"ft_batch_size", T::kInt, "16", "fine-tuning batch size"},
    ConfigKey{"ft_epochs", T::kInt, "3", "fine-tuning epochs"},
    // Gradient check.
    ConfigKey{"gradcheck_step", T::kDouble, "1e-4", "central-difference step"},
    ConfigKey{"gradcheck_samples", T::kInt, "500", "coordinates checked per mode"},
    ConfigKey{"gradcheck_threshold", T::kDouble, "1e-4", "maximum relative error"},
    ConfigKey{"gradcheck_batch", T::kInt, "4", "random sequences per check"},
    ConfigKey{"gradcheck_vocab", T::kInt, "97", "vocabulary size without a vocab file"},
    ConfigKey{"gradcheck_length", T::kInt, "10", "content tokens per random sequence"},
};

const ConfigKey* find_key(std::string_view name) {
  for (const ConfigKey& k : kKeys) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

void check_value(const ConfigKey& key, std::string_view value) {
  const std::string name(key.name);
  switch (key.type) {
    case T::kPath:
    case T::kList:
      return;
    case T::kInt: {
      const auto v = text::parse_int<long>(value);
      if (!v) throw ConfigError(name, "expected an integer, got '" + std::string(value) + "'");
      if (*v < 0) throw ConfigError(name, "must not be negative");
      return;
    }
    case T::kDouble: {
      const auto v = text::parse_double(value);
      if (!v || !std::isfinite(*v)) {
        throw ConfigError(name, "expected a number, got '" + std::string(value) + "'");
      }
      return;
    }
    case T::kBool:
      if (value != "true" && value != "false" && value != "1" && value != "0") {
        throw ConfigError(name, "expected true or false");
      }
      return;
    case T::kChoice:
      for (std::string_view c : text::split(key.choices, '|')) {
        if (c == value) return;
      }
      throw ConfigError(name, "expected one of " + std::string(key.choices));
  }
}

}  // namespace

RunConfig::RunConfig() {
  for (const ConfigKey& k : kKeys) values_.emplace(k.name, k.default_value);
}

std::span<const ConfigKey> RunConfig::keys() { return kKeys; }

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(t), "line " + std::to_string(n) + ": expected key = value");
    }
    cfg.set(text::trim(t.substr(0, eq)), text::trim(t.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse(in);
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const ConfigKey* k = find_key(key);
  if (k == nullptr) throw ConfigError(std::string(key), "unknown key");
  check_value(*k, value);
  values_.find(key)->second = std::string(value);
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(std::string(key), "unknown key");
  return it->second;
}

bool RunConfig::is_default(std::string_view key) const {
  const ConfigKey* k = find_key(key);
  return k != nullptr && get(key) == k->default_value;
}

double RunConfig::number(std::string_view key) const {
  return *text::parse_double(get(key));
}

long RunConfig::integer(std::string_view key) const {
  const auto v = text::parse_int<long>(get(key));
  if (!v) throw ConfigError(std::string(key), "expected an integer");
  return *v;
}

bool RunConfig::flag(std::string_view key) const {
  const std::string& v = get(key);
  return v == "true" || v == "1";
}

std::optional<std::filesystem::path> RunConfig::path(std::string_view key) const {
  const std::string& v = get(key);
  if (v.empty()) return std::nullopt;
  return std::filesystem::path(v);
}

std::filesystem::path RunConfig::required_path(std::string_view key) const {
  auto p = path(key);
  if (!p) throw ConfigError(std::string(key), "required but not set");
  return *p;
}

ModelConfig RunConfig::model_config(int vocab_size) const {
  ModelConfig c;
  c.layers = static_cast<int>(integer("layers"));
  c.heads = static_cast<int>(integer("heads"));
  c.dim = static_cast<int>(integer("dim"));
  c.ffn_dim = static_cast<int>(integer("ffn_dim"));
  c.vocab_size = vocab_size;
  c.max_len = static_cast<int>(integer("max_len"));
  c.label_count = static_cast<int>(integer("label_count"));
  c.layer_norm_eps = number("layer_norm_eps");
  c.init_scale = number("init_scale");
  c.seed = static_cast<std::uint64_t>(integer("seed"));
  c.tie_word_head = flag("tie_word_head");
  try {
    c.validate();
  } catch (const InvalidConfig& e) {
    throw ConfigError("model", e.what());
  }
  return c;
}

MaskPolicy RunConfig::mask_policy() const {
  MaskPolicy p;
  p.p_neutral = number("p_neutral");
  p.p_sentiment = number("p_sentiment");
  p.mask_fraction = number("mask_fraction");
  p.random_fraction = number("random_fraction");
  p.keep_fraction = number("keep_fraction");
  p.force_select = flag("force_select");
  try {
    p.validate();
  } catch (const InvalidConfig& e) {
    throw ConfigError("p_neutral", e.what());
  }
  return p;
}

Ablation RunConfig::ablation() const { return *ablation_from_name(get("ablation")); }

PretrainOptions RunConfig::pretrain_options(int vocab_size) const {
  PretrainOptions o;
  o.model = model_config(vocab_size);
  o.mask = mask_policy();
  o.ef_fraction = number("ef_fraction");
  if (!(o.ef_fraction >= 0.0 && o.ef_fraction <= 1.0)) {
    throw ConfigError("ef_fraction", "must be in [0, 1]");
  }
  o.ablation = ablation();
  o.batch_size = static_cast<int>(integer("batch_size"));
  if (o.batch_size < 1) throw ConfigError("batch_size", "must be positive");
  o.steps = integer("steps");
  o.epochs = static_cast<int>(integer("epochs"));
  o.peak_lr = number("learning_rate");
  o.warmup_ratio = number("warmup_ratio");
  if (!(o.warmup_ratio >= 0.0 && o.warmup_ratio <= 1.0)) {
    throw ConfigError("warmup_ratio", "must be in [0, 1]");
  }
  o.max_grad_norm = number("max_grad_norm");
  o.adam_epsilon = number("adam_epsilon");
  o.mean_over_masked = flag("mean_loss");
  o.seed = static_cast<std::uint64_t>(integer("seed"));
  return o;
}

FineTuneOptions RunConfig::finetune_options() const {
  FineTuneOptions o;
  o.epochs = static_cast<int>(integer("ft_epochs"));
  o.batch_size = static_cast<int>(integer("ft_batch_size"));
  if (o.batch_size < 1) throw ConfigError("ft_batch_size", "must be positive");
  if (o.epochs < 1) throw ConfigError("ft_epochs", "must be positive");
  o.peak_lr = number("ft_learning_rate");
  o.warmup_ratio = number("ft_warmup_ratio");
  o.max_grad_norm = number("max_grad_norm");
  o.adam_epsilon = number("adam_epsilon");
  o.seed = static_cast<std::uint64_t>(integer("seed"));
  return o;
}

TaskSpec RunConfig::task_spec() const {
  TaskSpec s;
  s.kind = *task_from_name(get("task"));
  s.class_count = static_cast<int>(integer("task_classes"));
  for (std::string_view c : text::split(get("task_categories"), ',')) {
    const std::string name(text::trim(c));
    if (!name.empty()) s.categories.push_back(name);
  }
  try {
    s.validate();
  } catch (const InvalidConfig& e) {
    throw ConfigError(s.kind == TaskKind::kAcd ? "task_categories" : "task_classes",
                      e.what());
  }
  return s;
}

AnnotatorOptions RunConfig::annotator_options() const {
  AnnotatorOptions o;
  o.mode = get("attention_mode") == "prior" ? AttentionMode::kContextFreePrior
                                            : AttentionMode::kContextAware;
  o.context_window = static_cast<std::size_t>(integer("context_window"));
  return o;
}

void RunConfig::write(std::ostream& out) const {
  for (const ConfigKey& k : kKeys) out << k.name << " = " << get(k.name) << '\n';
}

}  // namespace sentiknow
