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

// sentiknow: knowledge annotation, pre-training, fine-tuning and checks.
//
// Exit codes: 0 success, 1 usage error, 2 data or config error, 3 a check
// (gradcheck) ran and failed.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sentiknow/acquisition.h"
#include "sentiknow/checkpoint.h"
#include "sentiknow/config.h"
#include "sentiknow/corpus.h"
#include "sentiknow/embeddings.h"
#include "sentiknow/errors.h"
#include "sentiknow/lexicon.h"
#include "sentiknow/metrics.h"
#include "sentiknow/model.h"
#include "sentiknow/synthetic.h"
#include "sentiknow/tasks.h"
#include "sentiknow/training.h"

namespace sk = sentiknow;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kCheckFailed = 3;

std::string version_string() {
  return std::string("sentiknow ") + SENTIKNOW_VERSION + " (" + SENTIKNOW_BUILD_TYPE + ")";
}

std::string config_key_listing() {
  std::ostringstream out;
  out << "Config keys (key = default):\n";
  for (const sk::ConfigKey& k : sk::RunConfig::keys()) {
    out << "  " << k.name << " = " << (k.default_value.empty() ? "(unset)" : k.default_value)
        << "    " << k.help;
    if (!k.choices.empty()) out << " [" << k.choices << "]";
    out << '\n';
  }
  return out.str();
}

// Options shared by every subcommand that reads a run configuration.
struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("-c,--config", path, "run configuration file (key = value)");
    if (required) opt->required();
    cmd->add_option("--set", overrides, "override a config key, key=value (repeatable)");
    cmd->footer(config_key_listing());
  }

  sk::RunConfig load() const {
    sk::RunConfig cfg = path.empty() ? sk::RunConfig() : sk::RunConfig::load(path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw sk::ConfigError(kv, "--set expects key=value");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
  }
};

// Sets `key` from a flag when the flag was given.
void apply(sk::RunConfig& cfg, const char* key, const std::string& value) {
  if (!value.empty()) cfg.set(key, value);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sk::IoError("cannot write " + path);
  return out;
}

bool has_suffix(const std::string& s, const char* suffix) {
  const std::string x(suffix);
  return s.size() >= x.size() && s.compare(s.size() - x.size(), x.size(), x) == 0;
}

// Lexicon, similarity source and tagger assembled from a config.
struct Acquisition {
  sk::Lexicon lexicon;
  sk::FrequencyTagger tagger;
  std::unique_ptr<sk::Annotator> annotator;
};

std::unique_ptr<Acquisition> make_acquisition(const sk::RunConfig& cfg) {
  auto acq = std::make_unique<Acquisition>();
  acq->lexicon = sk::Lexicon::load(cfg.required_path("lexicon"));
  if (auto p = cfg.path("tagger_train")) acq->tagger = sk::FrequencyTagger::load(*p);

  const sk::AnnotatorOptions options = cfg.annotator_options();
  std::optional<sk::SimilaritySource> source;
  if (auto p = cfg.path("similarities")) {
    source = sk::load_precomputed(*p);
  } else if (auto v = cfg.path("vectors")) {
    source = sk::WordVectorAverage(
        std::make_shared<const sk::VectorStore>(sk::VectorStore::load(*v)));
  } else if (options.mode == sk::AttentionMode::kContextAware) {
    throw sk::ConfigError("vectors",
                          "context-aware attention needs vectors or similarities");
  }
  acq->annotator = std::make_unique<sk::Annotator>(acq->lexicon, std::move(source),
                                                   &acq->tagger, options);
  return acq;
}

std::vector<sk::RawSentence> read_input(const std::string& path,
                                        const std::string& format) {
  std::ifstream in(path);
  if (!in) throw sk::IoError("cannot open " + path);
  if (format == "tagged") return sk::read_tagged_sentences(in);
  return sk::read_raw_sentences(in, format == "labeled");
}

// Task examples from a JSONL corpus (sentence classification) or a task TSV.
std::vector<sk::TaskExample> load_task_examples(const sk::RunConfig& cfg,
                                                const sk::TaskSpec& spec,
                                                const std::filesystem::path& path,
                                                std::unique_ptr<Acquisition>& acq) {
  if (path.extension() == ".jsonl") {
    if (spec.kind != sk::TaskKind::kSsc) {
      throw sk::ConfigError("task", "JSONL data is only accepted for ssc");
    }
    const auto corpus = sk::read_jsonl(path);
    return sk::ssc_examples(corpus);
  }
  const auto records = sk::read_task_tsv(path, spec);
  if (!acq) acq = make_acquisition(cfg);
  return sk::annotate_task(*acq->annotator, records,
                           static_cast<std::size_t>(cfg.integer("workers")));
}

void write_metrics(const sk::Metrics& m, const std::optional<std::filesystem::path>& path) {
  std::cout << m.to_json() << '\n';
  if (!path) return;
  std::ofstream out(*path);
  if (!out) throw sk::IoError("cannot write " + path->string());
  out << "count=" << m.count << '\n';
  const std::pair<const char*, const std::optional<double>*> fields[] = {
      {"accuracy", &m.accuracy}, {"macro_f1", &m.macro_f1}, {"precision", &m.precision},
      {"recall", &m.recall},     {"f1", &m.f1},             {"pearson", &m.pearson},
      {"spearman", &m.spearman}};
  for (const auto& [name, value] : fields) {
    if (value->has_value()) out << name << '=' << **value << '\n';
  }
}

// ---------------------------------------------------------------- annotate

struct AnnotateArgs {
  ConfigArgs config;
  std::string lexicon, vectors, similarities, tagger_train, mode, window, workers;
  std::string in, out, format = "labeled", similarity_log;
};

int run_annotate(const AnnotateArgs& a) {
  sk::RunConfig cfg = a.config.load();
  apply(cfg, "lexicon", a.lexicon);
  apply(cfg, "vectors", a.vectors);
  apply(cfg, "similarities", a.similarities);
  apply(cfg, "tagger_train", a.tagger_train);
  apply(cfg, "attention_mode", a.mode);
  apply(cfg, "context_window", a.window);
  apply(cfg, "workers", a.workers);
  auto acq = make_acquisition(cfg);
  const auto inputs = read_input(a.in, a.format);
  std::vector<sk::SimilarityEntry> log;
  const auto corpus = acq->annotator->annotate_all(
      inputs, static_cast<std::size_t>(cfg.integer("workers")),
      a.similarity_log.empty() ? nullptr : &log);
  auto out = open_out(a.out);
  sk::write_jsonl(out, corpus);
  if (!a.similarity_log.empty()) {
    auto sim = open_out(a.similarity_log);
    sk::write_precomputed(sim, log);
  }
  std::cerr << "annotated " << corpus.size() << " sequences\n";
  return 0;
}

// ------------------------------------------------------------- build-vocab

struct VocabArgs {
  std::string corpus, out;
  std::size_t min_freq = 1;
};

int run_build_vocab(const VocabArgs& a) {
  const auto corpus = sk::read_jsonl(std::filesystem::path(a.corpus));
  const sk::Vocab vocab = sk::Vocab::build(corpus, a.min_freq);
  auto out = open_out(a.out);
  vocab.save(out);
  std::cerr << "vocabulary of " << vocab.size() << " tokens\n";
  return 0;
}

// ---------------------------------------------------------------- pretrain

struct PretrainArgs {
  ConfigArgs config;
  std::string corpus, vocab, out, loss_csv, ablation, steps, seed;
};

int run_pretrain(const PretrainArgs& a) {
  sk::RunConfig cfg = a.config.load();
  apply(cfg, "corpus", a.corpus);
  apply(cfg, "vocab", a.vocab);
  apply(cfg, "checkpoint", a.out);
  apply(cfg, "loss_csv", a.loss_csv);
  apply(cfg, "ablation", a.ablation);
  apply(cfg, "steps", a.steps);
  apply(cfg, "seed", a.seed);

  const auto corpus = sk::read_jsonl(cfg.required_path("corpus"));
  const sk::Vocab vocab =
      cfg.path("vocab")
          ? sk::Vocab::load(*cfg.path("vocab"))
          : sk::Vocab::build(corpus, static_cast<std::size_t>(cfg.integer("min_freq")));
  sk::PretrainOptions options = cfg.pretrain_options(vocab.size());
  const auto max_len = static_cast<std::size_t>(options.model.max_len);
  std::vector<sk::EncodedSequence> encoded;
  for (const auto& s : corpus) {
    if (!s.label) throw sk::MissingLabel();
    if (*s.label < 0 || *s.label >= options.model.label_count) {
      throw sk::ConfigError("label_count", "corpus label " + std::to_string(*s.label) +
                                               " is out of range in " + s.id);
    }
    encoded.push_back(sk::encode(s, vocab, max_len));
  }
  const std::filesystem::path out_path = cfg.required_path("checkpoint");

  sk::PretrainResult result = sk::pretrain(options, encoded);
  sk::Checkpoint ckpt;
  ckpt.model = std::move(result.model);
  ckpt.optimizer = std::move(result.optim);
  ckpt.vocab = vocab;
  ckpt.metadata["stage"] = "pretrain";
  ckpt.metadata["ablation"] = std::string(sk::ablation_name(options.ablation));
  sk::save_checkpoint(out_path, ckpt);
  if (auto p = cfg.path("loss_csv")) {
    auto out = open_out(p->string());
    sk::write_loss_csv(out, result.curve);
  }
  if (!result.curve.empty()) {
    std::cerr << "steps " << result.curve.size() << ", final loss "
              << result.curve.back().loss.total() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- finetune

struct FinetuneArgs {
  ConfigArgs config;
  std::string checkpoint, train, valid, out, task, metrics;
};

int run_finetune(const FinetuneArgs& a) {
  sk::RunConfig cfg = a.config.load();
  apply(cfg, "checkpoint", a.checkpoint);
  apply(cfg, "train_data", a.train);
  apply(cfg, "valid_data", a.valid);
  apply(cfg, "task_checkpoint", a.out);
  apply(cfg, "task", a.task);
  apply(cfg, "metrics_out", a.metrics);

  const sk::Checkpoint pre = sk::load_checkpoint(cfg.required_path("checkpoint"));
  if (!pre.vocab) throw sk::ConfigError("checkpoint", "checkpoint carries no vocabulary");
  const sk::TaskSpec spec = cfg.task_spec();
  const auto max_len = static_cast<std::size_t>(pre.model.config.max_len);
  std::unique_ptr<Acquisition> acq;
  const auto train = sk::encode_task_examples(
      spec, load_task_examples(cfg, spec, cfg.required_path("train_data"), acq),
      *pre.vocab, max_len);
  std::vector<sk::EncodedTaskExample> valid;
  if (auto p = cfg.path("valid_data")) {
    valid = sk::encode_task_examples(spec, load_task_examples(cfg, spec, *p, acq),
                                     *pre.vocab, max_len);
  }
  const std::filesystem::path out_path = cfg.required_path("task_checkpoint");

  sk::FineTuneResult result =
      sk::finetune(pre.model, spec, train, valid, cfg.finetune_options());
  sk::Checkpoint ckpt;
  ckpt.model = std::move(result.model);
  ckpt.vocab = pre.vocab;
  ckpt.task = spec;
  ckpt.metadata = pre.metadata;
  ckpt.metadata["stage"] = "finetune";
  ckpt.metadata["best_epoch"] = std::to_string(result.best_epoch);
  sk::save_checkpoint(out_path, ckpt);
  if (result.valid) write_metrics(*result.valid, cfg.path("metrics_out"));
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  ConfigArgs config;
  std::string checkpoint, data, out;
};

int run_eval(const EvalArgs& a) {
  sk::RunConfig cfg = a.config.load();
  apply(cfg, "task_checkpoint", a.checkpoint);
  apply(cfg, "test_data", a.data);
  apply(cfg, "metrics_out", a.out);
  const sk::Checkpoint ckpt = sk::load_checkpoint(cfg.required_path("task_checkpoint"));
  if (!ckpt.task || !ckpt.vocab) {
    throw sk::ConfigError("task_checkpoint", "not a fine-tuned checkpoint");
  }
  std::unique_ptr<Acquisition> acq;
  const auto data = sk::encode_task_examples(
      *ckpt.task, load_task_examples(cfg, *ckpt.task, cfg.required_path("test_data"), acq),
      *ckpt.vocab, static_cast<std::size_t>(ckpt.model.config.max_len));
  write_metrics(sk::evaluate(ckpt.model, *ckpt.task, data), cfg.path("metrics_out"));
  return 0;
}

// --------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  ConfigArgs config;
};

int run_gradcheck(const GradcheckArgs& a) {
  const sk::RunConfig cfg = a.config.load();
  int vocab_size = static_cast<int>(cfg.integer("gradcheck_vocab"));
  if (auto p = cfg.path("vocab")) vocab_size = sk::Vocab::load(*p).size();
  sk::ModelConfig mc = cfg.model_config(vocab_size);
  const auto length = static_cast<std::size_t>(cfg.integer("gradcheck_length"));
  if (static_cast<int>(length) + 2 > mc.max_len) {
    throw sk::ConfigError("gradcheck_length", "longer than max_len - 2");
  }
  const sk::Model model = sk::init_model(mc);
  const auto seqs = sk::random_sequences(
      vocab_size, static_cast<std::size_t>(cfg.integer("gradcheck_batch")), length,
      mc.label_count, mc.seed + 1);
  const sk::MaskPolicy policy = cfg.mask_policy();

  sk::GradCheckOptions gopts;
  gopts.step = cfg.number("gradcheck_step");
  gopts.samples = static_cast<std::size_t>(cfg.integer("gradcheck_samples"));
  gopts.seed = mc.seed;
  sk::LossOptions lopts;
  lopts.mean_over_masked = cfg.flag("mean_loss");
  const double threshold = cfg.number("gradcheck_threshold");

  bool pass = true;
  for (sk::Route route : {sk::Route::kEarlyFusion, sk::Route::kLateSupervision}) {
    std::vector<sk::MaskedExample> batch;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      sk::Rng rng = sk::Rng::derive(mc.seed, sk::kMaskStream, i);
      batch.push_back(sk::mask_example(seqs[i], policy, rng, vocab_size));
      batch.back().route = route;
    }
    const sk::GradCheckReport report = sk::grad_check(model, batch, lopts, gopts);
    const bool ok = report.max_relative_error < threshold;
    pass = pass && ok;
    std::printf("%s coordinates=%zu max_relative_error=%.6e %s\n",
                route == sk::Route::kEarlyFusion ? "early_fusion" : "late_supervision",
                report.entries.size(), report.max_relative_error, ok ? "PASS" : "FAIL");
  }
  std::printf("%s\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : kCheckFailed;
}

// ------------------------------------------------------------------- probe

struct ProbeArgs {
  ConfigArgs config;
  std::string checkpoint, in, out;
};

int run_probe(const ProbeArgs& a) {
  sk::RunConfig cfg = a.config.load();
  apply(cfg, "task_checkpoint", a.checkpoint);
  const sk::Checkpoint ckpt = sk::load_checkpoint(cfg.required_path("task_checkpoint"));
  if (!ckpt.task || !ckpt.vocab) {
    throw sk::ConfigError("task_checkpoint", "not a fine-tuned checkpoint");
  }
  std::vector<sk::KnowledgeSequence> seqs;
  if (has_suffix(a.in, ".jsonl")) {
    seqs = sk::read_jsonl(std::filesystem::path(a.in));
  } else {
    auto acq = make_acquisition(cfg);
    seqs = acq->annotator->annotate_all(read_input(a.in, "raw"),
                                        static_cast<std::size_t>(cfg.integer("workers")));
  }
  std::ofstream file;
  if (!a.out.empty()) file = open_out(a.out);
  std::ostream& out = a.out.empty() ? std::cout : file;
  out << "id,prefix,token";
  for (int k = 0; k < ckpt.task->class_count; ++k) out << ",p" << k;
  out << '\n';
  for (const auto& s : seqs) {
    const auto rows = sk::probe_prefixes(ckpt.model, *ckpt.task, s, *ckpt.vocab,
                                         static_cast<std::size_t>(ckpt.model.config.max_len));
    for (std::size_t t = 0; t < rows.size(); ++t) {
      out << s.id << ',' << t + 1 << ',' << s.tokens[t].word;
      for (double p : rows[t]) out << ',' << p;
      out << '\n';
    }
  }
  return 0;
}

// ---------------------------------------------------------- make-synthetic

struct SyntheticArgs {
  std::string out_dir;
  std::size_t n_train = 2000;
  std::size_t n_test = 500;
  std::uint64_t seed = 42;
  std::size_t words = 20;
  std::size_t fillers = 40;
  bool overlapping = false;
};

int run_make_synthetic(const SyntheticArgs& a) {
  const sk::SyntheticSpec spec = sk::SyntheticSpec::generated(a.words, a.fillers);
  const sk::SyntheticData data =
      sk::make_synthetic(spec, a.n_train, a.n_test, a.seed, !a.overlapping);
  sk::write_synthetic(data, a.out_dir);
  std::cerr << "wrote " << data.train.size() << " train and " << data.test.size()
            << " test sentences to " << a.out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sentiment-knowledge annotation and label-aware language-model training"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  AnnotateArgs annotate;
  auto* c_annotate = app.add_subcommand("annotate", "tag and score raw text into a JSONL corpus");
  annotate.config.attach(c_annotate, false);
  c_annotate->add_option("--lexicon", annotate.lexicon, "SentiWordNet-format lexicon");
  c_annotate->add_option("--vectors", annotate.vectors, "word vectors for gloss/context similarity");
  c_annotate->add_option("--similarities", annotate.similarities, "precomputed similarity table");
  c_annotate->add_option("--tagger-train", annotate.tagger_train, "token<TAB>tag training file");
  c_annotate->add_option("--mode", annotate.mode, "sense weighting: context or prior")
      ->check(CLI::IsMember({"context", "prior"}));
  c_annotate->add_option("--window", annotate.window, "context tokens on each side (0 = all)");
  c_annotate->add_option("--workers", annotate.workers, "annotation threads");
  c_annotate->add_option("--in", annotate.in, "input text")->required();
  c_annotate->add_option("--out", annotate.out, "output JSONL corpus")->required();
  c_annotate->add_option("--format", annotate.format,
                         "input layout: labeled (label<TAB>text), raw, tagged")
      ->check(CLI::IsMember({"labeled", "raw", "tagged"}))
      ->capture_default_str();
  c_annotate->add_option("--similarity-log", annotate.similarity_log,
                         "write every computed similarity as a precomputed table");

  VocabArgs vocab;
  auto* c_vocab = app.add_subcommand("build-vocab", "word vocabulary from a JSONL corpus");
  c_vocab->add_option("--corpus", vocab.corpus, "JSONL corpus")->required();
  c_vocab->add_option("--out", vocab.out, "vocabulary file")->required();
  c_vocab->add_option("--min-freq", vocab.min_freq, "minimum token count")->capture_default_str();

  PretrainArgs pre;
  auto* c_pre = app.add_subcommand("pretrain", "label-aware masked language model pre-training");
  pre.config.attach(c_pre, true);
  c_pre->add_option("--corpus", pre.corpus, "JSONL corpus (config: corpus)");
  c_pre->add_option("--vocab", pre.vocab, "vocabulary file (config: vocab)");
  c_pre->add_option("--out", pre.out, "checkpoint to write (config: checkpoint)");
  c_pre->add_option("--loss-csv", pre.loss_csv, "per-step loss log (config: loss_csv)");
  c_pre->add_option("--ablation", pre.ablation, "variant (config: ablation, default full)");
  c_pre->add_option("--steps", pre.steps, "total steps (config: steps)");
  c_pre->add_option("--seed", pre.seed, "seed (config: seed, default 42)");

  FinetuneArgs ft;
  auto* c_ft = app.add_subcommand("finetune", "train a task head on a pre-trained checkpoint");
  ft.config.attach(c_ft, true);
  c_ft->add_option("--checkpoint", ft.checkpoint, "pre-trained checkpoint (config: checkpoint)");
  c_ft->add_option("--train", ft.train, "training data (config: train_data)");
  c_ft->add_option("--valid", ft.valid, "validation data (config: valid_data)");
  c_ft->add_option("--out", ft.out, "fine-tuned checkpoint (config: task_checkpoint)");
  c_ft->add_option("--task", ft.task, "task kind (config: task, default ssc)");
  c_ft->add_option("--metrics", ft.metrics, "validation metrics report (config: metrics_out)");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "score a fine-tuned checkpoint on task data");
  ev.config.attach(c_eval, true);
  c_eval->add_option("--checkpoint", ev.checkpoint, "fine-tuned checkpoint (config: task_checkpoint)");
  c_eval->add_option("--data", ev.data, "evaluation data (config: test_data)");
  c_eval->add_option("--out", ev.out, "metrics report (config: metrics_out)");

  GradcheckArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "compare analytic gradients with central differences");
  gc.config.attach(c_gc, true);

  ProbeArgs probe;
  auto* c_probe = app.add_subcommand("probe", "class distribution of every sentence prefix");
  probe.config.attach(c_probe, true);
  c_probe->add_option("--checkpoint", probe.checkpoint, "fine-tuned ssc checkpoint (config: task_checkpoint)");
  c_probe->add_option("--in", probe.in, "JSONL corpus or raw text, one sentence per line")->required();
  c_probe->add_option("--out", probe.out, "CSV output (default stdout)");

  SyntheticArgs syn;
  auto* c_syn = app.add_subcommand("make-synthetic", "toy lexicon and labeled sentences");
  c_syn->add_option("--out-dir", syn.out_dir, "output directory")->required();
  c_syn->add_option("--train", syn.n_train, "training sentences")->capture_default_str();
  c_syn->add_option("--test", syn.n_test, "test sentences")->capture_default_str();
  c_syn->add_option("--seed", syn.seed, "seed")->capture_default_str();
  c_syn->add_option("--words", syn.words, "words per sentiment set")->capture_default_str();
  c_syn->add_option("--fillers", syn.fillers, "filler nouns")->capture_default_str();
  c_syn->add_flag("--overlapping", syn.overlapping,
                  "test sentences reuse the training sentiment words");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (c_annotate->parsed()) return run_annotate(annotate);
    if (c_vocab->parsed()) return run_build_vocab(vocab);
    if (c_pre->parsed()) return run_pretrain(pre);
    if (c_ft->parsed()) return run_finetune(ft);
    if (c_eval->parsed()) return run_eval(ev);
    if (c_gc->parsed()) return run_gradcheck(gc);
    if (c_probe->parsed()) return run_probe(probe);
    if (c_syn->parsed()) return run_make_synthetic(syn);
  } catch (const sk::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
