// Copyright 2026 The pitchaccent Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#ifndef PITCHACCENT_CLI_HPP
#define PITCHACCENT_CLI_HPP

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pitchaccent/common.hpp"
#include "pitchaccent/config.hpp"
#include "pitchaccent/corpus.hpp"
#include "pitchaccent/embeddings.hpp"
#include "pitchaccent/harness/dataset.hpp"
#include "pitchaccent/harness/protocols.hpp"
#include "pitchaccent/harness/splits.hpp"
#include "pitchaccent/harness/synthetic.hpp"
#include "pitchaccent/model.hpp"
#include "pitchaccent/model_grad_check.hpp"
#include "pitchaccent/nn/checkpoint.hpp"

namespace pitchaccent::cli {

namespace fs = std::filesystem;

struct ManifestArg {
  std::string name;
  fs::path path;
};

// "NAME=PATH", or PATH named after its stem (after its directory when the stem
// is "manifest").
inline ManifestArg parse_manifest_arg(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq != std::string::npos && eq > 0) return {arg.substr(0, eq), arg.substr(eq + 1)};
  fs::path p(arg);
  std::string name = p.stem().string();
  if (name == "manifest" && p.has_parent_path()) name = fs::absolute(p).parent_path().filename().string();
  return {name, p};
}

inline std::vector<ManifestArg> manifest_args(const RunConfig& cfg) {
  if (cfg.manifest.empty()) throw Error("--manifest is required");
  std::vector<ManifestArg> out;
  for (const auto& m : cfg.manifest) {
    auto a = parse_manifest_arg(m);
    for (const auto& prev : out) {
      if (prev.name == a.name) throw Error("two manifests named '" + a.name + "'; use NAME=PATH");
    }
    out.push_back(std::move(a));
  }
  return out;
}

inline std::vector<Corpus> load_corpora(const RunConfig& cfg) {
  std::vector<Corpus> out;
  for (const auto& m : manifest_args(cfg)) {
    ManifestOptions opts;
    opts.name = m.name;
    out.push_back(load_manifest(m.path, opts));
  }
  return out;
}

// Every default that shapes a run, logged once at its start.
inline void log_defaults(const RunConfig& c) {
  log_info("mini-batch size " + std::to_string(c.batch_size) + ", batches reshuffled every epoch");
  log_info("Adam lr=" + detail::fmt_double(c.lr) + " beta1=0.9 beta2=0.999 eps=1e-8");
  log_info("model selection: best dev accuracy, earliest epoch on ties");
  log_info("L2 on weights only: acoustic " + detail::fmt_double(c.l2_acoustic) + ", lexical " +
           detail::fmt_double(c.l2_lexical));
  log_info("dropout: 0.2 on the pooled acoustic vector, 0.8 on the embedding input (inverted scaling)");
  log_info("initialization: Glorot uniform weights, zero biases");
  log_info(std::string("conv2 kernels: ") + (c.depthwise ? "depthwise" : "span all 100 input channels"));
  log_info("activations: ReLU after both convolutions and the bottleneck");
  log_info("class order (none, accented); ties predict none");
  log_info("context: one word on each side; s_max = widest window over the involved corpora (minimum 18)");
  log_info("descriptors z-scored with statistics of the training words; padding stays zero");
  log_info("folds " + std::to_string(c.folds) + ", dev words min(" + std::to_string(c.dev_size) +
           ", half the training pool), repetition seeds = seed + repetition");
  log_info("weights reinitialized for every repetition");
  log_info("precision " + std::to_string(c.precision) + "-bit");
}

// Writes config.txt, run_info.txt and inputs.txt; routes log lines to log.txt.
class RunDirectory {
 public:
  RunDirectory(const RunConfig& cfg, const std::vector<fs::path>& inputs, std::ostream& err) : dir_(cfg.out) {
    fs::create_directories(dir_);
    {
      std::ofstream c(dir_ / "config.txt");
      c << format_config(cfg);
    }
    const InputHash ih = hash_inputs(inputs);
    {
      std::ofstream in(dir_ / "inputs.txt");
      for (const auto& [path, hash] : ih.files) in << hash << ' ' << path << '\n';
    }
    {
      std::ofstream r(dir_ / "run_info.txt");
      r << "command=" << cfg.command << '\n';
      r << "seed=" << cfg.seed << '\n';
      r << "config_hash=" << config_hash(cfg) << '\n';
      r << "input_hash=" << ih.combined << '\n';
    }
    hash_ = config_hash(cfg);
    log_ = std::make_shared<std::ofstream>(dir_ / "log.txt", std::ios::app);
    auto log = log_;
    std::ostream* e = &err;
    previous_ = set_log_sink([log, e](LogLevel level, const std::string& msg) {
      const char* tag = level == LogLevel::kWarning ? "[warning] " : "[info] ";
      *log << tag << msg << '\n' << std::flush;
      if (level == LogLevel::kWarning) *e << tag << msg << '\n';
    });
  }
  ~RunDirectory() { set_log_sink(previous_); }
  RunDirectory(const RunDirectory&) = delete;
  RunDirectory& operator=(const RunDirectory&) = delete;

  const fs::path& path() const { return dir_; }
  const std::string& config_hash_value() const { return hash_; }

 private:
  fs::path dir_;
  std::string hash_;
  std::shared_ptr<std::ofstream> log_;
  LogSink previous_;
};

inline std::vector<fs::path> input_files(const std::vector<Corpus>& corpora, const RunConfig& cfg,
                                         bool with_embeddings) {
  std::vector<fs::path> files;
  for (const auto& m : manifest_args(cfg)) files.push_back(m.path);
  for (const auto& c : corpora) {
    for (const auto& u : c.utterances) files.push_back(u.resolved_audio_path);
  }
  if (with_embeddings && !cfg.embeddings.empty()) files.emplace_back(cfg.embeddings);
  return files;
}

inline harness::ExperimentConfig experiment_config(const RunConfig& c) {
  harness::ExperimentConfig e;
  e.mode = parse_model_mode(c.mode);
  e.acoustic.s_max = c.s_max;
  e.acoustic.depthwise_conv2 = c.depthwise;
  e.acoustic.l2_lambda = c.l2_acoustic;
  e.lexical.n_words = c.ngram;
  e.lexical.bottleneck_n = c.bottleneck;
  e.lexical.l2_lambda = c.l2_lexical;
  e.training.epochs = c.epochs;
  e.training.batch_size = static_cast<std::size_t>(c.batch_size);
  e.training.adam.lr = c.lr;
  e.folds = c.folds;
  e.repetitions = c.reps;
  e.dev_size = static_cast<std::size_t>(c.dev_size);
  e.seed = c.seed;
  e.jobs = c.jobs;
  return e;
}

struct LoadedData {
  std::vector<harness::PreparedCorpus> corpora;
  std::optional<EmbeddingTable> embeddings;
  harness::ExperimentInputs inputs;
};

// Features are always extracted from the audio (never from rounded CSV tracks)
// so that a re-run reproduces results bit for bit.
inline std::unique_ptr<LoadedData> load_data(const RunConfig& cfg, std::vector<Corpus> corpora, const fs::path& dir,
                                             bool need_embeddings) {
  auto d = std::make_unique<LoadedData>();
  for (auto& c : corpora) {
    const std::string name = c.name;
    log_info("extracting features for " + name);
    d->corpora.push_back(harness::prepare_corpus(std::move(c), default_stopwords(), cfg.jobs));
  }
  if (need_embeddings) {
    if (cfg.embeddings.empty()) throw Error("mode " + cfg.mode + " needs --embeddings");
    d->embeddings = load_embedding_text(fs::path(cfg.embeddings), cfg.embedding_dim,
                                        parse_embedding_kind(cfg.embedding_kind));
    d->inputs.embeddings = &*d->embeddings;
  }
  for (const auto& c : d->corpora) {
    d->inputs.corpora.push_back(&c);
    // Fixed splits: reused when the run directory already has them.
    d->inputs.splits[c.corpus.name] =
        harness::load_or_make_splits(dir / ("splits_" + c.corpus.name + ".txt"), c.word_count(), cfg.folds,
                                     harness::split_seed(cfg.seed), static_cast<std::size_t>(cfg.dev_size));
  }
  return d;
}

inline int cmd_stats(const RunConfig& cfg, std::ostream& out) {
  std::size_t words = 0, accented = 0;
  char head[128];
  std::snprintf(head, sizeof(head), "%-12s %8s %8s %6s %s", "corpus", "words", "accented", "major", "class");
  out << head << '\n';
  const auto corpora = load_corpora(cfg);
  for (const auto& c : corpora) {
    const CorpusStats s = corpus_stats(c);
    words += s.word_count;
    accented += s.accented_count;
    out << format_stats(c.name, s) << '\n';
  }
  if (corpora.size() > 1) out << format_stats("total", stats_from_counts(words, accented)) << '\n';
  return 0;
}

inline int cmd_oov(const RunConfig& cfg, std::ostream& out) {
  if (cfg.embeddings.empty()) throw Error("--embeddings is required");
  const auto kind = parse_embedding_kind(cfg.embedding_kind);
  const auto table = load_embedding_text(fs::path(cfg.embeddings), cfg.embedding_dim, kind);
  for (const auto& c : load_corpora(cfg)) out << format_oov_report(c.name, kind, oov_report(c, table)) << '\n';
  return 0;
}

inline int cmd_extract(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto corpora = load_corpora(cfg);
  RunDirectory run(cfg, input_files(corpora, cfg, false), err);
  for (const auto& c : corpora) {
    const auto tracks = harness::extract_tracks(c, cfg.jobs, run.path() / "features" / c.name);
    std::size_t frames = 0;
    for (const auto& t : tracks) frames += t.size();
    out << c.name << ": " << tracks.size() << " utterances, " << frames << " frames -> "
        << (run.path() / "features" / c.name).string() << '\n';
  }
  return 0;
}

inline int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  harness::SyntheticSpec spec;
  spec.name = cfg.name;
  spec.n_words = static_cast<std::size_t>(cfg.words);
  spec.vocab_size = cfg.vocab_size;
  spec.vocab_seed = cfg.vocab_seed;
  spec.seed = cfg.seed;
  spec.lexical_correlation = cfg.lexical_correlation;
  spec.acoustic_strength = cfg.acoustic_strength;
  spec.stopword_share = cfg.stopword_share;
  spec.oov_tokens = static_cast<std::size_t>(cfg.oov_tokens);
  spec.oov_accented = static_cast<std::size_t>(cfg.oov_accented);
  spec.embed_dim = cfg.embedding_dim;
  const auto s = harness::generate_synthetic_corpus(spec, cfg.out);
  {
    std::ofstream c(fs::path(cfg.out) / "config.txt");
    c << format_config(cfg);
  }
  const CorpusStats st = corpus_stats(s.corpus);
  out << "manifest: " << s.manifest.string() << '\n';
  out << "embeddings: " << s.embeddings.string() << '\n';
  out << "ground truth: " << s.ground_truth.string() << '\n';
  out << format_stats(s.corpus.name, st) << '\n';
  return 0;
}

inline int cmd_gradcheck(const RunConfig& cfg, std::ostream& out) {
  ModelGradCheckOptions o;
  o.seed = cfg.seed;
  const auto r = model_grad_check(o);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max relative error: %.3e over %zu parameters", r.max_relative_error, r.checked);
  out << buf << '\n';
  return r.max_relative_error < 1e-4 ? 0 : 1;
}

template <typename Real>
int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto corpora = load_corpora(cfg);
  const auto mode = parse_model_mode(cfg.mode);
  RunDirectory run(cfg, input_files(corpora, cfg, uses_lexical(mode)), err);
  log_defaults(cfg);
  const std::string target = cfg.target.empty() ? corpora.front().name : cfg.target;
  auto data = load_data(cfg, std::move(corpora), run.path(), uses_lexical(mode));
  auto ecfg = experiment_config(cfg);
  ecfg.target = target;
  const auto r = harness::run_single_fold<Real>(ecfg, data->inputs, cfg.fold);
  nn::save_checkpoint(run.path() / "model.ckpt",
                      harness::checkpoint_with_scaler(r.model, r.scaler, cfg.seed, run.config_hash_value()));
  harness::ResultsWriter writer(run.path());
  writer.append(r.row);
  {
    std::ofstream curve(run.path() / "training.csv");
    curve << "epoch,train_loss,dev_accuracy\n";
    for (std::size_t e = 0; e < r.training.dev_accuracy.size(); ++e) {
      curve << e + 1 << ',' << harness::format_number(r.training.train_loss[e]) << ','
            << harness::format_number(r.training.dev_accuracy[e]) << '\n';
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%s fold %d: best epoch %d (dev %.1f%%), test accuracy %.1f%%, f1 %.1f%%",
                target.c_str(), cfg.fold, r.row.best_epoch, r.training.best_dev_accuracy, r.row.metrics.accuracy,
                r.row.metrics.f1);
  out << buf << '\n';
  return 0;
}

template <typename Real>
int cmd_protocol(const RunConfig& cfg, harness::Protocol protocol, std::ostream& out, std::ostream& err) {
  auto corpora = load_corpora(cfg);
  const auto mode = parse_model_mode(cfg.mode);
  std::vector<std::string> names;
  for (const auto& c : corpora) names.push_back(c.name);
  auto known = [&](const std::string& n) {
    if (std::find(names.begin(), names.end(), n) == names.end()) throw Error("no manifest named '" + n + "'");
  };
  for (const auto& s : cfg.source) known(s);
  if (!cfg.target.empty()) known(cfg.target);
  if (protocol == harness::Protocol::kCross && (cfg.source.size() != 1 || cfg.target.empty())) {
    throw Error("cross needs one --source and a --target");
  }

  RunDirectory run(cfg, input_files(corpora, cfg, uses_lexical(mode)), err);
  log_defaults(cfg);
  auto data = load_data(cfg, std::move(corpora), run.path(), uses_lexical(mode));
  harness::ResultsWriter writer(run.path());
  const std::vector<std::string> targets = cfg.target.empty() ? names : std::vector<std::string>{cfg.target};
  std::vector<harness::ExperimentResult> results;
  for (const auto& target : targets) {
    auto ecfg = experiment_config(cfg);
    ecfg.protocol = protocol;
    ecfg.target = target;
    if (protocol == harness::Protocol::kCross) ecfg.sources = cfg.source;
    if (protocol == harness::Protocol::kAll) {
      if (cfg.source.empty()) {
        for (const auto& n : names) {
          if (n != target) ecfg.sources.push_back(n);
        }
      } else {
        ecfg.sources = cfg.source;
      }
    }
    log_info("running " + std::string(harness::to_string(protocol)) + " on target " + target);
    results.push_back(harness::run_experiment<Real>(ecfg, data->inputs,
                                                    [&](const harness::RunRow& row) { writer.append(row); }));
    log_info("s_max " + std::to_string(results.back().config.acoustic.s_max));
  }
  const std::string grid = harness::format_summary_grid(results);
  {
    std::ofstream s(run.path() / "summary.txt");
    s << grid;
  }
  out << grid;
  return 0;
}

inline void add_string(CLI::App* app, std::map<std::string, CLI::Option*>& opts, std::map<std::string, std::string>& vals,
                       const std::string& key, const std::string& help) {
  opts[key] = app->add_option("--" + key, vals[key], help);
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word-level pitch accent detection toolkit", "pitchaccent"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  struct Sub {
    CLI::App* app;
    std::map<std::string, CLI::Option*> opts;
    std::map<std::string, std::string> vals;
    std::vector<std::string> manifests;
    std::vector<std::string> sources;
    CLI::Option* manifest_opt = nullptr;
    CLI::Option* source_opt = nullptr;
    CLI::Option* l2_opt = nullptr;
    CLI::Option* config_opt = nullptr;
    std::string l2;
    std::string config_path;
  };
  std::map<std::string, Sub> subs;
  auto make = [&](const std::string& name, const std::string& help) -> Sub& {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help);
    s.config_opt = s.app->add_option("--config", s.config_path, "key=value config file (flags override it)");
    return s;
  };
  auto data_opts = [&](Sub& s) {
    s.manifest_opt = s.app->add_option("--manifest", s.manifests, "Corpus manifest (PATH or NAME=PATH); repeatable");
  };
  auto run_opts = [&](Sub& s) {
    add_string(s.app, s.opts, s.vals, "out", "Run directory");
    add_string(s.app, s.opts, s.vals, "jobs", "Parallel jobs");
    add_string(s.app, s.opts, s.vals, "seed", "Base seed");
  };
  auto emb_opts = [&](Sub& s) {
    add_string(s.app, s.opts, s.vals, "embeddings", "Embedding text file");
    add_string(s.app, s.opts, s.vals, "embedding-kind", "glove or w2v");
    add_string(s.app, s.opts, s.vals, "embedding-dim", "Embedding dimension");
  };
  auto model_opts = [&](Sub& s) {
    for (const auto& [k, h] : std::vector<std::pair<std::string, std::string>>{
             {"mode", "acoustic, acoustic+embs or embs-only"},
             {"ngram", "Words fed to the lexical branch (1 or 3)"},
             {"bottleneck", "Bottleneck width n"},
             {"epochs", "Training epochs"},
             {"reps", "Repetitions"},
             {"folds", "Cross-validation folds"},
             {"dev-size", "Held-out dev words"},
             {"batch-size", "Mini-batch size"},
             {"lr", "Adam learning rate"},
             {"l2-acoustic", "L2 coefficient, acoustic branch"},
             {"l2-lexical", "L2 coefficient, lexical branch"},
             {"depthwise", "Depthwise second convolution (true/false)"},
             {"s-max", "Input width in frames (0 = derived)"},
             {"precision", "Floating point precision for training (32 or 64)"},
             {"target", "Target corpus name"}}) {
      add_string(s.app, s.opts, s.vals, k, h);
    }
    s.l2_opt = s.app->add_option("--l2", s.l2, "L2 coefficient for both branches");
  };

  Sub& extract = make("extract", "Extract frame-level descriptor tracks");
  data_opts(extract);
  run_opts(extract);
  Sub& stats = make("stats", "Word and accent counts per corpus");
  data_opts(stats);
  Sub& oov = make("oov", "Out-of-vocabulary report");
  data_opts(oov);
  emb_opts(oov);
  Sub& train = make("train", "Train and evaluate one within-corpus fold");
  data_opts(train);
  run_opts(train);
  emb_opts(train);
  model_opts(train);
  add_string(train.app, train.opts, train.vals, "fold", "Fold index");
  for (const char* name : {"within", "cross", "all"}) {
    Sub& p = make(name, std::string(name) + " protocol");
    data_opts(p);
    run_opts(p);
    emb_opts(p);
    model_opts(p);
    p.source_opt = p.app->add_option("--source", p.sources, "Source corpus name; repeatable");
  }
  Sub& synth = make("synth", "Generate a synthetic corpus");
  run_opts(synth);
  add_string(synth.app, synth.opts, synth.vals, "embedding-dim", "Embedding dimension");
  for (const auto& [k, h] : std::vector<std::pair<std::string, std::string>>{
           {"name", "Corpus name"},
           {"words", "Word tokens"},
           {"vocab-size", "Content word types"},
           {"vocab-seed", "Seed for vocabulary, accent-prone types and embeddings"},
           {"lexical-correlation", "P(accent) for accent-prone types"},
           {"acoustic-strength", "Probability that the acoustic cue follows the label"},
           {"stopword-share", "Fraction of stopword tokens"},
           {"oov-tokens", "Planted out-of-vocabulary tokens"},
           {"oov-accented", "How many planted OOV tokens are accented"}}) {
    add_string(synth.app, synth.opts, synth.vals, k, h);
  }
  Sub& gradcheck = make("gradcheck", "Finite-difference gradient check of the full model");
  add_string(gradcheck.app, gradcheck.opts, gradcheck.vals, "seed", "Seed");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const auto used = app.get_subcommands();
    err << (used.empty() ? app.help() : used.front()->help());
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Sub& sub = subs.at(command);
  try {
    RunConfig cfg;
    if (sub.config_opt->count()) load_config_file(cfg, sub.config_path);
    cfg.command = command;
    if (sub.manifest_opt && sub.manifest_opt->count()) cfg.manifest = sub.manifests;
    if (sub.source_opt && sub.source_opt->count()) cfg.source = sub.sources;
    if (sub.l2_opt && sub.l2_opt->count()) {
      set_config_value(cfg, "l2-acoustic", sub.l2);
      set_config_value(cfg, "l2-lexical", sub.l2);
    }
    for (const auto& [key, opt] : sub.opts) {
      if (opt->count()) set_config_value(cfg, key, sub.vals.at(key));
    }
    cfg.validate();
    parse_model_mode(cfg.mode);
    parse_embedding_kind(cfg.embedding_kind);

    if (command == "stats") return cmd_stats(cfg, out);
    if (command == "oov") return cmd_oov(cfg, out);
    if (command == "extract") return cmd_extract(cfg, out, err);
    if (command == "synth") return cmd_synth(cfg, out);
    if (command == "gradcheck") return cmd_gradcheck(cfg, out);
    const bool single = cfg.precision == 32;
    if (command == "train") return single ? cmd_train<float>(cfg, out, err) : cmd_train<double>(cfg, out, err);
    const auto protocol = harness::parse_protocol(command);
    return single ? cmd_protocol<float>(cfg, protocol, out, err) : cmd_protocol<double>(cfg, protocol, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pitchaccent::cli

#endif  // PITCHACCENT_CLI_HPP
