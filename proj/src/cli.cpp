// Copyright 2026 The blocklda Authors.
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

#include "blocklda/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "blocklda/checkpoint.hpp"
#include "blocklda/corpus.hpp"
#include "blocklda/engine.hpp"
#include "blocklda/error.hpp"
#include "blocklda/kernels.hpp"
#include "blocklda/log.hpp"
#include "blocklda/metrics.hpp"

namespace blocklda {

namespace {

Corpus load_corpus(const RunConfig& config) {
  std::ifstream in(config.corpus_path);
  if (!in) throw ConfigError("cannot open corpus file '" + config.corpus_path + "'");
  Corpus corpus =
      config.format == CorpusFormat::kUci ? load_bag_of_words(in) : load_raw_text(in);

  if (!config.vocab_path.empty() && config.format == CorpusFormat::kUci) {
    std::ifstream vin(config.vocab_path);
    if (!vin) throw ConfigError("cannot open vocabulary file '" + config.vocab_path + "'");
    load_vocabulary(vin, corpus);
  }
  if (config.bigrams) corpus = augment_bigrams(corpus, config.bigram_min_count);
  return corpus;
}

void run_impl(const RunConfig& config) {
  if (config.kernel != "auto") kernels::force(config.kernel.c_str());

  const std::vector<Diagnostic> diagnostics = validate(config);
  for (const Diagnostic& d : diagnostics) {
    std::cerr << (d.fatal ? "error: " : "warning: ") << d.message << '\n';
  }
  if (has_fatal(diagnostics)) throw ConfigError("invalid configuration");

  Corpus corpus = load_corpus(config);
  for (const Diagnostic& d : validate(config, corpus.vocabulary.size)) {
    if (!d.fatal && d.message.rfind("M =", 0) == 0) std::cerr << "warning: " << d.message << '\n';
  }

  const double alpha = config.alpha >= 0.0 ? config.alpha : 50.0 / config.K;
  const Hyperparameters hyper = make_hyper(config.K, corpus.vocabulary.size, alpha, config.beta);

  // One shared initialization: every mode starts from the same assignments
  // for a given seed.
  init_assignments(corpus, config.K, config.seed);

  if (log_enabled(LogLevel::kInfo)) {
    std::cerr << "corpus: D=" << corpus.num_documents() << " V=" << corpus.vocabulary.size
              << " N=" << corpus.total_tokens << ", mode=" << to_string(config.mode)
              << ", kernels=" << kernels::active().name << '\n';
  }

  const std::filesystem::path out_dir(config.output_dir);
  std::filesystem::create_directories(out_dir);

  MetricsSink sink;
  CountModel final_model;
  int64_t peak_worker_entries = 0;

  switch (config.mode) {
    case Mode::kSerial: {
      SerialTrainer trainer(corpus, hyper, config.seed);
      trainer.run(config.iterations, sink);
      final_model = trainer.merged_model();
      peak_worker_entries = final_model.model_nonzeros();
      break;
    }
    case Mode::kModelParallel: {
      EngineOptions opts;
      opts.M = config.M;
      opts.iterations = config.iterations;
      opts.seed = config.seed;
      opts.deterministic = config.deterministic;
      opts.prefetch = config.prefetch;
      Engine engine(corpus, hyper, opts);
      engine.run(sink);
      final_model = engine.merged_model();
      peak_worker_entries = engine.memory_report().max_worker_word_entries();
      if (config.audit_log) {
        std::ofstream ledger(out_dir / "ledger.txt");
        engine.kv().dump_ledger(ledger);
      }
      break;
    }
    case Mode::kStaleSync: {
      StaleSyncOptions opts;
      opts.M = config.M;
      opts.iterations = config.iterations;
      opts.seed = config.seed;
      opts.staleness = config.staleness;
      opts.deterministic = config.deterministic;
      opts.replica_entry_budget = config.replica_budget;
      StaleSyncEngine engine(corpus, hyper, opts);
      engine.run(sink);
      final_model = engine.merged_model();
      peak_worker_entries = engine.memory_report().max_worker_word_entries();
      break;
    }
  }

  // Serial and deterministic runs promise byte-identical outputs for a
  // (config, seed) pair, so their timing fields are written as zero.
  const bool zero_timing = config.deterministic || config.mode == Mode::kSerial;

  {
    std::ofstream csv(out_dir / "metrics.csv");
    sink.write_csv(csv, zero_timing);
  }
  {
    std::ofstream ckpt(out_dir / "checkpoint.bin", std::ios::binary);
    write_checkpoint(ckpt, final_model.word_rows, hyper);
  }
  {
    std::ofstream topics(out_dir / "topics.txt");
    write_topic_dump(topics, final_model.word_rows, corpus.vocabulary, hyper.K, config.top_n);
  }
  {
    nlohmann::ordered_json summary;
    summary["mode"] = to_string(config.mode);
    summary["K"] = config.K;
    summary["M"] = config.M;
    summary["iterations"] = config.iterations;
    summary["seed"] = config.seed;
    summary["tokens"] = corpus.total_tokens;
    summary["kernels"] = kernels::active().name;
    const std::optional<double> ll = sink.final_log_likelihood();
    if (ll.has_value()) summary["final_log_likelihood"] = *ll;
    summary["total_wall_seconds"] = zero_timing ? 0.0 : sink.total_wall_seconds();
    summary["peak_worker_entries"] = peak_worker_entries;
    std::ofstream json_out(out_dir / "summary.json");
    json_out << summary.dump(2) << '\n';
  }
}

void add_run_options(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--corpus", config.corpus_path, "Corpus file path");
  cmd->add_option("--format", config.format, "Corpus format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, CorpusFormat>{{"uci", CorpusFormat::kUci},
                                              {"text", CorpusFormat::kText}},
          CLI::ignore_case));
  cmd->add_option("--vocab", config.vocab_path, "Vocabulary file (one term per line)");
  cmd->add_option("--K,--topics", config.K, "Number of topics");
  cmd->add_option("--alpha", config.alpha, "Symmetric document prior (default 50/K)");
  cmd->add_option("--beta", config.beta, "Symmetric topic prior")->capture_default_str();
  cmd->add_option("--M,--workers", config.M, "Workers (and model blocks)")->capture_default_str();
  cmd->add_option("--iterations", config.iterations, "Full sweeps over the corpus")
      ->capture_default_str();
  cmd->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  cmd->add_option("--mode", config.mode, "Execution mode")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Mode>{{"serial", Mode::kSerial},
                                      {"model-parallel", Mode::kModelParallel},
                                      {"stale-sync", Mode::kStaleSync}},
          CLI::ignore_case));
  cmd->add_option("--staleness", config.staleness,
                  "Stale-sync: tokens between delta exchanges (-1 = once per pass)")
      ->capture_default_str();
  cmd->add_flag("--bigrams", config.bigrams, "Replace tokens with retained bigram phrases");
  cmd->add_option("--min-count", config.bigram_min_count, "Bigram retention threshold")
      ->capture_default_str();
  cmd->add_option("--output", config.output_dir, "Output directory")->capture_default_str();
  cmd->add_option("--top-n", config.top_n, "Terms per topic in the topic dump")
      ->capture_default_str();
  cmd->add_flag("--deterministic", config.deterministic,
                "Step workers round-robin in one thread (bit-reproducible)");
  cmd->add_flag("--prefetch", config.prefetch, "Prefetch next round's block after committing");
  cmd->add_option("--kernel", config.kernel, "Kernel variant: auto, scalar, avx2")
      ->capture_default_str();
  cmd->add_option("--replica-budget", config.replica_budget,
                  "Stale-sync: max V*K replica entries per worker")
      ->capture_default_str();
  cmd->add_flag("--audit-log", config.audit_log, "Write the kv-store ledger to ledger.txt");
  cmd->set_config("--config", "", "Config file with key=value lines (keys = long option names)");
}

}  // namespace

int run(const RunConfig& config) {
  try {
    run_impl(config);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const BoundsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Model-parallel LDA trainer"};
  app.require_subcommand(1);

  RunConfig train_config;
  CLI::App* train = app.add_subcommand("train", "Run training and write artifacts");
  add_run_options(train, train_config);

  RunConfig check_config;
  CLI::App* check = app.add_subcommand("validate", "Check a configuration and print diagnostics");
  add_run_options(check, check_config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (train->parsed()) return run(train_config);

  const std::vector<Diagnostic> diagnostics = validate(check_config);
  for (const Diagnostic& d : diagnostics) {
    std::cout << (d.fatal ? "error: " : "warning: ") << d.message << '\n';
  }
  if (diagnostics.empty()) std::cout << "configuration ok\n";
  return has_fatal(diagnostics) ? 2 : 0;
}

}  // namespace blocklda
