// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#include "vulnlink/common.hpp"
#include "vulnlink/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

namespace {

// 0 success, 1 internal error, 2 usage or input error.
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"vulnlink: links vulnerability descriptions to the library "
               "coordinates they affect"};
  app.require_subcommand(1);
  // Global options are accepted after the subcommand name too.
  app.fallthrough();
  // Usage errors from the parser itself also exit with 2.
  app.failure_message(CLI::FailureMessage::simple);

  std::string config_path;
  uint64_t seed = 0;
  bool json_output = false;
  std::string catalog_override, vulns_override, out_dir_override;
  auto *config_opt =
      app.add_option("--config", config_path, "pipeline config JSON file");
  auto *seed_opt = app.add_option(
      "--seed", seed, "seed for partitioning, init, and shuffling");
  app.add_flag("--json", json_output, "machine-readable output");
  app.add_option("--catalog", catalog_override, "library catalog file");
  app.add_option("--vulns", vulns_override, "vulnerability file");
  app.add_option("--out-dir", out_dir_override, "artifact directory");

  auto *ingest = app.add_subcommand(
      "ingest", "build documents, vocabulary, and the dataset split");
  auto *index_cmd =
      app.add_subcommand("index", "build the inverted index from documents");
  auto *train_cmd =
      app.add_subcommand("train", "train the coherence scorer");

  auto *query = app.add_subcommand("query", "rank libraries for one query");
  vulnlink::QueryCommandOptions qopts;
  query->add_option("text", qopts.text, "vulnerability description text");
  query->add_option("--cve", qopts.cve_id,
                    "look the description up by id in the vulnerability file");
  query->add_option("--k", qopts.k, "rows to print")->default_val(10);
  query->add_flag("--screener-only", qopts.screener_only,
                  "stage-one ranking only, no model needed");
  query->add_option("--dump-scores", qopts.dump_scores_path,
                    "write every candidate score to this JSONL file");
  query->add_option("--external-scorer", qopts.external_scorer_cmd,
                    "shell command speaking the line-JSON scorer protocol");

  auto *evaluate = app.add_subcommand("evaluate",
                                      "score the held-out testing split");
  vulnlink::EvaluateCommandOptions eopts;
  evaluate->add_flag("--zero-shot-split", eopts.zero_shot_split,
                     "add zero-shot and full-shot sub-reports");
  evaluate->add_flag("--screener-only", eopts.screener_only,
                     "evaluate stage one alone");

  auto *sweep = app.add_subcommand(
      "sweep", "entity-weight x candidate-budget grid on the testing split");

  auto *serve = app.add_subcommand(
      "serve-scorer",
      "answer line-JSON scoring requests on stdin with the trained model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    // Flag and argument mistakes are usage errors; --help stays 0.
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    vulnlink::PipelineConfig config;
    if (config_opt->count() > 0) {
      config = vulnlink::load_config(config_path);
    } else if (std::filesystem::exists("vulnlink.json")) {
      config = vulnlink::load_config("vulnlink.json");
    }
    if (seed_opt->count() > 0) config.apply_seed(seed);
    if (!catalog_override.empty()) config.paths.catalog = catalog_override;
    if (!vulns_override.empty())
      config.paths.vulnerabilities = vulns_override;
    if (!out_dir_override.empty()) config.paths.out_dir = out_dir_override;

    if (ingest->parsed()) {
      vulnlink::cmd_ingest(config, std::cout);
    } else if (index_cmd->parsed()) {
      vulnlink::cmd_index(config, std::cout);
    } else if (train_cmd->parsed()) {
      vulnlink::cmd_train(config, std::cout);
    } else if (query->parsed()) {
      qopts.json = json_output;
      vulnlink::cmd_query(config, qopts, std::cout);
    } else if (evaluate->parsed()) {
      eopts.json = json_output;
      vulnlink::cmd_evaluate(config, eopts, std::cout);
    } else if (sweep->parsed()) {
      vulnlink::SweepCommandOptions sopts;
      sopts.json = json_output;
      vulnlink::cmd_sweep(config, sopts, std::cout);
    } else if (serve->parsed()) {
      vulnlink::cmd_serve_scorer(config, std::cin, std::cout);
    }
    return 0;
  } catch (const vulnlink::ParseError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const vulnlink::ConfigError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const vulnlink::ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
