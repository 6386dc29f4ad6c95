// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#ifndef VULNLINK_PIPELINE_HPP
#define VULNLINK_PIPELINE_HPP

#include "vulnlink/corpus.hpp"
#include "vulnlink/eval.hpp"
#include "vulnlink/reranker.hpp"
#include "vulnlink/screener.hpp"
#include "vulnlink/stopwords.hpp"
#include "vulnlink/textproc.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vulnlink {

struct PathsConfig {
  std::string catalog;         // library records, JSON or JSONL
  std::string vulnerabilities; // vulnerability records, JSON or JSONL
  std::string out_dir = ".";   // artifact directory
  // Empty fields resolve to defaults inside out_dir.
  std::string documents;
  std::string vocabulary;
  std::string stopwords; // empty: bundled list
  std::string index;
  std::string model;
  std::string split_manifest;

  std::string documents_path() const;
  std::string vocabulary_path() const;
  std::string index_path() const;
  std::string model_path() const;
  std::string split_manifest_path() const;
  std::string ingest_manifest_path() const;
  std::string training_log_path() const;
  std::string report_json_path() const;
  std::string report_text_path() const;
  std::string sweep_csv_path() const;
  std::string sweep_json_path() const;
};

struct ScreenerConfig {
  double entity_weight = 4.0;
  size_t candidate_num = 512;
  bool idf_smoothing = true;
  bool entity_only = false;
  // When set, libraries without descriptions are left out of the index.
  bool exclude_description_less = false;

  ScreenerOptions options() const;
};

struct PipelineConfig {
  PathsConfig paths;
  ScreenerConfig screener;
  TrainingConfig training;
  std::array<int, 3> split_ratio{3, 1, 1};
  std::optional<std::array<size_t, 3>> split_sizes; // overrides the ratio
  uint64_t seed = 0;

  void apply_seed(uint64_t s); // sets both seed and training.seed
};

// Lossless round trip: from_json(to_json(c)) == c.
std::string config_to_json(const PipelineConfig &config);
PipelineConfig config_from_json(const std::string &text);
PipelineConfig load_config(const std::string &path);
void save_config(const PipelineConfig &config, const std::string &path);

// Library documents as line-delimited JSON, sorted by coordinate.
void save_documents(const std::vector<LibraryDocument> &docs,
                    const std::string &path);
std::vector<LibraryDocument> load_documents(const std::string &path);

// Holds an exclusive advisory lock on <dir>/.vulnlink.lock for the
// lifetime of the object. A second writer in the same directory fails
// fast instead of interleaving artifact writes.
class DirLock {
public:
  explicit DirLock(const std::string &dir);
  ~DirLock();
  DirLock(const DirLock &) = delete;
  DirLock &operator=(const DirLock &) = delete;

private:
  int fd_ = -1;
  std::string path_;
};

// Artifacts loaded by the query/evaluate/sweep commands.
struct Workspace {
  std::vector<LibraryDocument> documents;
  EntityVocabulary vocabulary;
  InvertedIndex index;
  StopwordSet stopwords;
  std::optional<ModelParameters> model;
};

Workspace load_workspace(const PipelineConfig &config, bool need_model);

// Command implementations. Progress and results go to `out`; errors are
// thrown (ParseError/ConfigError/ValidationError for bad input, anything
// else is internal).
void cmd_ingest(const PipelineConfig &config, std::ostream &out);
void cmd_index(const PipelineConfig &config, std::ostream &out);
void cmd_train(const PipelineConfig &config, std::ostream &out);

struct QueryCommandOptions {
  std::string text;    // raw description, or empty when id is set
  std::string cve_id;  // look the description up in the vulnerability file
  size_t k = 10;
  bool screener_only = false;
  bool json = false;
  std::string dump_scores_path;    // empty: no dump
  std::string external_scorer_cmd; // empty: in-process reference scorer
};

void cmd_query(const PipelineConfig &config, const QueryCommandOptions &opts,
               std::ostream &out);

struct EvaluateCommandOptions {
  bool zero_shot_split = false;
  bool screener_only = false;
  bool json = false;
  std::vector<size_t> ks = {1, 2, 3};
};

MetricsReport cmd_evaluate(const PipelineConfig &config,
                           const EvaluateCommandOptions &opts,
                           std::ostream &out);

struct SweepCell {
  std::string entity_weight; // "1", "4", or "entity-only"
  size_t candidate_num = 0;
  double recall_at_candidate_num = 0;
  double f1_at_1 = 0; // end-to-end, reranked with the trained model
};

struct SweepCommandOptions {
  bool json = false;
};

std::vector<SweepCell> cmd_sweep(const PipelineConfig &config,
                                 const SweepCommandOptions &opts,
                                 std::ostream &out);

// Reads request lines {"query_id","vuln","library","lib_desc"} from `in`
// and answers {"query_id","score"} per line using the reference model.
void cmd_serve_scorer(const PipelineConfig &config, std::istream &in,
                      std::ostream &out);

} // namespace vulnlink

#endif // VULNLINK_PIPELINE_HPP
