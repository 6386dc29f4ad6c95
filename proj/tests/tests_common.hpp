// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#ifndef VULNLINK_TESTS_COMMON_HPP
#define VULNLINK_TESTS_COMMON_HPP

#include "vulnlink/corpus.hpp"
#include "vulnlink/screener.hpp"
#include "vulnlink/textproc.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace vulnlink::testing {

// --- Independent oracles ---

// Dense double-loop scorer: for every document and every query term,
// recompute tf and idf from the raw documents. Shares no code with the
// postings implementation. Keyed by library coordinate.
std::map<std::string, double>
naive_score_all(const WeightedQuery &query,
                const std::vector<LibraryDocument> &docs, bool idf_smoothing);

struct OracleMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Brute-force set-intersection metrics over a ranked list of coordinates.
OracleMetrics oracle_metrics(const std::vector<std::string> &ranked,
                             const std::set<std::string> &affected, size_t k);

// --- Fixture corpus ---

// Synthetic catalog and advisory set sized for the acceptance checks:
// 200 libraries (20 true targets, 60 noise-heavy decoys, 120 background)
// and 40 single-label vulnerabilities whose labels share entity tokens
// with the vulnerability text. Popular targets carry three advisories
// each; ten targets are referenced by exactly one advisory apiece, which
// makes them zero-shot labels whenever that advisory lands in testing.
struct FixtureCorpus {
  std::vector<LibraryRecord> libraries;
  std::vector<VulnerabilityRecord> vulns;
};

FixtureCorpus make_fixture_corpus();

// Appends `count` synthetic background libraries drawn from a disjoint
// token space (light overlap with the fixture's filler and noise pools).
void add_distractor_libraries(FixtureCorpus &corpus, size_t count,
                              uint64_t seed);

// Three-library catalog and one advisory mirroring a real mail-plugin
// confusion case; used by query-command tests.
FixtureCorpus make_mail_plugin_corpus();

// --- Filesystem and process helpers ---

class TempDir {
public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::string &path() const { return path_; }
  std::string file(const std::string &name) const;

private:
  std::string path_;
};

void write_vulns_jsonl(const std::vector<VulnerabilityRecord> &vulns,
                       const std::string &path);
void write_libraries_jsonl(const std::vector<LibraryRecord> &libs,
                           const std::string &path);
std::string read_file(const std::string &path);
void write_file(const std::string &path, const std::string &content);

struct CommandResult {
  int exit_code = -1;
  std::string output; // stdout and stderr interleaved
};

// Runs through /bin/sh with stderr folded into stdout.
CommandResult run_command(const std::string &command);

// Path of the pipeline binary, from --cli or the VULNLINK_CLI variable;
// empty when neither is set.
std::string cli_binary_from_env();

} // namespace vulnlink::testing

#endif // VULNLINK_TESTS_COMMON_HPP
