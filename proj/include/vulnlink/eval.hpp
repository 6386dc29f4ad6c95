// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#ifndef VULNLINK_EVAL_HPP
#define VULNLINK_EVAL_HPP

#include "vulnlink/corpus.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace vulnlink {

struct ScoredLibrary {
  std::string library;
  double score = 0;
};

struct PredictionRecord {
  std::string vuln_id;
  std::vector<ScoredLibrary> ranked; // descending, no duplicate coordinates
  std::set<std::string> affected;    // non-empty ground truth
};

struct KMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// precision@k = |top_k cap affected| / min(k, |affected|)
// recall@k    = |top_k cap affected| / |affected|
// f1 = harmonic mean, 0 when precision = recall = 0.
// Rejects duplicate ranked coordinates and empty affected sets.
KMetrics metrics_at_k(const PredictionRecord &pred, size_t k);

struct MetricsReport {
  std::vector<size_t> ks;        // evaluated cutoffs, typically {1,2,3}
  std::vector<KMetrics> per_k;   // macro means, parallel to ks
  double avg_f1 = 0;             // arithmetic mean of the per-k f1 values
  size_t record_count = 0;
  // Named sub-populations evaluated with the same ks (zero-shot/full-shot).
  std::vector<std::pair<std::string, MetricsReport>> sub_reports;

  const KMetrics *at_k(size_t k) const;
};

// Unweighted means over records; permutation-invariant.
MetricsReport macro_report(const std::vector<PredictionRecord> &preds,
                           const std::vector<size_t> &ks = {1, 2, 3});

// A test vulnerability is zero-shot when none of its affected libraries
// appears as a label in the training set. Returns (zero_shot, full_shot);
// the two lists partition the input.
std::pair<std::vector<VulnerabilityRecord>, std::vector<VulnerabilityRecord>>
zero_shot_split(const std::vector<VulnerabilityRecord> &test,
                const std::set<std::string> &training_labels);

// recall@k averaged over records, one value per requested k. Monotone
// non-decreasing in k for sorted ks.
std::vector<double>
screening_recall_curve(const std::vector<PredictionRecord> &screened,
                       const std::vector<size_t> &ks);

// Report renderings. JSON keys are sorted; text mirrors the per-k table.
std::string report_to_json(const MetricsReport &report);
std::string render_report_text(const MetricsReport &report);
void save_report_json(const MetricsReport &report, const std::string &path);
void save_recall_curve_csv(const std::vector<size_t> &ks,
                           const std::vector<double> &recalls,
                           const std::string &path);

} // namespace vulnlink

#endif // VULNLINK_EVAL_HPP
