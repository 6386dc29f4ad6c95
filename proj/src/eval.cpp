// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#include "vulnlink/eval.hpp"

#include "vulnlink/common.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace vulnlink {

namespace {

// Intersection size between the top-k prefix and the affected set.
// Counting stays in integers; divisions happen once at the end, so the
// same counts always produce the same metric bits.
size_t top_k_hits(const PredictionRecord &pred, size_t k) {
  std::unordered_set<std::string> seen;
  size_t hits = 0;
  const size_t take = std::min(k, pred.ranked.size());
  for (size_t i = 0; i < pred.ranked.size(); ++i) {
    if (!seen.insert(pred.ranked[i].library).second)
      throw ValidationError("duplicate coordinate in ranked list for " +
                            pred.vuln_id + ": " + pred.ranked[i].library);
    if (i < take && pred.affected.count(pred.ranked[i].library)) ++hits;
  }
  return hits;
}

} // namespace

KMetrics metrics_at_k(const PredictionRecord &pred, size_t k) {
  if (k == 0) throw ValidationError("metrics_at_k requires k >= 1");
  if (pred.affected.empty())
    throw ValidationError("empty affected set for " + pred.vuln_id);
  const size_t hits = top_k_hits(pred, k);
  const size_t p_denom = std::min(k, pred.affected.size());
  KMetrics m;
  m.precision = static_cast<double>(hits) / static_cast<double>(p_denom);
  m.recall = static_cast<double>(hits) / static_cast<double>(pred.affected.size());
  m.f1 = (m.precision == 0.0 && m.recall == 0.0)
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

const KMetrics *MetricsReport::at_k(size_t k) const {
  for (size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == k) return &per_k[i];
  }
  return nullptr;
}

MetricsReport macro_report(const std::vector<PredictionRecord> &preds,
                           const std::vector<size_t> &ks) {
  if (preds.empty()) throw ValidationError("macro_report over no records");
  if (ks.empty()) throw ValidationError("macro_report requires at least one k");
  MetricsReport report;
  report.ks = ks;
  report.record_count = preds.size();
  report.per_k.resize(ks.size());
  const double n = static_cast<double>(preds.size());
  for (size_t i = 0; i < ks.size(); ++i) {
    double p = 0, r = 0, f = 0;
    for (const auto &pred : preds) {
      const KMetrics m = metrics_at_k(pred, ks[i]);
      p += m.precision;
      r += m.recall;
      f += m.f1;
    }
    report.per_k[i] = KMetrics{p / n, r / n, f / n};
  }
  double f_sum = 0;
  for (const auto &m : report.per_k) f_sum += m.f1;
  report.avg_f1 = f_sum / static_cast<double>(report.per_k.size());
  return report;
}

std::pair<std::vector<VulnerabilityRecord>, std::vector<VulnerabilityRecord>>
zero_shot_split(const std::vector<VulnerabilityRecord> &test,
                const std::set<std::string> &training_labels) {
  std::vector<VulnerabilityRecord> zero_shot;
  std::vector<VulnerabilityRecord> full_shot;
  for (const auto &vuln : test) {
    bool any_seen = false;
    for (const auto &label : vuln.labels) {
      if (training_labels.count(label)) {
        any_seen = true;
        break;
      }
    }
    (any_seen ? full_shot : zero_shot).push_back(vuln);
  }
  return {std::move(zero_shot), std::move(full_shot)};
}

std::vector<double>
screening_recall_curve(const std::vector<PredictionRecord> &screened,
                       const std::vector<size_t> &ks) {
  if (screened.empty())
    throw ValidationError("recall curve over no records");
  std::vector<double> recalls;
  recalls.reserve(ks.size());
  for (size_t k : ks) {
    double sum = 0;
    for (const auto &pred : screened) {
      sum += metrics_at_k(pred, k).recall;
    }
    recalls.push_back(sum / static_cast<double>(screened.size()));
  }
  return recalls;
}

namespace {

nlohmann::json report_json_value(const MetricsReport &report) {
  nlohmann::json per_k = nlohmann::json::array();
  for (size_t i = 0; i < report.ks.size(); ++i) {
    per_k.push_back({{"k", report.ks[i]},
                     {"precision", report.per_k[i].precision},
                     {"recall", report.per_k[i].recall},
                     {"f1", report.per_k[i].f1}});
  }
  nlohmann::json j = {{"avg_f1", report.avg_f1},
                      {"count", report.record_count},
                      {"per_k", per_k}};
  for (const auto &sub : report.sub_reports) {
    j[sub.first] = report_json_value(sub.second);
  }
  return j;
}

void render_report_lines(const MetricsReport &report, const std::string &name,
                         std::ostringstream &out) {
  if (!name.empty())
    out << name << " (" << report.record_count << " vulnerabilities)\n";
  else
    out << report.record_count << " vulnerabilities\n";
  char buf[128];
  for (size_t i = 0; i < report.ks.size(); ++i) {
    std::snprintf(buf, sizeof(buf),
                  "  top%-2zu precision %.4f  recall %.4f  f1 %.4f\n",
                  report.ks[i], report.per_k[i].precision,
                  report.per_k[i].recall, report.per_k[i].f1);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "  avg f1 %.4f\n", report.avg_f1);
  out << buf;
  for (const auto &sub : report.sub_reports) {
    render_report_lines(sub.second, sub.first, out);
  }
}

} // namespace

std::string report_to_json(const MetricsReport &report) {
  return report_json_value(report).dump(2);
}

std::string render_report_text(const MetricsReport &report) {
  std::ostringstream out;
  render_report_lines(report, "", out);
  return out.str();
}

void save_report_json(const MetricsReport &report, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open report file for write: " + path);
  out << report_to_json(report) << "\n";
  if (!out) throw ValidationError("write failed: " + path);
}

void save_recall_curve_csv(const std::vector<size_t> &ks,
                           const std::vector<double> &recalls,
                           const std::string &path) {
  if (ks.size() != recalls.size())
    throw ValidationError("recall curve length mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open curve file for write: " + path);
  out << "k,recall\n";
  char buf[64];
  for (size_t i = 0; i < ks.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f\n", ks[i], recalls[i]);
    out << buf;
  }
  if (!out) throw ValidationError("write failed: " + path);
}

} // namespace vulnlink
