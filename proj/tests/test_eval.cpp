// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tests_common.hpp"
#include "vulnlink/common.hpp"
#include "vulnlink/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

using namespace vulnlink;
using namespace vulnlink::testing;

namespace {

PredictionRecord make_pred(std::vector<std::string> ranked,
                           std::set<std::string> affected) {
  PredictionRecord p;
  p.vuln_id = "CVE-x";
  for (size_t i = 0; i < ranked.size(); ++i)
    p.ranked.push_back({ranked[i], 1.0 - 0.1 * static_cast<double>(i)});
  p.affected = std::move(affected);
  return p;
}

} // namespace

TEST_CASE("metrics_at_k worked examples") {
  KMetrics m = metrics_at_k(make_pred({"A"}, {"A", "B"}), 1);
  CHECK(m.precision == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Precision denominator is min(k, |affected|), not k.
  m = metrics_at_k(make_pred({"B", "C", "A"}, {"A"}), 3);
  CHECK(m.precision == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(1.0).epsilon(1e-12));

  m = metrics_at_k(make_pred({"A", "D"}, {"A", "B", "C"}), 2);
  CHECK(m.precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("metrics_at_k edge cases") {
  // Empty intersection: F1 defined as 0.
  const KMetrics zero = metrics_at_k(make_pred({"X", "Y"}, {"A"}), 2);
  CHECK(zero.precision == 0.0);
  CHECK(zero.recall == 0.0);
  CHECK(zero.f1 == 0.0);

  // Ranked list shorter than k.
  const KMetrics shallow = metrics_at_k(make_pred({"A"}, {"A"}), 5);
  CHECK(shallow.recall == doctest::Approx(1.0).epsilon(1e-12));

  // Empty ranked list is a miss, not an error.
  const KMetrics empty = metrics_at_k(make_pred({}, {"A"}), 1);
  CHECK(empty.f1 == 0.0);

  CHECK_THROWS_AS(metrics_at_k(make_pred({"A"}, {}), 1), ValidationError);
  CHECK_THROWS_AS(metrics_at_k(make_pred({"A"}, {"A"}), 0), ValidationError);
  // Duplicate coordinates surface upstream bugs.
  CHECK_THROWS_AS(metrics_at_k(make_pred({"A", "A"}, {"A"}), 1),
                  ValidationError);
}

TEST_CASE("metrics_at_k agrees with the brute-force oracle") {
  Rng rng(555);
  for (int round = 0; round < 200; ++round) {
    std::vector<std::string> pool;
    for (int i = 0; i < 12; ++i) pool.push_back("g:l" + std::to_string(i));
    rng.shuffle(pool);
    const size_t ranked_n = rng.next_below(9);
    std::vector<std::string> ranked(pool.begin(), pool.begin() + ranked_n);
    std::set<std::string> affected;
    const size_t affected_n = 1 + rng.next_below(4);
    for (size_t i = 0; i < affected_n; ++i)
      affected.insert("g:l" + std::to_string(rng.next_below(12)));
    const size_t k = 1 + rng.next_below(6);

    const KMetrics fast = metrics_at_k(make_pred(ranked, affected), k);
    const OracleMetrics slow = oracle_metrics(ranked, affected, k);
    CHECK(fast.precision == slow.precision);
    CHECK(fast.recall == slow.recall);
    CHECK(fast.f1 == slow.f1);
  }
}

TEST_CASE("recall is monotone in k") {
  Rng rng(777);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::string> ranked;
    for (int i = 0; i < 10; ++i) ranked.push_back("g:l" + std::to_string(i));
    rng.shuffle(ranked);
    std::set<std::string> affected = {"g:l3", "g:l7"};
    const PredictionRecord pred = make_pred(ranked, affected);
    double prev = 0;
    for (size_t k = 1; k <= 10; ++k) {
      const KMetrics m = metrics_at_k(pred, k);
      CHECK(m.recall >= prev);
      CHECK(m.precision >= 0.0);
      CHECK(m.precision <= 1.0);
      prev = m.recall;
    }
  }
}

TEST_CASE("macro_report averages per-vulnerability metrics") {
  std::vector<PredictionRecord> preds = {
      make_pred({"A"}, {"A"}),
      make_pred({"B"}, {"A"}),
  };
  const MetricsReport report = macro_report(preds, {1});
  REQUIRE(report.at_k(1) != nullptr);
  CHECK(report.at_k(1)->f1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.record_count == 2);

  // Singleton report equals the record's own metrics.
  const MetricsReport single = macro_report({make_pred({"A"}, {"A", "B"})},
                                            {1, 2, 3});
  CHECK(single.at_k(1)->f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Average F1 is the arithmetic mean across the requested ks.
  const double expected_avg = (single.at_k(1)->f1 + single.at_k(2)->f1 +
                               single.at_k(3)->f1) / 3.0;
  CHECK(single.avg_f1 == doctest::Approx(expected_avg).epsilon(1e-12));

  CHECK_THROWS_AS(macro_report({}, {1}), ValidationError);
  CHECK_THROWS_AS(macro_report(preds, {}), ValidationError);
}

TEST_CASE("macro_report is permutation-invariant") {
  std::vector<PredictionRecord> preds = {
      make_pred({"A", "B"}, {"A"}),
      make_pred({"C"}, {"C", "D"}),
      make_pred({"X"}, {"Y"}),
      make_pred({"D", "E", "F"}, {"F"}),
  };
  const MetricsReport fwd = macro_report(preds, {1, 2, 3});
  std::reverse(preds.begin(), preds.end());
  const MetricsReport rev = macro_report(preds, {1, 2, 3});
  for (size_t k : {1, 2, 3}) {
    CHECK(fwd.at_k(k)->precision == rev.at_k(k)->precision);
    CHECK(fwd.at_k(k)->recall == rev.at_k(k)->recall);
    CHECK(fwd.at_k(k)->f1 == rev.at_k(k)->f1);
  }
  CHECK(fwd.avg_f1 == rev.avg_f1);
}

TEST_CASE("zero_shot_split partitions by the unseen-label rule") {
  VulnerabilityRecord seen_vuln, unseen_vuln, mixed_vuln;
  seen_vuln.id = "CVE-1";
  seen_vuln.labels = {"g:a"};
  unseen_vuln.id = "CVE-2";
  unseen_vuln.labels = {"g:c"};
  mixed_vuln.id = "CVE-3";
  mixed_vuln.labels = {"g:a", "g:c"};
  const std::set<std::string> training_labels = {"g:a", "g:b"};

  const auto [zero, full] = zero_shot_split(
      {seen_vuln, unseen_vuln, mixed_vuln}, training_labels);
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].id == "CVE-2");
  REQUIRE(full.size() == 2);
  CHECK(full[0].id == "CVE-1");
  CHECK(full[1].id == "CVE-3"); // one seen label makes it full-shot

  const auto [z2, f2] = zero_shot_split({}, training_labels);
  CHECK(z2.empty());
  CHECK(f2.empty());
}

TEST_CASE("zero_shot_split is total and disjoint on the fixture") {
  FixtureCorpus corpus = make_fixture_corpus();
  PartitionOptions opts;
  opts.seed = 7;
  const DatasetSplit split = partition_dataset(corpus.vulns, opts);
  const auto [zero, full] =
      zero_shot_split(split.testing, split.training_label_set());
  CHECK(zero.size() + full.size() == split.testing.size());
  std::set<std::string> ids;
  for (const auto &v : zero) CHECK(ids.insert(v.id).second);
  for (const auto &v : full) CHECK(ids.insert(v.id).second);
}

TEST_CASE("screening_recall_curve worked examples") {
  PredictionRecord pred = make_pred({"g:b", "g:a"}, {"g:a"});
  const std::vector<double> curve =
      screening_recall_curve({pred}, {1, 2, 3});
  REQUIRE(curve.size() == 3);
  CHECK(curve[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(curve[1] == doctest::Approx(1.0).epsilon(1e-12));
  // k beyond the list saturates at the containment fraction.
  CHECK(curve[2] == doctest::Approx(1.0).epsilon(1e-12));

  // Monotone non-decreasing for sorted ks.
  Rng rng(31);
  std::vector<PredictionRecord> preds;
  for (int i = 0; i < 10; ++i) {
    std::vector<std::string> ranked;
    for (int j = 0; j < 8; ++j) ranked.push_back("g:l" + std::to_string(j));
    rng.shuffle(ranked);
    preds.push_back(make_pred(ranked, {"g:l2", "g:l5"}));
  }
  const std::vector<double> big =
      screening_recall_curve(preds, {1, 2, 4, 8, 16});
  for (size_t i = 1; i < big.size(); ++i) CHECK(big[i] >= big[i - 1]);
}

TEST_CASE("report JSON carries per-k values, average, and sub-reports") {
  std::vector<PredictionRecord> preds = {make_pred({"A"}, {"A"}),
                                         make_pred({"B"}, {"A"})};
  MetricsReport report = macro_report(preds, {1, 2, 3});
  MetricsReport zero_part = macro_report({preds[0]}, {1, 2, 3});
  report.sub_reports.push_back({"zero_shot", zero_part});

  const nlohmann::json j = nlohmann::json::parse(report_to_json(report));
  CHECK(j["count"] == 2);
  CHECK(j["avg_f1"].get<double>() == doctest::Approx(report.avg_f1));
  REQUIRE(j["per_k"].is_array());
  REQUIRE(j["per_k"].size() == 3);
  CHECK(j["per_k"][0]["k"] == 1);
  CHECK(j["per_k"][0]["f1"].get<double>() == doctest::Approx(0.5));
  REQUIRE(j.contains("zero_shot"));
  CHECK(j["zero_shot"]["count"] == 1);

  const std::string text = render_report_text(report);
  CHECK(text.find("top1") != std::string::npos);
  CHECK(text.find("avg f1") != std::string::npos);
  CHECK(text.find("zero_shot") != std::string::npos);
}

TEST_CASE("recall curve CSV is written in ranked order") {
  TempDir tmp;
  const std::string path = tmp.file("curve.csv");
  save_recall_curve_csv({1, 2}, {0.25, 0.75}, path);
  const std::string body = read_file(path);
  CHECK(body.find("k,recall") != std::string::npos);
  CHECK(body.find("1,0.250000") != std::string::npos);
  CHECK(body.find("2,0.750000") != std::string::npos);
}
