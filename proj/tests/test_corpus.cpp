// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tests_common.hpp"
#include "vulnlink/common.hpp"
#include "vulnlink/corpus.hpp"
#include "vulnlink/stopwords.hpp"

#include <algorithm>
#include <cctype>
#include <set>

using namespace vulnlink;
using namespace vulnlink::testing;

TEST_CASE("clean_text applies the four cleaning rules in order") {
  CHECK(clean_text("The Jenkins Mail Commander Plugin") ==
        std::vector<std::string>{"jenkins", "mail", "commander", "plugin"});
  // "isn't" expands to "is not"; both halves are stopwords.
  CHECK(clean_text("isn't config.xml") ==
        std::vector<std::string>{"config", "xml"});
  CHECK(clean_text("").empty());
}

TEST_CASE("clean_text contraction table") {
  CHECK(clean_text("attacker's payload") ==
        std::vector<std::string>{"attacker", "payload"});
  CHECK(clean_text("they're vulnerable") ==
        std::vector<std::string>{"vulnerable"});
  CHECK(clean_text("it'll crash; we've seen it") ==
        std::vector<std::string>{"crash", "seen"});
}

TEST_CASE("clean_text output tokens are lowercase alphanumeric non-stopwords") {
  const StopwordSet stop = default_stopwords();
  const std::string raw =
      "Jenkins 2.64 and EARLIER allows-attackers to invoke config.xml v1.0.0!";
  for (const auto &tok : clean_text(raw)) {
    CHECK(!tok.empty());
    for (char c : tok) {
      const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
      CHECK(ok);
    }
    CHECK(stop.count(tok) == 0);
  }
}

TEST_CASE("clean_text is idempotent on its own output") {
  const std::vector<std::string> samples = {
      "Jenkins Mail Commander Plugin stores passwords unencrypted",
      "A sandbox bypass vulnerability in Pipeline: Groovy Plugin 2.64",
      "doesn't shouldn't won't can't",
  };
  for (const auto &raw : samples) {
    const std::vector<std::string> once = clean_text(raw);
    std::string joined;
    for (const auto &t : once) {
      if (!joined.empty()) joined += " ";
      joined += t;
    }
    CHECK(clean_text(joined) == once);
  }
}

TEST_CASE("tokenize_name treats coordinate separators as splitters") {
  CHECK(tokenize_name("a.b:c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize_name("org.jenkins-ci.plugins:mailcommander") ==
        std::vector<std::string>{"org", "jenkins", "ci", "plugins",
                                 "mailcommander"});
}

TEST_CASE("build_library_document concatenates name and description tokens") {
  LibraryRecord lib;
  lib.name = "org.jenkins-ci.plugins:mailcommander";
  lib.description = "";
  LibraryDocument doc = build_library_document(lib);
  CHECK(doc.tokens == std::vector<std::string>{"org", "jenkins", "ci",
                                               "plugins", "mailcommander"});
  CHECK(doc.length() == 5);
  CHECK(doc.name_token_count == 5);
  CHECK(doc.description_less);

  lib.name = "a.b:c";
  lib.description = "Groovy";
  doc = build_library_document(lib);
  CHECK(doc.tokens == std::vector<std::string>{"a", "b", "c", "groovy"});
  CHECK_FALSE(doc.description_less);

  lib.name = "x.y:z";
  lib.description = "The the the";
  doc = build_library_document(lib);
  CHECK(doc.tokens == std::vector<std::string>{"x", "y", "z"});
}

TEST_CASE("build_library_document never yields an empty document") {
  FixtureCorpus corpus = make_fixture_corpus();
  for (const auto &lib : corpus.libraries) {
    CHECK(build_library_document(lib).length() > 0);
  }
}

TEST_CASE("validate_library_name requires a group:artifact separator") {
  CHECK_NOTHROW(validate_library_name("org.example:thing"));
  CHECK_THROWS_AS(validate_library_name("nogroupseparator"), ValidationError);
  CHECK_THROWS_AS(validate_library_name("a:b:c"), ValidationError);
  CHECK_THROWS_AS(validate_library_name(""), ValidationError);
}

TEST_CASE("load_vulnerabilities reads JSON Lines and arrays") {
  TempDir tmp;
  const std::string jl = tmp.file("v.jsonl");
  write_file(jl, "{\"id\":\"CVE-2020-2318\",\"description\":\"Jenkins Mail "
                 "Commander Plugin ...\",\"labels\":[\"org.jenkins-ci."
                 "plugins:mailcommander\"]}\n");
  auto recs = load_vulnerabilities(jl);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].id == "CVE-2020-2318");
  CHECK(recs[0].labels.size() == 1);
  CHECK(recs[0].labeled());

  const std::string arr = tmp.file("v.json");
  write_file(arr, "[]");
  CHECK(load_vulnerabilities(arr).empty());

  write_file(arr, "[{\"id\":\"CVE-1\",\"description\":\"x\",\"labels\":[]},"
                  "{\"id\":\"CVE-1\",\"description\":\"y\",\"labels\":[]}]");
  CHECK_THROWS_AS(load_vulnerabilities(arr), ValidationError);
}

TEST_CASE("load_vulnerabilities rejects malformed and incomplete records") {
  TempDir tmp;
  const std::string path = tmp.file("bad.jsonl");
  write_file(path, "{not json\n");
  CHECK_THROWS_AS(load_vulnerabilities(path), ParseError);
  write_file(path, "{\"description\":\"no id\",\"labels\":[]}\n");
  CHECK_THROWS_AS(load_vulnerabilities(path), ValidationError);
  CHECK_THROWS_AS(load_vulnerabilities(tmp.file("absent.jsonl")), ParseError);
}

TEST_CASE("load_libraries keeps description-less records and enforces names") {
  TempDir tmp;
  const std::string path = tmp.file("libs.jsonl");
  write_file(path,
             "{\"name\":\"org.jenkins-ci.plugins:mailcommander\","
             "\"description\":\"This plug-in provides function that read a "
             "mail subject as a CLI Command\"}\n"
             "{\"name\":\"org.example:bare\",\"description\":\"\"}\n");
  auto libs = load_libraries(path);
  REQUIRE(libs.size() == 2);
  CHECK(libs[0].has_description());
  CHECK_FALSE(libs[1].has_description());

  write_file(path, "{\"name\":\"nogroupseparator\",\"description\":\"x\"}\n");
  CHECK_THROWS_AS(load_libraries(path), ValidationError);

  write_file(path, "{\"name\":\"a.b:c\",\"description\":\"x\"}\n"
                   "{\"name\":\"a.b:c\",\"description\":\"y\"}\n");
  CHECK_THROWS_AS(load_libraries(path), ValidationError);
}

TEST_CASE("partition_dataset honors exact ratios and floor-remainder policy") {
  std::vector<VulnerabilityRecord> vulns;
  for (int i = 0; i < 5; ++i) {
    VulnerabilityRecord v;
    v.id = "CVE-0-" + std::to_string(i);
    v.description = "d";
    v.labels = {"g:a"};
    vulns.push_back(v);
  }
  PartitionOptions opts;
  opts.seed = 11;
  DatasetSplit split = partition_dataset(vulns, opts);
  CHECK(split.training.size() == 3);
  CHECK(split.validation.size() == 1);
  CHECK(split.testing.size() == 1);
}

TEST_CASE("partition_dataset remainder goes to training first then validation") {
  std::vector<VulnerabilityRecord> vulns;
  for (int i = 0; i < 7; ++i) {
    VulnerabilityRecord v;
    v.id = "CVE-0-" + std::to_string(i);
    v.description = "d";
    v.labels = {"g:a"};
    vulns.push_back(v);
  }
  // floor: 4/1/1, remainder 1 -> training.
  PartitionOptions opts;
  DatasetSplit split = partition_dataset(vulns, opts);
  CHECK(split.training.size() == 5);
  CHECK(split.validation.size() == 1);
  CHECK(split.testing.size() == 1);
}

TEST_CASE("partition_dataset explicit sizes reproduce fixed historical splits") {
  std::vector<VulnerabilityRecord> vulns;
  for (int i = 0; i < 2789; ++i) {
    VulnerabilityRecord v;
    v.id = "CVE-1-" + std::to_string(i);
    v.description = "d";
    v.labels = {"g:a"};
    vulns.push_back(v);
  }
  PartitionOptions opts;
  opts.seed = 5;
  opts.explicit_sizes = {{1668, 556, 565}};
  DatasetSplit split = partition_dataset(vulns, opts);
  CHECK(split.training.size() == 1668);
  CHECK(split.validation.size() == 556);
  CHECK(split.testing.size() == 565);
}

TEST_CASE("partition_dataset is a deterministic disjoint cover") {
  FixtureCorpus corpus = make_fixture_corpus();
  PartitionOptions opts;
  opts.seed = 9;
  DatasetSplit a = partition_dataset(corpus.vulns, opts);
  DatasetSplit b = partition_dataset(corpus.vulns, opts);

  auto ids = [](const std::vector<VulnerabilityRecord> &v) {
    std::set<std::string> s;
    for (const auto &r : v) s.insert(r.id);
    return s;
  };
  CHECK(ids(a.training) == ids(b.training));
  CHECK(ids(a.validation) == ids(b.validation));
  CHECK(ids(a.testing) == ids(b.testing));

  std::set<std::string> all = ids(a.training);
  const std::set<std::string> val = ids(a.validation);
  const std::set<std::string> test = ids(a.testing);
  for (const auto &id : val) CHECK(all.insert(id).second);
  for (const auto &id : test) CHECK(all.insert(id).second);
  CHECK(all.size() == corpus.vulns.size());

  // A different seed shuffles differently for a corpus this size.
  PartitionOptions other;
  other.seed = 10;
  CHECK(ids(partition_dataset(corpus.vulns, other).testing) != test);
}

TEST_CASE("partition_dataset rejects unlabeled records") {
  std::vector<VulnerabilityRecord> vulns(3);
  for (int i = 0; i < 3; ++i) {
    vulns[i].id = "CVE-2-" + std::to_string(i);
    vulns[i].description = "d";
    vulns[i].labels = {"g:a"};
  }
  vulns[1].labels.clear();
  CHECK_THROWS_AS(partition_dataset(vulns, PartitionOptions{}),
                  ValidationError);
}

TEST_CASE("split manifest round trip restores the same split") {
  FixtureCorpus corpus = make_fixture_corpus();
  PartitionOptions opts;
  opts.seed = 4;
  DatasetSplit split = partition_dataset(corpus.vulns, opts);

  TempDir tmp;
  const std::string path = tmp.file("split.json");
  save_split_manifest(make_manifest(split, opts), path);
  const SplitManifest manifest = load_split_manifest(path);
  CHECK(manifest.seed == 4);
  DatasetSplit restored = apply_manifest(corpus.vulns, manifest);
  REQUIRE(restored.training.size() == split.training.size());
  for (size_t i = 0; i < split.training.size(); ++i)
    CHECK(restored.training[i].id == split.training[i].id);
  REQUIRE(restored.testing.size() == split.testing.size());
  for (size_t i = 0; i < split.testing.size(); ++i)
    CHECK(restored.testing[i].id == split.testing[i].id);
}

TEST_CASE("apply_manifest rejects ids missing from the corpus") {
  FixtureCorpus corpus = make_fixture_corpus();
  SplitManifest manifest;
  manifest.training = {"CVE-2099-1000", "CVE-9999-0000"};
  CHECK_THROWS_AS(apply_manifest(corpus.vulns, manifest), ValidationError);
}

TEST_CASE("stopword list loads from its versioned resource") {
  const StopwordSet stop = default_stopwords();
  CHECK(stop.count("the") == 1);
  CHECK(stop.count("is") == 1);
  CHECK(stop.count("have") == 1);
  CHECK(stop.count("jenkins") == 0);
  CHECK(stop.size() > 100);
}

TEST_CASE("compiled-in stopwords match the bundled data file") {
  const StopwordSet from_file =
      load_stopwords(std::string(VULNLINK_DATA_DIR) + "/stopwords.v1.txt");
  CHECK(from_file == default_stopwords());
}
