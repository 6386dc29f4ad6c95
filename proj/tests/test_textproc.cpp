// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tests_common.hpp"
#include "vulnlink/common.hpp"
#include "vulnlink/corpus.hpp"
#include "vulnlink/textproc.hpp"

#include <algorithm>
#include <map>

using namespace vulnlink;
using namespace vulnlink::testing;

TEST_CASE("pos_filter keeps nouns and adjectives, drops verbs and closed-class words") {
  CHECK(pos_filter({"Jenkins", "stores", "passwords", "unencrypted"}) ==
        std::vector<std::string>{"jenkins", "passwords", "unencrypted"});
  CHECK(pos_filter({"the", "and"}).empty());
  // Unknown tokens default to nouns so domain terms survive.
  CHECK(pos_filter({"mailcommander"}) ==
        std::vector<std::string>{"mailcommander"});
}

TEST_CASE("pos_filter drops inflections of known verb stems and adverbs") {
  CHECK(pos_filter({"allows", "allowed", "allowing", "allow"}).empty());
  CHECK(pos_filter({"remotely", "quickly"}).empty());
  CHECK(pos_filter({"executes", "execution"}) ==
        std::vector<std::string>{"execution"});
}

TEST_CASE("pos_filter output is a subsequence of the lowercased input") {
  const std::vector<std::string> input = {
      "A",      "sandbox", "bypass",  "vulnerability", "in",   "Jenkins",
      "allows", "remote",  "attackers", "to",          "invoke", "scripts"};
  const std::vector<std::string> kept = pos_filter(input);
  size_t cursor = 0;
  for (const auto &tok : kept) {
    bool found = false;
    for (; cursor < input.size(); ++cursor) {
      std::string low = input[cursor];
      for (char &c : low)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (low == tok) {
        found = true;
        ++cursor;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("tag_token retains the documented tag set") {
  CHECK(is_retained_tag(tag_token("plugin")));
  CHECK(is_retained_tag(tag_token("plugins")));
  CHECK(is_retained_tag(tag_token("Jenkins")));
  CHECK(is_retained_tag(tag_token("unencrypted")));
  CHECK_FALSE(is_retained_tag(tag_token("the")));
  CHECK_FALSE(is_retained_tag(tag_token("stores")));
  CHECK_FALSE(is_retained_tag(tag_token("quickly")));
  CHECK_FALSE(is_retained_tag(tag_token("42")));
}

TEST_CASE("build_entity_vocabulary unions name tokens across the catalog") {
  LibraryRecord mailer;
  mailer.name = "org.jenkins-ci.plugins:mailer";
  mailer.description = "does not matter";
  EntityVocabulary vocab = build_entity_vocabulary({mailer});
  CHECK(vocab.tokens == std::unordered_set<std::string>{"org", "jenkins", "ci",
                                                        "plugins", "mailer"});
  CHECK(vocab.source_count == 1);

  LibraryRecord other;
  other.name = "a.b:c";
  other.description = "";
  LibraryRecord again;
  again.name = "a.b:d";
  again.description = "";
  vocab = build_entity_vocabulary({other, again});
  CHECK(vocab.tokens == std::unordered_set<std::string>{"a", "b", "c", "d"});
  CHECK(vocab.source_count == 2);
}

TEST_CASE("vocabulary persists and reloads bit-exactly") {
  FixtureCorpus corpus = make_fixture_corpus();
  const EntityVocabulary vocab = build_entity_vocabulary(corpus.libraries);
  TempDir tmp;
  const std::string path = tmp.file("vocab.txt");
  save_vocabulary(vocab, path);
  const std::string first = read_file(path);
  const EntityVocabulary loaded = load_vocabulary(path);
  CHECK(loaded.tokens == vocab.tokens);
  CHECK(loaded.source_count == vocab.source_count);
  save_vocabulary(loaded, path);
  CHECK(read_file(path) == first);
}

TEST_CASE("recognize_entities flags vocabulary members") {
  EntityVocabulary vocab;
  vocab.tokens = {"jenkins"};
  CHECK(recognize_entities({"jenkins", "passwords"}, vocab) ==
        std::vector<bool>{true, false});
  CHECK(recognize_entities({}, vocab).empty());

  FixtureCorpus mail = make_mail_plugin_corpus();
  const EntityVocabulary mail_vocab = build_entity_vocabulary(mail.libraries);
  // "mail" is a name token (job-direct-mail); "commander" is not, because
  // "mailcommander" tokenizes as a single run. Membership is exact.
  CHECK(recognize_entities({"mail", "commander"}, mail_vocab) ==
        std::vector<bool>{true, false});
  CHECK(recognize_entities({"mailcommander"}, mail_vocab) ==
        std::vector<bool>{true});
}

TEST_CASE("recognize_entities is monotone in the vocabulary") {
  EntityVocabulary small;
  small.tokens = {"mail"};
  EntityVocabulary large;
  large.tokens = {"mail", "commander", "jenkins"};
  const std::vector<std::string> terms = {"mail", "commander", "config"};
  const std::vector<bool> a = recognize_entities(terms, small);
  const std::vector<bool> b = recognize_entities(terms, large);
  for (size_t i = 0; i < terms.size(); ++i) {
    if (a[i]) CHECK(b[i]);
  }
}

TEST_CASE("build_weighted_query amplifies entity terms by entity_weight") {
  EntityVocabulary vocab;
  vocab.tokens = {"jenkins"};
  QueryOptions opts;
  opts.entity_weight = 4.0;
  WeightedQuery q = build_weighted_query("jenkins jenkins password", vocab, opts);
  std::map<std::string, double> weights;
  for (const auto &t : q.terms) weights[t.term] = t.weight;
  CHECK(weights == std::map<std::string, double>{{"jenkins", 8.0},
                                                 {"password", 1.0}});

  opts.entity_weight = 1.0;
  q = build_weighted_query("jenkins jenkins password", vocab, opts);
  weights.clear();
  for (const auto &t : q.terms) weights[t.term] = t.weight;
  CHECK(weights == std::map<std::string, double>{{"jenkins", 2.0},
                                                 {"password", 1.0}});
}

TEST_CASE("build_weighted_query weight equals frequency times amplification") {
  FixtureCorpus corpus = make_fixture_corpus();
  const EntityVocabulary vocab = build_entity_vocabulary(corpus.libraries);
  QueryOptions opts;
  opts.entity_weight = 4.0;
  for (size_t i = 0; i < 6; ++i) {
    const WeightedQuery q =
        build_weighted_query(corpus.vulns[i].description, vocab, opts);
    CHECK(!q.empty());
    for (const auto &t : q.terms) {
      CHECK(t.frequency > 0);
      const double expected =
          static_cast<double>(t.frequency) * (t.entity ? 4.0 : 1.0);
      CHECK(t.weight == expected);
    }
  }
}

TEST_CASE("build_weighted_query terms are unique with aggregated frequencies") {
  EntityVocabulary vocab;
  const WeightedQuery q = build_weighted_query(
      "parser parser parser overflow overflow", vocab, QueryOptions{});
  std::set<std::string> seen;
  for (const auto &t : q.terms) CHECK(seen.insert(t.term).second);
  REQUIRE(q.terms.size() == 2);
  CHECK(q.terms[0].term == "parser");
  CHECK(q.terms[0].frequency == 3);
  CHECK(q.terms[1].frequency == 2);
}

TEST_CASE("entity_weight 1 reproduces the plain frequency histogram") {
  FixtureCorpus corpus = make_fixture_corpus();
  const EntityVocabulary vocab = build_entity_vocabulary(corpus.libraries);
  QueryOptions opts;
  opts.entity_weight = 1.0;
  const std::string &desc = corpus.vulns[0].description;
  const WeightedQuery q = build_weighted_query(desc, vocab, opts);

  // Frequency histogram of the POS-filtered, stopword-removed text.
  const StopwordSet stop = default_stopwords();
  std::map<std::string, uint64_t> hist;
  for (const auto &tok :
       pos_filter(split_tokens_preserving_case(expand_apostrophes(desc)))) {
    if (stop.count(tok)) continue;
    hist[tok]++;
  }
  REQUIRE(q.terms.size() == hist.size());
  for (const auto &t : q.terms) {
    CHECK(hist.at(t.term) == t.frequency);
    CHECK(t.weight == double(t.frequency));
  }
}

TEST_CASE("entity-only mode drops terms outside the vocabulary") {
  EntityVocabulary vocab;
  vocab.tokens = {"jenkins"};
  QueryOptions opts;
  opts.entity_only = true;
  const WeightedQuery q =
      build_weighted_query("jenkins password leak", vocab, opts);
  REQUIRE(q.terms.size() == 1);
  CHECK(q.terms[0].term == "jenkins");
  CHECK(q.terms[0].weight == 1.0);
}

TEST_CASE("queries against the real advisory text flag catalog entities") {
  FixtureCorpus mail = make_mail_plugin_corpus();
  const EntityVocabulary vocab = build_entity_vocabulary(mail.libraries);
  const WeightedQuery q = build_weighted_query(mail.vulns[0].description,
                                               vocab, QueryOptions{});
  std::map<std::string, bool> flags;
  for (const auto &t : q.terms) flags[t.term] = t.entity;
  REQUIRE(flags.count("jenkins"));
  REQUIRE(flags.count("mail"));
  CHECK(flags.at("jenkins"));
  CHECK(flags.at("mail"));
  REQUIRE(flags.count("passwords"));
  CHECK_FALSE(flags.at("passwords"));
}

TEST_CASE("a description with no retained terms yields an empty query") {
  EntityVocabulary vocab;
  CHECK(build_weighted_query("the is have", vocab, QueryOptions{}).empty());
  CHECK(build_weighted_query("", vocab, QueryOptions{}).empty());
  CHECK_FALSE(build_weighted_query("overflow", vocab, QueryOptions{}).empty());
}

TEST_CASE("entity_weight below one is rejected") {
  EntityVocabulary vocab;
  QueryOptions opts;
  opts.entity_weight = 0.5;
  CHECK_THROWS_AS(build_weighted_query("jenkins", vocab, opts),
                  ValidationError);
}
