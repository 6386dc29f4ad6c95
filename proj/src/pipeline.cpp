// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#include "vulnlink/pipeline.hpp"

#include "vulnlink/common.hpp"
#include "vulnlink/external_scorer.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

namespace vulnlink {

namespace fs = std::filesystem;

namespace {

std::string join_path(const std::string &dir, const std::string &name) {
  return (fs::path(dir) / name).string();
}

std::string resolve(const std::string &explicit_path, const std::string &dir,
                    const std::string &default_name) {
  return explicit_path.empty() ? join_path(dir, default_name) : explicit_path;
}

void require_file(const std::string &path, const std::string &what) {
  if (path.empty())
    throw ConfigError(what + " path is not configured");
  if (!fs::exists(path))
    throw ParseError(what + " not found: " + path);
}

std::string read_file_bytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_bytes(const std::string &path, const std::string &bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open file for write: " + path);
  out << bytes;
  if (!out) throw ValidationError("write failed: " + path);
}

double ms_between(std::chrono::steady_clock::time_point a,
                  std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

} // namespace

std::string PathsConfig::documents_path() const {
  return resolve(documents, out_dir, "documents.jsonl");
}
std::string PathsConfig::vocabulary_path() const {
  return resolve(vocabulary, out_dir, "vocabulary.txt");
}
std::string PathsConfig::index_path() const {
  return resolve(index, out_dir, "index.bin");
}
std::string PathsConfig::model_path() const {
  return resolve(model, out_dir, "model.json");
}
std::string PathsConfig::split_manifest_path() const {
  return resolve(split_manifest, out_dir, "split_manifest.json");
}
std::string PathsConfig::ingest_manifest_path() const {
  return join_path(out_dir, "ingest_manifest.json");
}
std::string PathsConfig::training_log_path() const {
  return join_path(out_dir, "training_log.json");
}
std::string PathsConfig::report_json_path() const {
  return join_path(out_dir, "report.json");
}
std::string PathsConfig::report_text_path() const {
  return join_path(out_dir, "report.txt");
}
std::string PathsConfig::sweep_csv_path() const {
  return join_path(out_dir, "sweep.csv");
}
std::string PathsConfig::sweep_json_path() const {
  return join_path(out_dir, "sweep.json");
}

ScreenerOptions ScreenerConfig::options() const {
  ScreenerOptions opts;
  opts.entity_weight = entity_weight;
  opts.candidate_num = candidate_num;
  opts.idf_smoothing = idf_smoothing;
  opts.entity_only = entity_only;
  return opts;
}

void PipelineConfig::apply_seed(uint64_t s) {
  seed = s;
  training.seed = s;
}

std::string config_to_json(const PipelineConfig &config) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["paths"] = {{"catalog", config.paths.catalog},
                {"vulnerabilities", config.paths.vulnerabilities},
                {"out_dir", config.paths.out_dir},
                {"documents", config.paths.documents},
                {"vocabulary", config.paths.vocabulary},
                {"stopwords", config.paths.stopwords},
                {"index", config.paths.index},
                {"model", config.paths.model},
                {"split_manifest", config.paths.split_manifest}};
  j["screener"] = {{"entity_weight", config.screener.entity_weight},
                   {"candidate_num", config.screener.candidate_num},
                   {"idf_smoothing", config.screener.idf_smoothing},
                   {"entity_only", config.screener.entity_only},
                   {"exclude_description_less",
                    config.screener.exclude_description_less}};
  j["training"] = {{"alpha", config.training.alpha},
                   {"batch_size", config.training.batch_size},
                   {"lr", config.training.lr},
                   {"epochs", config.training.epochs},
                   {"seed", config.training.seed},
                   {"feature_dim", config.training.feature_dim},
                   {"max_tokens_per_side", config.training.max_tokens_per_side},
                   {"hidden_dim", config.training.hidden_dim},
                   {"weight_decay", config.training.weight_decay}};
  j["split_ratio"] = config.split_ratio;
  if (config.split_sizes.has_value()) j["split_sizes"] = *config.split_sizes;
  j["seed"] = config.seed;
  return j.dump(2);
}

PipelineConfig config_from_json(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig config;
  try {
    if (j.contains("seed")) config.seed = j["seed"].get<uint64_t>();
    config.training.seed = config.seed;
    if (j.contains("paths")) {
      const auto &p = j["paths"];
      auto get = [&p](const char *key, std::string &field) {
        if (p.contains(key)) field = p[key].get<std::string>();
      };
      get("catalog", config.paths.catalog);
      get("vulnerabilities", config.paths.vulnerabilities);
      get("out_dir", config.paths.out_dir);
      get("documents", config.paths.documents);
      get("vocabulary", config.paths.vocabulary);
      get("stopwords", config.paths.stopwords);
      get("index", config.paths.index);
      get("model", config.paths.model);
      get("split_manifest", config.paths.split_manifest);
    }
    if (j.contains("screener")) {
      const auto &s = j["screener"];
      if (s.contains("entity_weight"))
        config.screener.entity_weight = s["entity_weight"].get<double>();
      if (s.contains("candidate_num"))
        config.screener.candidate_num = s["candidate_num"].get<size_t>();
      if (s.contains("idf_smoothing"))
        config.screener.idf_smoothing = s["idf_smoothing"].get<bool>();
      if (s.contains("entity_only"))
        config.screener.entity_only = s["entity_only"].get<bool>();
      if (s.contains("exclude_description_less"))
        config.screener.exclude_description_less =
            s["exclude_description_less"].get<bool>();
    }
    if (j.contains("training")) {
      const auto &t = j["training"];
      if (t.contains("alpha")) config.training.alpha = t["alpha"].get<double>();
      if (t.contains("batch_size"))
        config.training.batch_size = t["batch_size"].get<size_t>();
      if (t.contains("lr")) config.training.lr = t["lr"].get<double>();
      if (t.contains("epochs"))
        config.training.epochs = t["epochs"].get<size_t>();
      if (t.contains("seed"))
        config.training.seed = t["seed"].get<uint64_t>();
      if (t.contains("feature_dim"))
        config.training.feature_dim = t["feature_dim"].get<uint32_t>();
      if (t.contains("max_tokens_per_side"))
        config.training.max_tokens_per_side =
            t["max_tokens_per_side"].get<size_t>();
      if (t.contains("hidden_dim"))
        config.training.hidden_dim = t["hidden_dim"].get<uint32_t>();
      if (t.contains("weight_decay"))
        config.training.weight_decay = t["weight_decay"].get<double>();
    }
    if (j.contains("split_ratio")) {
      auto r = j["split_ratio"].get<std::vector<int>>();
      if (r.size() != 3)
        throw ConfigError("split_ratio must have three entries");
      std::copy(r.begin(), r.end(), config.split_ratio.begin());
    }
    if (j.contains("split_sizes")) {
      auto s = j["split_sizes"].get<std::vector<size_t>>();
      if (s.size() != 3)
        throw ConfigError("split_sizes must have three entries");
      std::array<size_t, 3> sizes{};
      std::copy(s.begin(), s.end(), sizes.begin());
      config.split_sizes = sizes;
    }
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("config field has wrong type: ") + e.what());
  }
  return config;
}

PipelineConfig load_config(const std::string &path) {
  require_file(path, "config file");
  return config_from_json(read_file_bytes(path));
}

void save_config(const PipelineConfig &config, const std::string &path) {
  write_file_bytes(path, config_to_json(config) + "\n");
}

void save_documents(const std::vector<LibraryDocument> &docs,
                    const std::string &path) {
  std::vector<const LibraryDocument *> sorted;
  sorted.reserve(docs.size());
  for (const auto &doc : docs) sorted.push_back(&doc);
  std::sort(sorted.begin(), sorted.end(),
            [](const LibraryDocument *a, const LibraryDocument *b) {
              return a->library < b->library;
            });
  std::ostringstream out;
  for (const LibraryDocument *doc : sorted) {
    nlohmann::json j = {{"library", doc->library},
                        {"tokens", doc->tokens},
                        {"name_token_count", doc->name_token_count},
                        {"description_less", doc->description_less}};
    out << j.dump() << "\n";
  }
  write_file_bytes(path, out.str());
}

std::vector<LibraryDocument> load_documents(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open documents file: " + path);
  std::vector<LibraryDocument> docs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      LibraryDocument doc;
      doc.library = j.at("library").get<std::string>();
      doc.tokens = j.at("tokens").get<std::vector<std::string>>();
      doc.name_token_count = j.at("name_token_count").get<size_t>();
      doc.description_less = j.at("description_less").get<bool>();
      docs.push_back(std::move(doc));
    } catch (const nlohmann::json::exception &e) {
      throw ParseError("bad document record at " + path + " line " +
                       std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

DirLock::DirLock(const std::string &dir) {
  fs::create_directories(dir);
  path_ = join_path(dir, ".vulnlink.lock");
  fd_ = open(path_.c_str(), O_CREAT | O_RDWR, 0644);
  if (fd_ < 0)
    throw ValidationError("cannot open lock file: " + path_);
  if (flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    close(fd_);
    fd_ = -1;
    throw ConfigError("output directory is locked by another process: " + dir);
  }
}

DirLock::~DirLock() {
  if (fd_ >= 0) {
    flock(fd_, LOCK_UN);
    close(fd_);
  }
}

Workspace load_workspace(const PipelineConfig &config, bool need_model) {
  Workspace ws;
  require_file(config.paths.documents_path(), "documents artifact");
  ws.documents = load_documents(config.paths.documents_path());
  require_file(config.paths.vocabulary_path(), "vocabulary artifact");
  ws.vocabulary = load_vocabulary(config.paths.vocabulary_path());
  require_file(config.paths.index_path(), "index artifact");
  ws.index = load_index(config.paths.index_path());
  if (config.paths.stopwords.empty()) {
    ws.stopwords = default_stopwords();
  } else {
    require_file(config.paths.stopwords, "stopword file");
    ws.stopwords = load_stopwords(config.paths.stopwords);
  }
  if (need_model) {
    require_file(config.paths.model_path(), "model artifact");
    ws.model = load_model(config.paths.model_path());
  }
  return ws;
}

namespace {

std::vector<VulnerabilityRecord>
load_vulns_checked(const PipelineConfig &config) {
  require_file(config.paths.vulnerabilities, "vulnerabilities file");
  return load_vulnerabilities(config.paths.vulnerabilities);
}

std::vector<LibraryRecord> load_catalog_checked(const PipelineConfig &config) {
  require_file(config.paths.catalog, "catalog");
  return load_libraries(config.paths.catalog);
}

SplitManifest load_manifest_checked(const PipelineConfig &config) {
  const std::string path = config.paths.split_manifest_path();
  if (!fs::exists(path))
    throw ParseError("split manifest not found (run ingest first): " + path);
  return load_split_manifest(path);
}

std::vector<VulnerabilityRecord>
labeled_only(const std::vector<VulnerabilityRecord> &vulns) {
  std::vector<VulnerabilityRecord> out;
  for (const auto &v : vulns) {
    if (v.labeled()) out.push_back(v);
  }
  return out;
}

} // namespace

void cmd_ingest(const PipelineConfig &config, std::ostream &out) {
  DirLock lock(config.paths.out_dir);
  const std::vector<LibraryRecord> catalog = load_catalog_checked(config);
  const std::vector<VulnerabilityRecord> vulns = load_vulns_checked(config);

  const StopwordSet stopwords =
      config.paths.stopwords.empty() ? default_stopwords()
                                     : load_stopwords(config.paths.stopwords);

  // Gazetteer over every catalog name; exclusion below only affects which
  // documents get indexed, names are entities either way.
  const EntityVocabulary vocab = build_entity_vocabulary(catalog);

  std::vector<LibraryDocument> docs;
  docs.reserve(catalog.size());
  size_t skipped_description_less = 0;
  for (const auto &lib : catalog) {
    if (config.screener.exclude_description_less && !lib.has_description()) {
      ++skipped_description_less;
      continue;
    }
    docs.push_back(build_library_document(lib, stopwords));
  }

  save_documents(docs, config.paths.documents_path());
  save_vocabulary(vocab, config.paths.vocabulary_path());

  const std::vector<VulnerabilityRecord> labeled = labeled_only(vulns);
  PartitionOptions popts;
  popts.ratio = config.split_ratio;
  popts.seed = config.seed;
  popts.explicit_sizes = config.split_sizes;
  const DatasetSplit split = partition_dataset(labeled, popts);
  const SplitManifest manifest = make_manifest(split, popts);
  save_split_manifest(manifest, config.paths.split_manifest_path());

  const std::string doc_bytes =
      read_file_bytes(config.paths.documents_path());
  nlohmann::json m;
  m["format_version"] = 1;
  m["library_count"] = catalog.size();
  m["document_count"] = docs.size();
  m["excluded_description_less"] = skipped_description_less;
  m["vulnerability_count"] = vulns.size();
  m["labeled_vulnerability_count"] = labeled.size();
  m["vocabulary_size"] = vocab.tokens.size();
  m["stopword_list_version"] = kStopwordListVersion;
  m["seed"] = config.seed;
  m["split"] = {{"training", manifest.training.size()},
                {"validation", manifest.validation.size()},
                {"testing", manifest.testing.size()}};
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(doc_bytes)));
  m["content_hash"] = std::string("fnv1a64:") + hash_hex;
  write_file_bytes(config.paths.ingest_manifest_path(), m.dump(2) + "\n");

  out << "ingested " << catalog.size() << " libraries -> " << docs.size()
      << " documents";
  if (skipped_description_less > 0)
    out << " (" << skipped_description_less << " description-less excluded)";
  out << "\n";
  out << "vocabulary: " << vocab.tokens.size() << " entity tokens\n";
  out << "vulnerabilities: " << vulns.size() << " total, " << labeled.size()
      << " labeled\n";
  out << "split: " << manifest.training.size() << " training / "
      << manifest.validation.size() << " validation / "
      << manifest.testing.size() << " testing (seed " << config.seed << ")\n";
}

void cmd_index(const PipelineConfig &config, std::ostream &out) {
  DirLock lock(config.paths.out_dir);
  require_file(config.paths.documents_path(), "documents artifact");
  const std::vector<LibraryDocument> docs =
      load_documents(config.paths.documents_path());
  if (docs.empty())
    throw ValidationError("no documents to index; run ingest first");
  const InvertedIndex index = build_index(docs);
  save_index(index, config.paths.index_path());
  out << "indexed " << index.doc_count() << " documents, "
      << index.term_count() << " distinct terms\n";
}

void cmd_train(const PipelineConfig &config, std::ostream &out) {
  DirLock lock(config.paths.out_dir);
  Workspace ws = load_workspace(config, /*need_model=*/false);
  const std::vector<VulnerabilityRecord> vulns = load_vulns_checked(config);
  const SplitManifest manifest = load_manifest_checked(config);
  const DatasetSplit split = apply_manifest(vulns, manifest);

  const Screener screener(ws.index, ws.vocabulary, config.screener.options(),
                          ws.stopwords);
  TrainingLog tlog;
  const ModelParameters model =
      train(split, screener, ws.documents, config.training, &tlog);
  save_model(model, config.paths.model_path());

  nlohmann::json lj;
  lj["format_version"] = 1;
  lj["best_epoch"] = tlog.best_epoch;
  lj["pair_count"] = tlog.pair_count;
  lj["positive_count"] = tlog.positive_count;
  lj["seed"] = config.training.seed;
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto &e : tlog.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_f1_at_1", e.val_f1_at_1}});
  }
  lj["epochs"] = epochs;
  write_file_bytes(config.paths.training_log_path(), lj.dump(2) + "\n");

  for (const auto &e : tlog.epochs) {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "epoch %3zu  loss %.6f  val f1@1 %.4f\n", e.epoch,
                  e.train_loss, e.val_f1_at_1);
    out << buf;
  }
  out << "trained on " << tlog.pair_count << " pairs ("
      << tlog.positive_count << " positive); best epoch " << tlog.best_epoch
      << "\n";
  out << "model written to " << config.paths.model_path() << "\n";
}

namespace {

struct RankedRow {
  std::string library;
  double screener_score = 0;
  bool padded = false;
  bool has_coherence = false;
  double coherence = 0;
};

void print_query_text(const QueryCommandOptions &opts,
                      const std::vector<RankedRow> &rows, double screen_ms,
                      double rerank_ms, std::ostream &out) {
  for (size_t i = 0; i < rows.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%4zu  ", i + 1);
    out << buf << rows[i].library << "  screener=";
    std::snprintf(buf, sizeof(buf), "%.6f", rows[i].screener_score);
    out << buf;
    if (rows[i].has_coherence) {
      std::snprintf(buf, sizeof(buf), "  coherence=%.6f", rows[i].coherence);
      out << buf;
    }
    if (rows[i].padded) out << "  [padded]";
    out << "\n";
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "timing: screen %.1f ms, rerank %.1f ms, total %.1f ms\n",
                screen_ms, rerank_ms, screen_ms + rerank_ms);
  out << buf;
  (void)opts;
}

void print_query_json(const QueryCommandOptions &opts, const std::string &id,
                      bool no_informative_terms,
                      const std::vector<RankedRow> &rows, double screen_ms,
                      double rerank_ms, std::ostream &out) {
  nlohmann::json results = nlohmann::json::array();
  for (size_t i = 0; i < rows.size(); ++i) {
    nlohmann::json row = {{"rank", i + 1},
                          {"library", rows[i].library},
                          {"screener_score", rows[i].screener_score},
                          {"padded", rows[i].padded}};
    if (rows[i].has_coherence) row["coherence_score"] = rows[i].coherence;
    results.push_back(row);
  }
  nlohmann::json j = {{"query_id", id},
                      {"k", opts.k},
                      {"screener_only", opts.screener_only},
                      {"no_informative_terms", no_informative_terms},
                      {"results", results},
                      {"timing_ms",
                       {{"screen", screen_ms},
                        {"rerank", rerank_ms},
                        {"total", screen_ms + rerank_ms}}}};
  out << j.dump(2) << "\n";
}

} // namespace

void cmd_query(const PipelineConfig &config, const QueryCommandOptions &opts,
               std::ostream &out) {
  if (opts.k == 0) throw ConfigError("k must be positive");
  if (opts.text.empty() && opts.cve_id.empty())
    throw ConfigError("query needs description text or a CVE id");

  Workspace ws = load_workspace(config, /*need_model=*/!opts.screener_only &&
                                            opts.external_scorer_cmd.empty());

  std::string query_id = "query";
  std::string text = opts.text;
  if (!opts.cve_id.empty()) {
    const std::vector<VulnerabilityRecord> vulns = load_vulns_checked(config);
    const auto it =
        std::find_if(vulns.begin(), vulns.end(),
                     [&opts](const VulnerabilityRecord &v) {
                       return v.id == opts.cve_id;
                     });
    if (it == vulns.end())
      throw ValidationError("vulnerability id not found: " + opts.cve_id);
    query_id = it->id;
    text = it->description;
  }

  const Screener screener(ws.index, ws.vocabulary, config.screener.options(),
                          ws.stopwords);

  const auto t0 = std::chrono::steady_clock::now();
  const WeightedQuery query = screener.make_query(text);
  if (query.empty()) {
    if (opts.json) {
      print_query_json(opts, query_id, true, {}, 0, 0, out);
    } else {
      out << "no informative terms in query; nothing to rank\n";
    }
    return;
  }
  const std::vector<double> scores = screener.score(query);
  const CandidateSet cands =
      select_candidates(scores, ws.index, screener.options().candidate_num);
  const auto t1 = std::chrono::steady_clock::now();

  if (!opts.dump_scores_path.empty()) {
    std::ostringstream dump;
    for (const auto &c : cands.candidates) {
      nlohmann::json j = {{"library", c.library},
                          {"score", c.score},
                          {"padded", c.padded}};
      dump << j.dump() << "\n";
    }
    write_file_bytes(opts.dump_scores_path, dump.str());
  }

  std::unordered_map<std::string, const Candidate *> by_name;
  for (const auto &c : cands.candidates) by_name.emplace(c.library, &c);

  std::vector<RankedRow> rows;
  double rerank_ms = 0;
  if (opts.screener_only) {
    const size_t take = std::min(opts.k, cands.size());
    rows.reserve(take);
    for (size_t i = 0; i < take; ++i) {
      const Candidate &c = cands.candidates[i];
      rows.push_back(RankedRow{c.library, c.score, c.padded, false, 0});
    }
  } else {
    std::vector<ScoredLibrary> scored;
    const auto t2 = std::chrono::steady_clock::now();
    if (!opts.external_scorer_cmd.empty()) {
      // External stage two: candidate descriptions come from the catalog.
      const std::vector<LibraryRecord> catalog = load_catalog_checked(config);
      std::unordered_map<std::string, const std::string *> desc_by_name;
      for (const auto &lib : catalog)
        desc_by_name.emplace(lib.name, &lib.description);
      ExternalScorerClient client(opts.external_scorer_cmd);
      scored.reserve(cands.size());
      for (const auto &c : cands.candidates) {
        ScoreRequest req;
        req.query_id = query_id + ":" + c.library;
        req.vuln = text;
        req.library = c.library;
        const auto dit = desc_by_name.find(c.library);
        req.lib_desc = dit == desc_by_name.end() ? "" : *dit->second;
        scored.push_back(ScoredLibrary{c.library, client.score(req)});
      }
      scored = order_by_score(std::move(scored), opts.k);
    } else {
      const Reranker reranker(*ws.model, ws.vocabulary, ws.documents,
                              ws.stopwords);
      scored = reranker.rank(text, cands, opts.k);
    }
    const auto t3 = std::chrono::steady_clock::now();
    rerank_ms = ms_between(t2, t3);
    rows.reserve(scored.size());
    for (const auto &s : scored) {
      const Candidate *c = by_name.at(s.library);
      rows.push_back(RankedRow{s.library, c->score, c->padded, true, s.score});
    }
  }

  const double screen_ms = ms_between(t0, t1);
  if (opts.json) {
    print_query_json(opts, query_id, false, rows, screen_ms, rerank_ms, out);
  } else {
    print_query_text(opts, rows, screen_ms, rerank_ms, out);
  }
}

namespace {

// Ranked predictions for a list of labeled vulnerabilities. With a
// reranker, candidates are rescored; otherwise the screener order stands.
std::vector<PredictionRecord>
predict_all(const std::vector<VulnerabilityRecord> &vulns,
            const Screener &screener, const Reranker *reranker) {
  std::vector<PredictionRecord> preds;
  preds.reserve(vulns.size());
  for (const auto &vuln : vulns) {
    if (!vuln.labeled()) continue;
    PredictionRecord pred;
    pred.vuln_id = vuln.id;
    pred.affected = vuln.labels;
    const CandidateSet cands = screener.screen(vuln.description);
    if (!cands.empty()) {
      if (reranker != nullptr) {
        pred.ranked = reranker->rank(vuln.description, cands, cands.size());
      } else {
        pred.ranked.reserve(cands.size());
        for (const auto &c : cands.candidates)
          pred.ranked.push_back(ScoredLibrary{c.library, c.score});
      }
    }
    preds.push_back(std::move(pred));
  }
  return preds;
}

} // namespace

MetricsReport cmd_evaluate(const PipelineConfig &config,
                           const EvaluateCommandOptions &opts,
                           std::ostream &out) {
  DirLock lock(config.paths.out_dir);
  Workspace ws = load_workspace(config, /*need_model=*/!opts.screener_only);
  const std::vector<VulnerabilityRecord> vulns = load_vulns_checked(config);
  const SplitManifest manifest = load_manifest_checked(config);
  const DatasetSplit split = apply_manifest(vulns, manifest);
  if (split.testing.empty())
    throw ValidationError("testing split is empty; nothing to evaluate");

  const Screener screener(ws.index, ws.vocabulary, config.screener.options(),
                          ws.stopwords);
  std::optional<Reranker> reranker;
  if (!opts.screener_only)
    reranker.emplace(*ws.model, ws.vocabulary, ws.documents, ws.stopwords);

  const std::vector<PredictionRecord> preds = predict_all(
      split.testing, screener, reranker ? &*reranker : nullptr);
  if (preds.empty())
    throw ValidationError("no labeled testing vulnerabilities to evaluate");

  MetricsReport report = macro_report(preds, opts.ks);
  if (opts.zero_shot_split) {
    const std::set<std::string> seen = split.training_label_set();
    const auto parts = zero_shot_split(split.testing, seen);
    std::set<std::string> zero_ids;
    for (const auto &v : parts.first) zero_ids.insert(v.id);
    std::vector<PredictionRecord> zero_preds, full_preds;
    for (const auto &p : preds) {
      (zero_ids.count(p.vuln_id) ? zero_preds : full_preds).push_back(p);
    }
    if (!zero_preds.empty())
      report.sub_reports.emplace_back("zero_shot",
                                      macro_report(zero_preds, opts.ks));
    if (!full_preds.empty())
      report.sub_reports.emplace_back("full_shot",
                                      macro_report(full_preds, opts.ks));
  }

  save_report_json(report, config.paths.report_json_path());
  write_file_bytes(config.paths.report_text_path(),
                   render_report_text(report));
  if (opts.json) {
    out << report_to_json(report) << "\n";
  } else {
    out << render_report_text(report);
  }
  return report;
}

std::vector<SweepCell> cmd_sweep(const PipelineConfig &config,
                                 const SweepCommandOptions &opts,
                                 std::ostream &out) {
  DirLock lock(config.paths.out_dir);
  Workspace ws = load_workspace(config, /*need_model=*/true);
  const std::vector<VulnerabilityRecord> vulns = load_vulns_checked(config);
  const SplitManifest manifest = load_manifest_checked(config);
  const DatasetSplit split = apply_manifest(vulns, manifest);
  if (split.testing.empty())
    throw ValidationError("testing split is empty; nothing to sweep");

  const std::vector<size_t> cand_nums = {32, 64, 128, 256, 512, 1024};
  struct WeightVariant {
    const char *name;
    double entity_weight;
    bool entity_only;
  };
  const std::vector<WeightVariant> variants = {
      {"1", 1.0, false}, {"4", 4.0, false}, {"entity-only", 1.0, true}};

  const Reranker reranker(*ws.model, ws.vocabulary, ws.documents,
                          ws.stopwords);
  const size_t max_cn = cand_nums.back();

  std::vector<SweepCell> cells;
  for (const auto &variant : variants) {
    ScreenerOptions sopts = config.screener.options();
    sopts.entity_weight = variant.entity_weight;
    sopts.entity_only = variant.entity_only;
    sopts.candidate_num = max_cn;
    const Screener screener(ws.index, ws.vocabulary, sopts, ws.stopwords);

    // One screening pass and one rerank pass per vulnerability; smaller
    // candidate budgets are prefixes of the same ranking.
    struct PerVuln {
      std::string description;
      PredictionRecord screened; // candidates in screener order
    };
    std::vector<PerVuln> per_vuln;
    for (const auto &vuln : split.testing) {
      if (!vuln.labeled()) continue;
      PerVuln pv;
      pv.description = vuln.description;
      pv.screened.vuln_id = vuln.id;
      pv.screened.affected = vuln.labels;
      const CandidateSet cands = screener.screen(vuln.description);
      for (const auto &c : cands.candidates)
        pv.screened.ranked.push_back(ScoredLibrary{c.library, c.score});
      per_vuln.push_back(std::move(pv));
    }

    for (size_t cn : cand_nums) {
      double recall_sum = 0;
      std::vector<PredictionRecord> reranked_preds;
      reranked_preds.reserve(per_vuln.size());
      for (const auto &pv : per_vuln) {
        recall_sum += metrics_at_k(pv.screened, cn).recall;
        PredictionRecord pred;
        pred.vuln_id = pv.screened.vuln_id;
        pred.affected = pv.screened.affected;
        if (!pv.screened.ranked.empty()) {
          CandidateSet prefix;
          const size_t take = std::min(cn, pv.screened.ranked.size());
          for (size_t i = 0; i < take; ++i) {
            prefix.candidates.push_back(
                Candidate{pv.screened.ranked[i].library,
                          pv.screened.ranked[i].score,
                          pv.screened.ranked[i].score == 0.0});
          }
          pred.ranked = reranker.rank(pv.description, prefix, take);
        }
        reranked_preds.push_back(std::move(pred));
      }
      SweepCell cell;
      cell.entity_weight = variant.name;
      cell.candidate_num = cn;
      cell.recall_at_candidate_num =
          per_vuln.empty() ? 0.0
                           : recall_sum / static_cast<double>(per_vuln.size());
      cell.f1_at_1 = reranked_preds.empty()
                         ? 0.0
                         : macro_report(reranked_preds, {1}).per_k[0].f1;
      cells.push_back(cell);
    }
  }

  // Table renderings.
  std::ostringstream csv;
  csv << "entity_weight,candidate_num,recall,f1_at_1\n";
  for (const auto &c : cells) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f\n",
                  c.entity_weight.c_str(), c.candidate_num,
                  c.recall_at_candidate_num, c.f1_at_1);
    csv << buf;
  }
  write_file_bytes(config.paths.sweep_csv_path(), csv.str());

  nlohmann::json ja = nlohmann::json::array();
  for (const auto &c : cells) {
    ja.push_back({{"entity_weight", c.entity_weight},
                  {"candidate_num", c.candidate_num},
                  {"recall", c.recall_at_candidate_num},
                  {"f1_at_1", c.f1_at_1}});
  }
  write_file_bytes(config.paths.sweep_json_path(), ja.dump(2) + "\n");

  if (opts.json) {
    out << ja.dump(2) << "\n";
  } else {
    out << "entity_weight  candidate_num  recall    f1@1\n";
    for (const auto &c : cells) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%-13s  %13zu  %.6f  %.6f\n",
                    c.entity_weight.c_str(), c.candidate_num,
                    c.recall_at_candidate_num, c.f1_at_1);
      out << buf;
    }
  }
  return cells;
}

void cmd_serve_scorer(const PipelineConfig &config, std::istream &in,
                      std::ostream &out) {
  require_file(config.paths.model_path(), "model artifact");
  const ModelParameters model = load_model(config.paths.model_path());
  require_file(config.paths.vocabulary_path(), "vocabulary artifact");
  const EntityVocabulary vocab =
      load_vocabulary(config.paths.vocabulary_path());
  const StopwordSet stopwords =
      config.paths.stopwords.empty() ? default_stopwords()
                                     : load_stopwords(config.paths.stopwords);

  const PairEncoder encoder(model.feature_dim, model.hash_seed,
                            model.max_tokens_per_side, vocab);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const ScoreRequest req = score_request_from_json(line);
    LibraryRecord lib;
    lib.name = req.library;
    lib.description = req.lib_desc;
    const LibraryDocument doc = build_library_document(lib, stopwords);
    // No screener context on this side of the protocol.
    const PairEncoding enc =
        encoder.encode(clean_text(req.vuln, stopwords), doc, 0.0);
    out << score_response_to_json(req.query_id, score_pair(enc, model))
        << "\n";
    out.flush();
  }
}

} // namespace vulnlink
