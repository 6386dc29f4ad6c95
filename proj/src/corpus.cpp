// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#include "vulnlink/corpus.hpp"

#include "vulnlink/common.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace vulnlink {

namespace {

using nlohmann::json;

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)); }
char to_lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool is_word_char_before(const std::string &s, size_t pos) {
  return pos > 0 && is_alnum(s[pos - 1]);
}

bool ends_word_at(const std::string &s, size_t pos) {
  return pos >= s.size() || !is_alnum(s[pos]);
}

// Contraction suffixes expanded after the apostrophe, longest match first.
struct ContractionRule {
  const char *suffix;      // characters following the apostrophe
  const char *replacement; // emitted as a separate word; "" strips
};
constexpr ContractionRule kApostropheRules[] = {
    {"re", "are"}, {"ve", "have"}, {"ll", "will"}, {"d", "would"}, {"s", ""},
};

bool suffix_matches(const std::string &s, size_t start, const char *suffix) {
  size_t n = std::char_traits<char>::length(suffix);
  if (start + n > s.size()) return false;
  for (size_t i = 0; i < n; ++i) {
    if (to_lower(s[start + i]) != suffix[i]) return false;
  }
  return ends_word_at(s, start + n);
}

} // namespace

std::string expand_apostrophes(const std::string &raw) {
  std::string out;
  out.reserve(raw.size());
  size_t i = 0;
  while (i < raw.size()) {
    char c = raw[i];
    if (c != '\'') {
      out.push_back(c);
      ++i;
      continue;
    }
    // "n't" -> stem + " not"  (isn't -> is not)
    if (i >= 1 && to_lower(raw[i - 1]) == 'n' && is_word_char_before(raw, i - 1) &&
        i + 1 < raw.size() && to_lower(raw[i + 1]) == 't' &&
        ends_word_at(raw, i + 2)) {
      out.pop_back(); // the stem's trailing 'n' belongs to the contraction
      out += " not";
      i += 2;
      continue;
    }
    if (is_word_char_before(raw, i)) {
      bool replaced = false;
      for (const auto &rule : kApostropheRules) {
        if (suffix_matches(raw, i + 1, rule.suffix)) {
          if (rule.replacement[0] != '\0') {
            out.push_back(' ');
            out += rule.replacement;
          }
          i += 1 + std::char_traits<char>::length(rule.suffix);
          replaced = true;
          break;
        }
      }
      if (replaced) continue;
    }
    // Any other apostrophe is left for the splitter.
    out.push_back(c);
    ++i;
  }
  return out;
}

std::vector<std::string> split_tokens_preserving_case(const std::string &raw) {
  std::string expanded = expand_apostrophes(raw);
  std::vector<std::string> tokens;
  std::string current;
  for (char c : expanded) {
    if (is_alnum(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> clean_text(const std::string &raw,
                                    const StopwordSet &stopwords) {
  std::vector<std::string> tokens = split_tokens_preserving_case(raw);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (auto &tok : tokens) {
    std::transform(tok.begin(), tok.end(), tok.begin(), to_lower);
    if (stopwords.count(tok) == 0) out.push_back(std::move(tok));
  }
  return out;
}

std::vector<std::string> clean_text(const std::string &raw) {
  return clean_text(raw, default_stopwords());
}

std::vector<std::string> tokenize_name(const std::string &name) {
  std::vector<std::string> tokens = split_tokens_preserving_case(name);
  for (auto &tok : tokens) {
    std::transform(tok.begin(), tok.end(), tok.begin(), to_lower);
  }
  return tokens;
}

// --- Loading ---

namespace {

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool looks_like_array(const std::string &content) {
  for (char c : content) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '[';
  }
  return false;
}

// Parses either JSON Lines or a JSON array into per-record objects, invoking
// `sink(obj, where)` with a human-readable record locator.
template <typename Sink>
void for_each_record(const std::string &path, CorpusFormat format, Sink sink) {
  std::string content = read_file(path);
  CorpusFormat effective = format;
  if (effective == CorpusFormat::kAutoDetect) {
    effective = looks_like_array(content) ? CorpusFormat::kJsonArray
                                          : CorpusFormat::kJsonLines;
  }
  if (effective == CorpusFormat::kJsonArray) {
    json doc;
    try {
      doc = json::parse(content);
    } catch (const json::parse_error &e) {
      throw ParseError(path + ": " + e.what());
    }
    if (!doc.is_array()) throw ParseError(path + ": expected a JSON array");
    size_t idx = 0;
    for (const auto &obj : doc) {
      sink(obj, "record " + std::to_string(idx));
      ++idx;
    }
    return;
  }
  std::istringstream in(content);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = line.find_first_not_of(" \t") == std::string::npos;
    if (blank) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error &e) {
      throw ParseError(path + ": line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    sink(obj, "line " + std::to_string(line_no));
  }
}

std::string require_string(const json &obj, const char *field,
                           const std::string &where) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw ValidationError("missing required field \"" + std::string(field) +
                          "\" at " + where);
  }
  if (!it->is_string()) {
    throw ValidationError("field \"" + std::string(field) +
                          "\" must be a string at " + where);
  }
  return it->get<std::string>();
}

std::vector<std::string> optional_string_list(const json &obj,
                                              const char *field,
                                              const std::string &where) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array()) {
    throw ValidationError("field \"" + std::string(field) +
                          "\" must be an array at " + where);
  }
  std::vector<std::string> out;
  for (const auto &v : *it) {
    if (!v.is_string()) {
      throw ValidationError("field \"" + std::string(field) +
                            "\" must contain strings at " + where);
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

} // namespace

std::vector<VulnerabilityRecord> load_vulnerabilities(const std::string &path,
                                                      CorpusFormat format) {
  std::vector<VulnerabilityRecord> records;
  std::unordered_set<std::string> seen;
  for_each_record(path, format, [&](const json &obj, const std::string &where) {
    if (!obj.is_object()) {
      throw ValidationError("expected a JSON object at " + where);
    }
    VulnerabilityRecord rec;
    rec.id = require_string(obj, "id", where);
    if (rec.id.empty()) {
      throw ValidationError("empty vulnerability id at " + where);
    }
    rec.description = require_string(obj, "description", where);
    auto labels = optional_string_list(obj, "labels", where);
    rec.labels.insert(labels.begin(), labels.end());
    rec.references = optional_string_list(obj, "references", where);
    rec.cwe = optional_string_list(obj, "cwe", where);
    if (!seen.insert(rec.id).second) {
      throw ValidationError("duplicate vulnerability id \"" + rec.id +
                            "\" at " + where);
    }
    records.push_back(std::move(rec));
  });
  return records;
}

void validate_library_name(const std::string &name) {
  if (name.empty()) throw ValidationError("empty library name");
  size_t sep = name.find(':');
  if (sep == std::string::npos) {
    throw ValidationError("library name \"" + name +
                          "\" has no group/artifact separator");
  }
  if (name.find(':', sep + 1) != std::string::npos) {
    throw ValidationError("library name \"" + name +
                          "\" has more than one group/artifact separator");
  }
  if (sep == 0 || sep + 1 == name.size()) {
    throw ValidationError("library name \"" + name +
                          "\" has an empty group or artifact part");
  }
  if (std::none_of(name.begin(), name.end(), is_alnum)) {
    throw ValidationError("library name \"" + name +
                          "\" has no alphanumeric characters");
  }
}

std::vector<LibraryRecord> load_libraries(const std::string &path,
                                          CorpusFormat format) {
  std::vector<LibraryRecord> records;
  std::unordered_set<std::string> seen;
  for_each_record(path, format, [&](const json &obj, const std::string &where) {
    if (!obj.is_object()) {
      throw ValidationError("expected a JSON object at " + where);
    }
    LibraryRecord rec;
    rec.name = require_string(obj, "name", where);
    if (auto it = obj.find("description"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw ValidationError("field \"description\" must be a string at " +
                              where);
      }
      rec.description = it->get<std::string>();
    }
    validate_library_name(rec.name);
    if (!seen.insert(rec.name).second) {
      throw ValidationError("duplicate library name \"" + rec.name + "\" at " +
                            where);
    }
    records.push_back(std::move(rec));
  });
  return records;
}

// --- Document building ---

LibraryDocument build_library_document(const LibraryRecord &lib,
                                       const StopwordSet &stopwords) {
  LibraryDocument doc;
  doc.library = lib.name;
  doc.tokens = tokenize_name(lib.name);
  doc.name_token_count = doc.tokens.size();
  doc.description_less = !lib.has_description();
  std::vector<std::string> desc = clean_text(lib.description, stopwords);
  doc.tokens.insert(doc.tokens.end(), std::make_move_iterator(desc.begin()),
                    std::make_move_iterator(desc.end()));
  return doc;
}

LibraryDocument build_library_document(const LibraryRecord &lib) {
  return build_library_document(lib, default_stopwords());
}

// --- Partitioning ---

std::set<std::string> DatasetSplit::training_label_set() const {
  std::set<std::string> labels;
  for (const auto &rec : training) {
    labels.insert(rec.labels.begin(), rec.labels.end());
  }
  return labels;
}

DatasetSplit partition_dataset(const std::vector<VulnerabilityRecord> &vulns,
                               const PartitionOptions &options) {
  if (vulns.empty()) throw ValidationError("cannot partition an empty corpus");
  for (const auto &r : options.ratio) {
    if (r <= 0) throw ValidationError("partition ratio components must be positive");
  }
  for (const auto &rec : vulns) {
    if (!rec.labeled()) {
      throw ValidationError("unlabeled vulnerability \"" + rec.id +
                            "\" cannot be partitioned");
    }
  }

  size_t n = vulns.size();
  std::array<size_t, 3> sizes{};
  if (options.explicit_sizes) {
    sizes = *options.explicit_sizes;
    if (sizes[0] + sizes[1] + sizes[2] != n) {
      throw ValidationError("explicit split sizes must sum to the corpus size");
    }
  } else {
    long long total = static_cast<long long>(options.ratio[0]) +
                      options.ratio[1] + options.ratio[2];
    for (int i = 0; i < 3; ++i) {
      sizes[i] = (n * static_cast<size_t>(options.ratio[i])) /
                 static_cast<size_t>(total);
    }
    size_t assigned = sizes[0] + sizes[1] + sizes[2];
    // Remainder (< 3) goes to training first, then validation.
    for (int i = 0; assigned < n; ++i, ++assigned) {
      sizes[i % 2]++;
    }
  }

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(options.seed);
  rng.shuffle(order);

  DatasetSplit split;
  size_t pos = 0;
  auto take = [&](std::vector<VulnerabilityRecord> &dst, size_t count) {
    dst.reserve(count);
    for (size_t i = 0; i < count; ++i) dst.push_back(vulns[order[pos++]]);
  };
  take(split.training, sizes[0]);
  take(split.validation, sizes[1]);
  take(split.testing, sizes[2]);
  return split;
}

// --- Split manifest ---

namespace {

std::vector<std::string> ids_of(const std::vector<VulnerabilityRecord> &recs) {
  std::vector<std::string> ids;
  ids.reserve(recs.size());
  for (const auto &r : recs) ids.push_back(r.id);
  return ids;
}

} // namespace

SplitManifest make_manifest(const DatasetSplit &split,
                            const PartitionOptions &options) {
  SplitManifest m;
  m.training = ids_of(split.training);
  m.validation = ids_of(split.validation);
  m.testing = ids_of(split.testing);
  m.seed = options.seed;
  m.ratio = options.ratio;
  return m;
}

void save_split_manifest(const SplitManifest &manifest,
                         const std::string &path) {
  json doc;
  doc["format_version"] = 1;
  doc["training"] = manifest.training;
  doc["validation"] = manifest.validation;
  doc["testing"] = manifest.testing;
  doc["seed"] = manifest.seed;
  doc["ratio"] = manifest.ratio;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write split manifest: " + path);
  out << doc.dump(2) << "\n";
}

SplitManifest load_split_manifest(const std::string &path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error &e) {
    throw ParseError(path + ": " + e.what());
  }
  SplitManifest m;
  m.training = doc.at("training").get<std::vector<std::string>>();
  m.validation = doc.at("validation").get<std::vector<std::string>>();
  m.testing = doc.at("testing").get<std::vector<std::string>>();
  m.seed = doc.value("seed", 0ull);
  if (doc.contains("ratio")) {
    auto r = doc["ratio"].get<std::vector<int>>();
    if (r.size() == 3) m.ratio = {r[0], r[1], r[2]};
  }
  return m;
}

DatasetSplit apply_manifest(const std::vector<VulnerabilityRecord> &vulns,
                            const SplitManifest &manifest) {
  std::unordered_map<std::string, const VulnerabilityRecord *> by_id;
  for (const auto &rec : vulns) by_id[rec.id] = &rec;
  auto resolve = [&](const std::vector<std::string> &ids) {
    std::vector<VulnerabilityRecord> out;
    out.reserve(ids.size());
    for (const auto &id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw ValidationError("split manifest names unknown vulnerability \"" +
                              id + "\"");
      }
      out.push_back(*it->second);
    }
    return out;
  };
  DatasetSplit split;
  split.training = resolve(manifest.training);
  split.validation = resolve(manifest.validation);
  split.testing = resolve(manifest.testing);
  return split;
}

} // namespace vulnlink
