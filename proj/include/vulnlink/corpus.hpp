// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#ifndef VULNLINK_CORPUS_HPP
#define VULNLINK_CORPUS_HPP

#include "vulnlink/stopwords.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vulnlink {

// --- Domain types ---

struct VulnerabilityRecord {
  std::string id;          // CVE identifier
  std::string description; // raw text
  std::set<std::string> labels; // affected library coordinates (group:artifact)
  std::vector<std::string> references;
  std::vector<std::string> cwe;

  bool labeled() const { return !labels.empty(); }
};

struct LibraryRecord {
  std::string name;        // group:artifact coordinate
  std::string description; // raw text, may be empty

  bool has_description() const { return !description.empty(); }
};

// Cleaned, name-concatenated token document: the unit indexed and matched.
struct LibraryDocument {
  std::string library;             // coordinate of the source record
  std::vector<std::string> tokens; // name tokens followed by description tokens
  size_t name_token_count = 0;     // leading tokens that came from the name
  bool description_less = false;

  size_t length() const { return tokens.size(); }
};

struct DatasetSplit {
  std::vector<VulnerabilityRecord> training;
  std::vector<VulnerabilityRecord> validation;
  std::vector<VulnerabilityRecord> testing;

  std::set<std::string> training_label_set() const;
};

// --- Text cleaning ---
//
// The cleaning pipeline, applied in order:
//   1. apostrophe expansion (fixed contraction table, possessive stripping)
//   2. lowercasing
//   3. splitting on every non-alphanumeric character
//   4. stopword removal

// Step 1 alone; exposed so the query pipeline can tag case-preserved tokens.
std::string expand_apostrophes(const std::string &raw);

// Steps 1-3 with case preserved (no lowercasing, no stopword removal).
std::vector<std::string> split_tokens_preserving_case(const std::string &raw);

// The full pipeline. Total and deterministic.
std::vector<std::string> clean_text(const std::string &raw,
                                    const StopwordSet &stopwords);
std::vector<std::string> clean_text(const std::string &raw);

// Name tokenization: steps 1-3 plus lowercasing, but no stopword removal, so
// name tokens always survive into documents and the entity vocabulary.
std::vector<std::string> tokenize_name(const std::string &name);

// --- Loading ---

enum class CorpusFormat {
  kAutoDetect, // JSON array if the first byte is '[', JSON Lines otherwise
  kJsonLines,
  kJsonArray,
};

std::vector<VulnerabilityRecord>
load_vulnerabilities(const std::string &path,
                     CorpusFormat format = CorpusFormat::kAutoDetect);

std::vector<LibraryRecord>
load_libraries(const std::string &path,
               CorpusFormat format = CorpusFormat::kAutoDetect);

// Throws ValidationError unless name is a well-formed group:artifact
// coordinate with at least one alphanumeric character.
void validate_library_name(const std::string &name);

// --- Document building ---

LibraryDocument build_library_document(const LibraryRecord &lib,
                                       const StopwordSet &stopwords);
LibraryDocument build_library_document(const LibraryRecord &lib);

// --- Partitioning ---

struct PartitionOptions {
  std::array<int, 3> ratio{3, 1, 1};
  uint64_t seed = 0;
  // When set, pins the exact per-split sizes (must sum to the input size);
  // otherwise each bucket gets floor(n * r_i / sum(ratio)) and the remainder
  // goes to training first, then validation.
  std::optional<std::array<size_t, 3>> explicit_sizes;
};

DatasetSplit partition_dataset(const std::vector<VulnerabilityRecord> &vulns,
                               const PartitionOptions &options);

// --- Split manifest (external interface) ---

struct SplitManifest {
  std::vector<std::string> training;
  std::vector<std::string> validation;
  std::vector<std::string> testing;
  uint64_t seed = 0;
  std::array<int, 3> ratio{3, 1, 1};
};

SplitManifest make_manifest(const DatasetSplit &split,
                            const PartitionOptions &options);
void save_split_manifest(const SplitManifest &manifest,
                         const std::string &path);
SplitManifest load_split_manifest(const std::string &path);

// Reassembles a split from a manifest; every id must resolve.
DatasetSplit apply_manifest(const std::vector<VulnerabilityRecord> &vulns,
                            const SplitManifest &manifest);

} // namespace vulnlink

#endif // VULNLINK_CORPUS_HPP
