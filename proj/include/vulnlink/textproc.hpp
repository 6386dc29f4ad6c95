// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#ifndef VULNLINK_TEXTPROC_HPP
#define VULNLINK_TEXTPROC_HPP

#include "vulnlink/corpus.hpp"

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

namespace vulnlink {

// Closed tag set: the noun/adjective tags retained by the query pipeline,
// plus Other for everything dropped.
enum class PosTag { kNn, kNns, kNnp, kNnps, kJj, kJjr, kJjs, kOther };

inline bool is_retained_tag(PosTag tag) { return tag != PosTag::kOther; }

const char *pos_tag_name(PosTag tag);

// Lexicon + suffix-rule tagger over a single case-preserved token. Unknown
// tokens default to NN so domain terms are always retained.
PosTag tag_token(const std::string &token_with_case);

// Keeps tokens whose tag is in the retained set, lowercased, order preserved.
// Input tokens must be case-preserved (capitalization is a proper-noun cue).
std::vector<std::string> pos_filter(const std::vector<std::string> &tokens);

// --- Entity vocabulary (gazetteer) ---

// The set of tokens appearing in any catalog library name. Stands in for a
// learned recognizer behind the same contract: a term is an entity iff the
// vocabulary contains it.
struct EntityVocabulary {
  std::unordered_set<std::string> tokens;
  uint64_t source_count = 0; // number of libraries processed

  bool contains(const std::string &term) const {
    return tokens.count(term) != 0;
  }
};

EntityVocabulary
build_entity_vocabulary(const std::vector<LibraryRecord> &catalog);

// Persistence: header line recording source_count, then sorted tokens, one
// per line. Round-trips bit-exactly.
void save_vocabulary(const EntityVocabulary &vocab, const std::string &path);
EntityVocabulary load_vocabulary(const std::string &path);

// --- Entity recognition ---

// flag[i] = vocab contains terms[i]. Terms must be lowercase.
std::vector<bool> recognize_entities(const std::vector<std::string> &terms,
                                     const EntityVocabulary &vocab);

// --- Weighted query ---

struct WeightedTerm {
  std::string term;
  double weight = 0;       // frequency x (entity_weight if entity else 1)
  int64_t frequency = 0;   // occurrences among retained tokens
  bool entity = false;
};

struct WeightedQuery {
  std::vector<WeightedTerm> terms; // unique, first-occurrence order

  bool empty() const { return terms.empty(); }
  double total_weight() const;
};

struct QueryOptions {
  double entity_weight = 4.0;
  // Entity-only weighting: non-entity terms are dropped entirely. This is
  // the finite realization of an unbounded entity weight.
  bool entity_only = false;
};

// Pipeline: apostrophe-expand -> split (case kept) -> pos_filter ->
// stopword-remove -> aggregate frequencies -> amplify entity terms.
// A description that cleans to zero retained terms yields an empty query;
// the screener maps that to an empty candidate set.
WeightedQuery build_weighted_query(const std::string &description,
                                   const EntityVocabulary &vocab,
                                   const QueryOptions &options,
                                   const StopwordSet &stopwords);
WeightedQuery build_weighted_query(const std::string &description,
                                   const EntityVocabulary &vocab,
                                   const QueryOptions &options = {});

} // namespace vulnlink

#endif // VULNLINK_TEXTPROC_HPP
