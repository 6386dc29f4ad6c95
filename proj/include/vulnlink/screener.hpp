// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#ifndef VULNLINK_SCREENER_HPP
#define VULNLINK_SCREENER_HPP

#include "vulnlink/corpus.hpp"
#include "vulnlink/textproc.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace vulnlink {

struct Posting {
  uint32_t doc = 0;   // index into doc_names
  uint64_t count = 0; // term occurrences in that document
};

// Term -> postings map over a fixed document collection. Documents are held
// in lexicographic order of their library coordinate, so ids and postings
// are independent of input order. Counts are integers; scores derived from
// them reproduce bit-exactly after a save/load round trip.
class InvertedIndex {
public:
  InvertedIndex() = default;

  size_t doc_count() const { return doc_names_.size(); }
  const std::vector<std::string> &doc_names() const { return doc_names_; }
  const std::vector<uint64_t> &doc_lengths() const { return doc_lengths_; }
  uint64_t doc_length(uint32_t doc) const { return doc_lengths_[doc]; }
  const std::string &doc_name(uint32_t doc) const { return doc_names_[doc]; }

  // Document frequency; 0 for unseen terms.
  uint64_t doc_freq(const std::string &term) const;
  const std::vector<Posting> *postings(const std::string &term) const;
  size_t term_count() const { return postings_.size(); }

  // Sorted term list, for deterministic iteration and persistence.
  std::vector<std::string> terms_sorted() const;

private:
  friend InvertedIndex build_index(const std::vector<LibraryDocument> &docs);
  friend InvertedIndex load_index(const std::string &path);

  std::vector<std::string> doc_names_;
  std::vector<uint64_t> doc_lengths_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
};

// Rejects duplicate library coordinates and empty documents.
InvertedIndex build_index(const std::vector<LibraryDocument> &docs);

// Binary index file, magic "VLIX". Load rejects wrong magic or version.
void save_index(const InvertedIndex &index, const std::string &path);
InvertedIndex load_index(const std::string &path);

// tf = count / doc_length; idf = ln(N / (df + 1)) when smoothed,
// ln(N / df) otherwise. Negative idf values are kept as-is.
double idf_value(uint64_t doc_freq, uint64_t doc_count, bool smoothed);
double tf_idf(uint64_t count, uint64_t doc_length, uint64_t doc_freq,
              uint64_t doc_count, bool smoothed);

// score[j] = sum_i (w_i / sum_w) * tf(i, j) * idf(i), traversing postings
// lists only. Terms with no postings contribute nothing; with smoothing
// off, terms with df = 0 are skipped. Empty queries yield all zeros.
std::vector<double> score_all(const WeightedQuery &query,
                              const InvertedIndex &index,
                              bool idf_smoothing = true);

struct Candidate {
  std::string library;
  double score = 0;
  // True when this entry only exists to fill the requested set size:
  // its score is zero and it carries no evidence for the query.
  bool padded = false;
};

struct CandidateSet {
  std::vector<Candidate> candidates;

  bool empty() const { return candidates.empty(); }
  size_t size() const { return candidates.size(); }
  bool contains(const std::string &library) const;
};

// Top candidate_num documents by (score desc, coordinate asc). Zero-score
// entries are marked padded. Never invents documents: result size is
// min(candidate_num, doc_count).
CandidateSet select_candidates(const std::vector<double> &scores,
                               const InvertedIndex &index,
                               size_t candidate_num);

struct ScreenerOptions {
  double entity_weight = 4.0;
  size_t candidate_num = 512;
  bool idf_smoothing = true;
  bool entity_only = false;
};

// Stage one of the pipeline: description in, ranked candidate set out.
class Screener {
public:
  Screener(const InvertedIndex &index, const EntityVocabulary &vocab,
           ScreenerOptions options, const StopwordSet &stopwords);
  Screener(const InvertedIndex &index, const EntityVocabulary &vocab,
           ScreenerOptions options = {});

  // Empty cleaned queries short-circuit to an empty candidate set.
  CandidateSet screen(const std::string &description) const;
  WeightedQuery make_query(const std::string &description) const;
  std::vector<double> score(const WeightedQuery &query) const;

  const ScreenerOptions &options() const { return options_; }
  const InvertedIndex &index() const { return index_; }
  const EntityVocabulary &vocab() const { return vocab_; }
  const StopwordSet &stopwords() const { return stopwords_; }

private:
  const InvertedIndex &index_;
  const EntityVocabulary &vocab_;
  ScreenerOptions options_;
  const StopwordSet &stopwords_;
};

} // namespace vulnlink

#endif // VULNLINK_SCREENER_HPP
