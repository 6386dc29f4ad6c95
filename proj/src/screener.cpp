// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#include "vulnlink/screener.hpp"

#include "vulnlink/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

namespace vulnlink {

namespace {

constexpr char kIndexMagic[4] = {'V', 'L', 'I', 'X'};
constexpr uint32_t kIndexVersion = 1;

// Fixed little-endian integer IO so index files are portable.
template <typename T> void write_le(std::ostream &out, T value) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char buf[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
  }
  out.write(reinterpret_cast<const char *>(buf), sizeof(T));
}

template <typename T> T read_le(std::istream &in, const std::string &what) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char *>(buf), sizeof(T)))
    throw ParseError("truncated index file while reading " + what);
  T value = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(buf[i]) << (8 * i);
  }
  return value;
}

void write_string(std::ostream &out, const std::string &s) {
  write_le<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream &in, const std::string &what) {
  const uint32_t len = read_le<uint32_t>(in, what + " length");
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), len))
    throw ParseError("truncated index file while reading " + what);
  return s;
}

} // namespace

uint64_t InvertedIndex::doc_freq(const std::string &term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

const std::vector<Posting> *
InvertedIndex::postings(const std::string &term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

std::vector<std::string> InvertedIndex::terms_sorted() const {
  std::vector<std::string> terms;
  terms.reserve(postings_.size());
  for (const auto &entry : postings_) terms.push_back(entry.first);
  std::sort(terms.begin(), terms.end());
  return terms;
}

InvertedIndex build_index(const std::vector<LibraryDocument> &docs) {
  // Canonical document order: lexicographic by coordinate. Ids assigned
  // after sorting so they never depend on input order.
  if (docs.empty())
    throw ValidationError("cannot index an empty document collection");
  std::vector<uint32_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&docs](uint32_t a, uint32_t b) {
    return docs[a].library < docs[b].library;
  });

  InvertedIndex index;
  index.doc_names_.reserve(docs.size());
  index.doc_lengths_.reserve(docs.size());
  for (uint32_t src : order) {
    const LibraryDocument &doc = docs[src];
    if (!index.doc_names_.empty() && index.doc_names_.back() == doc.library)
      throw ValidationError("duplicate library coordinate: " + doc.library);
    if (doc.tokens.empty())
      throw ValidationError("empty document for library: " + doc.library);
    index.doc_names_.push_back(doc.library);
    index.doc_lengths_.push_back(doc.tokens.size());
  }

  for (uint32_t pos = 0; pos < order.size(); ++pos) {
    const LibraryDocument &doc = docs[order[pos]];
    std::map<std::string, uint64_t> counts;
    for (const auto &tok : doc.tokens) ++counts[tok];
    for (const auto &entry : counts) {
      index.postings_[entry.first].push_back(Posting{pos, entry.second});
    }
  }
  // Postings arrive in ascending doc order by construction.
  return index;
}

void save_index(const InvertedIndex &index, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open index file for write: " + path);
  out.write(kIndexMagic, sizeof(kIndexMagic));
  write_le<uint32_t>(out, kIndexVersion);
  write_le<uint64_t>(out, index.doc_count());
  for (size_t i = 0; i < index.doc_count(); ++i) {
    write_string(out, index.doc_names()[i]);
    write_le<uint64_t>(out, index.doc_lengths()[i]);
  }
  const std::vector<std::string> terms = index.terms_sorted();
  write_le<uint64_t>(out, terms.size());
  for (const auto &term : terms) {
    const std::vector<Posting> *plist = index.postings(term);
    write_string(out, term);
    write_le<uint64_t>(out, plist->size());
    for (const Posting &p : *plist) {
      write_le<uint32_t>(out, p.doc);
      write_le<uint64_t>(out, p.count);
    }
  }
  if (!out) throw ValidationError("write failed: " + path);
}

InvertedIndex load_index(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open index file: " + path);
  char magic[4];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kIndexMagic, sizeof(magic)) != 0)
    throw ParseError("not an index file (bad magic): " + path);
  const uint32_t version = read_le<uint32_t>(in, "version");
  if (version != kIndexVersion)
    throw ParseError("unsupported index version " + std::to_string(version) +
                     " in " + path);

  InvertedIndex index;
  const uint64_t doc_count = read_le<uint64_t>(in, "doc count");
  index.doc_names_.reserve(doc_count);
  index.doc_lengths_.reserve(doc_count);
  for (uint64_t i = 0; i < doc_count; ++i) {
    index.doc_names_.push_back(read_string(in, "doc name"));
    index.doc_lengths_.push_back(read_le<uint64_t>(in, "doc length"));
  }
  const uint64_t term_count = read_le<uint64_t>(in, "term count");
  for (uint64_t t = 0; t < term_count; ++t) {
    std::string term = read_string(in, "term");
    const uint64_t plen = read_le<uint64_t>(in, "postings length");
    std::vector<Posting> plist;
    plist.reserve(plen);
    for (uint64_t p = 0; p < plen; ++p) {
      Posting posting;
      posting.doc = read_le<uint32_t>(in, "posting doc");
      posting.count = read_le<uint64_t>(in, "posting count");
      if (posting.doc >= doc_count)
        throw ParseError("posting references unknown document in " + path);
      plist.push_back(posting);
    }
    index.postings_.emplace(std::move(term), std::move(plist));
  }
  return index;
}

double idf_value(uint64_t doc_freq, uint64_t doc_count, bool smoothed) {
  if (doc_count == 0) throw ValidationError("idf over an empty collection");
  const double n = static_cast<double>(doc_count);
  if (smoothed) return std::log(n / static_cast<double>(doc_freq + 1));
  if (doc_freq == 0)
    throw ValidationError("unsmoothed idf of an absent term");
  return std::log(n / static_cast<double>(doc_freq));
}

double tf_idf(uint64_t count, uint64_t doc_length, uint64_t doc_freq,
              uint64_t doc_count, bool smoothed) {
  if (doc_length == 0) throw ValidationError("tf over an empty document");
  const double tf = static_cast<double>(count) / static_cast<double>(doc_length);
  return tf * idf_value(doc_freq, doc_count, smoothed);
}

std::vector<double> score_all(const WeightedQuery &query,
                              const InvertedIndex &index,
                              bool idf_smoothing) {
  std::vector<double> scores(index.doc_count(), 0.0);
  const double total_w = query.total_weight();
  if (total_w <= 0.0) return scores;

  // 1/length precomputed once per document; reused across all terms.
  std::vector<double> inv_len(index.doc_count());
  for (size_t j = 0; j < index.doc_count(); ++j) {
    inv_len[j] = 1.0 / static_cast<double>(index.doc_length(
                           static_cast<uint32_t>(j)));
  }

  for (const auto &term : query.terms) {
    const std::vector<Posting> *plist = index.postings(term.term);
    if (plist == nullptr) continue; // df = 0: no document can score
    const double idf =
        idf_value(plist->size(), index.doc_count(), idf_smoothing);
    const double factor = (term.weight / total_w) * idf;
    for (const Posting &p : *plist) {
      scores[p.doc] += factor * static_cast<double>(p.count) * inv_len[p.doc];
    }
  }
  return scores;
}

bool CandidateSet::contains(const std::string &library) const {
  for (const auto &c : candidates) {
    if (c.library == library) return true;
  }
  return false;
}

CandidateSet select_candidates(const std::vector<double> &scores,
                               const InvertedIndex &index,
                               size_t candidate_num) {
  if (scores.size() != index.doc_count())
    throw ValidationError("score vector does not match index size");
  std::vector<uint32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  // Ties and zero scores fall back to coordinate order, which is doc id
  // order here, so a plain stable criterion on (score desc, id asc) works.
  std::sort(order.begin(), order.end(), [&scores](uint32_t a, uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  const size_t take = std::min(candidate_num, order.size());
  CandidateSet set;
  set.candidates.reserve(take);
  for (size_t i = 0; i < take; ++i) {
    Candidate c;
    c.library = index.doc_name(order[i]);
    c.score = scores[order[i]];
    c.padded = (c.score == 0.0);
    set.candidates.push_back(std::move(c));
  }
  return set;
}

Screener::Screener(const InvertedIndex &index, const EntityVocabulary &vocab,
                   ScreenerOptions options, const StopwordSet &stopwords)
    : index_(index), vocab_(vocab), options_(options), stopwords_(stopwords) {
  if (options_.candidate_num == 0)
    throw ValidationError("candidate_num must be positive");
  if (options_.entity_weight < 1.0)
    throw ValidationError("entity_weight must be >= 1");
}

Screener::Screener(const InvertedIndex &index, const EntityVocabulary &vocab,
                   ScreenerOptions options)
    : Screener(index, vocab, options, default_stopwords()) {}

WeightedQuery Screener::make_query(const std::string &description) const {
  QueryOptions qopts;
  qopts.entity_weight = options_.entity_weight;
  qopts.entity_only = options_.entity_only;
  return build_weighted_query(description, vocab_, qopts, stopwords_);
}

std::vector<double> Screener::score(const WeightedQuery &query) const {
  return score_all(query, index_, options_.idf_smoothing);
}

CandidateSet Screener::screen(const std::string &description) const {
  const WeightedQuery query = make_query(description);
  if (query.empty()) return CandidateSet{};
  return select_candidates(score(query), index_, options_.candidate_num);
}

} // namespace vulnlink
