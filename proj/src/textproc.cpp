// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#include "vulnlink/textproc.hpp"

#include "vulnlink/common.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace vulnlink {

namespace {

std::string to_lower(const std::string &s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

// Closed-class words: determiners, pronouns, prepositions, conjunctions,
// auxiliaries, particles. All map to Other.
const std::unordered_set<std::string> &closed_class_words() {
  static const std::unordered_set<std::string> kSet = {
      "a",       "an",      "the",     "this",    "that",    "these",
      "those",   "some",    "any",     "each",    "every",   "no",
      "all",     "both",    "either",  "neither", "such",    "it",
      "its",     "itself",  "they",    "them",    "their",   "theirs",
      "he",      "him",     "his",     "she",     "her",     "hers",
      "we",      "us",      "our",     "ours",    "you",     "your",
      "yours",   "i",       "me",      "my",      "mine",    "who",
      "whom",    "whose",   "which",   "what",    "when",    "where",
      "why",     "how",     "there",   "here",    "then",    "than",
      "of",      "in",      "on",      "at",      "by",      "for",
      "with",    "without", "to",      "from",    "into",    "onto",
      "over",    "under",   "above",   "below",   "between", "among",
      "through", "during",  "before",  "after",   "within",  "via",
      "per",     "about",   "against", "up",      "down",    "out",
      "off",     "and",     "or",      "but",     "nor",     "so",
      "yet",     "if",      "because", "while",   "although","though",
      "unless",  "until",   "since",   "whether", "as",      "is",
      "am",      "are",     "was",     "were",    "be",      "been",
      "being",   "has",     "have",    "had",     "having",  "do",
      "does",    "did",     "done",    "doing",   "will",    "would",
      "shall",   "should",  "can",     "could",   "may",     "might",
      "must",    "not",     "also",    "only",    "very",    "too",
      "more",    "most",    "less",    "least",   "etc",     "eg",
      "ie",      "thus",    "hence",   "however", "therefore",
  };
  return kSet;
}

// Verb stems matched with their regular inflections (s/es, ed/d, ing).
// Conservative: only verbs that rarely appear as nouns in advisory or
// library text. Noun-biased homographs (access, upload, process, fix,
// exploit, result, trigger) are deliberately absent.
const std::unordered_set<std::string> &verb_stems() {
  static const std::unordered_set<std::string> kSet = {
      "allow",    "use",      "execute",  "run",      "store",
      "contain",  "enable",   "disable",  "permit",   "cause",
      "include",  "provide",  "require",  "occur",    "perform",
      "receive",  "send",     "create",   "delete",   "modify",
      "remove",   "affect",   "invoke",   "view",     "make",
      "take",     "give",     "become",   "exist",    "remain",
      "happen",   "fail",     "apply",    "say",      "mention",
      "describe", "report",   "disclose", "identify", "know",
      "see",      "go",       "come",     "get",      "want",
      "need",     "lead",     "write",    "read",     "prevent",
      "avoid",    "ensure",   "obtain",   "gain",     "expose",
      "involve",  "rely",     "depend",   "specify",  "craft",
      "inject",   "embed",    "retrieve", "supply",   "submit",
      "validate", "sanitize", "escape",   "bypass",
  };
  return kSet;
}

// Irregular past/participle forms of the stems above.
const std::unordered_set<std::string> &irregular_verb_forms() {
  static const std::unordered_set<std::string> kSet = {
      "ran",   "sent",  "made",  "took",  "taken", "gave",  "given",
      "went",  "gone",  "came",  "got",   "gotten","knew",  "known",
      "saw",   "seen",  "said",  "led",   "wrote", "written",
      "became","read",
  };
  return kSet;
}

const std::unordered_map<std::string, PosTag> &comparative_lexicon() {
  static const std::unordered_map<std::string, PosTag> kMap = {
      {"earlier", PosTag::kJjr},  {"later", PosTag::kJjr},
      {"greater", PosTag::kJjr},  {"fewer", PosTag::kJjr},
      {"lesser", PosTag::kJjr},   {"higher", PosTag::kJjr},
      {"lower", PosTag::kJjr},    {"newer", PosTag::kJjr},
      {"older", PosTag::kJjr},    {"larger", PosTag::kJjr},
      {"smaller", PosTag::kJjr},  {"better", PosTag::kJjr},
      {"worse", PosTag::kJjr},    {"best", PosTag::kJjs},
      {"worst", PosTag::kJjs},    {"latest", PosTag::kJjs},
      {"earliest", PosTag::kJjs}, {"greatest", PosTag::kJjs},
      {"highest", PosTag::kJjs},  {"lowest", PosTag::kJjs},
      {"largest", PosTag::kJjs},  {"smallest", PosTag::kJjs},
      {"newest", PosTag::kJjs},   {"oldest", PosTag::kJjs},
  };
  return kMap;
}

bool all_digits(const std::string &s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool ends_with(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// True when lower is a regular inflection of a listed verb stem.
// Covers: bare stem, -s/-es, -ed/-d (with e-restore and degemination),
// -ing (with e-restore and degemination).
bool matches_verb_inflection(const std::string &lower) {
  const auto &stems = verb_stems();
  if (stems.count(lower)) return true;
  auto base_in_stems = [&stems](const std::string &base) {
    return !base.empty() && stems.count(base) != 0;
  };
  auto degeminated = [](const std::string &base) -> std::string {
    if (base.size() >= 2 && base[base.size() - 1] == base[base.size() - 2])
      return base.substr(0, base.size() - 1);
    return std::string();
  };
  if (ends_with(lower, "ing") && lower.size() > 4) {
    std::string base = lower.substr(0, lower.size() - 3);
    if (base_in_stems(base) || base_in_stems(base + "e") ||
        base_in_stems(degeminated(base)))
      return true;
  }
  if (ends_with(lower, "ed") && lower.size() > 3) {
    std::string base = lower.substr(0, lower.size() - 2);
    if (base_in_stems(base) || base_in_stems(base + "e") ||
        base_in_stems(degeminated(base)))
      return true;
  }
  if (ends_with(lower, "es") && lower.size() > 3) {
    if (base_in_stems(lower.substr(0, lower.size() - 2))) return true;
  }
  if (ends_with(lower, "s") && lower.size() > 2 && !ends_with(lower, "ss")) {
    if (base_in_stems(lower.substr(0, lower.size() - 1))) return true;
  }
  return false;
}

bool looks_adjectival(const std::string &lower) {
  static const std::vector<std::string> kSuffixes = {
      "ous", "ive", "able", "ible", "ful", "less", "ary", "ic", "ical",
  };
  for (const auto &suf : kSuffixes) {
    if (lower.size() > suf.size() + 2 && ends_with(lower, suf)) return true;
  }
  // un...ed participial adjectives: unauthenticated, unpatched, unsigned.
  if (lower.size() > 6 && lower.rfind("un", 0) == 0 && ends_with(lower, "ed"))
    return true;
  return false;
}

} // namespace

const char *pos_tag_name(PosTag tag) {
  switch (tag) {
  case PosTag::kNn: return "NN";
  case PosTag::kNns: return "NNS";
  case PosTag::kNnp: return "NNP";
  case PosTag::kNnps: return "NNPS";
  case PosTag::kJj: return "JJ";
  case PosTag::kJjr: return "JJR";
  case PosTag::kJjs: return "JJS";
  case PosTag::kOther: return "OTHER";
  }
  return "OTHER";
}

PosTag tag_token(const std::string &token_with_case) {
  if (token_with_case.empty()) return PosTag::kOther;
  const std::string lower = to_lower(token_with_case);

  if (all_digits(lower)) return PosTag::kOther; // cardinal number
  if (closed_class_words().count(lower)) return PosTag::kOther;
  if (irregular_verb_forms().count(lower)) return PosTag::kOther;

  auto cmp = comparative_lexicon().find(lower);
  if (cmp != comparative_lexicon().end()) return cmp->second;

  // Capitalization wins before suffix guesses: product and vendor names
  // are the signal this stage exists to keep.
  const bool capitalized =
      std::isupper(static_cast<unsigned char>(token_with_case[0])) != 0;
  if (capitalized) {
    if (lower.size() > 3 && ends_with(lower, "s") && !ends_with(lower, "ss"))
      return PosTag::kNnps;
    return PosTag::kNnp;
  }

  if (matches_verb_inflection(lower)) return PosTag::kOther;
  if (ends_with(lower, "ly") && lower.size() > 3) return PosTag::kOther;
  if (looks_adjectival(lower)) return PosTag::kJj;
  // -ed word with no known stem: treat as participial adjective.
  if (ends_with(lower, "ed") && lower.size() > 3) return PosTag::kJj;
  if (ends_with(lower, "s") && lower.size() > 2 && !ends_with(lower, "ss"))
    return PosTag::kNns;
  return PosTag::kNn;
}

std::vector<std::string> pos_filter(const std::vector<std::string> &tokens) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const auto &tok : tokens) {
    if (is_retained_tag(tag_token(tok))) kept.push_back(to_lower(tok));
  }
  return kept;
}

EntityVocabulary
build_entity_vocabulary(const std::vector<LibraryRecord> &catalog) {
  EntityVocabulary vocab;
  for (const auto &lib : catalog) {
    for (const auto &tok : tokenize_name(lib.name)) {
      vocab.tokens.insert(tok);
    }
  }
  vocab.source_count = catalog.size();
  return vocab;
}

void save_vocabulary(const EntityVocabulary &vocab, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open vocabulary file for write: " + path);
  out << "vulnlink-vocab/1 source_count=" << vocab.source_count << "\n";
  std::vector<std::string> sorted(vocab.tokens.begin(), vocab.tokens.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto &tok : sorted) out << tok << "\n";
  if (!out) throw ValidationError("write failed: " + path);
}

EntityVocabulary load_vocabulary(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open vocabulary file: " + path);
  std::string header;
  if (!std::getline(in, header))
    throw ParseError("vocabulary file is empty: " + path);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const std::string prefix = "vulnlink-vocab/1 source_count=";
  if (header.rfind(prefix, 0) != 0)
    throw ParseError("unrecognized vocabulary header in " + path);
  EntityVocabulary vocab;
  try {
    vocab.source_count = std::stoull(header.substr(prefix.size()));
  } catch (const std::exception &) {
    throw ParseError("bad source_count in vocabulary header: " + path);
  }
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    vocab.tokens.insert(line);
  }
  return vocab;
}

std::vector<bool> recognize_entities(const std::vector<std::string> &terms,
                                     const EntityVocabulary &vocab) {
  std::vector<bool> flags(terms.size(), false);
  for (size_t i = 0; i < terms.size(); ++i) {
    flags[i] = vocab.contains(terms[i]);
  }
  return flags;
}

double WeightedQuery::total_weight() const {
  double sum = 0;
  for (const auto &t : terms) sum += t.weight;
  return sum;
}

WeightedQuery build_weighted_query(const std::string &description,
                                   const EntityVocabulary &vocab,
                                   const QueryOptions &options,
                                   const StopwordSet &stopwords) {
  if (options.entity_weight < 1.0)
    throw ValidationError("entity_weight must be >= 1");

  const std::string expanded = expand_apostrophes(description);
  const std::vector<std::string> raw = split_tokens_preserving_case(expanded);
  const std::vector<std::string> tagged = pos_filter(raw);

  // Frequency aggregation in first-occurrence order.
  std::vector<std::string> order;
  std::unordered_map<std::string, int64_t> freq;
  for (const auto &tok : tagged) {
    if (stopwords.count(tok)) continue;
    auto it = freq.find(tok);
    if (it == freq.end()) {
      freq.emplace(tok, 1);
      order.push_back(tok);
    } else {
      ++it->second;
    }
  }

  WeightedQuery query;
  query.terms.reserve(order.size());
  for (const auto &tok : order) {
    WeightedTerm term;
    term.term = tok;
    term.frequency = freq[tok];
    term.entity = vocab.contains(tok);
    if (options.entity_only && !term.entity) continue;
    term.weight = static_cast<double>(term.frequency) *
                  (term.entity && !options.entity_only ? options.entity_weight
                                                       : 1.0);
    query.terms.push_back(term);
  }
  return query;
}

WeightedQuery build_weighted_query(const std::string &description,
                                   const EntityVocabulary &vocab,
                                   const QueryOptions &options) {
  return build_weighted_query(description, vocab, options,
                              default_stopwords());
}

} // namespace vulnlink
