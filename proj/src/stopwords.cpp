// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#include "vulnlink/stopwords.hpp"

#include "vulnlink/common.hpp"

#include <fstream>

namespace vulnlink {

const std::vector<std::string> &default_stopword_list() {
  // Keep in sync with data/stopwords.v1.txt (checked by a test).
  static const std::vector<std::string> words = {
    "a", "about", "above", "across", "after", "again", "against", "all",
    "along", "already", "also", "although", "am", "among", "an", "and",
    "another", "any", "anyone", "anything", "are", "around", "as", "at",
    "be", "because", "been", "before", "behind", "being", "below", "beneath",
    "beside", "besides", "between", "beyond", "both", "but", "by", "can",
    "cannot", "could", "despite", "did", "do", "does", "doing", "down",
    "during", "each", "either", "else", "except", "few", "for", "from",
    "further", "had", "has", "have", "having", "he", "hence", "her",
    "here", "hers", "herself", "him", "himself", "his", "how", "however",
    "i", "if", "in", "inside", "into", "is", "it", "its",
    "itself", "just", "may", "me", "might", "more", "most", "must",
    "my", "myself", "near", "neither", "no", "nor", "not", "now",
    "of", "off", "on", "once", "only", "onto", "or", "other",
    "others", "ought", "our", "ours", "ourselves", "out", "outside", "over",
    "own", "per", "rather", "same", "shall", "she", "should", "since",
    "so", "some", "someone", "something", "still", "such", "than", "that",
    "the", "their", "theirs", "them", "themselves", "then", "there", "therefore",
    "these", "they", "this", "those", "though", "through", "thus", "to",
    "too", "toward", "towards", "under", "underneath", "unless", "until", "up",
    "upon", "us", "very", "via", "was", "we", "were", "what",
    "whatever", "when", "whenever", "where", "whether", "which", "while", "who",
    "whom", "whose", "why", "will", "with", "within", "without", "would",
    "yet", "you", "your", "yours", "yourself", "yourselves",
  };
  return words;
}

const StopwordSet &default_stopwords() {
  static const StopwordSet set(default_stopword_list().begin(),
                               default_stopword_list().end());
  return set;
}

StopwordSet load_stopwords(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("stopword file not found: " + path);
  }
  StopwordSet set;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') {
      continue;
    }
    set.insert(line);
  }
  return set;
}

} // namespace vulnlink
