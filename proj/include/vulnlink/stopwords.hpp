// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#ifndef VULNLINK_STOPWORDS_HPP
#define VULNLINK_STOPWORDS_HPP

#include <string>
#include <unordered_set>
#include <vector>

namespace vulnlink {

using StopwordSet = std::unordered_set<std::string>;

// Version tag of the bundled list. The list is part of the external
// interface; bump the tag when it changes.
inline constexpr const char *kStopwordListVersion = "v1";

// The bundled list, identical to data/stopwords.v1.txt.
const std::vector<std::string> &default_stopword_list();

const StopwordSet &default_stopwords();

// Loads a one-word-per-line UTF-8 stopword file. Blank lines and lines
// starting with '#' are skipped.
StopwordSet load_stopwords(const std::string &path);

} // namespace vulnlink

#endif // VULNLINK_STOPWORDS_HPP
