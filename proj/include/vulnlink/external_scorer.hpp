// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#ifndef VULNLINK_EXTERNAL_SCORER_HPP
#define VULNLINK_EXTERNAL_SCORER_HPP

#include <string>

namespace vulnlink {

struct ScoreRequest {
  std::string query_id;
  std::string vuln;     // vulnerability description text
  std::string library;  // candidate coordinate
  std::string lib_desc; // candidate description text
};

// Speaks the line-delimited JSON scorer protocol with a child process:
// one request object out, one {"query_id","score"} object back, in order.
// The child is spawned through /bin/sh at construction and reaped at
// destruction.
class ExternalScorerClient {
public:
  explicit ExternalScorerClient(const std::string &command);
  ~ExternalScorerClient();
  ExternalScorerClient(const ExternalScorerClient &) = delete;
  ExternalScorerClient &operator=(const ExternalScorerClient &) = delete;

  double score(const ScoreRequest &request);

private:
  void close_pipes();

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buffer_;
};

std::string score_request_to_json(const ScoreRequest &request);
ScoreRequest score_request_from_json(const std::string &line);
std::string score_response_to_json(const std::string &query_id, double score);
// Returns (query_id, score).
std::pair<std::string, double> score_response_from_json(const std::string &line);

} // namespace vulnlink

#endif // VULNLINK_EXTERNAL_SCORER_HPP
