// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 vulnlink Contributors

#include "vulnlink/external_scorer.hpp"

#include "vulnlink/common.hpp"

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>

namespace vulnlink {

std::string score_request_to_json(const ScoreRequest &request) {
  nlohmann::json j = {{"query_id", request.query_id},
                      {"vuln", request.vuln},
                      {"library", request.library},
                      {"lib_desc", request.lib_desc}};
  return j.dump();
}

ScoreRequest score_request_from_json(const std::string &line) {
  try {
    nlohmann::json j = nlohmann::json::parse(line);
    ScoreRequest req;
    req.query_id = j.at("query_id").get<std::string>();
    req.vuln = j.at("vuln").get<std::string>();
    req.library = j.at("library").get<std::string>();
    req.lib_desc = j.at("lib_desc").get<std::string>();
    return req;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("bad scorer request: ") + e.what());
  }
}

std::string score_response_to_json(const std::string &query_id, double score) {
  nlohmann::json j = {{"query_id", query_id}, {"score", score}};
  return j.dump();
}

std::pair<std::string, double>
score_response_from_json(const std::string &line) {
  try {
    nlohmann::json j = nlohmann::json::parse(line);
    return {j.at("query_id").get<std::string>(),
            j.at("score").get<double>()};
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("bad scorer response: ") + e.what());
  }
}

ExternalScorerClient::ExternalScorerClient(const std::string &command) {
  // A scorer that exits mid-stream must surface as an error, not kill us.
  signal(SIGPIPE, SIG_IGN);
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0)
    throw ValidationError("cannot create scorer pipes");
  const int pid = fork();
  if (pid < 0) throw ValidationError("cannot fork scorer process");
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), (char *)nullptr);
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  pid_ = pid;
  to_child_ = to_child[1];
  from_child_ = from_child[0];
}

void ExternalScorerClient::close_pipes() {
  if (to_child_ >= 0) {
    close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    close(from_child_);
    from_child_ = -1;
  }
}

ExternalScorerClient::~ExternalScorerClient() {
  close_pipes();
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

double ExternalScorerClient::score(const ScoreRequest &request) {
  const std::string line = score_request_to_json(request) + "\n";
  size_t written = 0;
  while (written < line.size()) {
    const ssize_t n =
        write(to_child_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ValidationError("scorer process is not accepting requests");
    }
    written += static_cast<size_t>(n);
  }

  // Responses arrive one line per request, in request order.
  for (;;) {
    const size_t nl = read_buffer_.find('\n');
    if (nl != std::string::npos) {
      const std::string response = read_buffer_.substr(0, nl);
      read_buffer_.erase(0, nl + 1);
      auto [query_id, score] = score_response_from_json(response);
      if (query_id != request.query_id)
        throw ParseError("scorer response out of order: expected " +
                         request.query_id + ", got " + query_id);
      return score;
    }
    char buf[4096];
    const ssize_t n = read(from_child_, buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ValidationError("scorer process read failed");
    }
    if (n == 0)
      throw ValidationError("scorer process closed its output stream");
    read_buffer_.append(buf, static_cast<size_t>(n));
  }
}

} // namespace vulnlink
