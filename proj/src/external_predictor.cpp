#include "ea/external_predictor.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "ea/errors.hpp"

namespace ea {

std::string external_request(const Dataset& d, std::span<const std::size_t> rows) {
  auto arr = nlohmann::json::array();
  for (std::size_t r : rows) {
    nlohmann::json row = nlohmann::json::object();
    for (const auto& c : d.columns) {
      if (c.is_numeric()) {
        row[c.name] = std::isnan(c.numbers[r]) ? nlohmann::json(nullptr) : nlohmann::json(c.numbers[r]);
      } else {
        row[c.name] = c.labels[r].empty() ? nlohmann::json(nullptr) : nlohmann::json(c.labels[r]);
      }
    }
    arr.push_back(std::move(row));
  }
  return nlohmann::json{{"rows", std::move(arr)}}.dump();
}

ExternalPredictor::ExternalPredictor(std::vector<std::string> argv, TaskKind task) : task_(task) {
  if (argv.empty()) throw ConfigError("external predictor needs a command");
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw ConfigError(std::string("pipe: ") + std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw ConfigError(std::string("pipe: ") + std::strerror(errno));
  }
  std::signal(SIGPIPE, SIG_IGN);
  pid_ = fork();
  if (pid_ < 0) throw ConfigError(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    std::vector<char*> args;
    for (auto& a : argv) args.push_back(a.data());
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ExternalPredictor::~ExternalPredictor() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

std::string ExternalPredictor::exchange(const std::string& line) const {
  const std::string framed = line + "\n";
  std::size_t sent = 0;
  while (sent < framed.size()) {
    const ssize_t n = write(to_child_, framed.data() + sent, framed.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw FitError(std::string("external predictor write failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
  char buf[4096];
  for (;;) {
    if (auto nl = pending_.find('\n'); nl != std::string::npos) {
      std::string reply = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      return reply;
    }
    const ssize_t n = read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw FitError("external predictor closed its output");
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

std::vector<double> ExternalPredictor::predict(const Dataset& d, std::span<const std::size_t> rows) const {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string reply = exchange(external_request(d, rows));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, "external predictor reply is not JSON");
  }
  if (!j.is_object() || !j.contains("scores") || !j["scores"].is_array()) {
    throw ParseError(0, "external predictor reply lacks a scores array");
  }
  std::vector<double> scores;
  for (const auto& v : j["scores"]) {
    if (!v.is_number()) throw ParseError(0, "external predictor returned a non-numeric score");
    const double s = v.get<double>();
    if (!std::isfinite(s)) throw ParseError(0, "external predictor returned a non-finite score");
    if (task_ == TaskKind::classification && (s < 0.0 || s > 1.0)) {
      throw ParseError(0, "external predictor probability outside [0,1]");
    }
    scores.push_back(s);
  }
  if (scores.size() != rows.size()) throw ParseError(0, "external predictor returned the wrong number of scores");
  return scores;
}

}  // namespace ea
