#pragma once

// Adapter for models living in another process. One JSON object per line on the child's
// stdin ({"rows": [{column: value, ...}, ...]}) answered by one line on its stdout
// ({"scores": [...]}).

#include <mutex>
#include <string>
#include <vector>

#include "ea/pipeline.hpp"

namespace ea {

class ExternalPredictor final : public Predictor {
 public:
  /// Starts `argv[0]` with the remaining arguments. Throws ConfigError when it cannot be spawned.
  ExternalPredictor(std::vector<std::string> argv, TaskKind task);
  ~ExternalPredictor() override;
  ExternalPredictor(const ExternalPredictor&) = delete;
  ExternalPredictor& operator=(const ExternalPredictor&) = delete;

  std::string kind() const override { return "external"; }
  TaskKind task() const override { return task_; }
  /// Throws ParseError on malformed responses and FitError when the child has gone away.
  std::vector<double> predict(const Dataset& d, std::span<const std::size_t> rows) const override;

 private:
  std::string exchange(const std::string& line) const;

  TaskKind task_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  mutable std::string pending_;
  mutable std::mutex mu_;
};

/// Request line for the given rows (without the trailing newline).
std::string external_request(const Dataset& d, std::span<const std::size_t> rows);

}  // namespace ea
