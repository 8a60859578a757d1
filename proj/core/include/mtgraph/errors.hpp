#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtgraph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The agent graph is not a single connected component.
class DisconnectedGraph : public InvalidArgument {
 public:
  DisconnectedGraph(const std::string& what, std::vector<std::vector<std::size_t>> components)
      : InvalidArgument(what), components_(std::move(components)) {}

  const std::vector<std::vector<std::size_t>>& components() const noexcept { return components_; }

 private:
  std::vector<std::vector<std::size_t>> components_;
};

/// An iterate became NaN or infinite during a decentralized run.
class NonFiniteIterate : public Error {
 public:
  NonFiniteIterate(std::size_t agent, std::size_t iteration)
      : Error("non-finite iterate at agent " + std::to_string(agent) + ", iteration " +
              std::to_string(iteration)),
        agent_(agent),
        iteration_(iteration) {}

  std::size_t agent() const noexcept { return agent_; }
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t agent_;
  std::size_t iteration_;
};

/// An iterative solver hit its iteration cap before reaching tolerance.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// Configuration or input-file problem; carries one diagnostic per offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics)
      : Error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& line : lines) {
      if (!out.empty()) out += '\n';
      out += line;
    }
    return out;
  }

  std::vector<std::string> diagnostics_;
};

}  // namespace mtgraph
