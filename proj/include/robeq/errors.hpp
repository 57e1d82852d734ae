#pragma once

#include <stdexcept>
#include <string>

namespace robeq {

/// Base for failures of a solver on otherwise valid inputs.
class SolverError : public std::runtime_error {
  public:
    SolverError(std::string code, const std::string &what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string &code() const noexcept { return code_; }

  private:
    std::string code_;
};

/// h_est = +-eps: a regret candidate is matched to a zero channel.
class SingularBelief : public SolverError {
  public:
    explicit SingularBelief(const std::string &what) : SolverError("SingularBelief", what) {}
};

/// The tie-curve search failed to bracket its root.
class Case4SolveFailure : public SolverError {
  public:
    explicit Case4SolveFailure(const std::string &what)
        : SolverError("Case4SolveFailure", what) {}
};

/// A grid oracle's incumbent ended on the edge of its search box.
class BracketTooNarrow : public SolverError {
  public:
    explicit BracketTooNarrow(const std::string &what)
        : SolverError("BracketTooNarrow", what) {}
};

} // namespace robeq
