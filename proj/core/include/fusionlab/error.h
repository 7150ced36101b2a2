#pragma once

#include <stdexcept>
#include <string>

namespace fusionlab {

// Bad arguments and violated preconditions are reported with
// std::invalid_argument. The types below cover the remaining failure modes.

// A condition restricts a mixture to zero components.
class EmptyConditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Training produced a non-finite loss.
class TrainingFailure : public std::runtime_error {
 public:
  TrainingFailure(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

// The sampler produced a non-finite latent.
class SamplingFailure : public std::runtime_error {
 public:
  SamplingFailure(const std::string& what, int stage, int step)
      : std::runtime_error(what), stage_(stage), step_(step) {}
  int stage() const { return stage_; }
  int step() const { return step_; }

 private:
  int stage_;
  int step_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fusionlab
