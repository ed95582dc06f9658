#pragma once

#include <stdexcept>
#include <string>

namespace coil {

/// Non-finite value produced inside a computation; message names the layer
/// or stage that produced it.
class numeric_error : public std::runtime_error {
  public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// Training loss became NaN; carries the epoch at which it happened.
class training_diverged : public std::runtime_error {
  public:
    training_diverged(const std::string& what, int epoch)
        : std::runtime_error(what), epoch_(epoch) {}
    int epoch() const { return epoch_; }

  private:
    int epoch_;
};

/// Iterative solver blew up (objective or residual grew past the guard).
class solver_diverged : public std::runtime_error {
  public:
    explicit solver_diverged(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed file container; message names the failing check.
class format_error : public std::runtime_error {
  public:
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

class io_error : public std::runtime_error {
  public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace coil
