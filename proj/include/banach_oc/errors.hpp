#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace banach_oc {

/// Operands live on different grids or have incompatible lengths.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A requested basis/mode cannot be resolved on the grid.
struct ResolutionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a function (negative concentration, NaN sample, ...).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent or unsupported configuration values.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed config or control file; carries the offending line number.
struct InputError : std::runtime_error {
  InputError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

/// A time integration produced a non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(std::size_t step, std::optional<std::size_t> channel = std::nullopt)
      : std::runtime_error(message(step, channel)), step_(step), channel_(channel) {}

  std::size_t step() const noexcept { return step_; }
  std::optional<std::size_t> channel() const noexcept { return channel_; }

  DivergenceError with_channel(std::size_t channel) const { return DivergenceError(step_, channel); }

 private:
  static std::string message(std::size_t step, std::optional<std::size_t> channel) {
    std::string msg = "non-finite state at step " + std::to_string(step);
    if (channel) msg += " (probe channel " + std::to_string(*channel) + ")";
    return msg;
  }

  std::size_t step_;
  std::optional<std::size_t> channel_;
};

}  // namespace banach_oc
