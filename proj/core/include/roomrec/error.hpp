#pragma once

#include <stdexcept>
#include <string>

namespace roomrec {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value (e.g. carrier above Nyquist).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Record of the wrong length handed to the framing code.
class FramingError : public Error {
  public:
    using Error::Error;
};

class ArgumentError : public Error {
  public:
    using Error::Error;
};

class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Split/volume request that the stored data cannot satisfy.
class PolicyError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

class CaptureError : public Error {
  public:
    using Error::Error;
};

class TransportError : public Error {
  public:
    using Error::Error;
};

/// Malformed file or payload. `field()` names the offending header field or section.
class FormatError : public Error {
  public:
    FormatError(std::string field, const std::string &what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    [[nodiscard]] const std::string &field() const noexcept { return field_; }

  private:
    std::string field_;
};

/// Training diverged; `step()` is the SGD step at which a non-finite loss appeared.
class TrainingError : public Error {
  public:
    TrainingError(long step, const std::string &what)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

    [[nodiscard]] long step() const noexcept { return step_; }

  private:
    long step_;
};

}  // namespace roomrec
