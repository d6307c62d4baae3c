#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace idr {

// Every failure raised by the library derives from idr::error so callers
// (the CLI in particular) can map them to exit codes in one place.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class invalid_argument_error : public error {
 public:
  using error::error;
};

class shape_error : public error {
 public:
  using error::error;
};

class numeric_error : public error {
 public:
  using error::error;
};

class missing_id_error : public error {
 public:
  explicit missing_id_error(const std::string& id)
      : error("missing id: " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class unknown_sense_error : public error {
 public:
  explicit unknown_sense_error(const std::string& sense)
      : error("unknown sense: " + sense) {}
};

class id_format_error : public error {
 public:
  using error::error;
};

class empty_composition_error : public error {
 public:
  using error::error;
};

class divergence_error : public error {
 public:
  divergence_error(std::size_t epoch, const std::string& what)
      : error("training diverged in epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

// Invalid experiment configuration or command-line usage.
class config_error : public error {
 public:
  using error::error;
};

class mismatch_error : public error {
 public:
  using error::error;
};

// Parse failure in one of the on-disk formats. line() is 1-based, 0 when the
// failure is not tied to a line (e.g. missing file).
class format_error : public error {
 public:
  format_error(const std::string& source, std::size_t line, const std::string& what)
      : error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace idr
