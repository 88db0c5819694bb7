#pragma once

#include <stdexcept>
#include <string>

namespace aebss {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Channel counts, lengths or sample rates that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Learning produced a non-finite value.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t bin, std::size_t pass)
      : Error(what), bin_(bin), pass_(pass) {}
  std::size_t bin() const { return bin_; }
  std::size_t pass() const { return pass_; }

 private:
  std::size_t bin_;
  std::size_t pass_;
};

// All-zero row or filter where a nonzero one is required.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& what, std::size_t bin)
      : Error(what), bin_(bin) {}
  std::size_t bin() const { return bin_; }

 private:
  std::size_t bin_;
};

// A mixing column carries no usable peak in either sensor row.
class MissingSourceError : public Error {
 public:
  MissingSourceError(const std::string& what, std::size_t column)
      : Error(what), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

// Malformed input file or JSON document.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace aebss
