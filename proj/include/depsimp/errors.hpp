#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace depsimp {

// Malformed input line in a text format (CoNLL-U, POS corpus, vector file).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed lines that do not make a dependency tree.
class StructureError : public std::runtime_error {
 public:
  StructureError(std::size_t sentence, const std::string& what)
      : std::runtime_error("sentence " + std::to_string(sentence) + ": " + what),
        sentence_(sentence) {}
  std::size_t sentence() const noexcept { return sentence_; }

 private:
  std::size_t sentence_;
};

class TrainingError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Saved model is truncated, corrupt or written by an incompatible version.
class ModelFormatError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Zero vector passed to cosine.
class DegenerateInput : public std::domain_error {
  using std::domain_error::domain_error;
};

// Remote service failure that may succeed on a later attempt.
class TransportError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace depsimp
