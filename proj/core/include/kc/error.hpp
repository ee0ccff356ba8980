#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kc {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (TSV line, JSON record, config entry).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Graph-level failures: empty graph after filtering, unknown entity where one is required.
class GraphError : public Error {
 public:
  using Error::Error;
};

// A sampling step could not produce a valid result (no center, degenerate component, ...).
class SamplingError : public Error {
 public:
  using Error::Error;
};

// A difficulty tier (or NOTA variant) cannot be built for a question graph.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class RenderError : public Error {
 public:
  using Error::Error;
};

// Responder transport failure after the retry budget is spent.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int status) : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// The prompt did not fit the model context; scored as an unfinished response.
class ContextOverflowError : public Error {
 public:
  using Error::Error;
};

}  // namespace kc
