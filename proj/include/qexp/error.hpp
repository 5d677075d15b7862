#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qexp {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A malformed input line. `line()` is 1-based; 0 means the error is not
/// tied to a single line (e.g. an unreadable file).
class ParseError : public Error {
  public:
    ParseError(std::string source, std::size_t line, const std::string& message)
        : Error(source + ":" + std::to_string(line) + ": " + message),
          m_source(std::move(source)),
          m_line(line)
    {}

    const std::string& source() const noexcept { return m_source; }
    std::size_t line() const noexcept { return m_line; }

  private:
    std::string m_source;
    std::size_t m_line;
};

/// Violated precondition or invariant on caller-supplied values.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Network-level failure that survived all retries.
class TransportError : public Error {
  public:
    using Error::Error;
};

/// The remote side answered, but with something we cannot use. Not retried.
class ProtocolError : public Error {
  public:
    using Error::Error;
};

}  // namespace qexp
