// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace invprob {

/// Precondition or argument violation.
class InvalidArgument : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A construction would exceed a configured resource cap (net size, node budget).
class ResourceError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Ill-posedness or a numerical procedure that failed to certify its result.
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration; `line` is 0 when unknown.
class ConfigError : public std::runtime_error
{
public:
  explicit ConfigError(const std::string& what, long line = 0)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                  : what)
    , line_(line)
  {
  }
  long line() const noexcept { return line_; }

private:
  long line_;
};

namespace detail {
inline void require(bool cond, const std::string& msg)
{
  if (!cond)
    throw InvalidArgument(msg);
}
} // namespace detail

} // namespace invprob
