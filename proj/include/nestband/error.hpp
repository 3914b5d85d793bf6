#pragma once

#include <stdexcept>
#include <string>

namespace nestband {

// Invalid input: wrong shape, out-of-range parameter, precondition not met.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed text input (CSV cells, config lines, grid specs).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An estimate or input matrix is singular where an inverse is required.
class SingularError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A guaranteed property of an algorithm was violated. Indicates a bug.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace nestband
