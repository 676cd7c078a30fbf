#pragma once

#include <stdexcept>
#include <string>

namespace flowq {

// Root of every error thrown by the library. Callers that only care about
// "something in flowq failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad size, out-of-range value).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Total qubit count would exceed the configured cap.
class QubitCapExceeded : public Error {
 public:
  using Error::Error;
};

// Operator failed its unitarity / Hermiticity / bijectivity check.
class NotUnitary : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

// Post-selection on a branch whose probability is below the zero threshold.
class ImpossibleOutcome : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

}  // namespace flowq
