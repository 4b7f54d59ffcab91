#pragma once

#include <stdexcept>
#include <string>

namespace ripalm {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Cholesky pivot was non-positive, or the matrix failed the symmetry check.
class NotSpd : public Error {
 public:
  using Error::Error;
};

/// PCG observed <p, Ap> <= 0.
class Breakdown : public Error {
 public:
  using Error::Error;
};

/// Backtracking exceeded its step budget (non-descent direction or gradient bug).
class LinesearchFailed : public Error {
 public:
  using Error::Error;
};

/// The semismooth Newton loop ran out of inner iterations before acceptance.
class InnerBudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// The outer loop could not obtain an acceptable subproblem solution.
class SubsolverStalled : public Error {
 public:
  using Error::Error;
};

/// A grayscale image had zero total mass.
class ZeroMass : public Error {
 public:
  using Error::Error;
};

/// Every Gibbs kernel entry rounded to zero.
class Underflow : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent user input (files, parameters, generator specs).
class InputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ripalm
