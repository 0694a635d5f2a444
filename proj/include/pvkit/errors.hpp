#pragma once

#include <stdexcept>
#include <string>

namespace pvkit {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Input-shaped errors (malformed files, empty inputs).
class ParseError : public Error {
public:
  using Error::Error;
};

class EmptyInput : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Constraint violations on otherwise well-formed input.
class DisjointnessViolation : public Error {
public:
  using Error::Error;
};

class NoMatchingRows : public Error {
public:
  using Error::Error;
};

class DegenerateTable : public Error {
public:
  using Error::Error;
};

class DegenerateMarginals : public Error {
public:
  using Error::Error;
};

class ImpossibleBaseline : public Error {
public:
  using Error::Error;
};

// Numerical fitting failures.
class FitFailure : public Error {
public:
  using Error::Error;
};

class GridFailure : public Error {
public:
  using Error::Error;
};

class AicFailure : public Error {
public:
  using Error::Error;
};

}  // namespace pvkit
