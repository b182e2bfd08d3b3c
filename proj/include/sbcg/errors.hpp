#pragma once

#include <stdexcept>
#include <string>

namespace sbcg {

// Base of every error the library throws. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The cutting plane excludes the whole feasible set.
class InfeasibleCut : public Error {
 public:
  using Error::Error;
};

// Root bracketing for the ball-product subproblem found no sign change.
class BracketFailure : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ReferenceFailure : public Error {
 public:
  ReferenceFailure(const std::string& what, double achieved_gap)
      : Error(what), achieved_gap_(achieved_gap) {}
  double achieved_gap() const { return achieved_gap_; }

 private:
  double achieved_gap_;
};

class WarmStartFailure : public Error {
 public:
  WarmStartFailure(const std::string& what, double gap) : Error(what), gap_(gap) {}
  double gap() const { return gap_; }

 private:
  double gap_;
};

class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, long row, long column)
      : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
        row_(row),
        column_(column) {}
  long row() const { return row_; }
  long column() const { return column_; }

 private:
  long row_;
  long column_;
};

}  // namespace sbcg
