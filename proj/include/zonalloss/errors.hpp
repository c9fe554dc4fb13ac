#pragma once

#include <stdexcept>
#include <string>

namespace zonalloss {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// milp-kernel
class MalformedProblem : public Error {
 public:
  using Error::Error;
};
class NodeLimitExceeded : public Error {
 public:
  using Error::Error;
};
class InfeasibleFixing : public Error {
 public:
  using Error::Error;
};

// clearing formulations
class UncalibratedLine : public Error {
 public:
  using Error::Error;
};
class SegmentGridMismatch : public Error {
 public:
  using Error::Error;
};
class StatusNotOptimal : public Error {
 public:
  using Error::Error;
};

// calibration
class OutOfRange : public Error {
 public:
  using Error::Error;
};
class NoNonzeroFlows : public Error {
 public:
  using Error::Error;
};

// study runner
class CalibrationMissing : public Error {
 public:
  using Error::Error;
};
class SeriesMismatch : public Error {
 public:
  using Error::Error;
};

// dataset io
class ParseError : public Error {
 public:
  ParseError(const std::string& file, long line, long column, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        file_(file),
        line_(line),
        column_(column) {}

  const std::string& file() const { return file_; }
  long line() const { return line_; }
  long column() const { return column_; }

 private:
  std::string file_;
  long line_;
  long column_;
};
class ReferentialError : public Error {
 public:
  using Error::Error;
};
class UnmappedNode : public Error {
 public:
  using Error::Error;
};

}  // namespace zonalloss
