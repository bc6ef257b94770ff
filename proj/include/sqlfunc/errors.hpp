#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqlfunc {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// -- SQL frontend ----------------------------------------------------------

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, std::string expected)
      : Error("syntax error at position " + std::to_string(position) +
              ": expected " + expected),
        position(position),
        expected(std::move(expected)) {}
  std::size_t position;
  std::string expected;
};

class UnsupportedFeature : public Error {
 public:
  explicit UnsupportedFeature(std::string token)
      : Error("unsupported SQL feature: " + token), token(std::move(token)) {}
  std::string token;
};

class UnknownTable : public Error {
 public:
  explicit UnknownTable(std::string name)
      : Error("unknown table: " + name), name(std::move(name)) {}
  std::string name;
};

class UnknownColumn : public Error {
 public:
  explicit UnknownColumn(std::string name)
      : Error("unknown column: " + name), name(std::move(name)) {}
  std::string name;
};

class AmbiguousColumn : public Error {
 public:
  AmbiguousColumn(std::string name, std::vector<std::string> candidates)
      : Error("ambiguous column: " + name), name(std::move(name)),
        candidates(std::move(candidates)) {}
  std::string name;
  std::vector<std::string> candidates;
};

// -- relational IR ---------------------------------------------------------

class LoweringError : public Error {
 public:
  explicit LoweringError(const std::string& msg)
      : Error("lowering error: " + msg) {}
};

class FixpointNotReached : public Error {
 public:
  explicit FixpointNotReached(int passes)
      : Error("rule fixpoint not reached after " + std::to_string(passes) +
              " passes"),
        passes(passes) {}
  int passes;
};

class InvalidRot : public Error {
 public:
  explicit InvalidRot(const std::string& msg)
      : Error("invalid operator tree: " + msg) {}
};

// -- graphs / model --------------------------------------------------------

class InvalidSeed : public Error {
 public:
  explicit InvalidSeed(const std::string& msg)
      : Error("invalid seed pair: " + msg) {}
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& msg)
      : Error("shape mismatch: " + msg) {}
};

class OpcodeOutOfRange : public Error {
 public:
  explicit OpcodeOutOfRange(int opcode)
      : Error("opcode out of range: " + std::to_string(opcode)),
        opcode(opcode) {}
  int opcode;
};

class NonFiniteActivation : public Error {
 public:
  explicit NonFiniteActivation(const std::string& where)
      : Error("non-finite activation in " + where) {}
};

class GradMismatch : public Error {
 public:
  GradMismatch(std::string tensor, double err)
      : Error("gradient mismatch in tensor " + tensor + ", relative error " +
              std::to_string(err)),
        tensor(std::move(tensor)),
        err(err) {}
  std::string tensor;
  double err;
};

// -- harness ---------------------------------------------------------------

class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& msg)
      : Error("format error at line " + std::to_string(line) + ": " + msg),
        line(line) {}
  std::size_t line;
};

class MissingSchema : public Error {
 public:
  explicit MissingSchema(std::string db_id)
      : Error("missing schema for db_id: " + db_id), db_id(std::move(db_id)) {}
  std::string db_id;
};

class DegenerateLabels : public Error {
 public:
  explicit DegenerateLabels(const std::string& msg)
      : Error("degenerate labels: " + msg) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& msg)
      : Error("training diverged: " + msg) {}
};

}  // namespace sqlfunc
