#ifndef DLIVM_ERRORS_HPP
#define DLIVM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dlivm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    int line;
    int column;
    ParseError(std::string msg, int line_, int column_)
        : Error("parse error at " + std::to_string(line_) + ":" + std::to_string(column_) + ": " + std::move(msg)),
          line(line_), column(column_) {}
};

// A rule variable is not bound by any positive body atom (or earlier built-in).
struct SafetyError : Error {
    std::string variable;
    SafetyError(std::string var, const std::string& rule)
        : Error("unsafe rule: variable " + var + " is not bound in " + rule), variable(std::move(var)) {}
};

struct NotStratifiableError : Error {
    explicit NotStratifiableError(const std::string& detail)
        : Error("program is not stratifiable: " + detail) {}
};

struct GroundnessError : Error {
    explicit GroundnessError(const std::string& detail)
        : Error("fact is not ground: " + detail) {}
};

struct ArityError : Error {
    explicit ArityError(const std::string& detail) : Error("arity mismatch: " + detail) {}
};

struct CounterOverflow : Error {
    CounterOverflow() : Error("derivation counter overflow") {}
};

// A counter went below zero: the input counters were not compatible with the
// program and explicit facts. The state must be considered corrupted.
struct CounterUnderflow : Error {
    explicit CounterUnderflow(const std::string& fact)
        : Error("derivation counter underflow on " + fact + " (incompatible counters)") {}
};

struct ArithmeticOverflow : Error {
    ArithmeticOverflow() : Error("built-in arithmetic overflow") {}
};

struct UnboundBuiltinError : Error {
    explicit UnboundBuiltinError(const std::string& rule)
        : Error("no admissible ordering binds a built-in in " + rule) {}
};

struct InfeasibleGraph : Error {
    explicit InfeasibleGraph(const std::string& detail) : Error("infeasible graph: " + detail) {}
};

}  // namespace dlivm

#endif
