#pragma once

/// Frontend for the loop-free probabilistic source language (.dpp files).
///
/// Programs are built from boolean and k-bit integer expressions:
///
///   p ::= input(t); c; return(t)
///   c ::= SKIP | x := e | c; c | if b then c else c
///   b ::= true | false | random | x | b&b | b|b | !b | e>e | e>=e | e=e
///   e ::= 0..2^k-1 | x | e+e | e*e | e-e | (e) | b | sample
///
/// Commands are separated by newlines or ';'. The UTF-8 operator spellings
/// from the written grammar are accepted as well. Arithmetic wraps mod 2^k;
/// `sample` is sugar for 2^(k-1)*random + ... + 2^0*random; an optional
/// first-line pragma `#width <k>` selects the integer width (default 1).
/// Other '#' lines are comments.
///
/// Variables hold k-bit values everywhere. A variable in boolean position
/// (an if guard or an operand of & | !) reads as value != 0; booleans in
/// integer position read as 0/1; any other integer expression in boolean
/// position is a type error.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpcheck/circuit.hpp"

namespace dpcheck {

enum class ExprKind : std::uint8_t {
    True, False, Random, Const, Var,
    And, Or, Not, Gt, Ge, Eq, Add, Sub, Mul,
};

struct Expr {
    ExprKind kind;
    std::uint32_t value = 0;    // Const
    std::string name;           // Var
    std::vector<Expr> args;     // 1 operand for Not, 2 for binary kinds
    std::size_t line = 0;
    std::size_t column = 0;
    std::int32_t coin_index = -1;  // Random: fixed draw index, set by the checker
};

enum class CmdKind : std::uint8_t { Skip, Assign, Seq, If };

struct Command {
    CmdKind kind;
    std::string target;             // Assign
    std::optional<Expr> expr;       // Assign rhs / If guard
    std::vector<Command> children;  // Seq: command list; If: {then, else}
    std::size_t line = 0;
    std::size_t column = 0;
};

struct ProgramAst {
    std::vector<std::string> input_vars;
    Command body;  // always a Seq
    std::vector<std::string> return_vars;
    std::uint32_t width = 1;      // k
    std::uint32_t num_draws = 0;  // random occurrences after desugaring

    /// Total AST node count (commands + expression nodes), used for the
    /// compiled-size bound.
    std::size_t size() const;
};

/// Parses, desugars `sample`, numbers the random draws and runs all static
/// checks (use-before-assign, constant range, boolean/integer positions).
/// Throws SyntaxError, UseBeforeAssignError, ConstantOutOfRangeError or
/// TypeError, each carrying a source position.
ProgramAst parse_program(const std::string& text);

/// Reference semantics: enumerates all 2^num_draws assignments of the
/// program's coins and tallies the return tuples exactly. Keys follow the
/// circuit convention (per-variable k bits, LSB first).
/// Throws ResourceBoundError when num_draws exceeds max_draws, LengthError
/// on a bad input tuple.
OutputDistribution interpret(const ProgramAst& program, const std::vector<std::uint32_t>& inputs,
                             unsigned max_draws = kDefaultMaxRandomBits);

}  // namespace dpcheck
