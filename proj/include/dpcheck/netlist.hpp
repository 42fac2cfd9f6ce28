#pragma once

/// Textual netlist format for circuits, one statement per line:
///
///   meta n=<int> k=<int> m=<int> [conditioned success=<outIdx>]
///   in <id> <record> <bit>
///   rnd <id> <index>
///   <id> = AND|OR|XOR <a> <b>
///   <id> = NOT <a>
///   out <id> [<id> ...]
///
/// Identifiers match [a-z0-9_]+, parsing is case-sensitive, '#' starts a
/// comment, and the meta line must precede all statements. Unknown
/// directives are errors.

#include <string>

#include "dpcheck/circuit.hpp"

namespace dpcheck {

/// Throws SyntaxError (with line info) or ArityError on malformed input;
/// structural violations surface as the usual build_circuit errors.
Circuit parse_netlist(const std::string& text);

std::string emit_netlist(const Circuit& circuit);

}  // namespace dpcheck
