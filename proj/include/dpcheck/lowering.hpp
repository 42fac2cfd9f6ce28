#pragma once

/// Compiles a checked ProgramAst into an equivalent circuit: one input
/// record per program input, one random bit per `random` draw, outputs the
/// concatenated return bundles. The construction is size-linear in the
/// program (ripple-carry adders, shift-and-add multipliers, per-branch
/// muxes over the variables either branch assigns).

#include <cstdint>
#include <vector>

#include "dpcheck/circuit.hpp"
#include "dpcheck/dsl.hpp"

namespace dpcheck {

/// k wires carrying a variable's current value, index i = bit of weight 2^i.
using WireBundle = std::vector<NodeId>;

enum class ArithKind : std::uint8_t { Add, Sub, Mul, Gt, Ge, Eq, Const, Mux };

/// Appends one arithmetic block to the builder and returns its result
/// bundle (always `width` wires, computed mod 2^width):
///   Add/Sub/Mul: operands {a, b}
///   Gt/Ge/Eq:    operands {a, b}; result holds 0 or 1
///   Const:       no operands; const_value gives the bits
///   Mux:         operands {guard (1 wire), left, right}; left when guard=1
WireBundle build_arith_block(CircuitBuilder& builder, ArithKind kind, std::uint32_t width,
                             const std::vector<WireBundle>& operands,
                             std::uint64_t const_value = 0);

/// Distribution-equivalent circuit for a checked program: for every input
/// tuple, output_distribution(compile(p), x) == interpret(p, x).
Circuit compile(const ProgramAst& program);

}  // namespace dpcheck
