#pragma once

/// Generators for circuits with analytically known privacy status:
/// randomized-response mechanisms and the reduction constructions tying
/// privacy verdicts to satisfiability counting. These serve as fixtures,
/// benchmarks and ground-truth oracles for the verifier; their expected
/// verdicts come from the closed-form laws plus brute-forced satisfying
/// fractions, never from the verifier itself.

#include <cstdint>
#include <vector>

#include "dpcheck/circuit.hpp"
#include "dpcheck/rational.hpp"
#include "dpcheck/verifier.hpp"

namespace dpcheck {

/// Probability j/2^s, the only kind realizable with finitely many fair
/// coins.
struct DyadicProb {
    std::uint64_t j = 0;
    std::uint32_t s = 0;

    /// Throws InvalidProbabilityError for p outside [0, 1], NonDyadicError
    /// when the canonical denominator is not a power of two.
    static DyadicProb from_rational(const Rational& p);

    Rational value() const { return Rational(BigInt(static_cast<unsigned long>(j)), pow2(s)); }
};

/// A quantifier-free formula as a deterministic single-output circuit over
/// num_vars one-bit records. num_vars == 0 is allowed for constant
/// formulas; the circuit then carries one padding record its output must
/// not depend on.
struct FormulaCircuit {
    Circuit circuit;
    std::uint32_t num_vars = 0;

    /// Validates single output, no randoms, record width 1.
    static FormulaCircuit from_circuit(Circuit circuit);
};

FormulaCircuit formula_true(std::uint32_t num_vars);
FormulaCircuit formula_false(std::uint32_t num_vars);
/// DIMACS-style literals: +i / -i for variable i-1. A conjunction of no
/// literals is true, a disjunction of none is false.
FormulaCircuit formula_conj(std::uint32_t num_vars, const std::vector<int>& literals);
FormulaCircuit formula_disj(std::uint32_t num_vars, const std::vector<int>& literals);

/// Brute-forced satisfying fraction of phi per assignment to its first
/// num_x_vars variables (entry index encodes the assignment, variable i at
/// bit i), counting over the remaining variables.
std::vector<Rational> satisfying_fractions(const FormulaCircuit& phi, std::uint32_t num_x_vars);

/// Randomized response: flips the 1-bit input with probability exactly p
/// (p <= 1/2), using s coins compared against the constant j. For
/// p = 1/(1+alpha) the mechanism is exactly ln(alpha)-DP.
Circuit gen_rr(const DyadicProb& p);

/// Two-output variant (flag, value): with probability delta reveal the
/// input under a raised flag, otherwise run randomized response at
/// 1/(1+alpha). Requires (1-delta)/(1+alpha) dyadic; the minimal
/// delta at alpha is then exactly the delta parameter.
Circuit gen_rr_approx(const DyadicProb& delta, const EpsRatio& alpha);

/// Reduction gadget: input z, randomized x/y/p1, computes
/// b = z XOR NOT(p1 OR phi(x, y)) and outputs (x, b). ln(3)-DP holds iff
/// every x satisfies phi on at most half of the y assignments.
Circuit gen_allminsat_gadget(const FormulaCircuit& phi, std::uint32_t num_x_vars);

enum class ShapeVariant : std::uint8_t { LargeInput, LargeOutput, SmallIO };

/// Circuit-shape gadgets with one, many or few input/output bits:
///   LargeInput: inputs (x, z), 1 output; Pr[1|z=0] = 1/2,
///               Pr[1|z=1] = 1/2 + g(x)/4
///   LargeOutput: input z, outputs (x, bit) with x random, same law
///   SmallIO: input z, 1 output flipped with probability g/2; the exact
///            pure-DP boundary is alpha = (2-g)/g (num_x_vars ignored)
Circuit gen_shape_gadget(ShapeVariant variant, const FormulaCircuit& phi,
                         std::uint32_t num_x_vars);

/// Comparator [input word < b] over k one-bit records (record i = bit of
/// weight 2^i): true on exactly b of the 2^k words and false on the
/// all-ones word whenever b < 2^k.
Circuit gen_threshold(std::uint64_t b, std::uint32_t k);

/// Inputs (z, x_1..x_n), output z AND phi(x, r): (eps, f)-DP for every
/// eps iff every x satisfies phi on at most an f fraction of the r draws.
Circuit gen_allfrac_gadget(const FormulaCircuit& phi, std::uint32_t num_x_vars);

/// Inputs (x_1..x_n, y), outputs (o1, o2, o3, o4) where (o1, o2) applies
/// the (alpha, delta) response to y and (o3, o4) applies the stronger
/// (alpha2, delta2) response to phi(x). Exactly (alpha2, delta2)-DP when
/// phi is non-constant, exactly (alpha, delta)-DP when constant.
Circuit gen_distinguish_gadget(const FormulaCircuit& phi, const EpsRatio& alpha,
                               const DyadicProb& delta, const EpsRatio& alpha2,
                               const DyadicProb& delta2);

/// phi'(x, x_{n+1}) = phi(x) AND x_{n+1}: never a tautology, satisfiable
/// iff phi is.
FormulaCircuit augment_not_tautology(const FormulaCircuit& phi);

/// Wraps a circuit with a constant success flag as output 0 (conditioning
/// fixture): with success=true verdicts match the unconditioned circuit,
/// with success=false every check rejects.
Circuit with_success_flag(const Circuit& circuit, bool success);

/// One ground-truth entry: the verdict the verifier must reach at (alpha,
/// delta).
struct ExpectedVerdict {
    Rational alpha;
    Rational delta;
    bool holds;
};

std::vector<ExpectedVerdict> rr_expected(const DyadicProb& p);
std::vector<ExpectedVerdict> rr_approx_expected(const DyadicProb& delta, const EpsRatio& alpha);
std::vector<ExpectedVerdict> allminsat_expected(const FormulaCircuit& phi,
                                                std::uint32_t num_x_vars);
std::vector<ExpectedVerdict> shape_expected(ShapeVariant variant, const FormulaCircuit& phi,
                                            std::uint32_t num_x_vars);
std::vector<ExpectedVerdict> allfrac_expected(const FormulaCircuit& phi, std::uint32_t num_x_vars,
                                              const Rational& f);
std::vector<ExpectedVerdict> distinguish_expected(const FormulaCircuit& phi,
                                                  const EpsRatio& alpha, const DyadicProb& delta,
                                                  const EpsRatio& alpha2,
                                                  const DyadicProb& delta2);

}  // namespace dpcheck
