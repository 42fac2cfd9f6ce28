#include "dpcheck/gadgets.hpp"

#include <algorithm>

#include "dpcheck/errors.hpp"

namespace dpcheck {

namespace {

// [word < value] over wires interpreted LSB-first; value <= 2^bits.
NodeId less_than_const(CircuitBuilder& b, const std::vector<NodeId>& bits, std::uint64_t value) {
    if (value == 0) return b.const_zero();
    if (bits.size() < 64 && value >= (1ull << bits.size())) return b.const_one();

    std::optional<NodeId> less;
    std::optional<NodeId> equal_so_far;
    for (std::size_t i = bits.size(); i-- > 0;) {
        const bool vbit = ((value >> i) & 1ull) != 0;
        if (vbit) {
            NodeId term = b.add_not(bits[i]);
            if (equal_so_far) term = b.add_and(*equal_so_far, term);
            less = less ? b.add_or(*less, term) : term;
            equal_so_far = equal_so_far ? b.add_and(*equal_so_far, bits[i]) : bits[i];
        } else {
            const NodeId nb = b.add_not(bits[i]);
            equal_so_far = equal_so_far ? b.add_and(*equal_so_far, nb) : nb;
        }
    }
    return *less;
}

/// Copies phi's gates into the builder, substituting its variable records
/// by the given nodes; returns the node carrying phi's output. A zero-var
/// formula has one padding record, wired to an arbitrary constant.
NodeId splice_formula(CircuitBuilder& b, const FormulaCircuit& phi,
                      const std::vector<NodeId>& vars) {
    if (vars.size() != phi.num_vars) {
        throw UsageError("formula expects " + std::to_string(phi.num_vars) + " variables, got " +
                         std::to_string(vars.size()));
    }
    const NodeId padding = phi.num_vars == 0 ? b.const_one() : 0;
    std::vector<NodeId> remap(phi.circuit.nodes().size());
    for (std::size_t i = 0; i < phi.circuit.nodes().size(); ++i) {
        const Gate& g = phi.circuit.nodes()[i];
        switch (g.kind) {
            case GateKind::InputBit:
                remap[i] = g.a < phi.num_vars ? vars[g.a] : padding;
                break;
            case GateKind::RandomBit:
                throw UsageError("formula circuits must be deterministic");
            case GateKind::And: remap[i] = b.add_and(remap[g.a], remap[g.b]); break;
            case GateKind::Or: remap[i] = b.add_or(remap[g.a], remap[g.b]); break;
            case GateKind::Xor: remap[i] = b.add_xor(remap[g.a], remap[g.b]); break;
            case GateKind::Not: remap[i] = b.add_not(remap[g.a]); break;
        }
    }
    return remap[phi.circuit.outputs()[0]];
}

struct RrThresholds {
    std::uint32_t s = 0;   // number of coins
    std::uint64_t t1 = 0;  // [w < t1] reveals
    std::uint64_t t2 = 0;  // [w >= t2] flips
};

// Splits [0, 2^s) into reveal/keep/flip ranges of exact mass delta,
// (1-delta)*alpha/(1+alpha) and (1-delta)/(1+alpha).
RrThresholds rr_thresholds(const DyadicProb& delta, const EpsRatio& alpha) {
    const Rational flip =
        (Rational(1) - delta.value()) * Rational(alpha.v(), alpha.u() + alpha.v());
    DyadicProb flip_d;
    try {
        flip_d = DyadicProb::from_rational(flip);
    } catch (const NonDyadicError&) {
        throw NonDyadicError("(1-delta)/(1+alpha) = " + flip.str() +
                             " is not realizable with fair coins");
    }
    RrThresholds t;
    t.s = std::max(delta.s, flip_d.s);
    t.t1 = delta.j << (t.s - delta.s);
    t.t2 = (1ull << t.s) - (flip_d.j << (t.s - flip_d.s));
    return t;
}

struct RrOutputs {
    NodeId flag;
    NodeId value;
};

RrOutputs build_rr(CircuitBuilder& b, NodeId value_bit, const std::vector<NodeId>& coins,
                   const RrThresholds& t) {
    const NodeId flag = less_than_const(b, coins, t.t1);
    const NodeId keep = less_than_const(b, coins, t.t2);
    const NodeId flipped = b.add_xor(value_bit, b.add_not(keep));
    return {flag, flipped};
}

bool is_constant_formula(const FormulaCircuit& phi) {
    const auto fractions = satisfying_fractions(phi, phi.num_vars);
    return std::all_of(fractions.begin(), fractions.end(),
                       [&](const Rational& f) { return f == fractions.front(); });
}

Rational max_fraction(const FormulaCircuit& phi, std::uint32_t num_x_vars) {
    const auto fractions = satisfying_fractions(phi, num_x_vars);
    Rational best(0);
    for (const Rational& f : fractions) {
        if (f > best) best = f;
    }
    return best;
}

// A rational strictly between 1 and alpha (for "just below the boundary"
// fixtures).
Rational just_below(const Rational& alpha) {
    return Rational(1) + (alpha - Rational(1)) * Rational(999, 1000);
}

}  // namespace

DyadicProb DyadicProb::from_rational(const Rational& p) {
    if (p.sign() < 0 || p > Rational(1)) {
        throw InvalidProbabilityError("probability " + p.str() + " outside [0, 1]");
    }
    const BigInt& den = p.den();
    if (mpz_popcount(den.get_mpz_t()) != 1) {
        throw NonDyadicError("probability " + p.str() + " has a non-power-of-two denominator");
    }
    const std::size_t s = mpz_sizeinbase(den.get_mpz_t(), 2) - 1;
    if (s > 62) {
        throw ResourceBoundError("dyadic probability needs " + std::to_string(s) + " coins");
    }
    DyadicProb d;
    d.s = static_cast<std::uint32_t>(s);
    d.j = mpz_get_ui(p.num().get_mpz_t());
    return d;
}

FormulaCircuit FormulaCircuit::from_circuit(Circuit circuit) {
    if (circuit.num_outputs() != 1 || circuit.conditioned()) {
        throw UsageError("formula circuits have exactly one output");
    }
    if (circuit.num_random_bits() != 0) {
        throw UsageError("formula circuits must be deterministic");
    }
    if (circuit.record_width() != 1) {
        throw UsageError("formula circuits use one-bit records");
    }
    FormulaCircuit phi;
    phi.num_vars = circuit.num_records();
    phi.circuit = std::move(circuit);
    return phi;
}

FormulaCircuit formula_true(std::uint32_t num_vars) {
    CircuitBuilder b(std::max(num_vars, 1u), 1, 0);
    b.add_output(b.const_one());
    FormulaCircuit phi;
    phi.circuit = b.build();
    phi.num_vars = num_vars;
    return phi;
}

FormulaCircuit formula_false(std::uint32_t num_vars) {
    CircuitBuilder b(std::max(num_vars, 1u), 1, 0);
    b.add_output(b.const_zero());
    FormulaCircuit phi;
    phi.circuit = b.build();
    phi.num_vars = num_vars;
    return phi;
}

namespace {

FormulaCircuit formula_from_literals(std::uint32_t num_vars, const std::vector<int>& literals,
                                     bool conjunction) {
    if (literals.empty()) {
        return conjunction ? formula_true(num_vars) : formula_false(num_vars);
    }
    CircuitBuilder b(std::max(num_vars, 1u), 1, 0);
    std::optional<NodeId> acc;
    for (int lit : literals) {
        const std::uint32_t var = static_cast<std::uint32_t>(lit < 0 ? -lit : lit) - 1;
        if (lit == 0 || var >= num_vars) {
            throw UsageError("literal " + std::to_string(lit) + " out of range");
        }
        NodeId node = b.add_input(var, 0);
        if (lit < 0) node = b.add_not(node);
        acc = acc ? (conjunction ? b.add_and(*acc, node) : b.add_or(*acc, node)) : node;
    }
    b.add_output(*acc);
    FormulaCircuit phi;
    phi.circuit = b.build();
    phi.num_vars = num_vars;
    return phi;
}

}  // namespace

FormulaCircuit formula_conj(std::uint32_t num_vars, const std::vector<int>& literals) {
    return formula_from_literals(num_vars, literals, true);
}

FormulaCircuit formula_disj(std::uint32_t num_vars, const std::vector<int>& literals) {
    return formula_from_literals(num_vars, literals, false);
}

std::vector<Rational> satisfying_fractions(const FormulaCircuit& phi, std::uint32_t num_x_vars) {
    if (num_x_vars > phi.num_vars) {
        throw UsageError("x split exceeds the formula's variable count");
    }
    const std::uint32_t num_y = phi.num_vars - num_x_vars;
    if (phi.num_vars > 24) {
        throw ResourceBoundError("formula truth table too large to brute-force");
    }
    const std::uint32_t record_count = phi.circuit.num_records();
    const BigInt denom = pow2(num_y);

    std::vector<Rational> fractions;
    fractions.reserve(1u << num_x_vars);
    for (std::uint32_t x = 0; x < (1u << num_x_vars); ++x) {
        std::uint64_t count = 0;
        for (std::uint64_t y = 0; y < (1ull << num_y); ++y) {
            InputWord w;
            w.records.assign(record_count, 0);
            for (std::uint32_t i = 0; i < num_x_vars; ++i) {
                w.records[i] = (x >> i) & 1u;
            }
            for (std::uint32_t i = 0; i < num_y; ++i) {
                w.records[num_x_vars + i] = static_cast<std::uint32_t>((y >> i) & 1u);
            }
            if (evaluate(phi.circuit, w, {}) == "1") ++count;
        }
        fractions.emplace_back(BigInt(static_cast<unsigned long>(count)), denom);
    }
    return fractions;
}

// -- mechanisms -----------------------------------------------------------------

Circuit gen_rr(const DyadicProb& p) {
    if (p.value() > Rational(1, 2)) {
        throw InvalidProbabilityError("flip probability " + p.value().str() + " exceeds 1/2");
    }
    if (p.j == 0) {
        // No flip mass: the identity mechanism needs no coins.
        CircuitBuilder b(1, 1, 0);
        b.add_output(b.add_input(0, 0));
        return b.build();
    }
    CircuitBuilder b(1, 1, p.s);
    const NodeId x = b.add_input(0, 0);
    std::vector<NodeId> coins;
    coins.reserve(p.s);
    for (std::uint32_t i = 0; i < p.s; ++i) coins.push_back(b.add_random(i));
    const NodeId flip = less_than_const(b, coins, p.j);
    b.add_output(b.add_xor(x, flip));
    return b.build();
}

Circuit gen_rr_approx(const DyadicProb& delta, const EpsRatio& alpha) {
    const RrThresholds t = rr_thresholds(delta, alpha);
    CircuitBuilder b(1, 1, t.s);
    const NodeId x = b.add_input(0, 0);
    std::vector<NodeId> coins;
    coins.reserve(t.s);
    for (std::uint32_t i = 0; i < t.s; ++i) coins.push_back(b.add_random(i));
    const RrOutputs rr = build_rr(b, x, coins, t);
    b.add_output(rr.flag);
    b.add_output(rr.value);
    return b.build();
}

// -- reduction gadgets ------------------------------------------------------------

Circuit gen_allminsat_gadget(const FormulaCircuit& phi, std::uint32_t num_x_vars) {
    if (num_x_vars > phi.num_vars) {
        throw UsageError("x split exceeds the formula's variable count");
    }
    const std::uint32_t nv = phi.num_vars;
    CircuitBuilder b(1, 1, nv + 1);
    const NodeId z = b.add_input(0, 0);
    std::vector<NodeId> vars;
    vars.reserve(nv);
    for (std::uint32_t i = 0; i < nv; ++i) vars.push_back(b.add_random(i));
    const NodeId p1 = b.add_random(nv);
    const NodeId phi_out = splice_formula(b, phi, vars);
    const NodeId flip = b.add_not(b.add_or(p1, phi_out));
    const NodeId bit = b.add_xor(z, flip);
    for (std::uint32_t i = 0; i < num_x_vars; ++i) b.add_output(vars[i]);
    b.add_output(bit);
    return b.build();
}

Circuit gen_shape_gadget(ShapeVariant variant, const FormulaCircuit& phi,
                         std::uint32_t num_x_vars) {
    if (num_x_vars > phi.num_vars) {
        throw UsageError("x split exceeds the formula's variable count");
    }
    const std::uint32_t nv = phi.num_vars;
    const std::uint32_t ny = nv - num_x_vars;

    switch (variant) {
        case ShapeVariant::SmallIO: {
            // (p1 AND z) OR (NOT p1 AND (z XOR phi(r)))
            CircuitBuilder b(1, 1, nv + 1);
            const NodeId z = b.add_input(0, 0);
            std::vector<NodeId> vars;
            for (std::uint32_t i = 0; i < nv; ++i) vars.push_back(b.add_random(i));
            const NodeId p1 = b.add_random(nv);
            const NodeId phi_out = splice_formula(b, phi, vars);
            const NodeId keep = b.add_and(p1, z);
            const NodeId flipped = b.add_and(b.add_not(p1), b.add_xor(z, phi_out));
            b.add_output(b.add_or(keep, flipped));
            return b.build();
        }
        case ShapeVariant::LargeInput: {
            // (z OR p1) AND (NOT z OR p2 OR (p3 AND phi(x, y)))
            CircuitBuilder b(num_x_vars + 1, 1, ny + 3);
            std::vector<NodeId> vars;
            for (std::uint32_t i = 0; i < num_x_vars; ++i) vars.push_back(b.add_input(i, 0));
            const NodeId z = b.add_input(num_x_vars, 0);
            for (std::uint32_t i = 0; i < ny; ++i) vars.push_back(b.add_random(i));
            const NodeId p1 = b.add_random(ny);
            const NodeId p2 = b.add_random(ny + 1);
            const NodeId p3 = b.add_random(ny + 2);
            const NodeId phi_out = splice_formula(b, phi, vars);
            const NodeId left = b.add_or(z, p1);
            const NodeId right =
                b.add_or(b.add_not(z), b.add_or(p2, b.add_and(p3, phi_out)));
            b.add_output(b.add_and(left, right));
            return b.build();
        }
        case ShapeVariant::LargeOutput: {
            // Same body with x randomized and exposed in the output word.
            CircuitBuilder b(1, 1, nv + 3);
            const NodeId z = b.add_input(0, 0);
            std::vector<NodeId> vars;
            for (std::uint32_t i = 0; i < nv; ++i) vars.push_back(b.add_random(i));
            const NodeId p1 = b.add_random(nv);
            const NodeId p2 = b.add_random(nv + 1);
            const NodeId p3 = b.add_random(nv + 2);
            const NodeId phi_out = splice_formula(b, phi, vars);
            const NodeId left = b.add_or(z, p1);
            const NodeId right =
                b.add_or(b.add_not(z), b.add_or(p2, b.add_and(p3, phi_out)));
            const NodeId bit = b.add_and(left, right);
            for (std::uint32_t i = 0; i < num_x_vars; ++i) b.add_output(vars[i]);
            b.add_output(bit);
            return b.build();
        }
    }
    throw Error("internal: unknown shape variant");
}

Circuit gen_threshold(std::uint64_t b_value, std::uint32_t k) {
    if (k == 0 || k > 62) {
        throw UsageError("threshold width must lie in [1, 62]");
    }
    if (b_value > (1ull << k)) {
        throw UsageError("threshold " + std::to_string(b_value) + " exceeds 2^" +
                         std::to_string(k));
    }
    CircuitBuilder b(k, 1, 0);
    std::vector<NodeId> bits;
    bits.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) bits.push_back(b.add_input(i, 0));
    b.add_output(less_than_const(b, bits, b_value));
    return b.build();
}

Circuit gen_allfrac_gadget(const FormulaCircuit& phi, std::uint32_t num_x_vars) {
    if (num_x_vars > phi.num_vars) {
        throw UsageError("x split exceeds the formula's variable count");
    }
    const std::uint32_t ny = phi.num_vars - num_x_vars;
    CircuitBuilder b(num_x_vars + 1, 1, ny);
    const NodeId z = b.add_input(0, 0);
    std::vector<NodeId> vars;
    for (std::uint32_t i = 0; i < num_x_vars; ++i) vars.push_back(b.add_input(i + 1, 0));
    for (std::uint32_t i = 0; i < ny; ++i) vars.push_back(b.add_random(i));
    const NodeId phi_out = splice_formula(b, phi, vars);
    b.add_output(b.add_and(z, phi_out));
    return b.build();
}

Circuit gen_distinguish_gadget(const FormulaCircuit& phi, const EpsRatio& alpha,
                               const DyadicProb& delta, const EpsRatio& alpha2,
                               const DyadicProb& delta2) {
    const bool alpha_le = alpha.value() <= alpha2.value();
    const bool delta_le = delta.value() <= delta2.value();
    const bool one_strict = alpha.value() < alpha2.value() || delta.value() < delta2.value();
    if (!alpha_le || !delta_le || !one_strict) {
        throw UsageError("distinguisher needs (alpha, delta) <= (alpha2, delta2), one strict");
    }
    const RrThresholds t1 = rr_thresholds(delta, alpha);
    const RrThresholds t2 = rr_thresholds(delta2, alpha2);

    const std::uint32_t nx = phi.num_vars;
    CircuitBuilder b(nx + 1, 1, t1.s + t2.s);
    std::vector<NodeId> vars;
    for (std::uint32_t i = 0; i < nx; ++i) vars.push_back(b.add_input(i, 0));
    const NodeId y = b.add_input(nx, 0);

    std::vector<NodeId> coins1;
    for (std::uint32_t i = 0; i < t1.s; ++i) coins1.push_back(b.add_random(i));
    std::vector<NodeId> coins2;
    for (std::uint32_t i = 0; i < t2.s; ++i) coins2.push_back(b.add_random(t1.s + i));

    const RrOutputs rr1 = build_rr(b, y, coins1, t1);
    const NodeId phi_out = splice_formula(b, phi, vars);
    const RrOutputs rr2 = build_rr(b, phi_out, coins2, t2);

    b.add_output(rr1.flag);
    b.add_output(rr1.value);
    b.add_output(rr2.flag);
    b.add_output(rr2.value);
    return b.build();
}

FormulaCircuit augment_not_tautology(const FormulaCircuit& phi) {
    const std::uint32_t nv = phi.num_vars;
    CircuitBuilder b(nv + 1, 1, 0);
    std::vector<NodeId> vars;
    for (std::uint32_t i = 0; i < nv; ++i) vars.push_back(b.add_input(i, 0));
    const NodeId fresh = b.add_input(nv, 0);
    const NodeId phi_out = splice_formula(b, phi, vars);
    b.add_output(b.add_and(phi_out, fresh));
    FormulaCircuit out;
    out.circuit = b.build();
    out.num_vars = nv + 1;
    return out;
}

Circuit with_success_flag(const Circuit& circuit, bool success) {
    std::vector<Gate> nodes = circuit.nodes();
    const NodeId base = 0;  // circuits are never empty
    nodes.push_back({GateKind::Not, base, 0});
    const NodeId inverted = static_cast<NodeId>(nodes.size() - 1);
    nodes.push_back({success ? GateKind::Or : GateKind::And, base, inverted});
    const NodeId flag = static_cast<NodeId>(nodes.size() - 1);

    std::vector<NodeId> outputs;
    outputs.reserve(circuit.outputs().size() + 1);
    outputs.push_back(flag);
    for (NodeId o : circuit.outputs()) outputs.push_back(o);
    return build_circuit(std::move(nodes), std::move(outputs), circuit.num_records(),
                         circuit.record_width(), circuit.num_random_bits(), 0u);
}

// -- ground truth ------------------------------------------------------------------

std::vector<ExpectedVerdict> rr_expected(const DyadicProb& p) {
    std::vector<ExpectedVerdict> expected;
    if (p.j == 0) {
        // Identity mechanism: no finite alpha works at delta = 0.
        expected.push_back({Rational(1), Rational(0), false});
        expected.push_back({Rational(1000000), Rational(0), false});
        expected.push_back({Rational(1), Rational(1), true});
        return expected;
    }
    const Rational pv = p.value();
    const Rational boundary = (Rational(1) - pv) / pv;  // exact pure-DP alpha
    expected.push_back({boundary, Rational(0), true});
    if (boundary > Rational(1)) {
        expected.push_back({just_below(boundary), Rational(0), false});
    }
    const Rational delta_at_one = Rational(1) - Rational(2) * pv;  // minimal delta at alpha=1
    expected.push_back({Rational(1), delta_at_one, true});
    if (delta_at_one.sign() > 0) {
        expected.push_back({Rational(1), delta_at_one * Rational(999, 1000), false});
    }
    return expected;
}

std::vector<ExpectedVerdict> rr_approx_expected(const DyadicProb& delta, const EpsRatio& alpha) {
    std::vector<ExpectedVerdict> expected;
    const Rational d = delta.value();
    expected.push_back({alpha.value(), d, true});  // minimal delta is exactly d
    if (d.sign() > 0) {
        expected.push_back({alpha.value(), d * Rational(999, 1000), false});
    }
    expected.push_back({alpha.value(), Rational(1), true});
    return expected;
}

std::vector<ExpectedVerdict> allminsat_expected(const FormulaCircuit& phi,
                                                std::uint32_t num_x_vars) {
    const bool all_min = max_fraction(phi, num_x_vars) <= Rational(1, 2);
    return {{Rational(3), Rational(0), all_min}};
}

std::vector<ExpectedVerdict> shape_expected(ShapeVariant variant, const FormulaCircuit& phi,
                                            std::uint32_t num_x_vars) {
    std::vector<ExpectedVerdict> expected;
    if (variant == ShapeVariant::SmallIO) {
        const Rational g = max_fraction(phi, 0);  // single fraction: all vars random
        if (g.is_zero()) {
            expected.push_back({Rational(1000000), Rational(0), false});
            expected.push_back({Rational(1), Rational(1), true});
        } else {
            const Rational boundary = (Rational(2) - g) / g;
            expected.push_back({boundary, Rational(0), true});
            if (boundary > Rational(1)) {
                expected.push_back({just_below(boundary), Rational(0), false});
            }
            expected.push_back({Rational(3), Rational(0), g >= Rational(1, 2)});
        }
        return expected;
    }
    const bool all_min = max_fraction(phi, num_x_vars) <= Rational(1, 2);
    expected.push_back({Rational(4, 3), Rational(0), all_min});
    return expected;
}

std::vector<ExpectedVerdict> allfrac_expected(const FormulaCircuit& phi, std::uint32_t num_x_vars,
                                              const Rational& f) {
    const bool within = max_fraction(phi, num_x_vars) <= f;
    return {{Rational(1), f, within}, {Rational(5), f, within}};
}

std::vector<ExpectedVerdict> distinguish_expected(const FormulaCircuit& phi,
                                                  const EpsRatio& alpha, const DyadicProb& delta,
                                                  const EpsRatio& alpha2,
                                                  const DyadicProb& delta2) {
    const bool constant = is_constant_formula(phi);
    return {{alpha.value(), delta.value(), constant},
            {alpha2.value(), delta2.value(), true}};
}

}  // namespace dpcheck
