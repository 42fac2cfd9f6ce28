#pragma once

/// Probabilistic Boolean circuits: a gate-level DAG over per-record input
/// bits and uniformly random bits. The output distribution of a circuit is
/// induced by enumerating all assignments to the random bits, so every
/// probability derived from it is an exact rational.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dpcheck/rational.hpp"

namespace dpcheck {

enum class GateKind : std::uint8_t {
    InputBit,   // a = record index, b = bit index within the record
    RandomBit,  // a = random bit index
    And,        // a, b = operand nodes
    Or,
    Not,        // a = operand node
    Xor,
};

using NodeId = std::uint32_t;

struct Gate {
    GateKind kind;
    NodeId a = 0;
    NodeId b = 0;

    friend bool operator==(const Gate&, const Gate&) = default;
};

/// One row of a database: n records of recordWidth() bits each.
struct InputWord {
    std::vector<std::uint32_t> records;

    friend bool operator==(const InputWord&, const InputWord&) = default;
    friend auto operator<=>(const InputWord&, const InputWord&) = default;
};

/// Exact histogram of a circuit's outputs over all random assignments.
///
/// Keys are output words as '0'/'1' strings, character i = output i. For a
/// conditioned circuit the keys are value words (success flag removed) and
/// only successful runs are counted; successCount then records how many of
/// the 2^m runs succeeded. Unconditioned circuits have successCount == 2^m.
struct OutputDistribution {
    std::map<std::string, BigInt> counts;
    BigInt totalRandom = 1;  // 2^m
    BigInt successCount = 1;

    BigInt count_of(const std::string& word) const {
        auto it = counts.find(word);
        return it == counts.end() ? BigInt(0) : it->second;
    }
};

/// Default ceiling on the number of random bits an exhaustive enumeration
/// will accept; callers can pass a larger bound explicitly.
inline constexpr unsigned kDefaultMaxRandomBits = 30;

/// Immutable, validated probabilistic circuit.
///
/// Nodes are stored in topological order; every gate references strictly
/// earlier nodes. All member functions are const and the type is safe to
/// share across threads after construction.
class Circuit {
  public:
    /// An empty placeholder; real circuits come from build_circuit or
    /// CircuitBuilder, which validate every invariant.
    Circuit() = default;

    const std::vector<Gate>& nodes() const { return nodes_; }
    const std::vector<NodeId>& outputs() const { return outputs_; }

    std::uint32_t num_records() const { return n_records_; }      // n
    std::uint32_t record_width() const { return record_width_; }  // k
    std::uint32_t num_random_bits() const { return n_random_; }   // m
    std::uint32_t num_outputs() const { return static_cast<std::uint32_t>(outputs_.size()); }

    bool conditioned() const { return conditioned_; }
    /// Index into outputs() of the success flag; only valid when conditioned.
    std::uint32_t success_output() const { return success_output_; }

    /// Width of a distribution key: num_outputs(), minus the flag when conditioned.
    std::uint32_t value_width() const {
        return conditioned() ? num_outputs() - 1 : num_outputs();
    }

  private:
    friend Circuit build_circuit(std::vector<Gate> nodes, std::vector<NodeId> outputs,
                                 std::uint32_t n_records, std::uint32_t record_width,
                                 std::uint32_t n_random,
                                 std::optional<std::uint32_t> success_output);

    std::vector<Gate> nodes_;
    std::vector<NodeId> outputs_;
    std::uint32_t n_records_ = 0;
    std::uint32_t record_width_ = 1;
    std::uint32_t n_random_ = 0;
    bool conditioned_ = false;
    std::uint32_t success_output_ = 0;
};

/// Validates and assembles a circuit.
///
/// Throws CycleError on forward references, IndexError on out-of-range
/// record/bit/random/output indices, EmptyOutputsError when outputs is
/// empty, UsageError on recordWidth == 0.
Circuit build_circuit(std::vector<Gate> nodes, std::vector<NodeId> outputs,
                      std::uint32_t n_records, std::uint32_t record_width,
                      std::uint32_t n_random,
                      std::optional<std::uint32_t> success_output = std::nullopt);

/// Incremental builder; every add_* validates operands eagerly and returns
/// the new node's id.
class CircuitBuilder {
  public:
    CircuitBuilder(std::uint32_t n_records, std::uint32_t record_width, std::uint32_t n_random)
        : n_records_(n_records), record_width_(record_width), n_random_(n_random) {}

    NodeId add_input(std::uint32_t record, std::uint32_t bit);
    NodeId add_random(std::uint32_t index);
    NodeId add_and(NodeId a, NodeId b) { return add_binary(GateKind::And, a, b); }
    NodeId add_or(NodeId a, NodeId b) { return add_binary(GateKind::Or, a, b); }
    NodeId add_xor(NodeId a, NodeId b) { return add_binary(GateKind::Xor, a, b); }
    NodeId add_not(NodeId a);

    /// A node that always evaluates to 1 (built as g OR NOT g), shared
    /// across calls. Uses random bit 0 if the circuit has randoms, else
    /// input bit (0,0); requires m > 0 or n > 0.
    NodeId const_one();
    /// Negation of const_one(), shared across calls.
    NodeId const_zero();

    void add_output(NodeId node);
    void set_outputs(std::vector<NodeId> outputs);
    /// Marks the circuit conditioned with the given output index as flag.
    void set_success_output(std::uint32_t output_index);

    std::size_t size() const { return nodes_.size(); }
    std::uint32_t num_random_bits() const { return n_random_; }

    /// Final validation; the builder is left empty afterwards.
    Circuit build();

  private:
    NodeId add_binary(GateKind kind, NodeId a, NodeId b);
    NodeId require_existing(NodeId id) const;

    std::vector<Gate> nodes_;
    std::vector<NodeId> outputs_;
    std::uint32_t n_records_;
    std::uint32_t record_width_;
    std::uint32_t n_random_;
    std::optional<std::uint32_t> success_output_;
    std::optional<NodeId> one_;
    std::optional<NodeId> zero_;
};

/// Evaluates the circuit on one input word and one assignment of the random
/// bits. Returns the output word as a '0'/'1' string of length ℓ. For a
/// conditioned circuit with a false success flag the value outputs are
/// masked to all-zero, so failing runs read exactly (0, 0...0).
std::string evaluate(const Circuit& circuit, const InputWord& x, const std::vector<bool>& random_bits);

/// Exact output histogram over all 2^m random assignments.
/// Throws ResourceBoundError when m exceeds max_random_bits.
OutputDistribution output_distribution(const Circuit& circuit, const InputWord& x,
                                       unsigned max_random_bits = kDefaultMaxRandomBits);

/// Pr[psi(x) in E] as an exact rational: the counted mass of E over 2^m,
/// or over the success count for conditioned circuits (ZeroSuccessError
/// when no run succeeds).
Rational prob_event(const Circuit& circuit, const InputWord& x, const std::set<std::string>& event,
                    unsigned max_random_bits = kDefaultMaxRandomBits);

/// Composes an event selector onto an unconditioned circuit: the result has
/// a single output which is 1 exactly when the original output word lies in
/// `event`. Pr[composed = 1] equals Pr[original in E] for every input.
Circuit compose_event_selector(const Circuit& circuit, const std::set<std::string>& event);

/// Rewrites every XOR gate as (a OR b) AND NOT (a AND b); evaluation
/// results are identical on all inputs.
Circuit desugar_xor(const Circuit& circuit);

/// Bits of a record value, LSB first, as used by InputBit indexing.
inline bool record_bit(std::uint32_t value, std::uint32_t bit) {
    return ((value >> bit) & 1u) != 0;
}

/// Packs k-bit record values into a distribution key ('0'/'1' string,
/// record bits LSB first, records in order).
std::string word_from_values(const std::vector<std::uint32_t>& values, std::uint32_t width);

/// Inverse of word_from_values; word length must be a multiple of width.
std::vector<std::uint32_t> values_from_word(const std::string& word, std::uint32_t width);

}  // namespace dpcheck
