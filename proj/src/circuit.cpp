#include "dpcheck/circuit.hpp"

#include <utility>

#include "dpcheck/counting.hpp"
#include "dpcheck/errors.hpp"

namespace dpcheck {

namespace {

void validate_nodes(const std::vector<Gate>& nodes, std::uint32_t n_records,
                    std::uint32_t record_width, std::uint32_t n_random) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Gate& g = nodes[i];
        switch (g.kind) {
            case GateKind::InputBit:
                if (g.a >= n_records) {
                    throw IndexError("input record " + std::to_string(g.a) + " out of range (n=" +
                                     std::to_string(n_records) + ")");
                }
                if (g.b >= record_width) {
                    throw IndexError("input bit " + std::to_string(g.b) + " out of range (k=" +
                                     std::to_string(record_width) + ")");
                }
                break;
            case GateKind::RandomBit:
                if (g.a >= n_random) {
                    throw IndexError("random bit " + std::to_string(g.a) + " out of range (m=" +
                                     std::to_string(n_random) + ")");
                }
                break;
            case GateKind::Not:
                if (g.a >= i) {
                    throw CycleError("node " + std::to_string(i) +
                                     " references a node at or after itself");
                }
                break;
            case GateKind::And:
            case GateKind::Or:
            case GateKind::Xor:
                if (g.a >= i || g.b >= i) {
                    throw CycleError("node " + std::to_string(i) +
                                     " references a node at or after itself");
                }
                break;
        }
    }
}

}  // namespace

Circuit build_circuit(std::vector<Gate> nodes, std::vector<NodeId> outputs,
                      std::uint32_t n_records, std::uint32_t record_width,
                      std::uint32_t n_random, std::optional<std::uint32_t> success_output) {
    if (record_width == 0) {
        throw UsageError("record width k must be >= 1");
    }
    validate_nodes(nodes, n_records, record_width, n_random);
    if (outputs.empty()) {
        throw EmptyOutputsError("circuit has no outputs");
    }
    for (NodeId out : outputs) {
        if (out >= nodes.size()) {
            throw IndexError("output references node " + std::to_string(out) + " of " +
                             std::to_string(nodes.size()));
        }
    }
    if (success_output && *success_output >= outputs.size()) {
        throw IndexError("success output index " + std::to_string(*success_output) +
                         " out of range");
    }
    if (success_output && outputs.size() < 2) {
        throw IndexError("conditioned circuit needs a value output besides the flag");
    }

    Circuit c;
    c.nodes_ = std::move(nodes);
    c.outputs_ = std::move(outputs);
    c.n_records_ = n_records;
    c.record_width_ = record_width;
    c.n_random_ = n_random;
    c.conditioned_ = success_output.has_value();
    c.success_output_ = success_output.value_or(0);
    return c;
}

// -- CircuitBuilder ----------------------------------------------------------

NodeId CircuitBuilder::require_existing(NodeId id) const {
    if (id >= nodes_.size()) {
        throw CycleError("operand " + std::to_string(id) + " not yet defined");
    }
    return id;
}

NodeId CircuitBuilder::add_input(std::uint32_t record, std::uint32_t bit) {
    if (record >= n_records_) {
        throw IndexError("input record " + std::to_string(record) + " out of range");
    }
    if (bit >= record_width_) {
        throw IndexError("input bit " + std::to_string(bit) + " out of range");
    }
    nodes_.push_back({GateKind::InputBit, record, bit});
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId CircuitBuilder::add_random(std::uint32_t index) {
    if (index >= n_random_) {
        throw IndexError("random bit " + std::to_string(index) + " out of range");
    }
    nodes_.push_back({GateKind::RandomBit, index, 0});
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId CircuitBuilder::add_binary(GateKind kind, NodeId a, NodeId b) {
    require_existing(a);
    require_existing(b);
    nodes_.push_back({kind, a, b});
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId CircuitBuilder::add_not(NodeId a) {
    require_existing(a);
    nodes_.push_back({GateKind::Not, a, 0});
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId CircuitBuilder::const_one() {
    if (one_) return *one_;
    NodeId base;
    if (n_random_ > 0) {
        base = add_random(0);
    } else if (n_records_ > 0) {
        base = add_input(0, 0);
    } else {
        throw UsageError("constants need at least one input or random bit");
    }
    one_ = add_or(base, add_not(base));
    return *one_;
}

NodeId CircuitBuilder::const_zero() {
    if (zero_) return *zero_;
    zero_ = add_not(const_one());
    return *zero_;
}

void CircuitBuilder::add_output(NodeId node) {
    require_existing(node);
    outputs_.push_back(node);
}

void CircuitBuilder::set_outputs(std::vector<NodeId> outputs) {
    outputs_ = std::move(outputs);
}

void CircuitBuilder::set_success_output(std::uint32_t output_index) {
    success_output_ = output_index;
}

Circuit CircuitBuilder::build() {
    Circuit c = build_circuit(std::move(nodes_), std::move(outputs_), n_records_, record_width_,
                              n_random_, success_output_);
    nodes_.clear();
    outputs_.clear();
    one_.reset();
    zero_.reset();
    return c;
}

// -- evaluation ---------------------------------------------------------------

std::string evaluate(const Circuit& circuit, const InputWord& x,
                     const std::vector<bool>& random_bits) {
    if (x.records.size() != circuit.num_records()) {
        throw LengthError("input word has " + std::to_string(x.records.size()) + " records, circuit expects " +
                          std::to_string(circuit.num_records()));
    }
    for (std::uint32_t v : x.records) {
        if (circuit.record_width() < 32 && v >= (1u << circuit.record_width())) {
            throw LengthError("record value " + std::to_string(v) + " does not fit in " +
                              std::to_string(circuit.record_width()) + " bits");
        }
    }
    if (random_bits.size() != circuit.num_random_bits()) {
        throw LengthError("random assignment has " + std::to_string(random_bits.size()) +
                          " bits, circuit expects " + std::to_string(circuit.num_random_bits()));
    }

    const auto& nodes = circuit.nodes();
    std::vector<bool> values(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Gate& g = nodes[i];
        switch (g.kind) {
            case GateKind::InputBit: values[i] = record_bit(x.records[g.a], g.b); break;
            case GateKind::RandomBit: values[i] = random_bits[g.a]; break;
            case GateKind::And: values[i] = values[g.a] && values[g.b]; break;
            case GateKind::Or: values[i] = values[g.a] || values[g.b]; break;
            case GateKind::Not: values[i] = !values[g.a]; break;
            case GateKind::Xor: values[i] = values[g.a] != values[g.b]; break;
        }
    }

    std::string out(circuit.num_outputs(), '0');
    for (std::size_t j = 0; j < circuit.outputs().size(); ++j) {
        out[j] = values[circuit.outputs()[j]] ? '1' : '0';
    }
    if (circuit.conditioned() && out[circuit.success_output()] == '0') {
        // Failing runs read (flag=0, all-zero value word).
        for (char& ch : out) ch = '0';
    }
    return out;
}

OutputDistribution output_distribution(const Circuit& circuit, const InputWord& x,
                                       unsigned max_random_bits) {
    return count_all(circuit, x, max_random_bits);
}

Rational prob_event(const Circuit& circuit, const InputWord& x, const std::set<std::string>& event,
                    unsigned max_random_bits) {
    const OutputDistribution dist = output_distribution(circuit, x, max_random_bits);
    for (const std::string& word : event) {
        if (word.size() != circuit.value_width()) {
            throw LengthError("event word '" + word + "' does not match output width " +
                              std::to_string(circuit.value_width()));
        }
    }
    if (circuit.conditioned() && sgn(dist.successCount) == 0) {
        throw ZeroSuccessError("conditioned circuit has no successful run at this input");
    }
    BigInt mass = 0;
    for (const std::string& word : event) {
        mass += dist.count_of(word);
    }
    return Rational(mass, circuit.conditioned() ? dist.successCount : dist.totalRandom);
}

Circuit compose_event_selector(const Circuit& circuit, const std::set<std::string>& event) {
    if (circuit.conditioned()) {
        throw UsageError("event selector composition requires an unconditioned circuit");
    }
    const std::uint32_t ell = circuit.num_outputs();
    for (const std::string& word : event) {
        if (word.size() != ell) {
            throw LengthError("event word '" + word + "' does not match output width " +
                              std::to_string(ell));
        }
    }

    std::vector<Gate> nodes = circuit.nodes();
    auto push = [&nodes](GateKind kind, NodeId a, NodeId b = 0) {
        nodes.push_back({kind, a, b});
        return static_cast<NodeId>(nodes.size() - 1);
    };

    NodeId selector;
    if (event.empty()) {
        // Constant 0 from any existing node: g AND NOT g.
        const NodeId g = circuit.outputs()[0];
        selector = push(GateKind::And, g, push(GateKind::Not, g));
    } else {
        std::optional<NodeId> any;
        for (const std::string& word : event) {
            // Equality comparator: AND over literals of this word.
            std::optional<NodeId> all;
            for (std::uint32_t j = 0; j < ell; ++j) {
                NodeId lit = circuit.outputs()[j];
                if (word[j] == '0') lit = push(GateKind::Not, lit);
                all = all ? push(GateKind::And, *all, lit) : lit;
            }
            any = any ? push(GateKind::Or, *any, *all) : *all;
        }
        selector = *any;
    }

    return build_circuit(std::move(nodes), {selector}, circuit.num_records(),
                         circuit.record_width(), circuit.num_random_bits());
}

Circuit desugar_xor(const Circuit& circuit) {
    std::vector<Gate> nodes;
    nodes.reserve(circuit.nodes().size());
    std::vector<NodeId> remap(circuit.nodes().size());

    for (std::size_t i = 0; i < circuit.nodes().size(); ++i) {
        Gate g = circuit.nodes()[i];
        if (g.kind == GateKind::Xor) {
            const NodeId a = remap[g.a];
            const NodeId b = remap[g.b];
            nodes.push_back({GateKind::Or, a, b});
            const NodeId either = static_cast<NodeId>(nodes.size() - 1);
            nodes.push_back({GateKind::And, a, b});
            nodes.push_back({GateKind::Not, static_cast<NodeId>(nodes.size() - 1), 0});
            nodes.push_back({GateKind::And, either, static_cast<NodeId>(nodes.size() - 1)});
        } else {
            if (g.kind != GateKind::InputBit && g.kind != GateKind::RandomBit) {
                g.a = remap[g.a];
                if (g.kind != GateKind::Not) g.b = remap[g.b];
            }
            nodes.push_back(g);
        }
        remap[i] = static_cast<NodeId>(nodes.size() - 1);
    }

    std::vector<NodeId> outputs;
    outputs.reserve(circuit.outputs().size());
    for (NodeId out : circuit.outputs()) outputs.push_back(remap[out]);

    std::optional<std::uint32_t> success;
    if (circuit.conditioned()) success = circuit.success_output();
    return build_circuit(std::move(nodes), std::move(outputs), circuit.num_records(),
                         circuit.record_width(), circuit.num_random_bits(), success);
}

std::string word_from_values(const std::vector<std::uint32_t>& values, std::uint32_t width) {
    std::string word;
    word.reserve(values.size() * width);
    for (std::uint32_t v : values) {
        for (std::uint32_t b = 0; b < width; ++b) {
            word.push_back(record_bit(v, b) ? '1' : '0');
        }
    }
    return word;
}

std::vector<std::uint32_t> values_from_word(const std::string& word, std::uint32_t width) {
    if (width == 0 || word.size() % width != 0) {
        throw LengthError("word length " + std::to_string(word.size()) +
                          " is not a multiple of width " + std::to_string(width));
    }
    std::vector<std::uint32_t> values(word.size() / width, 0);
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (word[i] == '1') {
            values[i / width] |= 1u << (i % width);
        } else if (word[i] != '0') {
            throw LengthError("word must consist of '0'/'1' characters");
        }
    }
    return values;
}

}  // namespace dpcheck
