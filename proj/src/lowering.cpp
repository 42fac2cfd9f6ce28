#include "dpcheck/lowering.hpp"

#include <map>
#include <set>

#include "dpcheck/errors.hpp"

namespace dpcheck {

namespace {

struct AddResult {
    WireBundle sum;
    NodeId carry_out;
};

// a + b + carry_in over equal-width bundles; the returned carry is the one
// out of the top bit.
AddResult ripple_add(CircuitBuilder& b, const WireBundle& x, const WireBundle& y,
                     NodeId carry_in) {
    AddResult r;
    r.sum.reserve(x.size());
    NodeId carry = carry_in;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const NodeId axb = b.add_xor(x[i], y[i]);
        r.sum.push_back(b.add_xor(axb, carry));
        const NodeId gen = b.add_and(x[i], y[i]);
        const NodeId prop = b.add_and(axb, carry);
        carry = b.add_or(gen, prop);
    }
    r.carry_out = carry;
    return r;
}

WireBundle negated(CircuitBuilder& b, const WireBundle& x) {
    WireBundle out;
    out.reserve(x.size());
    for (NodeId w : x) out.push_back(b.add_not(w));
    return out;
}

// a - b as a + ~b + 1; carry_out == 1 exactly when a >= b.
AddResult subtract(CircuitBuilder& b, const WireBundle& x, const WireBundle& y) {
    return ripple_add(b, x, negated(b, y), b.const_one());
}

NodeId compare_ge(CircuitBuilder& b, const WireBundle& x, const WireBundle& y) {
    return subtract(b, x, y).carry_out;
}

NodeId compare_eq(CircuitBuilder& b, const WireBundle& x, const WireBundle& y) {
    NodeId all = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const NodeId same = b.add_not(b.add_xor(x[i], y[i]));
        all = i == 0 ? same : b.add_and(all, same);
    }
    return all;
}

WireBundle constant_bundle(CircuitBuilder& b, std::uint32_t width, std::uint64_t value) {
    WireBundle out;
    out.reserve(width);
    for (std::uint32_t i = 0; i < width; ++i) {
        out.push_back(((value >> i) & 1) ? b.const_one() : b.const_zero());
    }
    return out;
}

WireBundle pad_bit(CircuitBuilder& b, NodeId bit, std::uint32_t width) {
    WireBundle out;
    out.reserve(width);
    out.push_back(bit);
    for (std::uint32_t i = 1; i < width; ++i) out.push_back(b.const_zero());
    return out;
}

WireBundle mux_bundles(CircuitBuilder& b, NodeId guard, const WireBundle& left,
                       const WireBundle& right) {
    const NodeId not_guard = b.add_not(guard);
    WireBundle out;
    out.reserve(left.size());
    for (std::size_t i = 0; i < left.size(); ++i) {
        out.push_back(b.add_or(b.add_and(left[i], guard), b.add_and(right[i], not_guard)));
    }
    return out;
}

// Shift-and-add: row i is (a << i) masked by b_i, truncated to width.
WireBundle multiply(CircuitBuilder& b, const WireBundle& x, const WireBundle& y) {
    const std::uint32_t width = static_cast<std::uint32_t>(x.size());
    WireBundle acc;
    for (std::uint32_t i = 0; i < width; ++i) {
        WireBundle row;
        row.reserve(width);
        for (std::uint32_t j = 0; j < width; ++j) {
            row.push_back(j < i ? b.const_zero() : b.add_and(x[j - i], y[i]));
        }
        acc = i == 0 ? std::move(row) : ripple_add(b, acc, row, b.const_zero()).sum;
    }
    return acc;
}

void require_operands(const std::vector<WireBundle>& ops, std::size_t count, const char* kind) {
    if (ops.size() != count) {
        throw UsageError(std::string(kind) + " block takes " + std::to_string(count) +
                         " operand bundles");
    }
}

// -- program lowering -----------------------------------------------------------

void collect_writes(const Command& cmd, std::set<std::string>& writes) {
    switch (cmd.kind) {
        case CmdKind::Skip: return;
        case CmdKind::Assign: writes.insert(cmd.target); return;
        case CmdKind::Seq:
        case CmdKind::If:
            for (const Command& child : cmd.children) collect_writes(child, writes);
            return;
    }
}

class Lowerer {
  public:
    explicit Lowerer(const ProgramAst& prog)
        : prog_(prog),
          builder_(static_cast<std::uint32_t>(prog.input_vars.size()), prog.width,
                   prog.num_draws) {}

    Circuit run() {
        for (std::size_t i = 0; i < prog_.input_vars.size(); ++i) {
            WireBundle bundle;
            bundle.reserve(prog_.width);
            for (std::uint32_t bit = 0; bit < prog_.width; ++bit) {
                bundle.push_back(builder_.add_input(static_cast<std::uint32_t>(i), bit));
            }
            env_[prog_.input_vars[i]] = std::move(bundle);
        }
        lower_command(prog_.body);
        for (const std::string& var : prog_.return_vars) {
            for (NodeId wire : env_.at(var)) builder_.add_output(wire);
        }
        return builder_.build();
    }

  private:
    void lower_command(const Command& cmd) {
        switch (cmd.kind) {
            case CmdKind::Skip:
                return;
            case CmdKind::Assign:
                env_[cmd.target] = lower_int(*cmd.expr);
                return;
            case CmdKind::Seq:
                for (const Command& child : cmd.children) lower_command(child);
                return;
            case CmdKind::If: {
                const NodeId guard = lower_bool(*cmd.expr);
                const auto saved = env_;

                lower_command(cmd.children[0]);
                auto then_env = std::move(env_);
                env_ = saved;
                lower_command(cmd.children[1]);
                auto else_env = std::move(env_);
                env_ = saved;

                std::set<std::string> writes;
                collect_writes(cmd.children[0], writes);
                collect_writes(cmd.children[1], writes);
                for (const std::string& var : writes) {
                    const auto l = then_env.find(var);
                    const auto r = else_env.find(var);
                    if (l != then_env.end() && r != else_env.end()) {
                        env_[var] = mux_bundles(builder_, guard, l->second, r->second);
                    } else {
                        // Defined on one path only; any later read was
                        // rejected statically.
                        env_.erase(var);
                    }
                }
                return;
            }
        }
    }

    WireBundle lower_int(const Expr& e) {
        switch (e.kind) {
            case ExprKind::Const:
                return constant_bundle(builder_, prog_.width, e.value);
            case ExprKind::Var:
                return env_.at(e.name);
            case ExprKind::Add: {
                const WireBundle a = lower_int(e.args[0]);
                const WireBundle b = lower_int(e.args[1]);
                return ripple_add(builder_, a, b, builder_.const_zero()).sum;
            }
            case ExprKind::Sub: {
                const WireBundle a = lower_int(e.args[0]);
                const WireBundle b = lower_int(e.args[1]);
                return subtract(builder_, a, b).sum;
            }
            case ExprKind::Mul: {
                const WireBundle a = lower_int(e.args[0]);
                const WireBundle b = lower_int(e.args[1]);
                return multiply(builder_, a, b);
            }
            default:
                return pad_bit(builder_, lower_bool(e), prog_.width);
        }
    }

    NodeId lower_bool(const Expr& e) {
        switch (e.kind) {
            case ExprKind::True:
                return builder_.const_one();
            case ExprKind::False:
                return builder_.const_zero();
            case ExprKind::Random:
                return builder_.add_random(static_cast<std::uint32_t>(e.coin_index));
            case ExprKind::Var: {
                // value != 0, an OR over the bundle
                const WireBundle& bundle = env_.at(e.name);
                NodeId any = bundle[0];
                for (std::size_t i = 1; i < bundle.size(); ++i) {
                    any = builder_.add_or(any, bundle[i]);
                }
                return any;
            }
            case ExprKind::And: {
                const NodeId a = lower_bool(e.args[0]);
                const NodeId b = lower_bool(e.args[1]);
                return builder_.add_and(a, b);
            }
            case ExprKind::Or: {
                const NodeId a = lower_bool(e.args[0]);
                const NodeId b = lower_bool(e.args[1]);
                return builder_.add_or(a, b);
            }
            case ExprKind::Not:
                return builder_.add_not(lower_bool(e.args[0]));
            case ExprKind::Gt: {
                const WireBundle a = lower_int(e.args[0]);
                const WireBundle b = lower_int(e.args[1]);
                return builder_.add_not(compare_ge(builder_, b, a));
            }
            case ExprKind::Ge: {
                const WireBundle a = lower_int(e.args[0]);
                const WireBundle b = lower_int(e.args[1]);
                return compare_ge(builder_, a, b);
            }
            case ExprKind::Eq: {
                const WireBundle a = lower_int(e.args[0]);
                const WireBundle b = lower_int(e.args[1]);
                return compare_eq(builder_, a, b);
            }
            default:
                throw Error("internal: integer expression lowered as boolean");
        }
    }

    const ProgramAst& prog_;
    CircuitBuilder builder_;
    std::map<std::string, WireBundle> env_;
};

}  // namespace

WireBundle build_arith_block(CircuitBuilder& builder, ArithKind kind, std::uint32_t width,
                             const std::vector<WireBundle>& operands,
                             std::uint64_t const_value) {
    for (const WireBundle& op : operands) {
        const bool is_guard = kind == ArithKind::Mux && &op == &operands.front();
        if (!is_guard && op.size() != width) {
            throw UsageError("operand bundle width " + std::to_string(op.size()) +
                             " does not match block width " + std::to_string(width));
        }
    }
    switch (kind) {
        case ArithKind::Add:
            require_operands(operands, 2, "add");
            return ripple_add(builder, operands[0], operands[1], builder.const_zero()).sum;
        case ArithKind::Sub:
            require_operands(operands, 2, "sub");
            return subtract(builder, operands[0], operands[1]).sum;
        case ArithKind::Mul:
            require_operands(operands, 2, "mul");
            return multiply(builder, operands[0], operands[1]);
        case ArithKind::Gt:
            require_operands(operands, 2, "gt");
            return pad_bit(builder,
                           builder.add_not(compare_ge(builder, operands[1], operands[0])), width);
        case ArithKind::Ge:
            require_operands(operands, 2, "ge");
            return pad_bit(builder, compare_ge(builder, operands[0], operands[1]), width);
        case ArithKind::Eq:
            require_operands(operands, 2, "eq");
            return pad_bit(builder, compare_eq(builder, operands[0], operands[1]), width);
        case ArithKind::Const:
            require_operands(operands, 0, "const");
            return constant_bundle(builder, width, const_value);
        case ArithKind::Mux: {
            require_operands(operands, 3, "mux");
            if (operands[0].size() != 1) {
                throw UsageError("mux guard must be a single wire");
            }
            return mux_bundles(builder, operands[0][0], operands[1], operands[2]);
        }
    }
    throw Error("internal: unknown arithmetic block kind");
}

Circuit compile(const ProgramAst& program) {
    return Lowerer(program).run();
}

}  // namespace dpcheck
