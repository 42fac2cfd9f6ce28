#include "dpcheck/netlist.hpp"

#include <charconv>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "dpcheck/errors.hpp"

namespace dpcheck {

namespace {

bool valid_identifier(const std::string& tok) {
    if (tok.empty()) return false;
    for (char c : tok) {
        if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
    }
    return true;
}

std::uint32_t parse_uint(const std::string& tok, std::size_t line, const char* what) {
    std::uint32_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw SyntaxError(std::string("expected ") + what + ", got '" + tok + "'", line, 1);
    }
    return value;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) toks.push_back(tok);
    return toks;
}

struct Meta {
    std::uint32_t n = 0, k = 0, m = 0;
    bool conditioned = false;
    std::optional<std::uint32_t> success;
};

Meta parse_meta(const std::vector<std::string>& toks, std::size_t line) {
    Meta meta;
    bool have_n = false, have_k = false, have_m = false;
    for (std::size_t i = 1; i < toks.size(); ++i) {
        const std::string& tok = toks[i];
        if (tok == "conditioned") {
            meta.conditioned = true;
            continue;
        }
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            throw SyntaxError("malformed meta field '" + tok + "'", line, 1);
        }
        const std::string key = tok.substr(0, eq);
        const std::uint32_t value = parse_uint(tok.substr(eq + 1), line, "integer");
        if (key == "n") { meta.n = value; have_n = true; }
        else if (key == "k") { meta.k = value; have_k = true; }
        else if (key == "m") { meta.m = value; have_m = true; }
        else if (key == "success") { meta.success = value; }
        else throw SyntaxError("unknown meta field '" + key + "'", line, 1);
    }
    if (!have_n || !have_k || !have_m) {
        throw SyntaxError("meta line must set n, k and m", line, 1);
    }
    if (meta.conditioned != meta.success.has_value()) {
        throw SyntaxError("conditioned and success=<outIdx> must appear together", line, 1);
    }
    return meta;
}

}  // namespace

Circuit parse_netlist(const std::string& text) {
    std::vector<Gate> nodes;
    std::vector<NodeId> outputs;
    std::unordered_map<std::string, NodeId> names;
    std::optional<Meta> meta;

    auto resolve = [&](const std::string& id, std::size_t line) -> NodeId {
        auto it = names.find(id);
        if (it == names.end()) {
            throw SyntaxError("unknown identifier '" + id + "'", line, 1);
        }
        return it->second;
    };
    auto define = [&](const std::string& id, std::size_t line) {
        if (!valid_identifier(id)) {
            throw SyntaxError("invalid identifier '" + id + "'", line, 1);
        }
        if (names.count(id)) {
            throw SyntaxError("duplicate identifier '" + id + "'", line, 1);
        }
        names.emplace(id, static_cast<NodeId>(nodes.size()));
    };

    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const auto toks = tokenize(raw);
        if (toks.empty()) continue;

        if (!meta) {
            if (toks[0] != "meta") {
                throw SyntaxError("first statement must be a meta line", line_no, 1);
            }
            meta = parse_meta(toks, line_no);
            continue;
        }

        if (toks[0] == "meta") {
            throw SyntaxError("duplicate meta line", line_no, 1);
        } else if (toks[0] == "in") {
            if (toks.size() != 4) throw ArityError("line " + std::to_string(line_no) + ": in takes <id> <record> <bit>");
            define(toks[1], line_no);
            nodes.push_back({GateKind::InputBit, parse_uint(toks[2], line_no, "record index"),
                             parse_uint(toks[3], line_no, "bit index")});
        } else if (toks[0] == "rnd") {
            if (toks.size() != 3) throw ArityError("line " + std::to_string(line_no) + ": rnd takes <id> <index>");
            define(toks[1], line_no);
            nodes.push_back({GateKind::RandomBit, parse_uint(toks[2], line_no, "random index"), 0});
        } else if (toks[0] == "out") {
            if (toks.size() < 2) throw ArityError("line " + std::to_string(line_no) + ": out takes at least one id");
            for (std::size_t i = 1; i < toks.size(); ++i) {
                outputs.push_back(resolve(toks[i], line_no));
            }
        } else if (toks.size() >= 2 && toks[1] == "=") {
            if (toks.size() < 3) {
                throw SyntaxError("missing gate operator", line_no, 1);
            }
            const std::string& op = toks[2];
            if (op == "NOT") {
                if (toks.size() != 4) throw ArityError("line " + std::to_string(line_no) + ": NOT takes one operand");
                const NodeId a = resolve(toks[3], line_no);
                define(toks[0], line_no);
                nodes.push_back({GateKind::Not, a, 0});
            } else if (op == "AND" || op == "OR" || op == "XOR") {
                if (toks.size() != 5) throw ArityError("line " + std::to_string(line_no) + ": " + op + " takes two operands");
                const NodeId a = resolve(toks[3], line_no);
                const NodeId b = resolve(toks[4], line_no);
                define(toks[0], line_no);
                const GateKind kind = op == "AND" ? GateKind::And
                                    : op == "OR"  ? GateKind::Or
                                                  : GateKind::Xor;
                nodes.push_back({kind, a, b});
            } else {
                throw SyntaxError("unknown gate operator '" + op + "'", line_no, 1);
            }
        } else {
            throw SyntaxError("unknown directive '" + toks[0] + "'", line_no, 1);
        }
    }

    if (!meta) {
        throw SyntaxError("empty netlist: missing meta line", 1, 1);
    }
    return build_circuit(std::move(nodes), std::move(outputs), meta->n, meta->k, meta->m,
                         meta->success);
}

std::string emit_netlist(const Circuit& circuit) {
    std::ostringstream out;
    out << "meta n=" << circuit.num_records() << " k=" << circuit.record_width() << " m="
        << circuit.num_random_bits();
    if (circuit.conditioned()) {
        out << " conditioned success=" << circuit.success_output();
    }
    out << "\n";

    const auto name = [](NodeId id) { return "n" + std::to_string(id); };
    for (std::size_t i = 0; i < circuit.nodes().size(); ++i) {
        const Gate& g = circuit.nodes()[i];
        switch (g.kind) {
            case GateKind::InputBit:
                out << "in " << name(static_cast<NodeId>(i)) << " " << g.a << " " << g.b << "\n";
                break;
            case GateKind::RandomBit:
                out << "rnd " << name(static_cast<NodeId>(i)) << " " << g.a << "\n";
                break;
            case GateKind::And:
            case GateKind::Or:
            case GateKind::Xor: {
                const char* op = g.kind == GateKind::And ? "AND" : g.kind == GateKind::Or ? "OR" : "XOR";
                out << name(static_cast<NodeId>(i)) << " = " << op << " " << name(g.a) << " "
                    << name(g.b) << "\n";
                break;
            }
            case GateKind::Not:
                out << name(static_cast<NodeId>(i)) << " = NOT " << name(g.a) << "\n";
                break;
        }
    }

    out << "out";
    for (NodeId o : circuit.outputs()) out << " " << name(o);
    out << "\n";
    return out.str();
}

}  // namespace dpcheck
