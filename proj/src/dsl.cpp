#include "dpcheck/dsl.hpp"

#include <map>
#include <set>
#include <sstream>

#include "dpcheck/errors.hpp"

namespace dpcheck {

namespace {

// -- lexer --------------------------------------------------------------------

enum class Tok : std::uint8_t {
    Ident, Number,
    KwInput, KwReturn, KwIf, KwThen, KwElse, KwSkip,
    KwTrue, KwFalse, KwRandom, KwSample,
    Assign, LParen, RParen, Comma, Semicolon, Newline,
    Plus, Minus, Star, Amp, Pipe, Bang, Gt, Ge, Eq,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    std::uint32_t number = 0;
    std::size_t line = 1;
    std::size_t column = 1;
};

const std::map<std::string, Tok, std::less<>> kKeywords = {
    {"input", Tok::KwInput}, {"return", Tok::KwReturn}, {"if", Tok::KwIf},
    {"then", Tok::KwThen},   {"else", Tok::KwElse},     {"true", Tok::KwTrue},
    {"false", Tok::KwFalse}, {"random", Tok::KwRandom}, {"sample", Tok::KwSample},
};

class Lexer {
  public:
    explicit Lexer(const std::string& text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '\n') {
                out.push_back(make(Tok::Newline, "\n"));
                advance(1);
                ++line_;
                column_ = 1;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') {
                advance(1);
                continue;
            }
            if (c == '#') {
                if (line_ == 1 && text_.compare(pos_, 6, "#width") == 0) {
                    lex_width_pragma();
                    continue;
                }
                if (text_.compare(pos_, 6, "#width") == 0) {
                    throw SyntaxError("#width pragma is only recognized on the first line",
                                      line_, column_);
                }
                while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
                continue;
            }
            if (c >= 'a' && c <= 'z') {
                lex_word(out);
                continue;
            }
            if (c >= 'A' && c <= 'Z') {
                lex_skip_keyword(out);
                continue;
            }
            if (c >= '0' && c <= '9') {
                lex_number(out);
                continue;
            }
            lex_operator(out);
        }
        out.push_back(make(Tok::End, ""));
        return out;
    }

    std::optional<std::uint32_t> width() const { return width_; }

  private:
    Token make(Tok kind, std::string text) {
        return Token{kind, std::move(text), 0, line_, column_};
    }

    void advance(std::size_t n) {
        pos_ += n;
        column_ += n;
    }

    void lex_width_pragma() {
        advance(6);
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) advance(1);
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') advance(1);
        if (start == pos_) {
            throw SyntaxError("#width expects an integer", line_, column_);
        }
        const std::string digits = text_.substr(start, pos_ - start);
        if (digits.size() > 4) {
            throw SyntaxError("#width must be between 1 and 16", 1, 1);
        }
        const unsigned long k = std::stoul(digits);
        if (k < 1 || k > 16) {
            throw SyntaxError("#width must be between 1 and 16", 1, 1);
        }
        width_ = static_cast<std::uint32_t>(k);
        while (pos_ < text_.size() && text_[pos_] != '\n') {
            if (text_[pos_] != ' ' && text_[pos_] != '\t' && text_[pos_] != '\r') {
                throw SyntaxError("unexpected text after #width pragma", line_, column_);
            }
            advance(1);
        }
    }

    void lex_word(std::vector<Token>& out) {
        const std::size_t start = pos_;
        const std::size_t col = column_;
        while (pos_ < text_.size() && text_[pos_] >= 'a' && text_[pos_] <= 'z') advance(1);
        std::string word = text_.substr(start, pos_ - start);
        Token tok{Tok::Ident, word, 0, line_, col};
        if (auto it = kKeywords.find(word); it != kKeywords.end()) tok.kind = it->second;
        out.push_back(std::move(tok));
    }

    void lex_skip_keyword(std::vector<Token>& out) {
        const std::size_t start = pos_;
        const std::size_t col = column_;
        while (pos_ < text_.size() && text_[pos_] >= 'A' && text_[pos_] <= 'Z') advance(1);
        const std::string word = text_.substr(start, pos_ - start);
        if (word != "SKIP") {
            throw SyntaxError("unknown keyword '" + word + "'", line_, col);
        }
        out.push_back(Token{Tok::KwSkip, word, 0, line_, col});
    }

    void lex_number(std::vector<Token>& out) {
        const std::size_t start = pos_;
        const std::size_t col = column_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') advance(1);
        const std::string digits = text_.substr(start, pos_ - start);
        unsigned long value = 0;
        try {
            value = std::stoul(digits);
        } catch (const std::out_of_range&) {
            throw ConstantOutOfRangeError("constant '" + digits + "' too large", line_, col);
        }
        if (value > 0xFFFFu) {
            throw ConstantOutOfRangeError("constant '" + digits + "' too large", line_, col);
        }
        Token tok{Tok::Number, digits, static_cast<std::uint32_t>(value), line_, col};
        out.push_back(std::move(tok));
    }

    bool match_utf8(const char* seq) {
        const std::size_t len = std::char_traits<char>::length(seq);
        if (text_.compare(pos_, len, seq) == 0) {
            pos_ += len;
            ++column_;
            return true;
        }
        return false;
    }

    void lex_operator(std::vector<Token>& out) {
        const std::size_t col = column_;
        auto push = [&](Tok kind, const char* text) {
            out.push_back(Token{kind, text, 0, line_, col});
        };
        const char c = text_[pos_];
        switch (c) {
            case '(': advance(1); push(Tok::LParen, "("); return;
            case ')': advance(1); push(Tok::RParen, ")"); return;
            case ',': advance(1); push(Tok::Comma, ","); return;
            case ';': advance(1); push(Tok::Semicolon, ";"); return;
            case '+': advance(1); push(Tok::Plus, "+"); return;
            case '-': advance(1); push(Tok::Minus, "-"); return;
            case '*': advance(1); push(Tok::Star, "*"); return;
            case '&': advance(1); push(Tok::Amp, "&"); return;
            case '|': advance(1); push(Tok::Pipe, "|"); return;
            case '!': advance(1); push(Tok::Bang, "!"); return;
            case ':':
                if (text_.compare(pos_, 2, ":=") == 0) {
                    advance(2);
                    push(Tok::Assign, ":=");
                    return;
                }
                break;
            case '>':
                if (text_.compare(pos_, 2, ">=") == 0) {
                    advance(2);
                    push(Tok::Ge, ">=");
                } else {
                    advance(1);
                    push(Tok::Gt, ">");
                }
                return;
            case '=':
                if (text_.compare(pos_, 2, "==") == 0) {
                    advance(2);
                } else {
                    advance(1);
                }
                push(Tok::Eq, "=");
                return;
            default: break;
        }
        // UTF-8 spellings from the written grammar.
        if (match_utf8("∧")) { push(Tok::Amp, "&"); return; }   // ∧
        if (match_utf8("∨")) { push(Tok::Pipe, "|"); return; }  // ∨
        if (match_utf8("¬")) { push(Tok::Bang, "!"); return; }  // ¬
        if (match_utf8("×")) { push(Tok::Star, "*"); return; }  // ×
        if (match_utf8("−")) { push(Tok::Minus, "-"); return; } // −
        if (match_utf8("≥")) { push(Tok::Ge, ">="); return; }   // ≥
        throw SyntaxError(std::string("unexpected character '") + c + "'", line_, col);
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
    std::optional<std::uint32_t> width_;
};

// -- parser -------------------------------------------------------------------

class Parser {
  public:
    Parser(std::vector<Token> tokens, std::uint32_t width)
        : tokens_(std::move(tokens)), width_(width) {}

    ProgramAst run() {
        ProgramAst prog;
        prog.width = width_;

        skip_newlines();
        expect(Tok::KwInput, "expected input(...)");
        expect(Tok::LParen, "expected '(' after input");
        prog.input_vars = parse_var_list();
        expect(Tok::RParen, "expected ')'");
        std::set<std::string> seen;
        for (const auto& v : prog.input_vars) {
            if (!seen.insert(v).second) {
                throw SyntaxError("duplicate input variable '" + v + "'", peek().line, peek().column);
            }
        }
        require_separator();

        prog.body.kind = CmdKind::Seq;
        while (peek().kind != Tok::KwReturn) {
            prog.body.children.push_back(parse_command());
            if (peek().kind == Tok::KwReturn) break;
            require_separator();
        }

        expect(Tok::KwReturn, "expected return(...)");
        expect(Tok::LParen, "expected '(' after return");
        prog.return_vars = parse_var_list();
        expect(Tok::RParen, "expected ')'");
        skip_separators();
        expect(Tok::End, "unexpected trailing input");
        return prog;
    }

  private:
    const Token& peek() const { return tokens_[pos_]; }
    Token take() { return tokens_[pos_++]; }

    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        const std::string got = t.kind == Tok::End ? "end of input"
                              : t.kind == Tok::Newline ? "end of line"
                                                       : "'" + t.text + "'";
        throw SyntaxError(msg + ", got " + got, t.line, t.column);
    }

    Token expect(Tok kind, const char* msg) {
        if (peek().kind != kind) fail(msg);
        return take();
    }

    void skip_newlines() {
        while (peek().kind == Tok::Newline) take();
    }

    void skip_separators() {
        while (peek().kind == Tok::Newline || peek().kind == Tok::Semicolon) take();
    }

    void require_separator() {
        if (peek().kind == Tok::KwReturn || peek().kind == Tok::End) return;
        if (peek().kind != Tok::Newline && peek().kind != Tok::Semicolon) {
            fail("expected ';' or end of line");
        }
        skip_separators();
    }

    std::vector<std::string> parse_var_list() {
        std::vector<std::string> vars;
        vars.push_back(expect(Tok::Ident, "expected a variable name").text);
        while (peek().kind == Tok::Comma) {
            take();
            vars.push_back(expect(Tok::Ident, "expected a variable name").text);
        }
        return vars;
    }

    Command parse_command() {
        const Token& t = peek();
        Command cmd;
        cmd.line = t.line;
        cmd.column = t.column;
        switch (t.kind) {
            case Tok::KwSkip:
                take();
                cmd.kind = CmdKind::Skip;
                return cmd;
            case Tok::KwIf: {
                take();
                cmd.kind = CmdKind::If;
                cmd.expr = parse_expr();
                expect(Tok::KwThen, "expected 'then'");
                skip_newlines();
                cmd.children.push_back(parse_command());
                skip_newlines();  // 'else' is mandatory, so this is unambiguous
                expect(Tok::KwElse, "expected 'else'");
                skip_newlines();
                cmd.children.push_back(parse_command());
                return cmd;
            }
            case Tok::Ident: {
                cmd.kind = CmdKind::Assign;
                cmd.target = take().text;
                expect(Tok::Assign, "expected ':='");
                cmd.expr = parse_expr();
                return cmd;
            }
            default:
                fail("expected a command");
        }
    }

    Expr node(ExprKind kind, const Token& at) {
        Expr e;
        e.kind = kind;
        e.line = at.line;
        e.column = at.column;
        return e;
    }

    Expr binary(ExprKind kind, Expr lhs, Expr rhs, const Token& at) {
        Expr e = node(kind, at);
        e.args.push_back(std::move(lhs));
        e.args.push_back(std::move(rhs));
        return e;
    }

    Expr parse_expr() { return parse_or(); }

    Expr parse_or() {
        Expr lhs = parse_and();
        while (peek().kind == Tok::Pipe) {
            const Token op = take();
            lhs = binary(ExprKind::Or, std::move(lhs), parse_and(), op);
        }
        return lhs;
    }

    Expr parse_and() {
        Expr lhs = parse_not();
        while (peek().kind == Tok::Amp) {
            const Token op = take();
            lhs = binary(ExprKind::And, std::move(lhs), parse_not(), op);
        }
        return lhs;
    }

    Expr parse_not() {
        if (peek().kind == Tok::Bang) {
            const Token op = take();
            Expr e = node(ExprKind::Not, op);
            e.args.push_back(parse_not());
            return e;
        }
        return parse_cmp();
    }

    Expr parse_cmp() {
        Expr lhs = parse_add();
        const Tok k = peek().kind;
        if (k == Tok::Gt || k == Tok::Ge || k == Tok::Eq) {
            const Token op = take();
            const ExprKind kind = k == Tok::Gt ? ExprKind::Gt
                                : k == Tok::Ge ? ExprKind::Ge
                                               : ExprKind::Eq;
            return binary(kind, std::move(lhs), parse_add(), op);
        }
        return lhs;
    }

    Expr parse_add() {
        Expr lhs = parse_mul();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const Token op = take();
            lhs = binary(op.kind == Tok::Plus ? ExprKind::Add : ExprKind::Sub, std::move(lhs),
                         parse_mul(), op);
        }
        return lhs;
    }

    Expr parse_mul() {
        Expr lhs = parse_primary();
        while (peek().kind == Tok::Star) {
            const Token op = take();
            lhs = binary(ExprKind::Mul, std::move(lhs), parse_primary(), op);
        }
        return lhs;
    }

    Expr make_sample(const Token& at) {
        // sample == 2^(k-1)*random + ... + 2^0*random, one fresh coin per term.
        Expr sum;
        for (std::uint32_t i = width_; i-- > 0;) {
            Expr coeff = node(ExprKind::Const, at);
            coeff.value = 1u << i;
            Expr term = binary(ExprKind::Mul, std::move(coeff), node(ExprKind::Random, at), at);
            sum = i + 1 == width_ ? std::move(term)
                                  : binary(ExprKind::Add, std::move(sum), std::move(term), at);
        }
        return sum;
    }

    Expr parse_primary() {
        const Token t = take();
        switch (t.kind) {
            case Tok::Number: {
                Expr e = node(ExprKind::Const, t);
                e.value = t.number;
                return e;
            }
            case Tok::Ident: {
                Expr e = node(ExprKind::Var, t);
                e.name = t.text;
                return e;
            }
            case Tok::KwTrue: return node(ExprKind::True, t);
            case Tok::KwFalse: return node(ExprKind::False, t);
            case Tok::KwRandom: return node(ExprKind::Random, t);
            case Tok::KwSample: return make_sample(t);
            case Tok::LParen: {
                Expr e = parse_expr();
                expect(Tok::RParen, "expected ')'");
                return e;
            }
            default:
                --pos_;
                fail("expected an expression");
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::uint32_t width_;
};

// -- static checks --------------------------------------------------------------

bool bool_position_ok(const Expr& e) {
    switch (e.kind) {
        case ExprKind::Const:
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
            return false;
        default:
            return true;
    }
}

class Checker {
  public:
    explicit Checker(ProgramAst& prog) : prog_(prog) {}

    void run() {
        std::set<std::string> defined(prog_.input_vars.begin(), prog_.input_vars.end());
        check_cmd(prog_.body, defined);
        for (const auto& v : prog_.return_vars) {
            if (!defined.count(v)) {
                throw UseBeforeAssignError("return of unassigned variable '" + v + "'", 1, 1);
            }
        }
        prog_.num_draws = static_cast<std::uint32_t>(next_coin_);
    }

  private:
    void check_cmd(Command& cmd, std::set<std::string>& defined) {
        switch (cmd.kind) {
            case CmdKind::Skip:
                return;
            case CmdKind::Assign:
                check_expr(*cmd.expr, defined);
                defined.insert(cmd.target);
                return;
            case CmdKind::Seq:
                for (Command& child : cmd.children) check_cmd(child, defined);
                return;
            case CmdKind::If: {
                check_bool_expr(*cmd.expr, defined);
                std::set<std::string> then_set = defined;
                std::set<std::string> else_set = defined;
                check_cmd(cmd.children[0], then_set);
                check_cmd(cmd.children[1], else_set);
                // A variable survives the branch only if both sides define it.
                std::set<std::string> merged;
                for (const auto& v : then_set) {
                    if (else_set.count(v)) merged.insert(v);
                }
                defined = std::move(merged);
                return;
            }
        }
    }

    void check_bool_expr(Expr& e, const std::set<std::string>& defined) {
        if (!bool_position_ok(e)) {
            throw TypeError("integer expression used in boolean position", e.line, e.column);
        }
        check_expr(e, defined);
    }

    void check_expr(Expr& e, const std::set<std::string>& defined) {
        switch (e.kind) {
            case ExprKind::True:
            case ExprKind::False:
                return;
            case ExprKind::Random:
                e.coin_index = static_cast<std::int32_t>(next_coin_++);
                return;
            case ExprKind::Const:
                if (prog_.width < 32 && e.value >= (1u << prog_.width)) {
                    throw ConstantOutOfRangeError(
                        "constant " + std::to_string(e.value) + " does not fit in " +
                            std::to_string(prog_.width) + " bits",
                        e.line, e.column);
                }
                return;
            case ExprKind::Var:
                if (!defined.count(e.name)) {
                    throw UseBeforeAssignError("variable '" + e.name + "' read before assignment",
                                               e.line, e.column);
                }
                return;
            case ExprKind::And:
            case ExprKind::Or:
                check_bool_expr(e.args[0], defined);
                check_bool_expr(e.args[1], defined);
                return;
            case ExprKind::Not:
                check_bool_expr(e.args[0], defined);
                return;
            case ExprKind::Gt:
            case ExprKind::Ge:
            case ExprKind::Eq:
            case ExprKind::Add:
            case ExprKind::Sub:
            case ExprKind::Mul:
                check_expr(e.args[0], defined);
                check_expr(e.args[1], defined);
                return;
        }
    }

    ProgramAst& prog_;
    std::size_t next_coin_ = 0;
};

std::size_t expr_size(const Expr& e) {
    std::size_t total = 1;
    for (const Expr& arg : e.args) total += expr_size(arg);
    return total;
}

std::size_t cmd_size(const Command& c) {
    std::size_t total = 1;
    if (c.expr) total += expr_size(*c.expr);
    for (const Command& child : c.children) total += cmd_size(child);
    return total;
}

// -- interpreter ------------------------------------------------------------------

class Interpreter {
  public:
    Interpreter(const ProgramAst& prog, const std::vector<bool>& coins)
        : prog_(prog), coins_(coins), mask_(prog.width >= 32 ? ~0u : (1u << prog.width) - 1) {}

    std::vector<std::uint32_t> run(const std::vector<std::uint32_t>& inputs) {
        env_.clear();
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            env_[prog_.input_vars[i]] = inputs[i];
        }
        exec(prog_.body);
        std::vector<std::uint32_t> result;
        result.reserve(prog_.return_vars.size());
        for (const auto& v : prog_.return_vars) result.push_back(env_.at(v));
        return result;
    }

  private:
    void exec(const Command& cmd) {
        switch (cmd.kind) {
            case CmdKind::Skip: return;
            case CmdKind::Assign: env_[cmd.target] = eval_int(*cmd.expr); return;
            case CmdKind::Seq:
                for (const Command& child : cmd.children) exec(child);
                return;
            case CmdKind::If:
                exec(eval_bool(*cmd.expr) ? cmd.children[0] : cmd.children[1]);
                return;
        }
    }

    std::uint32_t eval_int(const Expr& e) {
        switch (e.kind) {
            case ExprKind::Const: return e.value & mask_;
            case ExprKind::Var: return env_.at(e.name);
            case ExprKind::Add:
                return (eval_int(e.args[0]) + eval_int(e.args[1])) & mask_;
            case ExprKind::Sub:
                return (eval_int(e.args[0]) - eval_int(e.args[1])) & mask_;
            case ExprKind::Mul: {
                const std::uint64_t p =
                    std::uint64_t(eval_int(e.args[0])) * std::uint64_t(eval_int(e.args[1]));
                return static_cast<std::uint32_t>(p) & mask_;
            }
            default:
                return eval_bool(e) ? 1u : 0u;
        }
    }

    bool eval_bool(const Expr& e) {
        switch (e.kind) {
            case ExprKind::True: return true;
            case ExprKind::False: return false;
            case ExprKind::Random: return coins_[static_cast<std::size_t>(e.coin_index)];
            case ExprKind::Var: return env_.at(e.name) != 0;
            case ExprKind::And: return eval_bool(e.args[0]) && eval_bool(e.args[1]);
            case ExprKind::Or: return eval_bool(e.args[0]) || eval_bool(e.args[1]);
            case ExprKind::Not: return !eval_bool(e.args[0]);
            case ExprKind::Gt: return eval_int(e.args[0]) > eval_int(e.args[1]);
            case ExprKind::Ge: return eval_int(e.args[0]) >= eval_int(e.args[1]);
            case ExprKind::Eq: return eval_int(e.args[0]) == eval_int(e.args[1]);
            default:
                // The checker rejects integer expressions in boolean positions.
                throw Error("internal: integer expression evaluated as boolean");
        }
    }

    const ProgramAst& prog_;
    const std::vector<bool>& coins_;
    std::uint32_t mask_;
    std::map<std::string, std::uint32_t> env_;
};

}  // namespace

std::size_t ProgramAst::size() const {
    return cmd_size(body);
}

ProgramAst parse_program(const std::string& text) {
    Lexer lexer(text);
    std::vector<Token> tokens = lexer.run();
    const std::uint32_t width = lexer.width().value_or(1);
    Parser parser(std::move(tokens), width);
    ProgramAst prog = parser.run();
    Checker(prog).run();
    return prog;
}

OutputDistribution interpret(const ProgramAst& program, const std::vector<std::uint32_t>& inputs,
                             unsigned max_draws) {
    if (inputs.size() != program.input_vars.size()) {
        throw LengthError("program takes " + std::to_string(program.input_vars.size()) +
                          " inputs, got " + std::to_string(inputs.size()));
    }
    for (std::uint32_t v : inputs) {
        if (program.width < 32 && v >= (1u << program.width)) {
            throw LengthError("input value " + std::to_string(v) + " does not fit in " +
                              std::to_string(program.width) + " bits");
        }
    }
    if (program.num_draws > max_draws) {
        throw ResourceBoundError("program draws " + std::to_string(program.num_draws) +
                                 " random bits, bound is " + std::to_string(max_draws));
    }

    OutputDistribution dist;
    dist.totalRandom = pow2(program.num_draws);
    dist.successCount = dist.totalRandom;

    std::vector<bool> coins(program.num_draws, false);
    const std::uint64_t total = 1ull << program.num_draws;
    Interpreter interp(program, coins);
    for (std::uint64_t r = 0; r < total; ++r) {
        for (std::uint32_t j = 0; j < program.num_draws; ++j) {
            coins[j] = ((r >> j) & 1) != 0;
        }
        const std::vector<std::uint32_t> values = interp.run(inputs);
        dist.counts[word_from_values(values, program.width)] += 1;
    }
    return dist;
}

}  // namespace dpcheck
