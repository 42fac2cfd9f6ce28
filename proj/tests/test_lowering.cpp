#include <doctest.h>

#include "dpcheck/counting.hpp"
#include "dpcheck/errors.hpp"
#include "dpcheck/lowering.hpp"
#include "dpcheck/netlist.hpp"
#include "test_support.hpp"

using namespace dpcheck;
namespace ts = dpcheck::testsupport;

namespace {

// Evaluates one arithmetic block over two k-bit operands fed as inputs.
std::uint32_t run_block(ArithKind kind, std::uint32_t k, std::uint32_t a, std::uint32_t b) {
    CircuitBuilder builder(2, k, 0);
    WireBundle ba;
    WireBundle bb;
    for (std::uint32_t i = 0; i < k; ++i) ba.push_back(builder.add_input(0, i));
    for (std::uint32_t i = 0; i < k; ++i) bb.push_back(builder.add_input(1, i));
    const WireBundle out = build_arith_block(builder, kind, k, {ba, bb});
    for (NodeId w : out) builder.add_output(w);
    const Circuit c = builder.build();
    return values_from_word(evaluate(c, {{a, b}}, {}), k)[0];
}

bool same_distribution(const OutputDistribution& lhs, const OutputDistribution& rhs) {
    return lhs.counts == rhs.counts && lhs.totalRandom == rhs.totalRandom &&
           lhs.successCount == rhs.successCount;
}

std::uint64_t input_space(const ProgramAst& prog) {
    return 1ull << (prog.input_vars.size() * prog.width);
}

std::vector<std::uint32_t> input_tuple(const ProgramAst& prog, std::uint64_t index) {
    std::vector<std::uint32_t> values;
    const std::uint32_t mask = (1u << prog.width) - 1;
    for (std::size_t i = 0; i < prog.input_vars.size(); ++i) {
        values.push_back(static_cast<std::uint32_t>(index >> (i * prog.width)) & mask);
    }
    return values;
}

}  // namespace

TEST_SUITE("lowering") {

TEST_CASE("arith blocks match native arithmetic, exhaustively at k=4") {
    CHECK(run_block(ArithKind::Add, 4, 9, 9) == 2);
    CHECK(run_block(ArithKind::Mul, 4, 3, 5) == 15);
    for (std::uint32_t a = 0; a < 16; ++a) {
        for (std::uint32_t b = 0; b < 16; ++b) {
            REQUIRE(run_block(ArithKind::Add, 4, a, b) == ((a + b) & 15u));
            REQUIRE(run_block(ArithKind::Sub, 4, a, b) == ((a - b) & 15u));
            REQUIRE(run_block(ArithKind::Mul, 4, a, b) == ((a * b) & 15u));
            REQUIRE(run_block(ArithKind::Gt, 4, a, b) == (a > b ? 1u : 0u));
            REQUIRE(run_block(ArithKind::Ge, 4, a, b) == (a >= b ? 1u : 0u));
            REQUIRE(run_block(ArithKind::Eq, 4, a, b) == (a == b ? 1u : 0u));
        }
    }
}

TEST_CASE("const and mux blocks") {
    CircuitBuilder builder(1, 4, 1);
    WireBundle left;
    for (std::uint32_t i = 0; i < 4; ++i) left.push_back(builder.add_input(0, i));
    const WireBundle right = build_arith_block(builder, ArithKind::Const, 4, {}, 10);
    const WireBundle guard{builder.add_random(0)};
    const WireBundle muxed = build_arith_block(builder, ArithKind::Mux, 4, {guard, left, right});
    for (NodeId w : muxed) builder.add_output(w);
    const Circuit c = builder.build();
    // guard false selects the right bundle bit-for-bit
    CHECK(values_from_word(evaluate(c, {{6}}, {false}), 4)[0] == 10);
    CHECK(values_from_word(evaluate(c, {{6}}, {true}), 4)[0] == 6);
}

TEST_CASE("block operand validation") {
    CircuitBuilder builder(1, 2, 0);
    WireBundle a{builder.add_input(0, 0), builder.add_input(0, 1)};
    CHECK_THROWS_AS(build_arith_block(builder, ArithKind::Add, 2, {a}), UsageError);
    WireBundle narrow{a[0]};
    CHECK_THROWS_AS(build_arith_block(builder, ArithKind::Add, 2, {a, narrow}), UsageError);
}

TEST_CASE("compiled rr matches the reference netlist") {
    const Circuit compiled = compile(parse_program(ts::kRr25Program));
    const Circuit reference = parse_netlist(ts::kRr25Netlist);
    CHECK(compiled.num_records() == 1);
    CHECK(compiled.num_random_bits() == 2);
    CHECK(compiled.num_outputs() == 1);
    for (std::uint32_t x = 0; x < 2; ++x) {
        REQUIRE(same_distribution(output_distribution(compiled, {{x}}),
                                  output_distribution(reference, {{x}})));
    }
}

TEST_CASE("compiled integer example") {
    const Circuit c = compile(parse_program(ts::kEgtransProgram));
    CHECK(c.num_records() == 2);
    CHECK(c.record_width() == 4);
    CHECK(c.num_random_bits() == 1);
    CHECK(c.num_outputs() == 4);
    const OutputDistribution dist = output_distribution(c, {{5, 2}});
    CHECK(dist.count_of(word_from_values({15}, 4)) == 1);
    CHECK(dist.count_of(word_from_values({1}, 4)) == 1);
    CHECK(dist.totalRandom == 2);
}

TEST_CASE("identity program wires pass through") {
    const Circuit c = compile(parse_program("#width 4\ninput(x)\nSKIP\nreturn(x)\n"));
    const OutputDistribution dist = output_distribution(c, {{7}});
    CHECK(dist.counts.size() == 1);
    CHECK(dist.count_of(word_from_values({7}, 4)) == 1);
}

TEST_CASE("reassignment compiles to the interpreted semantics") {
    const ProgramAst prog = parse_program(
        "#width 3\ninput(x)\nx := x + 1\nif random then x := x * 2 else SKIP\nx := x - 1\n"
        "return(x)\n");
    const Circuit c = compile(prog);
    for (std::uint32_t x = 0; x < 8; ++x) {
        REQUIRE(same_distribution(output_distribution(c, {{x}}), interpret(prog, {x})));
    }
}

TEST_CASE("compiler equals interpreter on the whole corpus") {
    for (const std::string& text : ts::compiler_corpus()) {
        const ProgramAst prog = parse_program(text);
        const std::uint64_t draws = prog.num_draws;
        REQUIRE(prog.input_vars.size() * prog.width + draws <= 16);
        const Circuit c = compile(prog);
        for (std::uint64_t idx = 0; idx < input_space(prog); ++idx) {
            const auto values = input_tuple(prog, idx);
            REQUIRE(same_distribution(output_distribution(c, {values}), interpret(prog, values)));
        }
    }
}

TEST_CASE("compiled size stays within the linear bound") {
    for (const std::string& text : ts::compiler_corpus()) {
        const ProgramAst prog = parse_program(text);
        const Circuit c = compile(prog);
        const std::size_t budget =
            40u * static_cast<std::size_t>(prog.width) * prog.width * prog.size();
        REQUIRE(c.nodes().size() <= budget);
    }
}

}  // TEST_SUITE
