#include <doctest.h>

#include <random>

#include "dpcheck/circuit.hpp"
#include "dpcheck/counting.hpp"
#include "dpcheck/errors.hpp"
#include "dpcheck/netlist.hpp"
#include "test_support.hpp"

using namespace dpcheck;
namespace ts = dpcheck::testsupport;

namespace {

Circuit rr25() {
    return parse_netlist(ts::kRr25Netlist);
}

// flag = r0, value = x
Circuit conditioned_passthrough() {
    CircuitBuilder b(1, 1, 1);
    const NodeId x = b.add_input(0, 0);
    const NodeId flag = b.add_random(0);
    b.set_outputs({flag, x});
    b.set_success_output(0);
    return b.build();
}

}  // namespace

TEST_SUITE("circuit") {

TEST_CASE("minimal well-formed circuit") {
    CircuitBuilder b(1, 1, 1);
    const NodeId x = b.add_input(0, 0);
    const NodeId r = b.add_random(0);
    b.add_output(b.add_and(x, r));
    const Circuit c = b.build();
    CHECK(c.num_records() == 1);
    CHECK(c.num_random_bits() == 1);
    CHECK(c.num_outputs() == 1);
    CHECK(evaluate(c, {{1}}, {true}) == "1");
    CHECK(evaluate(c, {{1}}, {false}) == "0");
}

TEST_CASE("validation rejects malformed circuits") {
    // forward reference
    CHECK_THROWS_AS(build_circuit({{GateKind::Not, 1, 0}, {GateKind::RandomBit, 0, 0}}, {0}, 0, 1, 1,
                                  std::nullopt),
                    CycleError);
    // self reference
    CHECK_THROWS_AS(build_circuit({{GateKind::And, 0, 0}}, {0}, 0, 1, 0, std::nullopt),
                    CycleError);
    // out-of-range record / bit / random
    CHECK_THROWS_AS(build_circuit({{GateKind::InputBit, 1, 0}}, {0}, 1, 1, 0, std::nullopt),
                    IndexError);
    CHECK_THROWS_AS(build_circuit({{GateKind::InputBit, 0, 1}}, {0}, 1, 1, 0, std::nullopt),
                    IndexError);
    CHECK_THROWS_AS(build_circuit({{GateKind::RandomBit, 2, 0}}, {0}, 0, 1, 2, std::nullopt),
                    IndexError);
    // outputs
    CHECK_THROWS_AS(build_circuit({{GateKind::InputBit, 0, 0}}, {}, 1, 1, 0, std::nullopt),
                    EmptyOutputsError);
    CHECK_THROWS_AS(build_circuit({{GateKind::InputBit, 0, 0}}, {3}, 1, 1, 0, std::nullopt),
                    IndexError);
    // conditioned flag out of range
    CHECK_THROWS_AS(
        build_circuit({{GateKind::InputBit, 0, 0}}, {0, 0}, 1, 1, 0, std::optional<std::uint32_t>(5)),
        IndexError);
    CHECK_THROWS_AS(build_circuit({{GateKind::InputBit, 0, 0}}, {0}, 1, 1, 0, 0u), IndexError);
    // zero record width
    CHECK_THROWS_AS(build_circuit({{GateKind::InputBit, 0, 0}}, {0}, 1, 0, 0, std::nullopt),
                    UsageError);
}

TEST_CASE("builder rejects undefined operands eagerly") {
    CircuitBuilder b(1, 1, 0);
    const NodeId x = b.add_input(0, 0);
    CHECK_THROWS_AS(b.add_and(x, 7), CycleError);
    CHECK_THROWS_AS(b.add_not(3), CycleError);
    CHECK_THROWS_AS(b.add_input(2, 0), IndexError);
}

TEST_CASE("evaluate on the rr netlist") {
    const Circuit c = rr25();
    CHECK(c.num_records() == 1);
    CHECK(c.num_random_bits() == 2);
    CHECK(c.num_outputs() == 1);
    // flip fires only when both coins are 1
    CHECK(evaluate(c, {{1}}, {true, true}) == "0");
    CHECK(evaluate(c, {{1}}, {false, true}) == "1");
    CHECK(evaluate(c, {{0}}, {true, true}) == "1");
    // deterministic
    CHECK(evaluate(c, {{1}}, {true, false}) == evaluate(c, {{1}}, {true, false}));
    // length mismatches
    CHECK_THROWS_AS(evaluate(c, {{1, 0}}, {true, true}), LengthError);
    CHECK_THROWS_AS(evaluate(c, {{1}}, {true}), LengthError);
    CHECK_THROWS_AS(evaluate(c, {{2}}, {true, true}), LengthError);
}

TEST_CASE("identity circuit evaluates to its input") {
    CircuitBuilder b(1, 1, 1);
    b.add_output(b.add_input(0, 0));
    b.add_random(0);
    const Circuit c = b.build();
    CHECK(evaluate(c, {{0}}, {true}) == "0");
    CHECK(evaluate(c, {{0}}, {false}) == "0");
}

TEST_CASE("output distribution of rr") {
    const OutputDistribution dist = output_distribution(rr25(), {{1}});
    CHECK(dist.count_of("1") == 3);
    CHECK(dist.count_of("0") == 1);
    CHECK(dist.totalRandom == 4);
    CHECK(dist.successCount == 4);
}

TEST_CASE("distribution with no random bits is a point mass") {
    CircuitBuilder b(1, 1, 0);
    b.add_output(b.add_input(0, 0));
    const OutputDistribution dist = output_distribution(b.build(), {{1}});
    CHECK(dist.counts.size() == 1);
    CHECK(dist.count_of("1") == 1);
    CHECK(dist.totalRandom == 1);
}

TEST_CASE("conditioned distribution keys value words among successes") {
    const OutputDistribution dist = output_distribution(conditioned_passthrough(), {{1}});
    CHECK(dist.successCount == 1);
    CHECK(dist.totalRandom == 2);
    CHECK(dist.counts.size() == 1);
    CHECK(dist.count_of("1") == 1);
}

TEST_CASE("conditioned evaluation masks failing runs") {
    const Circuit c = conditioned_passthrough();
    CHECK(evaluate(c, {{1}}, {true}) == "11");   // flag, value
    CHECK(evaluate(c, {{1}}, {false}) == "00");  // masked to (0, 0...)
}

TEST_CASE("prob_event") {
    const Circuit c = rr25();
    CHECK(prob_event(c, {{1}}, {"1"}) == Rational(BigInt(3), BigInt(4)));
    CHECK(prob_event(c, {{1}}, {}) == Rational(0));
    CHECK(prob_event(c, {{1}}, {"0", "1"}) == Rational(1));
    CHECK_THROWS_AS(prob_event(c, {{1}}, {"01"}), LengthError);
}

TEST_CASE("prob_event on conditioned circuits renormalizes") {
    const Circuit c = conditioned_passthrough();
    CHECK(prob_event(c, {{1}}, {"1"}) == Rational(1));

    // success flag never fires
    CircuitBuilder b(1, 1, 1);
    const NodeId r = b.add_random(0);
    const NodeId never = b.add_and(r, b.add_not(r));
    b.set_outputs({never, r});
    b.set_success_output(0);
    CHECK_THROWS_AS(prob_event(b.build(), {{1}}, {"1"}), ZeroSuccessError);
}

TEST_CASE("resource bound on random bits") {
    CircuitBuilder b(1, 1, 31);
    const NodeId r0 = b.add_random(30);
    b.add_output(r0);
    const Circuit c = b.build();
    CHECK_THROWS_AS(output_distribution(c, {{0}}), ResourceBoundError);
}

TEST_CASE("selector on explicit events") {
    // two outputs (r0, r1); E = {01, 10} is exclusive-or
    CircuitBuilder b(1, 1, 2);
    b.add_input(0, 0);
    const NodeId r0 = b.add_random(0);
    const NodeId r1 = b.add_random(1);
    b.set_outputs({r0, r1});
    const Circuit c = b.build();

    const Circuit sel = compose_event_selector(c, {"01", "10"});
    CHECK(sel.num_outputs() == 1);
    for (int a = 0; a < 2; ++a) {
        for (int bbit = 0; bbit < 2; ++bbit) {
            const std::vector<bool> r{a == 1, bbit == 1};
            const std::string want = (a != bbit) ? "1" : "0";
            CHECK(evaluate(sel, {{0}}, r) == want);
        }
    }

    const Circuit empty_sel = compose_event_selector(c, {});
    CHECK(prob_event(empty_sel, {{0}}, {"1"}) == Rational(0));

    CHECK(prob_event(compose_event_selector(rr25(), {"1"}), {{1}}, {"1"}) ==
          Rational(BigInt(3), BigInt(4)));
}

TEST_CASE("selector soundness on random circuits") {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 60; ++trial) {
        const Circuit c = ts::random_circuit(rng);
        const std::uint32_t ell = c.num_outputs();
        std::vector<std::string> words;
        for (std::uint32_t w = 0; w < (1u << ell); ++w) {
            std::string word(ell, '0');
            for (std::uint32_t j = 0; j < ell; ++j) {
                if ((w >> j) & 1u) word[j] = '1';
            }
            words.push_back(std::move(word));
        }
        const auto inputs = ts::all_input_words(c.num_records());
        for (std::uint64_t mask = 0; mask < (1ull << words.size()); ++mask) {
            std::set<std::string> event;
            for (std::size_t i = 0; i < words.size(); ++i) {
                if ((mask >> i) & 1ull) event.insert(words[i]);
            }
            const Circuit sel = compose_event_selector(c, event);
            for (const InputWord& x : inputs) {
                REQUIRE(prob_event(c, x, event) == prob_event(sel, x, {"1"}));
            }
        }
    }
}

TEST_CASE("xor desugaring preserves evaluation") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 80; ++trial) {
        const Circuit c = ts::random_circuit(rng, {.max_random = 5});
        const Circuit plain = desugar_xor(c);
        for (const Gate& g : plain.nodes()) {
            CHECK(g.kind != GateKind::Xor);
        }
        const std::uint32_t m = c.num_random_bits();
        for (const InputWord& x : ts::all_input_words(c.num_records())) {
            for (std::uint32_t r = 0; r < (1u << m); ++r) {
                std::vector<bool> coins(m);
                for (std::uint32_t j = 0; j < m; ++j) coins[j] = ((r >> j) & 1u) != 0;
                REQUIRE(evaluate(c, x, coins) == evaluate(plain, x, coins));
            }
        }
    }
}

TEST_CASE("normalization invariant on random circuits") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const Circuit c = ts::random_circuit(rng);
        for (const InputWord& x : ts::all_input_words(c.num_records())) {
            const OutputDistribution dist = output_distribution(c, x);
            BigInt total = 0;
            for (const auto& [word, count] : dist.counts) total += count;
            REQUIRE(total == dist.successCount);
            REQUIRE(dist.successCount == dist.totalRandom);
        }
    }
}

TEST_CASE("word/value helpers") {
    CHECK(word_from_values({15, 1}, 4) == "11111000");
    CHECK(values_from_word("11111000", 4) == std::vector<std::uint32_t>{15, 1});
    CHECK(word_from_values({1}, 1) == "1");
    CHECK_THROWS_AS(values_from_word("101", 2), LengthError);
}

}  // TEST_SUITE
