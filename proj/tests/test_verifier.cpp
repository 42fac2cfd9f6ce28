#include <doctest.h>

#include <random>

#include "dpcheck/errors.hpp"
#include "dpcheck/gadgets.hpp"
#include "dpcheck/netlist.hpp"
#include "dpcheck/verifier.hpp"
#include "test_support.hpp"

using namespace dpcheck;
namespace ts = dpcheck::testsupport;

namespace {

Rational rat(long num, long den) {
    return Rational(BigInt(num), BigInt(den));
}

Circuit rr25() {
    return gen_rr(DyadicProb::from_rational(rat(1, 4)));
}

// Re-evaluates a violation witness directly through prob_event.
void check_witness_valid(const Circuit& c, const Verdict& verdict) {
    REQUIRE(!verdict.holds);
    REQUIRE(verdict.witness.has_value());
    const Witness& w = *verdict.witness;
    if (w.kind != WitnessKind::Event) return;
    const std::set<std::string> event(w.event.begin(), w.event.end());
    const Rational lhs = prob_event(c, w.pair.x, event);
    const Rational rhs = prob_event(c, w.pair.x_prime, event);
    CHECK(lhs == w.lhs);
    CHECK(rhs == w.rhs);
    CHECK(lhs > verdict.alpha * rhs + verdict.delta);
    CHECK(w.slack == lhs - verdict.alpha * rhs - verdict.delta);
    CHECK(w.slack.sign() > 0);
}

}  // namespace

TEST_SUITE("verifier") {

TEST_CASE("eps ratio validation") {
    CHECK(EpsRatio::parse("3").str() == "3/1");
    CHECK(EpsRatio::parse("6/2").str() == "3/1");
    CHECK_THROWS_AS(EpsRatio::parse("1/2"), UsageError);
    CHECK_THROWS_AS(EpsRatio::parse("-3/1"), UsageError);
    CHECK_THROWS_AS(EpsRatio::parse("0"), UsageError);
}

TEST_CASE("neighbor enumeration") {
    const auto one_bit = enumerate_neighbors(1, 1);
    REQUIRE(one_bit.size() == 2);
    CHECK(one_bit[0].x.records == std::vector<std::uint32_t>{0});
    CHECK(one_bit[0].x_prime.records == std::vector<std::uint32_t>{1});
    CHECK(one_bit[1].x.records == std::vector<std::uint32_t>{1});
    CHECK(one_bit[1].x_prime.records == std::vector<std::uint32_t>{0});

    CHECK(enumerate_neighbors(2, 1).size() == 8);   // 4 inputs x 2 flips
    CHECK(enumerate_neighbors(1, 2).size() == 12);  // 4 inputs x 3 alternatives
    CHECK(enumerate_neighbors(3, 2).size() == 64 * 3 * 3);

    // lexicographic: pairs from x = (0,0) come first, flipping record 0 first
    const auto pairs = enumerate_neighbors(2, 1);
    CHECK(pairs[0].x.records == std::vector<std::uint32_t>{0, 0});
    CHECK(pairs[0].x_prime.records == std::vector<std::uint32_t>{1, 0});
    CHECK(pairs[0].index == 0);
    CHECK(pairs[1].x_prime.records == std::vector<std::uint32_t>{0, 1});
    CHECK(pairs[1].index == 1);

    CHECK_THROWS_AS(enumerate_neighbors(21, 1), ResourceBoundError);
    CHECK_THROWS_AS(enumerate_neighbors(3, 7), ResourceBoundError);
}

TEST_CASE("pure dp on randomized response") {
    const Circuit c = rr25();
    CHECK(check_pure_dp(c, EpsRatio::parse("3/1")).holds);

    const Verdict violated = check_pure_dp(c, EpsRatio::parse("2997/1000"));
    REQUIRE_FALSE(violated.holds);
    const Witness& w = *violated.witness;
    // lexicographically smallest witness: pair ((0),(1)), word "0"
    CHECK(w.pair.x.records == std::vector<std::uint32_t>{0});
    CHECK(w.pair.x_prime.records == std::vector<std::uint32_t>{1});
    CHECK(w.event == std::vector<std::string>{"0"});
    CHECK(w.lhs == rat(3, 4));
    CHECK(w.rhs == rat(1, 4));
    CHECK(w.slack == rat(3, 4000));
    check_witness_valid(c, violated);
}

TEST_CASE("pure dp trivial cases") {
    // constant output: equal distributions at every input
    CircuitBuilder b(1, 1, 1);
    const NodeId r = b.add_random(0);
    b.add_input(0, 0);
    b.add_output(r);
    const Circuit c = b.build();
    CHECK(check_pure_dp(c, EpsRatio(1, 1)).holds);
}

TEST_CASE("approx dp on randomized response") {
    const Circuit c = rr25();
    CHECK(check_approx_dp(c, EpsRatio(1, 1), rat(1, 2)).holds);  // equality case

    const Verdict violated = check_approx_dp(c, EpsRatio(1, 1), rat(499, 1000));
    REQUIRE_FALSE(violated.holds);
    CHECK(violated.witness->event == std::vector<std::string>{"0"});  // E* for pair ((0),(1))
    CHECK(violated.witness->lhs == rat(3, 4));
    CHECK(violated.witness->rhs == rat(1, 4));
    check_witness_valid(c, violated);

    CHECK(check_approx_dp(c, EpsRatio(1, 1), Rational(1)).holds);
    CHECK_THROWS_AS(check_approx_dp(c, EpsRatio(1, 1), rat(3, 2)), UsageError);
}

TEST_CASE("pointwise delta") {
    const Circuit c = rr25();
    const NeighborPair pair{{{1}}, {{0}}, 0};
    CHECK(pointwise_delta(c, pair, EpsRatio(1, 1)) == rat(1, 2));
    CHECK(pointwise_delta(c, pair, EpsRatio(3, 1)) == Rational(0));
    CHECK(pointwise_delta(c, pair, EpsRatio(2, 1)) == rat(1, 4));

    // identical distributions
    CircuitBuilder b(1, 1, 1);
    b.add_input(0, 0);
    b.add_output(b.add_random(0));
    CHECK(pointwise_delta(b.build(), pair, EpsRatio(1, 1)) == Rational(0));
}

TEST_CASE("min delta") {
    const Circuit c = rr25();
    CHECK(min_delta(c, EpsRatio(1, 1)) == rat(1, 2));
    CHECK(min_delta(c, EpsRatio(2, 1)) == rat(1, 4));
    CHECK(min_delta(c, EpsRatio(3, 1)) == Rational(0));
}

TEST_CASE("min eps ratio") {
    const Circuit c = rr25();
    CHECK(min_eps_ratio(c, Rational(0)).alpha == EpsRatio(3, 1));
    CHECK(min_eps_ratio(c, rat(1, 4)).alpha == EpsRatio(2, 1));
    CHECK(min_eps_ratio(c, rat(1, 2)).alpha == EpsRatio(1, 1));

    // identity circuit discloses its input: infinite at delta < 1
    CircuitBuilder b(1, 1, 0);
    b.add_output(b.add_input(0, 0));
    const Circuit ident = b.build();
    CHECK(min_eps_ratio(ident, rat(1, 2)).infinite);
    CHECK(min_eps_ratio(ident, rat(1, 2)).str() == "inf");
    CHECK_FALSE(min_eps_ratio(ident, Rational(1)).infinite);
    CHECK_THROWS_AS(min_eps_ratio(ident, rat(-1, 2)), UsageError);
}

TEST_CASE("consistency between the three pure views") {
    std::mt19937 rng(31337);
    const auto alphas = {EpsRatio(1, 1), EpsRatio(3, 2), EpsRatio(3, 1)};
    for (int trial = 0; trial < 40; ++trial) {
        const Circuit c = ts::random_circuit(rng);
        for (const EpsRatio& alpha : alphas) {
            const bool pure = check_pure_dp(c, alpha).holds;
            const bool approx_zero = check_approx_dp(c, alpha, Rational(0)).holds;
            const Rational md = min_delta(c, alpha);
            REQUIRE(pure == approx_zero);
            REQUIRE(pure == md.is_zero());
            // threshold exactness around min_delta
            REQUIRE(check_approx_dp(c, alpha, md).holds);
            if (md.sign() > 0) {
                REQUIRE_FALSE(check_approx_dp(c, alpha, md * rat(999, 1000)).holds);
            }
        }
    }
}

TEST_CASE("inverse consistency of min_eps and min_delta") {
    std::mt19937 rng(4242);
    const auto deltas = {Rational(0), rat(1, 8), rat(1, 4), rat(1, 2)};
    for (int trial = 0; trial < 30; ++trial) {
        const Circuit c = ts::random_circuit(rng);
        for (const Rational& delta : deltas) {
            const MinEpsResult res = min_eps_ratio(c, delta);
            if (res.infinite) continue;
            REQUIRE(min_delta(c, res.alpha) <= delta);
            const Rational alpha_value = res.alpha.value();
            if (alpha_value > Rational(1)) {
                // any alpha' strictly below alpha* must still violate
                const Rational below = Rational(1) + (alpha_value - Rational(1)) * rat(99, 100);
                REQUIRE(min_delta(c, EpsRatio::from_rational(below)) > delta);
            }
        }
    }
}

TEST_CASE("format_epsilon") {
    CHECK(format_epsilon(EpsRatio(1, 1), rat(1, 1000)) == "0");

    const std::string ln3 = format_epsilon(EpsRatio(3, 1), rat(1, 1000000));
    const double ln3_value = std::stod(ln3);
    CHECK(ln3_value >= 1.098612);
    CHECK(ln3_value <= 1.098614);

    const std::string ln2 = format_epsilon(EpsRatio(2, 1), rat(1, 1000));
    const double ln2_value = std::stod(ln2);
    CHECK(ln2_value >= 0.693147);
    CHECK(ln2_value <= 0.694148);

    // directed rounding: always an upper bound within gamma
    for (long num : {3L, 7L, 100L, 1000001L}) {
        for (long gden : {100L, 100000L}) {
            const std::string s = format_epsilon(EpsRatio(BigInt(num), BigInt(2)), rat(1, gden));
            const double value = std::stod(s);
            const double exact = std::log(double(num) / 2.0);
            CHECK(value >= exact - 1e-12);
            CHECK(value <= exact + 1.0 / double(gden) + 1e-12);
        }
    }
    CHECK_THROWS_AS(format_epsilon(EpsRatio(3, 1), Rational(0)), UsageError);
}

TEST_CASE("event oracle agrees on randomized response") {
    const Circuit c = rr25();
    for (const char* alpha : {"1/1", "3/1"}) {
        for (const char* delta : {"0/1", "1/2"}) {
            const Verdict fast = check_approx_dp(c, EpsRatio::parse(alpha), Rational::parse(delta));
            const Verdict slow =
                event_oracle_check(c, EpsRatio::parse(alpha), Rational::parse(delta));
            REQUIRE(fast.holds == slow.holds);
        }
    }
    CHECK(event_oracle_check(c, EpsRatio(1, 1), Rational(1)).holds);
}

TEST_CASE("event oracle rejects wide outputs") {
    CircuitBuilder b(1, 1, 4);
    for (std::uint32_t j = 0; j < 4; ++j) b.add_output(b.add_random(j));
    b.add_input(0, 0);
    CHECK_THROWS_AS(event_oracle_check(b.build(), EpsRatio(1, 1), Rational(0)),
                    ResourceBoundError);
}

TEST_CASE("conditioned checks match unconditioned on a constant-true flag") {
    const Circuit plain = rr25();
    const Circuit wrapped = with_success_flag(plain, true);
    REQUIRE(wrapped.conditioned());
    for (const char* alpha : {"1/1", "2/1", "3/1"}) {
        const Verdict pure_plain = check_pure_dp(plain, EpsRatio::parse(alpha));
        const Verdict pure_cond = check_pure_dp_conditioned(wrapped, EpsRatio::parse(alpha));
        REQUIRE(pure_plain.holds == pure_cond.holds);
        for (const char* delta : {"0/1", "1/4", "1/2"}) {
            const Verdict a_plain =
                check_approx_dp(plain, EpsRatio::parse(alpha), Rational::parse(delta));
            const Verdict a_cond = check_approx_dp_conditioned(wrapped, EpsRatio::parse(alpha),
                                                               Rational::parse(delta));
            REQUIRE(a_plain.holds == a_cond.holds);
        }
    }
    CHECK_THROWS_AS(check_pure_dp_conditioned(plain, EpsRatio(1, 1)), NotConditionedError);
}

TEST_CASE("conditioning onto a point mass destroys privacy") {
    // success = r0, value = x: conditioned on success the output is x itself
    CircuitBuilder b(1, 1, 1);
    const NodeId x = b.add_input(0, 0);
    const NodeId r = b.add_random(0);
    b.set_outputs({r, x});
    b.set_success_output(0);
    const Circuit c = b.build();
    const Verdict v = check_pure_dp_conditioned(c, EpsRatio(1000000, 1));
    REQUIRE_FALSE(v.holds);
    CHECK(v.witness->kind == WitnessKind::Event);
    CHECK(check_approx_dp_conditioned(c, EpsRatio(2, 1), rat(999, 1000)).holds == false);
}

TEST_CASE("zero success rejects") {
    const Circuit never = with_success_flag(rr25(), false);
    const Verdict v = check_pure_dp_conditioned(never, EpsRatio(3, 1));
    REQUIRE_FALSE(v.holds);
    CHECK(v.witness->kind == WitnessKind::ZeroSuccess);
    const Verdict va = check_approx_dp_conditioned(never, EpsRatio(3, 1), Rational(1));
    REQUIRE_FALSE(va.holds);  // rejected before the threshold test
    CHECK_THROWS_AS(min_delta(never, EpsRatio(3, 1)), ZeroSuccessError);
    CHECK_THROWS_AS(min_eps_ratio(never, rat(1, 2)), ZeroSuccessError);
}

TEST_CASE("verdict JSON shape") {
    const Verdict v = check_pure_dp(rr25(), EpsRatio::parse("2997/1000"));
    const nlohmann::json j = verdict_to_json(v);
    CHECK(j["status"] == "violated");
    CHECK(j["alpha"] == "2997/1000");
    CHECK(j["delta"] == "0/1");
    CHECK(j["witness"]["x"] == nlohmann::json::array({0}));
    CHECK(j["witness"]["xPrime"] == nlohmann::json::array({1}));
    CHECK(j["witness"]["event"] == nlohmann::json::array({"0"}));
    CHECK(j["witness"]["kind"] == "event");
    CHECK(j["witness"]["lhs"] == "3/4");
    CHECK(j["witness"]["slack"] == "3/4000");

    const nlohmann::json holds = verdict_to_json(check_pure_dp(rr25(), EpsRatio(3, 1)));
    CHECK(holds["status"] == "holds");
    CHECK_FALSE(holds.contains("witness"));
}

TEST_CASE("witness validity on random circuits") {
    std::mt19937 rng(86);
    int violated_seen = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const Circuit c = ts::random_circuit(rng);
        for (const char* alpha : {"1/1", "3/1"}) {
            for (const char* delta : {"0/1", "1/8"}) {
                const Verdict v =
                    check_approx_dp(c, EpsRatio::parse(alpha), Rational::parse(delta));
                if (!v.holds) {
                    ++violated_seen;
                    check_witness_valid(c, v);
                }
            }
        }
    }
    CHECK(violated_seen > 10);  // the corpus must actually exercise violations
}

}  // TEST_SUITE
