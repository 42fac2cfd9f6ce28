#pragma once

/// Decision and optimization procedures for differential privacy of
/// probabilistic circuits. Everything reduces to exact integer counts over
/// the random bits: a circuit is epsilon-DP iff for every neighboring input
/// pair and output word, v*a <= u*b where alpha = e^eps = u/v and a, b are
/// the counts at x and x'; the approximate variant compares the summed
/// clipped gaps against v*2^m*delta. Conditioned circuits renormalize by
/// their per-input success counts D1, D2 (reject when either is zero).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpcheck/circuit.hpp"
#include "dpcheck/rational.hpp"

namespace dpcheck {

/// Default ceiling on n*k when enumerating neighboring input pairs.
inline constexpr unsigned kDefaultMaxInputBits = 20;

/// alpha = e^eps as an exact ratio u/v with u >= v >= 1 (eps >= 0).
class EpsRatio {
  public:
    EpsRatio() : u_(1), v_(1) {}
    /// Canonicalizes u/v; throws UsageError unless u/v >= 1 and v >= 1.
    EpsRatio(const BigInt& u, const BigInt& v);

    /// Accepts "u/v" or a bare integer "u".
    static EpsRatio parse(const std::string& text);
    static EpsRatio from_rational(const Rational& r) { return EpsRatio(r.num(), r.den()); }

    const BigInt& u() const { return u_; }
    const BigInt& v() const { return v_; }
    Rational value() const { return Rational(u_, v_); }
    std::string str() const { return value().str(); }

    friend bool operator==(const EpsRatio& a, const EpsRatio& b) {
        return a.u_ == b.u_ && a.v_ == b.v_;
    }

  private:
    BigInt u_;
    BigInt v_;
};

/// Ordered pair of inputs differing in exactly the record at `index`.
struct NeighborPair {
    InputWord x;
    InputWord x_prime;
    std::size_t index = 0;
};

/// Resource ceilings for whole-circuit verification.
struct Limits {
    unsigned max_random_bits = kDefaultMaxRandomBits;
    unsigned max_input_bits = kDefaultMaxInputBits;
};

enum class WitnessKind : std::uint8_t { Event, ZeroSuccess };

/// Evidence for a violation: the neighbor pair plus, for an event witness,
/// the worst event E* with its exact probabilities and the positive slack
/// lhs - alpha*rhs - delta.
struct Witness {
    NeighborPair pair;
    WitnessKind kind = WitnessKind::Event;
    std::vector<std::string> event;  // sorted output words; singleton for pure checks
    Rational lhs;
    Rational rhs;
    Rational slack;
};

struct Verdict {
    bool holds = true;
    Rational alpha{1};
    Rational delta{0};
    std::optional<Witness> witness;  // engaged iff !holds
};

/// Serializes a verdict as the tool's JSON object; rationals appear as
/// canonical "num/den" strings, records as integer arrays.
nlohmann::json verdict_to_json(const Verdict& verdict);

/// All ordered pairs of n-record, k-bit inputs differing in exactly one
/// record, lexicographic by (x, index, x'). The count is 2^(nk)*n*(2^k-1).
/// Throws ResourceBoundError when n*k exceeds max_input_bits.
std::vector<NeighborPair> enumerate_neighbors(std::uint32_t n, std::uint32_t k,
                                              unsigned max_input_bits = kDefaultMaxInputBits);

/// Pure eps-DP: holds iff v*a_o <= u*b_o for every pair and output word.
/// A violation reports the lexicographically smallest witness (pair order,
/// then word). Conditioned circuits are renormalized per Appendix-style
/// counts and reject on zero success.
Verdict check_pure_dp(const Circuit& circuit, const EpsRatio& alpha, const Limits& limits = {});

/// (eps, delta)-DP via the pointwise form: holds iff for every pair
/// sum_o max(v*a_o - u*b_o, 0) <= v*2^m*delta. A violation reports
/// E* = {o : v*a_o > u*b_o} for the first violating pair.
Verdict check_approx_dp(const Circuit& circuit, const EpsRatio& alpha, const Rational& delta,
                        const Limits& limits = {});

/// Aliases that insist on a conditioned circuit (NotConditionedError
/// otherwise); plain check_* also accept conditioned circuits.
Verdict check_pure_dp_conditioned(const Circuit& circuit, const EpsRatio& alpha,
                                  const Limits& limits = {});
Verdict check_approx_dp_conditioned(const Circuit& circuit, const EpsRatio& alpha,
                                    const Rational& delta, const Limits& limits = {});

/// sum_o max(Pr[o|x] - alpha*Pr[o|x'], 0) for one pair, exactly.
Rational pointwise_delta(const Circuit& circuit, const NeighborPair& pair, const EpsRatio& alpha,
                         unsigned max_random_bits = kDefaultMaxRandomBits);

/// The minimal delta such that the circuit is (eps, delta)-DP: the maximum
/// of pointwise_delta over all neighbor pairs (0 iff pure DP holds).
Rational min_delta(const Circuit& circuit, const EpsRatio& alpha, const Limits& limits = {});

/// Minimal alpha* >= 1 with min_delta(alpha*) <= delta, or infinite when
/// some pair keeps mass above delta on outputs impossible at x'.
struct MinEpsResult {
    bool infinite = false;
    EpsRatio alpha;  // meaningful iff !infinite

    std::string str() const { return infinite ? "inf" : alpha.str(); }
};

MinEpsResult min_eps_ratio(const Circuit& circuit, const Rational& delta,
                           const Limits& limits = {});

/// Decimal eps_hat with 0 <= eps_hat - ln(alpha) <= gamma, computed by an
/// interval ln with directed rounding up. gamma must be positive.
std::string format_epsilon(const EpsRatio& alpha, const Rational& gamma);

/// Brute-force oracle over every event E of 2^l output words (l <= max_outputs)
/// checking Pr[E|x] <= alpha*Pr[E|x'] + delta directly. Exists as an
/// independent cross-check of the pointwise implementation.
Verdict event_oracle_check(const Circuit& circuit, const EpsRatio& alpha, const Rational& delta,
                           const Limits& limits = {}, unsigned max_outputs = 3);

}  // namespace dpcheck
