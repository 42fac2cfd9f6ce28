#include "dpcheck/verifier.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <tuple>

#include "dpcheck/counting.hpp"
#include "dpcheck/errors.hpp"

namespace dpcheck {

namespace {

void check_input_bound(std::uint32_t n, std::uint32_t k, unsigned max_input_bits) {
    const std::uint64_t bits = std::uint64_t(n) * k;
    if (bits > max_input_bits) {
        throw ResourceBoundError("input space of " + std::to_string(bits) +
                                 " bits exceeds the bound of " + std::to_string(max_input_bits));
    }
}

/// Visits ordered neighbor pairs lexicographically (x, index, x') without
/// materializing them; stops early when the visitor returns false.
void for_each_neighbor_pair(std::uint32_t n, std::uint32_t k,
                            const std::function<bool(const NeighborPair&)>& visit) {
    if (n == 0) return;
    const std::uint32_t top = k >= 32 ? 0xFFFFFFFFu : (1u << k) - 1;
    InputWord x;
    x.records.assign(n, 0);
    while (true) {
        for (std::uint32_t i = 0; i < n; ++i) {
            for (std::uint32_t v = 0; v <= top; ++v) {
                if (v == x.records[i]) continue;
                NeighborPair pair{x, x, i};
                pair.x_prime.records[i] = v;
                if (!visit(pair)) return;
            }
        }
        // lexicographic odometer: the last record is the fastest digit
        std::uint32_t pos = n;
        while (pos > 0) {
            --pos;
            if (x.records[pos] < top) {
                ++x.records[pos];
                break;
            }
            x.records[pos] = 0;
            if (pos == 0) return;
        }
    }
}

class DistributionCache {
  public:
    DistributionCache(const Circuit& circuit, unsigned max_random_bits)
        : circuit_(circuit), max_random_bits_(max_random_bits) {}

    const OutputDistribution& get(const InputWord& x) {
        auto it = memo_.find(x.records);
        if (it == memo_.end()) {
            it = memo_.emplace(x.records, count_all(circuit_, x, max_random_bits_)).first;
        }
        return it->second;
    }

  private:
    const Circuit& circuit_;
    unsigned max_random_bits_;
    std::map<std::vector<std::uint32_t>, OutputDistribution> memo_;
};

/// Scaled per-pair counts: for unconditioned circuits (A, B) = (a_o, b_o)
/// with denom 2^m; for conditioned ones (a_o*D2, b_o*D1) with denom D1*D2.
/// In both cases Pr[o|x] = A/denom and Pr[o|x'] = B/denom. Terms cover the
/// support at x (a_o > 0) in ascending word order; absent words cannot
/// contribute to any violation.
struct PairTerm {
    std::string word;
    BigInt a;
    BigInt b;
};

struct PairProfile {
    std::vector<PairTerm> terms;
    BigInt denom = 1;
    bool zero_success = false;
};

PairProfile make_profile(const Circuit& circuit, const OutputDistribution& dist_x,
                         const OutputDistribution& dist_xp) {
    PairProfile profile;
    if (circuit.conditioned()) {
        const BigInt& d1 = dist_x.successCount;
        const BigInt& d2 = dist_xp.successCount;
        if (sgn(d1) == 0 || sgn(d2) == 0) {
            profile.zero_success = true;
            return profile;
        }
        profile.denom = d1 * d2;
        for (const auto& [word, count] : dist_x.counts) {
            profile.terms.push_back({word, count * d2, dist_xp.count_of(word) * d1});
        }
    } else {
        profile.denom = dist_x.totalRandom;
        for (const auto& [word, count] : dist_x.counts) {
            profile.terms.push_back({word, count, dist_xp.count_of(word)});
        }
    }
    return profile;
}

Witness zero_success_witness(const NeighborPair& pair) {
    Witness w;
    w.pair = pair;
    w.kind = WitnessKind::ZeroSuccess;
    return w;
}

Verdict check_impl(const Circuit& circuit, const EpsRatio& alpha, const Rational& delta,
                   bool pure, const Limits& limits) {
    if (delta.sign() < 0 || delta > Rational(1)) {
        throw UsageError("delta must lie in [0, 1], got " + delta.str());
    }
    check_input_bound(circuit.num_records(), circuit.record_width(), limits.max_input_bits);

    Verdict verdict;
    verdict.alpha = alpha.value();
    verdict.delta = delta;

    DistributionCache cache(circuit, limits.max_random_bits);
    const BigInt& u = alpha.u();
    const BigInt& v = alpha.v();

    for_each_neighbor_pair(
        circuit.num_records(), circuit.record_width(), [&](const NeighborPair& pair) {
            const PairProfile profile =
                make_profile(circuit, cache.get(pair.x), cache.get(pair.x_prime));
            if (profile.zero_success) {
                verdict.holds = false;
                verdict.witness = zero_success_witness(pair);
                return false;
            }

            if (pure) {
                for (const PairTerm& term : profile.terms) {
                    if (v * term.a > u * term.b) {
                        Witness w;
                        w.pair = pair;
                        w.event = {term.word};
                        w.lhs = Rational(term.a, profile.denom);
                        w.rhs = Rational(term.b, profile.denom);
                        w.slack = w.lhs - alpha.value() * w.rhs - delta;
                        verdict.holds = false;
                        verdict.witness = std::move(w);
                        return false;
                    }
                }
                return true;
            }

            BigInt gap = 0;
            for (const PairTerm& term : profile.terms) {
                const BigInt excess = v * term.a - u * term.b;
                if (sgn(excess) > 0) gap += excess;
            }
            // gap / (v*denom) <= delta, compared in the integers
            if (gap * delta.den() <= v * profile.denom * delta.num()) {
                return true;
            }
            Witness w;
            w.pair = pair;
            BigInt lhs_mass = 0;
            BigInt rhs_mass = 0;
            for (const PairTerm& term : profile.terms) {
                if (v * term.a > u * term.b) {
                    w.event.push_back(term.word);
                    lhs_mass += term.a;
                    rhs_mass += term.b;
                }
            }
            w.lhs = Rational(lhs_mass, profile.denom);
            w.rhs = Rational(rhs_mass, profile.denom);
            w.slack = w.lhs - alpha.value() * w.rhs - delta;
            verdict.holds = false;
            verdict.witness = std::move(w);
            return false;
        });
    return verdict;
}

/// Minimal alpha >= 1 putting this pair's pointwise sum at or below delta,
/// or nullopt when even alpha -> infinity leaves more than delta of mass on
/// outputs with B = 0. The sum is piecewise linear and nonincreasing in
/// alpha with breakpoints at the count ratios A/B, so the crossing piece
/// can be solved exactly.
std::optional<Rational> min_alpha_for_profile(const PairProfile& profile, const Rational& delta) {
    BigInt plateau_mass = 0;
    std::vector<std::pair<BigInt, BigInt>> ratios;  // (A, B) with B > 0, A > B
    for (const PairTerm& term : profile.terms) {
        if (sgn(term.b) == 0) {
            plateau_mass += term.a;
        } else if (term.a > term.b) {
            ratios.emplace_back(term.a, term.b);
        }
    }
    const Rational plateau(plateau_mass, profile.denom);
    if (plateau > delta) return std::nullopt;
    if (ratios.empty()) return Rational(1);

    std::sort(ratios.begin(), ratios.end(), [](const auto& l, const auto& r) {
        return l.first * r.second > r.first * l.second;  // ratio descending
    });

    // Cumulative sums over terms with ratio >= the piece's breakpoint.
    struct Piece {
        Rational breakpoint;
        BigInt sum_a;
        BigInt sum_b;
    };
    std::vector<Piece> pieces;
    BigInt sum_a = 0;
    BigInt sum_b = 0;
    for (std::size_t i = 0; i < ratios.size();) {
        std::size_t j = i;
        while (j < ratios.size() &&
               ratios[j].first * ratios[i].second == ratios[i].first * ratios[j].second) {
            sum_a += ratios[j].first;
            sum_b += ratios[j].second;
            ++j;
        }
        pieces.push_back({Rational(ratios[i].first, ratios[i].second), sum_a, sum_b});
        i = j;
    }

    // Scan pieces by increasing alpha; the first whose right end dips to
    // delta contains the crossing.
    const Rational denom_r(profile.denom);
    for (std::size_t idx = pieces.size(); idx-- > 0;) {
        const Piece& piece = pieces[idx];
        const Rational value_at_breakpoint =
            Rational(piece.sum_a, profile.denom) - piece.breakpoint * Rational(piece.sum_b, profile.denom) + plateau;
        if (value_at_breakpoint <= delta) {
            const Rational alpha =
                (Rational(piece.sum_a) - (delta - plateau) * denom_r) / Rational(piece.sum_b);
            return alpha < Rational(1) ? Rational(1) : alpha;
        }
    }
    // The largest breakpoint always evaluates to the plateau (<= delta).
    throw Error("internal: breakpoint scan found no crossing piece");
}

std::string word_at(std::uint32_t index, std::uint32_t width) {
    std::string word(width, '0');
    for (std::uint32_t j = 0; j < width; ++j) {
        if ((index >> (width - 1 - j)) & 1u) word[j] = '1';  // lexicographic order
    }
    return word;
}

}  // namespace

// -- EpsRatio ------------------------------------------------------------------

EpsRatio::EpsRatio(const BigInt& u, const BigInt& v) {
    if (sgn(v) <= 0 || sgn(u) <= 0) {
        throw UsageError("alpha must be a ratio of positive integers");
    }
    const Rational r(u, v);
    if (r < Rational(1)) {
        throw UsageError("alpha = " + r.str() + " rejected: e^eps must be >= 1");
    }
    u_ = r.num();
    v_ = r.den();
}

EpsRatio EpsRatio::parse(const std::string& text) {
    const Rational r = Rational::parse(text);
    return EpsRatio(r.num(), r.den());
}

// -- neighbors -------------------------------------------------------------------

std::vector<NeighborPair> enumerate_neighbors(std::uint32_t n, std::uint32_t k,
                                              unsigned max_input_bits) {
    check_input_bound(n, k, max_input_bits);
    std::vector<NeighborPair> pairs;
    for_each_neighbor_pair(n, k, [&pairs](const NeighborPair& pair) {
        pairs.push_back(pair);
        return true;
    });
    return pairs;
}

// -- decision procedures -----------------------------------------------------------

Verdict check_pure_dp(const Circuit& circuit, const EpsRatio& alpha, const Limits& limits) {
    return check_impl(circuit, alpha, Rational(0), /*pure=*/true, limits);
}

Verdict check_approx_dp(const Circuit& circuit, const EpsRatio& alpha, const Rational& delta,
                        const Limits& limits) {
    return check_impl(circuit, alpha, delta, /*pure=*/false, limits);
}

Verdict check_pure_dp_conditioned(const Circuit& circuit, const EpsRatio& alpha,
                                  const Limits& limits) {
    if (!circuit.conditioned()) {
        throw NotConditionedError("circuit has no success flag");
    }
    return check_pure_dp(circuit, alpha, limits);
}

Verdict check_approx_dp_conditioned(const Circuit& circuit, const EpsRatio& alpha,
                                    const Rational& delta, const Limits& limits) {
    if (!circuit.conditioned()) {
        throw NotConditionedError("circuit has no success flag");
    }
    return check_approx_dp(circuit, alpha, delta, limits);
}

Rational pointwise_delta(const Circuit& circuit, const NeighborPair& pair, const EpsRatio& alpha,
                         unsigned max_random_bits) {
    const OutputDistribution dist_x = count_all(circuit, pair.x, max_random_bits);
    const OutputDistribution dist_xp = count_all(circuit, pair.x_prime, max_random_bits);
    const PairProfile profile = make_profile(circuit, dist_x, dist_xp);
    if (profile.zero_success) {
        throw ZeroSuccessError("pointwise delta undefined: zero success count in the pair");
    }
    BigInt gap = 0;
    for (const PairTerm& term : profile.terms) {
        const BigInt excess = alpha.v() * term.a - alpha.u() * term.b;
        if (sgn(excess) > 0) gap += excess;
    }
    return Rational(gap, alpha.v() * profile.denom);
}

Rational min_delta(const Circuit& circuit, const EpsRatio& alpha, const Limits& limits) {
    check_input_bound(circuit.num_records(), circuit.record_width(), limits.max_input_bits);
    DistributionCache cache(circuit, limits.max_random_bits);
    Rational worst(0);
    for_each_neighbor_pair(
        circuit.num_records(), circuit.record_width(), [&](const NeighborPair& pair) {
            const PairProfile profile =
                make_profile(circuit, cache.get(pair.x), cache.get(pair.x_prime));
            if (profile.zero_success) {
                throw ZeroSuccessError("min_delta undefined: zero success count in a pair");
            }
            BigInt gap = 0;
            for (const PairTerm& term : profile.terms) {
                const BigInt excess = alpha.v() * term.a - alpha.u() * term.b;
                if (sgn(excess) > 0) gap += excess;
            }
            const Rational value(gap, alpha.v() * profile.denom);
            if (value > worst) worst = value;
            return true;
        });
    return worst;
}

MinEpsResult min_eps_ratio(const Circuit& circuit, const Rational& delta, const Limits& limits) {
    if (delta.sign() < 0 || delta > Rational(1)) {
        throw UsageError("delta must lie in [0, 1], got " + delta.str());
    }
    check_input_bound(circuit.num_records(), circuit.record_width(), limits.max_input_bits);
    DistributionCache cache(circuit, limits.max_random_bits);

    MinEpsResult result;
    Rational best(1);
    for_each_neighbor_pair(
        circuit.num_records(), circuit.record_width(), [&](const NeighborPair& pair) {
            const PairProfile profile =
                make_profile(circuit, cache.get(pair.x), cache.get(pair.x_prime));
            if (profile.zero_success) {
                throw ZeroSuccessError("min_eps undefined: zero success count in a pair");
            }
            const std::optional<Rational> alpha = min_alpha_for_profile(profile, delta);
            if (!alpha) {
                result.infinite = true;
                return false;
            }
            if (*alpha > best) best = *alpha;
            return true;
        });
    if (!result.infinite) {
        result.alpha = EpsRatio::from_rational(best);
    }
    return result;
}

// -- epsilon formatting --------------------------------------------------------------

namespace {

struct Interval {
    Rational lo;
    Rational hi;
};

// 2*atanh(z) = 2*(z + z^3/3 + z^5/5 + ...) for 0 <= z < 1, with the
// remainder bounded by a geometric tail; hi - lo <= err on return.
Interval two_atanh(const Rational& z, const Rational& err) {
    const Rational z2 = z * z;
    const Rational one_minus_z2 = Rational(1) - z2;
    Rational power = z;  // z^(2j+1)
    Rational sum = z;
    unsigned long j = 0;
    while (true) {
        const Rational tail =
            (power * z2 * Rational(2)) / (Rational(long(2 * j + 3)) * one_minus_z2);
        if (tail <= err) {
            const Rational lo = sum * Rational(2);
            return {lo, lo + tail};
        }
        ++j;
        power *= z2;
        sum += power / Rational(long(2 * j + 1));
    }
}

}  // namespace

std::string format_epsilon(const EpsRatio& alpha, const Rational& gamma) {
    if (gamma.sign() <= 0) {
        throw UsageError("gamma must be positive");
    }
    if (alpha.u() == alpha.v()) {
        return "0";
    }

    const Rational half = gamma / Rational(2);

    // ln(alpha) = s*ln(2) + ln(q) with q in [1, 2)
    Rational q = alpha.value();
    unsigned long s = 0;
    while (q >= Rational(2)) {
        q = q / Rational(2);
        ++s;
    }

    Rational hi(0);
    if (s > 0) {
        const Rational per_term = (half / Rational(2)) / Rational(long(s));
        const Interval ln2 = two_atanh(Rational(1, 3), per_term);
        hi += Rational(long(s)) * ln2.hi;
    }
    const Rational budget_q = s > 0 ? half / Rational(2) : half;
    const Interval lnq = two_atanh((q - Rational(1)) / (q + Rational(1)), budget_q);
    hi += lnq.hi;

    // digits d: smallest with 10^-d <= gamma/2, so rounding up stays in budget
    unsigned digits = 0;
    BigInt pow10 = 1;
    while (Rational(BigInt(1), pow10) > half && digits < 10000) {
        ++digits;
        pow10 *= 10;
    }

    BigInt scaled;  // ceil(hi * 10^d)
    mpz_cdiv_q(scaled.get_mpz_t(), BigInt(hi.num() * pow10).get_mpz_t(), hi.den().get_mpz_t());

    const BigInt whole = scaled / pow10;
    if (digits == 0) {
        return whole.get_str();
    }
    BigInt frac = scaled % pow10;
    std::string frac_str = frac.get_str();
    frac_str.insert(0, digits - frac_str.size(), '0');
    return whole.get_str() + "." + frac_str;
}

// -- brute-force event oracle -----------------------------------------------------

Verdict event_oracle_check(const Circuit& circuit, const EpsRatio& alpha, const Rational& delta,
                           const Limits& limits, unsigned max_outputs) {
    if (delta.sign() < 0 || delta > Rational(1)) {
        throw UsageError("delta must lie in [0, 1], got " + delta.str());
    }
    const std::uint32_t width = circuit.value_width();
    if (width > max_outputs) {
        throw ResourceBoundError("event oracle limited to " + std::to_string(max_outputs) +
                                 " output bits, circuit has " + std::to_string(width));
    }
    check_input_bound(circuit.num_records(), circuit.record_width(), limits.max_input_bits);

    Verdict verdict;
    verdict.alpha = alpha.value();
    verdict.delta = delta;

    const std::uint32_t num_words = 1u << width;
    std::vector<std::string> words;
    words.reserve(num_words);
    for (std::uint32_t w = 0; w < num_words; ++w) {
        words.push_back(word_at(w, width));
    }

    DistributionCache cache(circuit, limits.max_random_bits);
    const Rational alpha_value = alpha.value();

    for_each_neighbor_pair(
        circuit.num_records(), circuit.record_width(), [&](const NeighborPair& pair) {
            const OutputDistribution& dist_x = cache.get(pair.x);
            const OutputDistribution& dist_xp = cache.get(pair.x_prime);
            if (circuit.conditioned() &&
                (sgn(dist_x.successCount) == 0 || sgn(dist_xp.successCount) == 0)) {
                verdict.holds = false;
                verdict.witness = zero_success_witness(pair);
                return false;
            }
            const BigInt& denom_x = circuit.conditioned() ? dist_x.successCount : dist_x.totalRandom;
            const BigInt& denom_xp =
                circuit.conditioned() ? dist_xp.successCount : dist_xp.totalRandom;

            std::vector<Rational> prob_x(num_words);
            std::vector<Rational> prob_xp(num_words);
            for (std::uint32_t w = 0; w < num_words; ++w) {
                prob_x[w] = Rational(dist_x.count_of(words[w]), denom_x);
                prob_xp[w] = Rational(dist_xp.count_of(words[w]), denom_xp);
            }

            const std::uint64_t num_events = 1ull << num_words;
            for (std::uint64_t mask = 0; mask < num_events; ++mask) {
                Rational lhs(0);
                Rational rhs(0);
                for (std::uint32_t w = 0; w < num_words; ++w) {
                    if ((mask >> w) & 1ull) {
                        lhs += prob_x[w];
                        rhs += prob_xp[w];
                    }
                }
                if (lhs > alpha_value * rhs + delta) {
                    Witness witness;
                    witness.pair = pair;
                    for (std::uint32_t w = 0; w < num_words; ++w) {
                        if ((mask >> w) & 1ull) witness.event.push_back(words[w]);
                    }
                    witness.lhs = lhs;
                    witness.rhs = rhs;
                    witness.slack = lhs - alpha_value * rhs - delta;
                    verdict.holds = false;
                    verdict.witness = std::move(witness);
                    return false;
                }
            }
            return true;
        });
    return verdict;
}

// -- JSON -----------------------------------------------------------------------

nlohmann::json verdict_to_json(const Verdict& verdict) {
    nlohmann::json out;
    out["status"] = verdict.holds ? "holds" : "violated";
    out["alpha"] = verdict.alpha.str();
    out["delta"] = verdict.delta.str();
    if (verdict.witness) {
        const Witness& w = *verdict.witness;
        nlohmann::json jw;
        jw["x"] = w.pair.x.records;
        jw["xPrime"] = w.pair.x_prime.records;
        jw["kind"] = w.kind == WitnessKind::Event ? "event" : "zero-success";
        if (w.kind == WitnessKind::Event) {
            jw["event"] = w.event;
            jw["lhs"] = w.lhs.str();
            jw["rhs"] = w.rhs.str();
            jw["slack"] = w.slack.str();
        }
        out["witness"] = jw;
    }
    return out;
}

}  // namespace dpcheck
