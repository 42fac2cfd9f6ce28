#include "dpcheck/counting.hpp"

#include <bit>
#include <cstddef>
#include <thread>
#include <unordered_map>
#include <vector>

#include "dpcheck/errors.hpp"

namespace dpcheck {

namespace {

// Lane value of random bit j < 6 within a 64-assignment block.
constexpr std::uint64_t kLaneMasks[6] = {
    0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
    0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull,
};

void check_bounds(const Circuit& circuit, const InputWord& x, unsigned max_random_bits) {
    const unsigned m = circuit.num_random_bits();
    if (m > max_random_bits) {
        throw ResourceBoundError("circuit has " + std::to_string(m) +
                                 " random bits, enumeration bound is " +
                                 std::to_string(max_random_bits));
    }
    if (m > 62) {
        throw ResourceBoundError("enumeration beyond 2^62 assignments is not supported");
    }
    if (x.records.size() != circuit.num_records()) {
        throw LengthError("input word has " + std::to_string(x.records.size()) +
                          " records, circuit expects " + std::to_string(circuit.num_records()));
    }
    for (std::uint32_t v : x.records) {
        if (circuit.record_width() < 32 && v >= (1u << circuit.record_width())) {
            throw LengthError("record value " + std::to_string(v) + " does not fit in " +
                              std::to_string(circuit.record_width()) + " bits");
        }
    }
}

struct BlockLayout {
    std::uint64_t num_blocks;
    unsigned lanes_per_block;   // 2^min(m, 6)
    std::uint64_t lane_mask;    // low lanes_per_block bits set

    explicit BlockLayout(unsigned m) {
        num_blocks = m <= 6 ? 1 : (1ull << (m - 6));
        lanes_per_block = 1u << (m < 6 ? m : 6);
        lane_mask = lanes_per_block == 64 ? ~0ull : (1ull << lanes_per_block) - 1;
    }
};

// Evaluates one block of 64 assignments; vals[i] holds node i across lanes.
void evaluate_block(const std::vector<Gate>& nodes, const InputWord& x, std::uint64_t block,
                    std::vector<std::uint64_t>& vals) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Gate& g = nodes[i];
        switch (g.kind) {
            case GateKind::InputBit:
                vals[i] = record_bit(x.records[g.a], g.b) ? ~0ull : 0ull;
                break;
            case GateKind::RandomBit:
                vals[i] = g.a < 6 ? kLaneMasks[g.a]
                                  : (((block >> (g.a - 6)) & 1) ? ~0ull : 0ull);
                break;
            case GateKind::And: vals[i] = vals[g.a] & vals[g.b]; break;
            case GateKind::Or: vals[i] = vals[g.a] | vals[g.b]; break;
            case GateKind::Not: vals[i] = ~vals[g.a]; break;
            case GateKind::Xor: vals[i] = vals[g.a] ^ vals[g.b]; break;
        }
    }
}

struct ValueOutputs {
    std::vector<NodeId> nodes;           // value outputs in order
    std::optional<NodeId> flag;          // success flag node, if conditioned

    explicit ValueOutputs(const Circuit& c) {
        for (std::uint32_t j = 0; j < c.num_outputs(); ++j) {
            if (c.conditioned() && j == c.success_output()) {
                flag = c.outputs()[j];
            } else {
                nodes.push_back(c.outputs()[j]);
            }
        }
    }
};

struct Accumulator {
    std::unordered_map<std::uint64_t, std::uint64_t> packed;  // value width <= 64
    std::map<std::string, std::uint64_t> wide;                // value width > 64
    std::uint64_t success = 0;
};

void accumulate_range(const Circuit& circuit, const InputWord& x, const ValueOutputs& outs,
                      const BlockLayout& layout, std::uint64_t first_block,
                      std::uint64_t last_block, Accumulator& acc) {
    const bool use_packed = outs.nodes.size() <= 64;
    std::vector<std::uint64_t> vals(circuit.nodes().size());

    for (std::uint64_t block = first_block; block < last_block; ++block) {
        evaluate_block(circuit.nodes(), x, block, vals);
        std::uint64_t live = layout.lane_mask;
        if (outs.flag) {
            live &= vals[*outs.flag];
            acc.success += static_cast<std::uint64_t>(std::popcount(live));
        }
        while (live != 0) {
            const unsigned lane = std::countr_zero(live);
            live &= live - 1;
            if (use_packed) {
                std::uint64_t key = 0;
                for (std::size_t j = 0; j < outs.nodes.size(); ++j) {
                    key |= ((vals[outs.nodes[j]] >> lane) & 1ull) << j;
                }
                ++acc.packed[key];
            } else {
                std::string key(outs.nodes.size(), '0');
                for (std::size_t j = 0; j < outs.nodes.size(); ++j) {
                    if ((vals[outs.nodes[j]] >> lane) & 1ull) key[j] = '1';
                }
                ++acc.wide[key];
            }
        }
    }
}

std::string unpack_key(std::uint64_t key, std::size_t width) {
    std::string word(width, '0');
    for (std::size_t j = 0; j < width; ++j) {
        if ((key >> j) & 1ull) word[j] = '1';
    }
    return word;
}

// Threshold below which threading is never worth spawning.
constexpr std::uint64_t kMinBlocksPerThread = 1u << 12;

unsigned pick_thread_count(unsigned requested, std::uint64_t num_blocks) {
    unsigned t = requested != 0 ? requested : std::thread::hardware_concurrency();
    if (t == 0) t = 1;
    while (t > 1 && num_blocks / t < kMinBlocksPerThread) --t;
    return t;
}

}  // namespace

BigInt CountingBackend::count_outputs(const Circuit& circuit, const InputWord& x,
                                      const std::string& word, unsigned max_random_bits) const {
    return count_all(circuit, x, max_random_bits).count_of(word);
}

BigInt CountingBackend::count_success(const Circuit& circuit, const InputWord& x,
                                      unsigned max_random_bits) const {
    if (!circuit.conditioned()) {
        throw NotConditionedError("count_success requires a conditioned circuit");
    }
    return count_all(circuit, x, max_random_bits).successCount;
}

OutputDistribution EnumerationBackend::count_all(const Circuit& circuit, const InputWord& x,
                                                 unsigned max_random_bits) const {
    check_bounds(circuit, x, max_random_bits);
    const BlockLayout layout(circuit.num_random_bits());
    const ValueOutputs outs(circuit);

    const unsigned threads = pick_thread_count(num_threads_, layout.num_blocks);
    std::vector<Accumulator> parts(threads);
    if (threads == 1) {
        accumulate_range(circuit, x, outs, layout, 0, layout.num_blocks, parts[0]);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(threads);
        const std::uint64_t chunk = (layout.num_blocks + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t b0 = t * chunk;
            const std::uint64_t b1 = std::min<std::uint64_t>(b0 + chunk, layout.num_blocks);
            workers.emplace_back([&, t, b0, b1] {
                accumulate_range(circuit, x, outs, layout, b0, b1, parts[t]);
            });
        }
        for (auto& w : workers) w.join();
    }

    OutputDistribution dist;
    dist.totalRandom = pow2(circuit.num_random_bits());
    std::uint64_t success = 0;
    for (const Accumulator& part : parts) {
        success += part.success;
        for (const auto& [key, count] : part.packed) {
            dist.counts[unpack_key(key, outs.nodes.size())] += count;
        }
        for (const auto& [key, count] : part.wide) {
            dist.counts[key] += count;
        }
    }
    dist.successCount =
        circuit.conditioned() ? BigInt(static_cast<unsigned long>(success)) : dist.totalRandom;
    return dist;
}

BigInt EnumerationBackend::count_outputs(const Circuit& circuit, const InputWord& x,
                                         const std::string& word,
                                         unsigned max_random_bits) const {
    check_bounds(circuit, x, max_random_bits);
    if (word.size() != circuit.value_width()) {
        throw LengthError("target word '" + word + "' does not match output width " +
                          std::to_string(circuit.value_width()));
    }
    const BlockLayout layout(circuit.num_random_bits());
    const ValueOutputs outs(circuit);

    std::uint64_t total = 0;
    std::vector<std::uint64_t> vals(circuit.nodes().size());
    for (std::uint64_t block = 0; block < layout.num_blocks; ++block) {
        evaluate_block(circuit.nodes(), x, block, vals);
        std::uint64_t match = layout.lane_mask;
        if (outs.flag) match &= vals[*outs.flag];
        for (std::size_t j = 0; j < outs.nodes.size() && match != 0; ++j) {
            const std::uint64_t v = vals[outs.nodes[j]];
            match &= word[j] == '1' ? v : ~v;
        }
        total += static_cast<std::uint64_t>(std::popcount(match));
    }
    return BigInt(static_cast<unsigned long>(total));
}

BigInt EnumerationBackend::count_success(const Circuit& circuit, const InputWord& x,
                                         unsigned max_random_bits) const {
    if (!circuit.conditioned()) {
        throw NotConditionedError("count_success requires a conditioned circuit");
    }
    check_bounds(circuit, x, max_random_bits);
    const BlockLayout layout(circuit.num_random_bits());
    const NodeId flag = circuit.outputs()[circuit.success_output()];

    std::uint64_t total = 0;
    std::vector<std::uint64_t> vals(circuit.nodes().size());
    for (std::uint64_t block = 0; block < layout.num_blocks; ++block) {
        evaluate_block(circuit.nodes(), x, block, vals);
        total += static_cast<std::uint64_t>(std::popcount(vals[flag] & layout.lane_mask));
    }
    return BigInt(static_cast<unsigned long>(total));
}

const CountingBackend& default_backend() {
    static const EnumerationBackend backend;
    return backend;
}

BigInt count_outputs(const Circuit& circuit, const InputWord& x, const std::string& word,
                     unsigned max_random_bits) {
    return default_backend().count_outputs(circuit, x, word, max_random_bits);
}

BigInt count_success(const Circuit& circuit, const InputWord& x, unsigned max_random_bits) {
    return default_backend().count_success(circuit, x, max_random_bits);
}

OutputDistribution count_all(const Circuit& circuit, const InputWord& x,
                             unsigned max_random_bits) {
    return default_backend().count_all(circuit, x, max_random_bits);
}

}  // namespace dpcheck
