#pragma once

/// Exact model counting over the random bits of a circuit. The only backend
/// in this version enumerates all 2^m assignments, evaluating 64 of them per
/// machine word per gate; the interface leaves room for a semantic #SAT
/// backend later. Counts are exact integers and all derived probabilities
/// stay rational.

#include <cstdint>
#include <string>

#include "dpcheck/circuit.hpp"
#include "dpcheck/rational.hpp"

namespace dpcheck {

/// A single counting request, as dispatched by the CLI.
struct CountQuery {
    enum class Target { SpecificOutput, Success, AllOutputs };

    const Circuit* circuit = nullptr;
    InputWord x;
    Target target = Target::AllOutputs;
    std::string word;  // used when target == SpecificOutput
};

class CountingBackend {
  public:
    virtual ~CountingBackend() = default;

    /// Full histogram of outputs over all random assignments.
    virtual OutputDistribution count_all(const Circuit& circuit, const InputWord& x,
                                         unsigned max_random_bits) const = 0;

    /// |{r : psi(x, r) = word}|; for conditioned circuits `word` is a value
    /// word and only successful runs count.
    virtual BigInt count_outputs(const Circuit& circuit, const InputWord& x,
                                 const std::string& word, unsigned max_random_bits) const;

    /// Number of successful runs of a conditioned circuit.
    /// Throws NotConditionedError for plain circuits.
    virtual BigInt count_success(const Circuit& circuit, const InputWord& x,
                                 unsigned max_random_bits) const;
};

/// Exhaustive bit-parallel enumeration. Blocks of 64 assignments may be
/// partitioned across threads by high-order random-bit prefix; partial
/// counts merge by exact addition, so results are independent of the
/// partitioning.
class EnumerationBackend final : public CountingBackend {
  public:
    /// num_threads = 0 picks the hardware concurrency; 1 forces serial.
    explicit EnumerationBackend(unsigned num_threads = 0) : num_threads_(num_threads) {}

    OutputDistribution count_all(const Circuit& circuit, const InputWord& x,
                                 unsigned max_random_bits) const override;
    BigInt count_outputs(const Circuit& circuit, const InputWord& x, const std::string& word,
                         unsigned max_random_bits) const override;
    BigInt count_success(const Circuit& circuit, const InputWord& x,
                         unsigned max_random_bits) const override;

  private:
    unsigned num_threads_;
};

/// Process-wide default backend (serial-or-parallel enumeration).
const CountingBackend& default_backend();

BigInt count_outputs(const Circuit& circuit, const InputWord& x, const std::string& word,
                     unsigned max_random_bits = kDefaultMaxRandomBits);
BigInt count_success(const Circuit& circuit, const InputWord& x,
                     unsigned max_random_bits = kDefaultMaxRandomBits);
OutputDistribution count_all(const Circuit& circuit, const InputWord& x,
                             unsigned max_random_bits = kDefaultMaxRandomBits);

}  // namespace dpcheck
