#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mlrq {

/// Hard cap on a table's total count; keeps 32-bit coder arithmetic
/// overflow-free.
inline constexpr std::uint32_t kFreqTotalCap = 1u << 24;

/// Static symbol frequencies for one index stream. Every count is at least
/// one, so no symbol is uncodable.
struct FreqTable {
    std::vector<std::uint32_t> counts;
    std::uint32_t total = 0;

    static FreqTable from_counts(std::vector<std::uint32_t> counts);
    static FreqTable uniform(std::size_t k);

    std::size_t symbol_count() const { return counts.size(); }
    double entropy_bits() const;  // Shannon entropy of the table, bits/symbol
    void validate() const;
};

/// One table per layer: Laplace-smoothed histograms of the observed
/// indices (count + 1 per symbol), halved until the total is small enough
/// that coder precision loss stays negligible. Unobserved layers get
/// uniform tables.
std::vector<FreqTable> train_tables(const std::vector<std::vector<std::uint32_t>>& index_planes,
                                    const std::vector<std::size_t>& layer_sizes);

/// Arithmetic-codes `symbols` under the static table. Integer-only 32-bit
/// range coder with carry propagation and a 5-byte terminating flush;
/// identical inputs give identical bytes on any platform. An empty input
/// produces the flush alone.
std::vector<std::uint8_t> ac_encode(std::span<const std::uint32_t> symbols,
                                    const FreqTable& table);

/// Exact inverse of ac_encode given the same table and the original symbol
/// count. With a different table or truncated bytes the output is
/// unspecified but stays in range and never faults; framing above this
/// layer is what detects corruption.
std::vector<std::uint32_t> ac_decode(std::span<const std::uint8_t> bytes, const FreqTable& table,
                                     std::size_t count);

}  // namespace mlrq
