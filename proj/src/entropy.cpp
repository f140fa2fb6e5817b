#include "mlrq/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mlrq/common.hpp"

namespace mlrq {

namespace {

constexpr std::uint32_t kTop = 1u << 24;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::vector<std::uint32_t> cumulative(const FreqTable& table) {
    std::vector<std::uint32_t> cum(table.counts.size() + 1, 0);
    for (std::size_t s = 0; s < table.counts.size(); ++s) cum[s + 1] = cum[s] + table.counts[s];
    return cum;
}

// Carry-aware byte emitter: bytes equal to 0xFF stay pending until a
// non-carrying byte settles them, so a carry out of the 32-bit window can
// still increment already-produced output.
class RangeEncoder {
public:
    explicit RangeEncoder(std::vector<std::uint8_t>& out) : out_(out) {}

    void encode(std::uint32_t cum_lo, std::uint32_t freq, std::uint32_t total) {
        range_ /= total;
        low_ += static_cast<std::uint64_t>(cum_lo) * range_;
        range_ *= freq;
        while (range_ < kTop) {
            shift_low();
            range_ <<= 8;
        }
    }

    void flush() {
        for (int i = 0; i < 5; ++i) shift_low();
    }

private:
    void shift_low() {
        if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
            std::uint8_t byte = cache_;
            do {
                out_.push_back(static_cast<std::uint8_t>(byte + (low_ >> 32)));
                byte = 0xFF;
            } while (--pending_ != 0);
            cache_ = static_cast<std::uint8_t>(low_ >> 24);
        }
        ++pending_;
        low_ = static_cast<std::uint32_t>(low_) << 8;
    }

    std::vector<std::uint8_t>& out_;
    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t pending_ = 1;
};

class RangeDecoder {
public:
    explicit RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
        for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next();
    }

    std::uint32_t decode_freq(std::uint32_t total) {
        range_ /= total;
        const std::uint32_t t = code_ / range_;
        return t < total ? t : total - 1;
    }

    void consume(std::uint32_t cum_lo, std::uint32_t freq) {
        code_ -= cum_lo * range_;
        range_ *= freq;
        while (range_ < kTop) {
            code_ = (code_ << 8) | next();
            range_ <<= 8;
        }
    }

private:
    // Reads past the end as zero: truncated input decodes to garbage, not
    // a fault.
    std::uint8_t next() { return pos_ < bytes_.size() ? bytes_[pos_++] : 0; }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::uint32_t code_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
};

}  // namespace

FreqTable FreqTable::from_counts(std::vector<std::uint32_t> counts) {
    FreqTable table;
    table.counts = std::move(counts);
    std::uint64_t total = 0;
    for (std::uint32_t c : table.counts) {
        require(c >= 1, "FreqTable: counts must be >= 1");
        total += c;
    }
    require(!table.counts.empty(), "FreqTable: needs at least one symbol");
    if (total > kFreqTotalCap) throw capacity_error("FreqTable: total count exceeds 2^24");
    table.total = static_cast<std::uint32_t>(total);
    return table;
}

FreqTable FreqTable::uniform(std::size_t k) {
    require(k >= 1, "FreqTable: needs at least one symbol");
    if (k > kFreqTotalCap) throw capacity_error("FreqTable: total count exceeds 2^24");
    return from_counts(std::vector<std::uint32_t>(k, 1));
}

double FreqTable::entropy_bits() const {
    double bits = 0.0;
    for (std::uint32_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        bits -= p * std::log2(p);
    }
    return bits;
}

void FreqTable::validate() const {
    require(!counts.empty(), "FreqTable: needs at least one symbol");
    std::uint64_t sum = 0;
    for (std::uint32_t c : counts) {
        require(c >= 1, "FreqTable: counts must be >= 1");
        sum += c;
    }
    if (sum > kFreqTotalCap) throw capacity_error("FreqTable: total count exceeds 2^24");
    require(sum == total, "FreqTable: total does not match counts");
}

std::vector<FreqTable> train_tables(const std::vector<std::vector<std::uint32_t>>& index_planes,
                                    const std::vector<std::size_t>& layer_sizes) {
    require(index_planes.size() == layer_sizes.size(),
            "train_tables: one index plane per layer required");
    std::vector<FreqTable> tables;
    tables.reserve(layer_sizes.size());
    for (std::size_t li = 0; li < layer_sizes.size(); ++li) {
        const std::size_t k = layer_sizes[li];
        require(k >= 1, "train_tables: layer sizes must be >= 1");
        if (k > kFreqTotalCap) throw capacity_error("train_tables: layer size exceeds 2^24");

        std::vector<std::uint64_t> hist(k, 1);  // Laplace smoothing
        std::uint64_t total = k;
        for (std::uint32_t idx : index_planes[li]) {
            require(idx < k, "train_tables: index out of range for its layer");
            ++hist[idx];
            ++total;
        }
        // Halve until the total is far below the coder's 2^24 working
        // range; the truncation loss per symbol scales with total/2^24.
        const std::uint64_t target =
            std::max<std::uint64_t>(4096, std::min<std::uint64_t>(16 * k, kFreqTotalCap));
        while (total > target) {
            total = 0;
            for (std::uint64_t& c : hist) {
                c = (c + 1) >> 1;
                total += c;
            }
        }
        std::vector<std::uint32_t> counts(k);
        for (std::size_t s = 0; s < k; ++s) counts[s] = static_cast<std::uint32_t>(hist[s]);
        tables.push_back(FreqTable::from_counts(std::move(counts)));
    }
    return tables;
}

std::vector<std::uint8_t> ac_encode(std::span<const std::uint32_t> symbols,
                                    const FreqTable& table) {
    table.validate();
    const auto cum = cumulative(table);
    std::vector<std::uint8_t> out;
    out.reserve(symbols.size() / 4 + 8);
    RangeEncoder enc(out);
    for (std::uint32_t s : symbols) {
        require(s < table.counts.size(), "ac_encode: symbol out of range");
        enc.encode(cum[s], table.counts[s], table.total);
    }
    enc.flush();
    return out;
}

std::vector<std::uint32_t> ac_decode(std::span<const std::uint8_t> bytes, const FreqTable& table,
                                     std::size_t count) {
    table.validate();
    const auto cum = cumulative(table);
    std::vector<std::uint32_t> out;
    out.reserve(count);
    RangeDecoder dec(bytes);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t t = dec.decode_freq(table.total);
        const auto it = std::upper_bound(cum.begin(), cum.end(), t);
        const auto s = static_cast<std::uint32_t>(it - cum.begin() - 1);
        dec.consume(cum[s], table.counts[s]);
        out.push_back(s);
    }
    return out;
}

}  // namespace mlrq
