#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlrq {

/// Thrown when an input file or byte stream cannot be read or written.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a bitstream, model file, or coded payload is malformed,
/// truncated, or refers to a different model than the one supplied.
struct decode_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a requested configuration exceeds a hard resource cap
/// (e.g. per-layer codebook size).
struct capacity_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Number of worker threads to use: hardware concurrency, capped by the
/// MLRQ_THREADS environment variable when set.
std::size_t thread_budget();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread budget, and workers write to disjoint
/// ranges, so results are identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames over the target, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::uint8_t* data,
                       std::size_t size);

}  // namespace mlrq
