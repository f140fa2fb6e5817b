#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace mlrq {

/// A real vector of dimension n: one source realization, one vectorized
/// image block, or one residual.
using Vec = std::vector<double>;

/// Mean squared error per dimension, (1/n) * sum (a_j - b_j)^2, accumulated
/// sequentially over dimensions. Throws std::invalid_argument on length
/// mismatch or empty input.
double mse(const Vec& a, const Vec& b);

/// One quantization stage: k codewords of dimension n, stored row-major.
struct Codebook {
    std::size_t k = 0;
    std::size_t n = 0;
    std::vector<double> words;  // k * n, row-major

    Codebook() = default;
    Codebook(std::size_t k_, std::size_t n_, std::vector<double> words_);

    const double* word(std::size_t i) const { return words.data() + i * n; }

    /// Bits per dimension, log2(k) / n.
    double rate() const;
};

struct NearestResult {
    std::size_t index = 0;
    double distortion = 0.0;  // MSE between query and the chosen codeword
};

/// Exhaustive nearest-codeword search under MSE. Ties go to the lowest
/// index. Per-candidate error sums are accumulated sequentially over
/// dimensions in double precision, so results are bit-reproducible.
NearestResult nearest_codeword(const Codebook& cb, const Vec& x);

/// Ordered stages of a multi-layer quantizer, all sharing one dimension,
/// plus per-layer training statistics when the stack came from training.
struct LayerStack {
    std::vector<Codebook> layers;
    std::vector<double> train_distortion;  // empty unless trained
    std::vector<double> test_distortion;   // empty unless tracked

    LayerStack() = default;
    explicit LayerStack(std::vector<Codebook> layers_);

    std::size_t depth() const { return layers.size(); }
    std::size_t dim() const { return layers.empty() ? 0 : layers.front().n; }

    /// log2 of the equivalent single-stage alphabet size, sum of log2(k_i).
    /// Kept in the log domain; the product itself overflows quickly.
    double log2_equivalent_alphabet() const;

    /// Total rate in bits per dimension, sum of log2(k_i) / n.
    double total_rate() const;

    void validate() const;
};

/// Outcome of pushing one vector through the full greedy pipeline.
struct QuantizationResult {
    std::vector<std::uint32_t> indices;      // one per layer encoded
    Vec reconstruction;                      // sum of selected codewords
    Vec residual;                            // input minus reconstruction
    std::vector<double> per_layer_distortion;  // residual MSE after each layer
};

inline constexpr std::size_t kAllLayers = std::numeric_limits<std::size_t>::max();

/// Greedy sequential encoding: each stage quantizes the previous stage's
/// residual and the selected codewords accumulate into the reconstruction.
/// max_layers restricts encoding to a stack prefix; indices for the first
/// j layers do not depend on deeper layers.
QuantizationResult encode_multistage(const LayerStack& stack, const Vec& x,
                                     std::size_t max_layers = kAllLayers);

/// Sum of the codewords selected by `indices`, taken over the first
/// indices.size() layers. An empty index list decodes to the zero vector.
/// Accumulation order matches encode_multistage's reconstruction, so a
/// full-index decode is bit-identical to it.
Vec decode_multistage(const LayerStack& stack, std::span<const std::uint32_t> indices);

namespace detail {
/// Scan k row-major codewords for the one nearest to x. Shared hot path
/// for quantization and k-means assignment.
NearestResult nearest_scan(const double* words, std::size_t k, std::size_t n, const double* x);
}  // namespace detail

}  // namespace mlrq
