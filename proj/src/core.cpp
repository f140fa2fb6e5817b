#include "mlrq/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mlrq {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void require_finite(const Vec& x, const char* what) {
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
}

}  // namespace

double mse(const Vec& a, const Vec& b) {
    require(!a.empty(), "mse: empty vectors");
    require(a.size() == b.size(), "mse: dimension mismatch");
    double sse = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        sse += d * d;
    }
    return sse / static_cast<double>(a.size());
}

Codebook::Codebook(std::size_t k_, std::size_t n_, std::vector<double> words_)
    : k(k_), n(n_), words(std::move(words_)) {
    require(k >= 1, "Codebook: k must be >= 1");
    require(n >= 1, "Codebook: n must be >= 1");
    require(words.size() == k * n, "Codebook: storage size must be k*n");
    for (double v : words) {
        if (!std::isfinite(v)) throw std::invalid_argument("Codebook: non-finite codeword entry");
    }
}

double Codebook::rate() const {
    return std::log2(static_cast<double>(k)) / static_cast<double>(n);
}

namespace detail {

NearestResult nearest_scan(const double* words, std::size_t k, std::size_t n, const double* x) {
    std::size_t best = 0;
    double best_sse = std::numeric_limits<double>::infinity();

    // Four candidates in flight, each with its own accumulator chain; every
    // chain sums (x_j - c_j)^2 sequentially over j, so each candidate's sum
    // is bit-identical to a one-at-a-time scan. A block is abandoned once
    // every partial sum already exceeds the incumbent; abandoned candidates
    // can at best tie, and ties go to the lower index.
    std::size_t i = 0;
    for (; i + 4 <= k; i += 4) {
        const double* c0 = words + i * n;
        const double* c1 = c0 + n;
        const double* c2 = c1 + n;
        const double* c3 = c2 + n;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        bool alive = true;
        for (std::size_t j = 0; j < n;) {
            const std::size_t stop = std::min(n, j + 32);
            for (; j < stop; ++j) {
                const double xv = x[j];
                const double d0 = xv - c0[j];
                const double d1 = xv - c1[j];
                const double d2 = xv - c2[j];
                const double d3 = xv - c3[j];
                s0 += d0 * d0;
                s1 += d1 * d1;
                s2 += d2 * d2;
                s3 += d3 * d3;
            }
            if (s0 >= best_sse && s1 >= best_sse && s2 >= best_sse && s3 >= best_sse) {
                alive = false;
                break;
            }
        }
        if (!alive) continue;
        if (s0 < best_sse) { best_sse = s0; best = i; }
        if (s1 < best_sse) { best_sse = s1; best = i + 1; }
        if (s2 < best_sse) { best_sse = s2; best = i + 2; }
        if (s3 < best_sse) { best_sse = s3; best = i + 3; }
    }
    for (; i < k; ++i) {
        const double* c = words + i * n;
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = x[j] - c[j];
            s += d * d;
        }
        if (s < best_sse) {
            best_sse = s;
            best = i;
        }
    }
    return {best, best_sse / static_cast<double>(n)};
}

}  // namespace detail

NearestResult nearest_codeword(const Codebook& cb, const Vec& x) {
    require(x.size() == cb.n, "nearest_codeword: dimension mismatch");
    require_finite(x, "nearest_codeword");
    return detail::nearest_scan(cb.words.data(), cb.k, cb.n, x.data());
}

LayerStack::LayerStack(std::vector<Codebook> layers_) : layers(std::move(layers_)) {
    validate();
}

void LayerStack::validate() const {
    if (layers.empty()) throw std::invalid_argument("LayerStack: needs at least one layer");
    const std::size_t n = layers.front().n;
    for (const Codebook& cb : layers) {
        if (cb.n != n) throw std::invalid_argument("LayerStack: layers disagree on dimension");
        if (cb.k < 1) throw std::invalid_argument("LayerStack: empty codebook");
    }
    if (!train_distortion.empty()) {
        if (train_distortion.size() != layers.size()) {
            throw std::invalid_argument("LayerStack: train_distortion length mismatch");
        }
        for (std::size_t i = 1; i < train_distortion.size(); ++i) {
            // Rounding slack scales with magnitude so pixel-scale MSE values
            // (hundreds) pass when the true sequence merely plateaus.
            const double prev = train_distortion[i - 1];
            const double slack = 1e-9 * (prev > 1.0 ? prev : 1.0);
            if (train_distortion[i] > prev + slack) {
                throw std::invalid_argument("LayerStack: train distortion must be non-increasing");
            }
        }
    }
    if (!test_distortion.empty() && test_distortion.size() != layers.size()) {
        throw std::invalid_argument("LayerStack: test_distortion length mismatch");
    }
}

double LayerStack::log2_equivalent_alphabet() const {
    double bits = 0.0;
    for (const Codebook& cb : layers) bits += std::log2(static_cast<double>(cb.k));
    return bits;
}

double LayerStack::total_rate() const {
    return log2_equivalent_alphabet() / static_cast<double>(dim());
}

QuantizationResult encode_multistage(const LayerStack& stack, const Vec& x, std::size_t max_layers) {
    require(!stack.layers.empty(), "encode_multistage: empty stack");
    require(x.size() == stack.dim(), "encode_multistage: dimension mismatch");
    require_finite(x, "encode_multistage");

    const std::size_t depth = std::min(max_layers, stack.depth());
    const std::size_t n = x.size();

    QuantizationResult out;
    out.indices.reserve(depth);
    out.per_layer_distortion.reserve(depth);
    out.residual = x;
    out.reconstruction.assign(n, 0.0);

    for (std::size_t i = 0; i < depth; ++i) {
        const Codebook& cb = stack.layers[i];
        const NearestResult near = detail::nearest_scan(cb.words.data(), cb.k, cb.n, out.residual.data());
        const double* c = cb.word(near.index);
        for (std::size_t j = 0; j < n; ++j) {
            out.residual[j] -= c[j];
            out.reconstruction[j] += c[j];
        }
        out.indices.push_back(static_cast<std::uint32_t>(near.index));
        // The residual MSE after subtraction equals the distance attained by
        // the selected codeword.
        out.per_layer_distortion.push_back(near.distortion);
    }
    return out;
}

Vec decode_multistage(const LayerStack& stack, std::span<const std::uint32_t> indices) {
    require(!stack.layers.empty(), "decode_multistage: empty stack");
    require(indices.size() <= stack.depth(), "decode_multistage: more indices than layers");
    const std::size_t n = stack.dim();
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const Codebook& cb = stack.layers[i];
        if (indices[i] >= cb.k) throw std::invalid_argument("decode_multistage: index out of range");
        const double* c = cb.word(indices[i]);
        for (std::size_t j = 0; j < n; ++j) out[j] += c[j];
    }
    return out;
}

}  // namespace mlrq
