#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mlrq/core.hpp"

namespace mlrq {

struct TrainConfig {
    std::vector<std::size_t> layer_sizes;
    std::size_t max_iters = 100;
    double rel_tol = 1e-4;  // stop when relative distortion improvement drops below this
    std::size_t restarts = 3;
    double overfit_margin = 0.10;  // mu: flag a layer when test > (1 + mu) * train
    std::uint64_t seed = 0;

    void validate() const;
};

/// What to do with a layer whose test distortion exceeds the margin.
/// report: flag it and keep going. strict: stop before it. shrink: halve k
/// and retrain until the layer clears the margin or k reaches 1.
enum class OverfitPolicy { report, strict, shrink };

struct LayerReport {
    std::size_t layer = 0;  // 1-based
    std::size_t k = 0;      // size actually trained (after any shrinking)
    double train_distortion = 0.0;
    double test_distortion = 0.0;
    std::size_t iterations = 0;  // Lloyd rounds in the winning restart
    double overfit_ratio = 0.0;  // test / train
    bool flagged = false;
};

struct TrainReport {
    std::vector<LayerReport> layers;
};

struct KmeansResult {
    Codebook codebook;
    double distortion = 0.0;  // mean per-dimension MSE under nearest assignment
    std::size_t iterations = 0;
    std::vector<double> history;  // distortion after init, then after each Lloyd round
};

/// Lloyd's algorithm from a k-means++ start, best of cfg.restarts runs.
/// Empty clusters are reseeded from the point currently farthest from its
/// centroid. The reported distortion is measured against the returned
/// codebook, and history is non-increasing. Assignment is parallel over
/// points with a fixed-order reduction, so the result does not depend on
/// the thread count. Only max_iters, rel_tol, restarts, and seed are read
/// from cfg.
KmeansResult kmeans(const std::vector<Vec>& data, std::size_t k, const TrainConfig& cfg);

/// Trains cfg.layer_sizes stages in sequence: each layer runs kmeans on the
/// train residuals left by earlier layers, then both train and test
/// residuals are advanced by subtracting the assigned codeword (assignment
/// only on the test side). A layer whose test distortion exceeds
/// (1 + overfit_margin) * train distortion is flagged and handled per the
/// policy. Under strict, the flagged layer still appears in the report but
/// not in the stack. Under shrink, a layer still flagged at k = 1 is kept.
std::pair<LayerStack, TrainReport> train_multilayer(const std::vector<Vec>& train,
                                                    const std::vector<Vec>& test,
                                                    const TrainConfig& cfg,
                                                    OverfitPolicy policy = OverfitPolicy::report);

/// CSV with header layer,k,train_mse,test_mse,ratio,flagged.
std::string report_csv(const TrainReport& report);

}  // namespace mlrq
