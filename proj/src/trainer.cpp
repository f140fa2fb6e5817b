#include "mlrq/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "mlrq/common.hpp"
#include "mlrq/rng.hpp"

namespace mlrq {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick_uniform(std::mt19937_64& rng, std::size_t n) {
    const auto idx = static_cast<std::size_t>(u01(rng) * static_cast<double>(n));
    return idx < n ? idx : n - 1;
}

double sqdist(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

struct Assignment {
    std::vector<std::size_t> cluster;  // per point
    std::vector<double> point_mse;     // per point, against its cluster center
    double mean_mse = 0.0;
};

Assignment assign_points(const std::vector<Vec>& data, const std::vector<double>& centers,
                         std::size_t k, std::size_t n) {
    Assignment out;
    out.cluster.resize(data.size());
    out.point_mse.resize(data.size());
    parallel_for(data.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const NearestResult near = detail::nearest_scan(centers.data(), k, n, data[i].data());
            out.cluster[i] = near.index;
            out.point_mse[i] = near.distortion;
        }
    });
    double sum = 0.0;
    for (double d : out.point_mse) sum += d;
    out.mean_mse = sum / static_cast<double>(data.size());
    return out;
}

// Seeds one k-means++ start: the first center uniform over the data, each
// later center drawn with probability proportional to squared distance from
// the centers chosen so far.
std::vector<double> plus_plus_init(const std::vector<Vec>& data, std::size_t k, std::size_t n,
                                   std::mt19937_64& rng) {
    const std::size_t count = data.size();
    std::vector<double> centers(k * n);
    std::vector<double> d2(count);

    const std::size_t first = pick_uniform(rng, count);
    std::copy_n(data[first].data(), n, centers.data());
    parallel_for(count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) d2[i] = sqdist(data[i].data(), centers.data(), n);
    });

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t chosen;
        if (total > 0.0) {
            const double target = u01(rng) * total;
            double acc = 0.0;
            chosen = count - 1;
            for (std::size_t i = 0; i < count; ++i) {
                acc += d2[i];
                if (acc > target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            // All points coincide with some chosen center; any pick works.
            chosen = pick_uniform(rng, count);
        }
        double* row = centers.data() + c * n;
        std::copy_n(data[chosen].data(), n, row);
        parallel_for(count, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                d2[i] = std::min(d2[i], sqdist(data[i].data(), row, n));
            }
        });
    }
    return centers;
}

KmeansResult run_once(const std::vector<Vec>& data, std::size_t k, const TrainConfig& cfg,
                      std::uint64_t seed) {
    const std::size_t count = data.size();
    const std::size_t n = data.front().size();
    std::mt19937_64 rng(seed);

    std::vector<double> centers = plus_plus_init(data, k, n, rng);
    Assignment assign = assign_points(data, centers, k, n);

    KmeansResult result;
    result.history.push_back(assign.mean_mse);

    std::vector<double> sums(k * n);
    std::vector<std::size_t> sizes(k);
    double prev = assign.mean_mse;
    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::size_t i = 0; i < count; ++i) {
            double* row = sums.data() + assign.cluster[i] * n;
            const double* x = data[i].data();
            for (std::size_t j = 0; j < n; ++j) row[j] += x[j];
            ++sizes[assign.cluster[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] == 0) continue;
            const double inv = 1.0 / static_cast<double>(sizes[c]);
            for (std::size_t j = 0; j < n; ++j) centers[c * n + j] = sums[c * n + j] * inv;
        }
        // Re-seed each empty cluster from the point farthest from its
        // center, consuming each donor at most once.
        std::vector<double> claim = assign.point_mse;
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] != 0) continue;
            std::size_t far = 0;
            for (std::size_t i = 1; i < count; ++i) {
                if (claim[i] > claim[far]) far = i;
            }
            std::copy_n(data[far].data(), n, centers.data() + c * n);
            claim[far] = -1.0;
        }

        assign = assign_points(data, centers, k, n);
        result.history.push_back(assign.mean_mse);
        ++result.iterations;
        const double cur = assign.mean_mse;
        if (cur == 0.0 || prev - cur < cfg.rel_tol * prev) break;
        prev = cur;
    }

    result.codebook = Codebook(k, n, std::move(centers));
    result.distortion = result.history.back();
    return result;
}

}  // namespace

void TrainConfig::validate() const {
    for (std::size_t k : layer_sizes) require(k >= 1, "TrainConfig: layer sizes must be >= 1");
    require(max_iters >= 1, "TrainConfig: max_iters must be >= 1");
    require(rel_tol > 0.0 && std::isfinite(rel_tol), "TrainConfig: rel_tol must be positive");
    require(restarts >= 1, "TrainConfig: restarts must be >= 1");
    require(overfit_margin >= 0.0 && std::isfinite(overfit_margin),
            "TrainConfig: overfit_margin must be >= 0");
}

KmeansResult kmeans(const std::vector<Vec>& data, std::size_t k, const TrainConfig& cfg) {
    cfg.validate();
    require(!data.empty(), "kmeans: data must be non-empty");
    const std::size_t n = data.front().size();
    require(n >= 1, "kmeans: vectors must be non-empty");
    for (const Vec& v : data) {
        require(v.size() == n, "kmeans: all vectors must share one dimension");
        for (double x : v) require(std::isfinite(x), "kmeans: data must be finite");
    }
    require(k >= 1, "kmeans: k must be >= 1");
    require(k <= data.size(), "kmeans: k must not exceed the number of points");

    KmeansResult best;
    double best_distortion = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        KmeansResult run = run_once(data, k, cfg, derive_seed(cfg.seed, seed_tag::restart, r));
        if (run.distortion < best_distortion) {
            best_distortion = run.distortion;
            best = std::move(run);
        }
    }
    return best;
}

std::pair<LayerStack, TrainReport> train_multilayer(const std::vector<Vec>& train,
                                                    const std::vector<Vec>& test,
                                                    const TrainConfig& cfg, OverfitPolicy policy) {
    cfg.validate();
    require(!cfg.layer_sizes.empty(), "train_multilayer: layer_sizes must be non-empty");
    require(!train.empty() && !test.empty(), "train_multilayer: train and test must be non-empty");
    const std::size_t n = train.front().size();
    for (const Vec& v : test) {
        require(v.size() == n, "train_multilayer: train/test dimension mismatch");
    }

    std::vector<Vec> res_train = train;
    std::vector<Vec> res_test = test;

    LayerStack stack;
    TrainReport report;

    for (std::size_t li = 0; li < cfg.layer_sizes.size(); ++li) {
        TrainConfig layer_cfg = cfg;
        layer_cfg.seed = derive_seed(cfg.seed, seed_tag::codebook, li);

        std::size_t k = cfg.layer_sizes[li];
        KmeansResult km;
        double test_mse = 0.0;
        bool flagged = false;
        for (;;) {
            km = kmeans(res_train, k, layer_cfg);
            double sum = 0.0;
            for (const Vec& v : res_test) sum += nearest_codeword(km.codebook, v).distortion;
            test_mse = sum / static_cast<double>(res_test.size());

            if (km.distortion == 0.0) {
                flagged = test_mse > 0.0;
            } else {
                flagged = test_mse > (1.0 + cfg.overfit_margin) * km.distortion;
            }
            if (flagged && policy == OverfitPolicy::shrink && k > 1) {
                k /= 2;
                continue;
            }
            break;
        }

        LayerReport row;
        row.layer = li + 1;
        row.k = k;
        row.train_distortion = km.distortion;
        row.test_distortion = test_mse;
        row.iterations = km.iterations;
        if (km.distortion == 0.0) {
            row.overfit_ratio = test_mse == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
        } else {
            row.overfit_ratio = test_mse / km.distortion;
        }
        row.flagged = flagged;
        report.layers.push_back(row);

        if (flagged && policy == OverfitPolicy::strict) break;

        // Advance both residual streams by the assigned codewords. The
        // train-side assignment replays the winning run's final pass.
        for (auto [residuals, size] : {std::pair(&res_train, res_train.size()),
                                       std::pair(&res_test, res_test.size())}) {
            parallel_for(size, [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    Vec& r = (*residuals)[i];
                    const NearestResult near = nearest_codeword(km.codebook, r);
                    const double* w = km.codebook.word(near.index);
                    for (std::size_t j = 0; j < n; ++j) r[j] -= w[j];
                }
            });
        }

        stack.layers.push_back(std::move(km.codebook));
        stack.train_distortion.push_back(km.distortion);
        stack.test_distortion.push_back(test_mse);
    }

    if (stack.layers.empty()) {
        throw std::runtime_error("train_multilayer: first layer already overfits under strict policy");
    }
    stack.validate();
    return {std::move(stack), std::move(report)};
}

std::string report_csv(const TrainReport& report) {
    std::string out = "layer,k,train_mse,test_mse,ratio,flagged\n";
    for (const LayerReport& row : report.layers) {
        out += std::to_string(row.layer);
        out += ',';
        out += std::to_string(row.k);
        out += ',';
        out += format_double(row.train_distortion);
        out += ',';
        out += format_double(row.test_distortion);
        out += ',';
        out += format_double(row.overfit_ratio);
        out += ',';
        out += row.flagged ? '1' : '0';
        out += '\n';
    }
    return out;
}

}  // namespace mlrq
