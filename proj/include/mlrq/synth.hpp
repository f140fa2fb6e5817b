#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlrq/core.hpp"

namespace mlrq {

/// An i.i.d. zero-mean Gaussian source and the measurement protocol used
/// against it.
struct SourceSpec {
    std::size_t n = 0;             // vector dimension
    double sigma2 = 1.0;           // per-sample source variance
    std::uint64_t seed = 1;        // master seed for all derived streams
    std::size_t num_samples = 1000;  // realizations per measurement

    void validate() const;
};

enum class ScheduleMode {
    residual_energy,  // codeword variance = D_{i-1} - D_i (default)
    eq7_literal,      // variance recursion applied to the previous variance
};

enum class CodebookFamily { gaussian, binary };

/// Per-layer design point of the variance-normalization schedule.
struct ScheduleEntry {
    std::size_t layer = 0;            // 1-based
    double rate = 0.0;                // bits per dimension
    double codeword_variance = 0.0;   // per-entry variance of layer codewords
    double predicted_distortion = 0.0;  // D_i from the Gaussian recursion
};

/// One measured point of a distortion-rate run.
struct RdTraceRow {
    std::size_t layer = 0;  // 1-based
    double cum_rate_bits = 0.0;
    double distortion = 0.0;
    double shannon_bound = 0.0;
    double distortion_stderr = 0.0;  // standard error of the mean distortion
    std::size_t codebook_size = 0;   // realized k for this layer
};

struct RdTrace {
    std::vector<RdTraceRow> rows;
};

/// Gaussian distortion-rate bound, sigma2 * 2^(-2 rate).
double shannon_bound(double sigma2, double rate);

/// Per-stage Gaussian rate, max(0, 0.5 * log2(d_prev / d_next)).
double gaussian_stage_rate(double d_prev, double d_next);

/// Codeword-variance schedule for the given per-layer rates. Both modes
/// agree at layer 1; they differ from layer 2 on (the literal recursion
/// compounds variances instead of residual energies).
std::vector<ScheduleEntry> variance_schedule(double sigma2, const std::vector<double>& rates,
                                             ScheduleMode mode = ScheduleMode::residual_energy);

/// k codewords with i.i.d. N(0, variance) entries; fixed seed, fixed output.
Codebook sample_gaussian_codebook(std::size_t k, std::size_t n, double variance,
                                  std::uint64_t seed);

/// k codewords with equiprobable +/- sqrt(variance) entries.
Codebook sample_binary_codebook(std::size_t k, std::size_t n, double variance,
                                std::uint64_t seed);

inline constexpr std::size_t kDefaultCodebookCap = std::size_t{1} << 20;

/// Runs the full multi-stage random-codebook experiment: per layer, draws a
/// fresh codebook sized k_i = round(2^(n R_i)) with the scheduled variance,
/// quantizes every sample's current residual, and records mean distortion
/// against the Shannon bound at the realized cumulative rate. Layers are
/// processed in order and codebooks are dropped after use, so memory stays
/// at one codebook regardless of depth.
RdTrace simulate_multistage(const SourceSpec& src, const std::vector<double>& rates,
                            CodebookFamily family,
                            ScheduleMode mode = ScheduleMode::residual_energy,
                            std::size_t codebook_cap = kDefaultCodebookCap);

/// Sample means of the error/estimate and error/source correlations after
/// single-stage quantization, plus the mean distortion.
struct OrthoStats {
    double residual_vs_estimate = 0.0;  // (1/n) <x - xhat, xhat>
    double residual_vs_source = 0.0;    // (1/n) <x - xhat, x>
    double mean_distortion = 0.0;
};

OrthoStats orthogonality_statistics(const SourceSpec& src, const Codebook& cb);

struct SweepRow {
    double variance = 0.0;
    double mean_distortion = 0.0;
    double residual_vs_estimate = 0.0;
    double residual_vs_source = 0.0;
};

/// Evaluates orthogonality_statistics for Gaussian codebooks drawn at each
/// variance. Codebook and source draws reuse one seed protocol, so rows
/// differ only in the variance scaling.
std::vector<SweepRow> sweep_codebook_variance(const SourceSpec& src, std::size_t k,
                                              const std::vector<double>& variances);

/// CSV with header layer,cum_rate_bits,distortion,shannon_bound.
std::string rdtrace_csv(const RdTrace& trace);

/// CSV with header variance,mean_distortion,residual_vs_estimate,residual_vs_source.
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace mlrq
