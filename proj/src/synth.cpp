#include "mlrq/synth.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "mlrq/common.hpp"
#include "mlrq/rng.hpp"

namespace mlrq {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// One source realization, reproducible per (master seed, sample index)
// regardless of how samples are distributed over threads.
void fill_source_sample(Vec& out, const SourceSpec& src, std::size_t index) {
    GaussianSampler gauss(derive_seed(src.seed, seed_tag::source, index));
    const double sigma = std::sqrt(src.sigma2);
    for (double& v : out) v = sigma * gauss();
}

std::size_t codebook_size_for_rate(double rate, std::size_t n, std::size_t cap) {
    const double raw = std::exp2(rate * static_cast<double>(n));
    if (!(raw >= 0.5)) return 1;
    if (raw > static_cast<double>(cap) + 0.5) {
        throw capacity_error("simulate: layer codebook of 2^(n*R) = " + std::to_string(raw) +
                             " codewords exceeds cap " + std::to_string(cap));
    }
    const auto k = static_cast<std::size_t>(std::llround(raw));
    return k == 0 ? 1 : k;
}

}  // namespace

void SourceSpec::validate() const {
    require(n >= 1, "SourceSpec: n must be >= 1");
    require(sigma2 > 0.0 && std::isfinite(sigma2), "SourceSpec: sigma2 must be positive");
    require(num_samples >= 1, "SourceSpec: num_samples must be >= 1");
}

double shannon_bound(double sigma2, double rate) {
    require(sigma2 > 0.0 && std::isfinite(sigma2), "shannon_bound: sigma2 must be positive");
    require(rate >= 0.0 && std::isfinite(rate), "shannon_bound: rate must be >= 0");
    return sigma2 * std::exp2(-2.0 * rate);
}

double gaussian_stage_rate(double d_prev, double d_next) {
    require(d_prev > 0.0 && std::isfinite(d_prev), "gaussian_stage_rate: d_prev must be positive");
    require(d_next > 0.0 && std::isfinite(d_next), "gaussian_stage_rate: d_next must be positive");
    return std::max(0.0, 0.5 * std::log2(d_prev / d_next));
}

std::vector<ScheduleEntry> variance_schedule(double sigma2, const std::vector<double>& rates,
                                             ScheduleMode mode) {
    require(sigma2 > 0.0 && std::isfinite(sigma2), "variance_schedule: sigma2 must be positive");
    for (double r : rates) {
        require(r >= 0.0 && std::isfinite(r), "variance_schedule: rates must be >= 0");
    }

    std::vector<ScheduleEntry> schedule;
    schedule.reserve(rates.size());
    double d_prev = sigma2;      // D_{i-1}
    double var_prev = 0.0;       // previous layer's codeword variance
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double keep = std::exp2(-2.0 * rates[i]);  // 2^(-2 R_i)
        const double d_next = d_prev * keep;
        ScheduleEntry entry;
        entry.layer = i + 1;
        entry.rate = rates[i];
        entry.predicted_distortion = d_next;
        if (mode == ScheduleMode::residual_energy || i == 0) {
            entry.codeword_variance = d_prev - d_next;
        } else {
            entry.codeword_variance = var_prev * (1.0 - keep);
        }
        var_prev = entry.codeword_variance;
        d_prev = d_next;
        schedule.push_back(entry);
    }
    return schedule;
}

Codebook sample_gaussian_codebook(std::size_t k, std::size_t n, double variance,
                                  std::uint64_t seed) {
    require(k >= 1 && n >= 1, "sample_gaussian_codebook: invalid shape");
    require(variance >= 0.0 && std::isfinite(variance),
            "sample_gaussian_codebook: variance must be >= 0");
    GaussianSampler gauss(seed);
    const double scale = std::sqrt(variance);
    std::vector<double> words(k * n);
    for (double& w : words) w = scale * gauss();
    return Codebook(k, n, std::move(words));
}

Codebook sample_binary_codebook(std::size_t k, std::size_t n, double variance,
                                std::uint64_t seed) {
    require(k >= 1 && n >= 1, "sample_binary_codebook: invalid shape");
    require(variance >= 0.0 && std::isfinite(variance),
            "sample_binary_codebook: variance must be >= 0");
    GaussianSampler bits(seed);
    const double alpha = std::sqrt(variance);
    std::vector<double> words(k * n);
    for (double& w : words) w = (bits.next_u64() >> 63) ? alpha : -alpha;
    return Codebook(k, n, std::move(words));
}

RdTrace simulate_multistage(const SourceSpec& src, const std::vector<double>& rates,
                            CodebookFamily family, ScheduleMode mode, std::size_t codebook_cap) {
    src.validate();
    require(!rates.empty(), "simulate: empty rate list");

    // Realized rates come from the integer codebook sizes, and the variance
    // schedule is built on those, not on the requested rates.
    std::vector<std::size_t> sizes(rates.size());
    std::vector<double> realized(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) {
        require(rates[i] >= 0.0 && std::isfinite(rates[i]), "simulate: rates must be >= 0");
        sizes[i] = codebook_size_for_rate(rates[i], src.n, codebook_cap);
        realized[i] = std::log2(static_cast<double>(sizes[i])) / static_cast<double>(src.n);
    }
    const auto schedule = variance_schedule(src.sigma2, realized, mode);

    const std::size_t n = src.n;
    const std::size_t samples = src.num_samples;
    std::vector<double> residuals(samples * n);
    parallel_for(samples, [&](std::size_t begin, std::size_t end) {
        Vec buf(n);
        for (std::size_t s = begin; s < end; ++s) {
            fill_source_sample(buf, src, s);
            std::copy(buf.begin(), buf.end(), residuals.begin() + static_cast<std::ptrdiff_t>(s * n));
        }
    });

    RdTrace trace;
    trace.rows.reserve(rates.size());
    std::vector<double> per_sample(samples);
    double cum_rate = 0.0;

    for (std::size_t layer = 0; layer < rates.size(); ++layer) {
        const std::uint64_t cb_seed = derive_seed(src.seed, seed_tag::codebook, layer);
        const Codebook cb =
            family == CodebookFamily::gaussian
                ? sample_gaussian_codebook(sizes[layer], n, schedule[layer].codeword_variance, cb_seed)
                : sample_binary_codebook(sizes[layer], n, schedule[layer].codeword_variance, cb_seed);

        parallel_for(samples, [&](std::size_t begin, std::size_t end) {
            for (std::size_t s = begin; s < end; ++s) {
                double* r = residuals.data() + s * n;
                const NearestResult near = detail::nearest_scan(cb.words.data(), cb.k, n, r);
                const double* c = cb.word(near.index);
                for (std::size_t j = 0; j < n; ++j) r[j] -= c[j];
                per_sample[s] = near.distortion;
            }
        });

        // Fixed-order reduction keeps the trace independent of threading.
        double mean = 0.0;
        for (double d : per_sample) mean += d;
        mean /= static_cast<double>(samples);
        double varsum = 0.0;
        for (double d : per_sample) varsum += (d - mean) * (d - mean);
        const double sem = samples > 1 ? std::sqrt(varsum / (static_cast<double>(samples) *
                                                             static_cast<double>(samples - 1)))
                                       : 0.0;

        cum_rate += realized[layer];
        RdTraceRow row;
        row.layer = layer + 1;
        row.cum_rate_bits = cum_rate;
        row.distortion = mean;
        row.shannon_bound = shannon_bound(src.sigma2, cum_rate);
        row.distortion_stderr = sem;
        row.codebook_size = sizes[layer];
        trace.rows.push_back(row);
    }
    return trace;
}

OrthoStats orthogonality_statistics(const SourceSpec& src, const Codebook& cb) {
    src.validate();
    require(cb.n == src.n, "orthogonality_statistics: dimension mismatch");

    const std::size_t n = src.n;
    const std::size_t samples = src.num_samples;
    std::vector<double> re(samples), rs(samples), dist(samples);
    parallel_for(samples, [&](std::size_t begin, std::size_t end) {
        Vec x(n);
        for (std::size_t s = begin; s < end; ++s) {
            fill_source_sample(x, src, s);
            const NearestResult near = detail::nearest_scan(cb.words.data(), cb.k, n, x.data());
            const double* c = cb.word(near.index);
            double dot_est = 0.0, dot_src = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double err = x[j] - c[j];
                dot_est += err * c[j];
                dot_src += err * x[j];
            }
            re[s] = dot_est / static_cast<double>(n);
            rs[s] = dot_src / static_cast<double>(n);
            dist[s] = near.distortion;
        }
    });

    OrthoStats stats;
    for (std::size_t s = 0; s < samples; ++s) {
        stats.residual_vs_estimate += re[s];
        stats.residual_vs_source += rs[s];
        stats.mean_distortion += dist[s];
    }
    stats.residual_vs_estimate /= static_cast<double>(samples);
    stats.residual_vs_source /= static_cast<double>(samples);
    stats.mean_distortion /= static_cast<double>(samples);
    return stats;
}

std::vector<SweepRow> sweep_codebook_variance(const SourceSpec& src, std::size_t k,
                                              const std::vector<double>& variances) {
    src.validate();
    require(k >= 1, "sweep: k must be >= 1");
    require(!variances.empty(), "sweep: empty variance list");

    // One codebook seed across the sweep: the same standard-normal draws
    // scaled to each variance, so rows differ only in normalization.
    const std::uint64_t cb_seed = derive_seed(src.seed, seed_tag::sweep, 0);
    std::vector<SweepRow> rows;
    rows.reserve(variances.size());
    for (double v : variances) {
        require(v >= 0.0 && std::isfinite(v), "sweep: variances must be >= 0");
        const Codebook cb = sample_gaussian_codebook(k, src.n, v, cb_seed);
        const OrthoStats stats = orthogonality_statistics(src, cb);
        rows.push_back({v, stats.mean_distortion, stats.residual_vs_estimate,
                        stats.residual_vs_source});
    }
    return rows;
}

std::string rdtrace_csv(const RdTrace& trace) {
    std::string out = "layer,cum_rate_bits,distortion,shannon_bound\n";
    for (const RdTraceRow& row : trace.rows) {
        out += std::to_string(row.layer);
        out += ',';
        out += format_double(row.cum_rate_bits);
        out += ',';
        out += format_double(row.distortion);
        out += ',';
        out += format_double(row.shannon_bound);
        out += '\n';
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "variance,mean_distortion,residual_vs_estimate,residual_vs_source\n";
    for (const SweepRow& row : rows) {
        out += format_double(row.variance);
        out += ',';
        out += format_double(row.mean_distortion);
        out += ',';
        out += format_double(row.residual_vs_estimate);
        out += ',';
        out += format_double(row.residual_vs_source);
        out += '\n';
    }
    return out;
}

}  // namespace mlrq
