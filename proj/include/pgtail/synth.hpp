#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgtail/rng.hpp"
#include "pgtail/tailstats.hpp"
#include "pgtail/vecmath.hpp"
#include "pgtail/weiszfeld.hpp"

namespace pgtail {

struct KurtosisStudyRow {
    std::string dist;  // "pareto" or "gaussian"
    double shape = 0.0;  // pareto shape; 0 for gaussian
    std::size_t size = 0;
    std::uint64_t seed = 0;
    double kurt = 0.0;  // fourth root of kurtosis of the vector norms
};

// Kurtosis of norms of `dim`-dimensional vectors with i.i.d. coordinates,
// swept over sample sizes and (for Pareto) shape parameters.
//
// Within one seed the draws are coupled: a single uniform matrix feeds every
// shape through the inverse CDF, and sizes are nested prefixes of the same
// sample. Monotone trends in size or shape are therefore visible per seed
// instead of being washed out by independent resampling.
//
// With replicates > 1 each seed averages the kurtosis over that many fresh
// matrices from its stream. A single draw of a tail-index-2 norm sample is
// noisy enough that one early extreme can invert adjacent sizes; the averaged
// estimate converges to the expected-kurtosis curve whose trend is the claim.
inline std::vector<KurtosisStudyRow> synth_pareto_study(const std::vector<double>& shapes,
                                                        std::size_t dim,
                                                        const std::vector<std::size_t>& sizes,
                                                        const std::vector<std::uint64_t>& seeds,
                                                        bool gaussian_baseline = true,
                                                        int replicates = 1) {
    if (dim == 0) throw std::invalid_argument("synth_pareto_study: dim must be positive");
    if (sizes.empty() || seeds.empty())
        throw std::invalid_argument("synth_pareto_study: sizes and seeds must be non-empty");
    if (replicates < 1) throw std::invalid_argument("synth_pareto_study: replicates must be >= 1");
    for (double a : shapes)
        if (a <= 0.0) throw std::invalid_argument("synth_pareto_study: shapes must be positive");
    std::size_t max_size = 0;
    for (std::size_t s : sizes) {
        if (s < 4) throw std::invalid_argument("synth_pareto_study: sizes must be >= 4");
        max_size = std::max(max_size, s);
    }
    std::vector<KurtosisStudyRow> rows;
    std::vector<double> u(max_size * dim);
    std::vector<double> norms(max_size);
    for (std::uint64_t seed : seeds) {
        Rng rng = Rng::stream(seed, "synth_pareto");
        std::vector<double> acc(shapes.size() * sizes.size(), 0.0);
        for (int rep = 0; rep < replicates; ++rep) {
            for (double& v : u) v = rng.uniform01();
            for (std::size_t si = 0; si < shapes.size(); ++si) {
                double inv = -1.0 / shapes[si];
                for (std::size_t i = 0; i < max_size; ++i) {
                    double sq = 0.0;
                    for (std::size_t j = 0; j < dim; ++j) {
                        double x = std::pow(1.0 - u[i * dim + j], inv);  // Pareto(shape), x >= 1
                        sq += x * x;
                    }
                    norms[i] = std::sqrt(sq);
                }
                for (std::size_t zi = 0; zi < sizes.size(); ++zi) {
                    std::vector<double> prefix(norms.begin(), norms.begin() + sizes[zi]);
                    acc[si * sizes.size() + zi] += kurtosis(prefix);
                }
            }
        }
        for (std::size_t si = 0; si < shapes.size(); ++si)
            for (std::size_t zi = 0; zi < sizes.size(); ++zi)
                rows.push_back({"pareto", shapes[si], sizes[zi], seed,
                                acc[si * sizes.size() + zi] / replicates});
        if (gaussian_baseline) {
            Rng grng = Rng::stream(seed, "synth_gauss");
            std::vector<double> gacc(sizes.size(), 0.0);
            for (int rep = 0; rep < replicates; ++rep) {
                for (std::size_t i = 0; i < max_size; ++i) {
                    double sq = 0.0;
                    for (std::size_t j = 0; j < dim; ++j) {
                        double x = grng.gaussian();
                        sq += x * x;
                    }
                    norms[i] = std::sqrt(sq);
                }
                for (std::size_t zi = 0; zi < sizes.size(); ++zi) {
                    std::vector<double> prefix(norms.begin(), norms.begin() + sizes[zi]);
                    gacc[zi] += kurtosis(prefix);
                }
            }
            for (std::size_t zi = 0; zi < sizes.size(); ++zi)
                rows.push_back({"gaussian", 0.0, sizes[zi], seed, gacc[zi] / replicates});
        }
    }
    return rows;
}

struct GmomBenchRow {
    int trial = 0;
    double gmom_abs_err = 0.0;
    double mean_abs_err = 0.0;
    bool weiszfeld_monotone = true;
};

struct GmomBenchResult {
    std::vector<GmomBenchRow> rows;
    int blocks = 0;
    std::size_t n = 0;
    double shape = 0.0;
    double true_mean = 0.0;
    double gmom_p95 = 0.0;  // 95th percentile of |gmom - true mean|
    double mean_p95 = 0.0;  // 95th percentile of |sample mean - true mean|
    int gmom_wins = 0;      // trials where gmom's absolute error is smaller
    bool all_monotone = true;
};

// Scalar mean estimation under Pareto(shape) observations: per trial, compare
// the absolute error of the geometric median-of-means (b blocks) against the
// plain sample mean, and check that the Weiszfeld objective never increased.
inline GmomBenchResult gmom_bench(double shape, std::size_t n, int blocks, int trials,
                                  std::uint64_t seed) {
    if (shape <= 1.0)
        throw std::invalid_argument("gmom_bench: shape must exceed 1 so the mean exists");
    if (blocks <= 0 || static_cast<std::size_t>(blocks) > n)
        throw std::invalid_argument("gmom_bench: blocks must lie in [1, n]");
    if (trials <= 0) throw std::invalid_argument("gmom_bench: trials must be positive");
    GmomBenchResult res;
    res.blocks = blocks;
    res.n = n;
    res.shape = shape;
    res.true_mean = shape / (shape - 1.0);
    std::size_t block_len = n / static_cast<std::size_t>(blocks);
    std::vector<double> samples(n);
    std::vector<double> block_means(static_cast<std::size_t>(blocks));
    std::vector<double> gmom_errs, mean_errs;
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::stream(seed, "gmom_bench_trial_" + std::to_string(t));
        for (double& x : samples) x = std::pow(1.0 - rng.uniform01(), -1.0 / shape);
        for (int k = 0; k < blocks; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < block_len; ++i)
                s += samples[static_cast<std::size_t>(k) * block_len + i];
            block_means[static_cast<std::size_t>(k)] = s / static_cast<double>(block_len);
        }
        WeiszfeldResult w = weiszfeld(block_means.data(), static_cast<std::size_t>(blocks), 1, 100);
        bool monotone = true;
        for (std::size_t i = 1; i < w.objective_trace.size(); ++i)
            if (w.objective_trace[i] > w.objective_trace[i - 1] + 1e-12) monotone = false;
        double sample_mean = mean(samples);
        GmomBenchRow row;
        row.trial = t;
        row.gmom_abs_err = std::abs(w.point[0] - res.true_mean);
        row.mean_abs_err = std::abs(sample_mean - res.true_mean);
        row.weiszfeld_monotone = monotone;
        res.all_monotone = res.all_monotone && monotone;
        if (row.gmom_abs_err < row.mean_abs_err) ++res.gmom_wins;
        gmom_errs.push_back(row.gmom_abs_err);
        mean_errs.push_back(row.mean_abs_err);
        res.rows.push_back(row);
    }
    res.gmom_p95 = percentile(gmom_errs, 95.0);
    res.mean_p95 = percentile(mean_errs, 95.0);
    return res;
}

}  // namespace pgtail
