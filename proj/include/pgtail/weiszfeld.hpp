#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pgtail/vecmath.hpp"

namespace pgtail {

// Sum of Euclidean distances from y to each point (the objective Weiszfeld
// minimizes). Points are rows of a flat row-major array.
inline double geometric_median_objective(const double* points, std::size_t n, std::size_t dim,
                                         const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = points + i * dim;
        double d2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            double e = p[j] - y[j];
            d2 += e * e;
        }
        s += std::sqrt(d2);
    }
    return s;
}

struct WeiszfeldResult {
    std::vector<double> point;
    std::vector<double> objective_trace;  // objective after init, then after each iteration
};

// Fixed-iteration Weiszfeld algorithm for the geometric median of n points in
// R^dim. Starts from the coordinate-wise mean; a point closer than 1e-12 to
// the current iterate gets its inverse-distance weight capped at 1e12 rather
// than dividing by zero.
inline WeiszfeldResult weiszfeld(const double* points, std::size_t n, std::size_t dim,
                                 int iterations) {
    if (n == 0 || dim == 0) throw std::invalid_argument("weiszfeld: empty input");
    if (iterations < 0) throw std::invalid_argument("weiszfeld: negative iteration count");
    WeiszfeldResult res;
    res.point.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = points + i * dim;
        for (std::size_t j = 0; j < dim; ++j) res.point[j] += p[j];
    }
    for (std::size_t j = 0; j < dim; ++j) res.point[j] /= static_cast<double>(n);
    res.objective_trace.reserve(static_cast<std::size_t>(iterations) + 1);
    res.objective_trace.push_back(geometric_median_objective(points, n, dim, res.point.data()));

    std::vector<double> next(dim);
    for (int it = 0; it < iterations; ++it) {
        double wsum = 0.0;
        for (std::size_t j = 0; j < dim; ++j) next[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* p = points + i * dim;
            double d2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                double e = p[j] - res.point[j];
                d2 += e * e;
            }
            double d = std::sqrt(d2);
            double w = (d < 1e-12) ? 1e12 : 1.0 / d;
            wsum += w;
            for (std::size_t j = 0; j < dim; ++j) next[j] += w * p[j];
        }
        for (std::size_t j = 0; j < dim; ++j) next[j] /= wsum;
        double obj = geometric_median_objective(points, n, dim, next.data());
        // The update is a fixed-point contraction on the objective; only move
        // if it does not increase (guards the degenerate capped-weight case).
        bool stalled;
        if (obj <= res.objective_trace.back()) {
            stalled = next == res.point;
            res.point.swap(next);
            res.objective_trace.push_back(obj);
        } else {
            // The proposal is a pure function of the unchanged iterate, so a
            // rejected step would repeat identically forever.
            stalled = true;
            res.objective_trace.push_back(res.objective_trace.back());
        }
        if (stalled) {
            // Remaining iterations cannot move the iterate; emit the trace
            // they would have produced and stop early.
            res.objective_trace.resize(static_cast<std::size_t>(iterations) + 1,
                                       res.objective_trace.back());
            break;
        }
    }
    return res;
}

inline WeiszfeldResult weiszfeld(const std::vector<std::vector<double>>& points, int iterations) {
    if (points.empty()) throw std::invalid_argument("weiszfeld: empty input");
    std::size_t dim = points[0].size();
    std::vector<double> flat;
    flat.reserve(points.size() * dim);
    for (const auto& p : points) {
        if (p.size() != dim) throw std::invalid_argument("weiszfeld: ragged input");
        flat.insert(flat.end(), p.begin(), p.end());
    }
    return weiszfeld(flat.data(), points.size(), dim, iterations);
}

// Number of blocks giving a (1-delta) high-probability bound for the
// grouped-median-of-means estimator: b = 1 + floor(3.5 * ln(1/delta)).
inline int gmom_block_count(double delta) {
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("gmom_block_count: delta in (0,1)");
    return 1 + static_cast<int>(std::floor(3.5 * std::log(1.0 / delta)));
}

// Grouped median of means: split the n samples (rows, in given order) into b
// contiguous blocks of floor(n/b) -- the surplus tail is dropped -- take each
// block's coordinate-wise mean, and return the geometric median of the b
// block means. b=1 reduces to the sample mean of the first floor(n/1)=n rows;
// b=n makes every block a single sample, i.e. the plain geometric median.
inline std::vector<double> gmom(const double* samples, std::size_t n, std::size_t dim, int b,
                                int weiszfeld_iterations = 100) {
    if (b <= 0) throw std::invalid_argument("gmom: block count must be positive");
    if (static_cast<std::size_t>(b) > n)
        throw std::invalid_argument("gmom: more blocks than samples");
    std::size_t block_len = n / static_cast<std::size_t>(b);
    std::vector<double> means(static_cast<std::size_t>(b) * dim, 0.0);
    for (int k = 0; k < b; ++k) {
        double* mk = means.data() + static_cast<std::size_t>(k) * dim;
        const double* start = samples + static_cast<std::size_t>(k) * block_len * dim;
        for (std::size_t i = 0; i < block_len; ++i) {
            const double* row = start + i * dim;
            for (std::size_t j = 0; j < dim; ++j) mk[j] += row[j];
        }
        for (std::size_t j = 0; j < dim; ++j) mk[j] /= static_cast<double>(block_len);
    }
    if (b == 1) return means;
    return weiszfeld(means.data(), static_cast<std::size_t>(b), dim, weiszfeld_iterations).point;
}

inline std::vector<double> gmom(const std::vector<std::vector<double>>& samples, int b,
                                int weiszfeld_iterations = 100) {
    if (samples.empty()) throw std::invalid_argument("gmom: empty input");
    std::size_t dim = samples[0].size();
    std::vector<double> flat;
    flat.reserve(samples.size() * dim);
    for (const auto& s : samples) {
        if (s.size() != dim) throw std::invalid_argument("gmom: ragged input");
        flat.insert(flat.end(), s.begin(), s.end());
    }
    return gmom(flat.data(), samples.size(), dim, b, weiszfeld_iterations);
}

// Scalar convenience: 1-D gmom.
inline double gmom_scalar(const std::vector<double>& samples, int b,
                          int weiszfeld_iterations = 100) {
    return gmom(samples.data(), samples.size(), 1, b, weiszfeld_iterations)[0];
}

}  // namespace pgtail
