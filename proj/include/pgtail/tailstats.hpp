#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pgtail/rng.hpp"
#include "pgtail/vecmath.hpp"

namespace pgtail {

// Fourth standardized moment, reported as its fourth root so a Gaussian sits
// near 3^(1/4) ~ 1.316 and heavy tails compress onto a readable scale.
inline double kurtosis(const std::vector<double>& x) {
    if (x.size() < 4) throw std::invalid_argument("kurtosis: need at least 4 samples");
    double m = mean(x);
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        double c = v - m;
        double c2 = c * c;
        m2 += c2;
        m4 += c2 * c2;
    }
    double n = static_cast<double>(x.size());
    m2 /= n;
    m4 /= n;
    if (m2 <= 0.0) throw std::invalid_argument("kurtosis: zero-variance input");
    return std::pow(m4 / (m2 * m2), 0.25);
}

// Largest divisor of N that is <= sqrt(N) and >= 2; 0 if none exists.
inline int default_block_len(std::size_t N) {
    int best = 0;
    for (int m = 2; static_cast<std::size_t>(m) * m <= N; ++m)
        if (N % static_cast<std::size_t>(m) == 0) best = m;
    return best;
}

// Tail-index estimator from log-moments of block sums:
//   1/alpha-hat = (1/log m) * ( mean_i log|Y_i| - mean_j log|X_j| ),
// where Y_i are sums of m consecutive X's and the first n*m samples are used
// (n = N/m). Zero magnitudes are floored at 1e-300 before the log.
inline double alpha_index(const std::vector<double>& x, int m) {
    std::size_t N = x.size();
    if (m < 2) throw std::invalid_argument("alpha_index: block length must be >= 2");
    std::size_t n = N / static_cast<std::size_t>(m);
    if (n < 2) throw std::invalid_argument("alpha_index: need at least 2 blocks");
    double sum_log_x = 0.0;
    double sum_log_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double block = 0.0;
        for (int j = 0; j < m; ++j) {
            double v = x[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(j)];
            block += v;
            sum_log_x += std::log(std::max(std::abs(v), 1e-300));
        }
        sum_log_y += std::log(std::max(std::abs(block), 1e-300));
    }
    double used = static_cast<double>(n) * static_cast<double>(m);
    double inv_alpha = (sum_log_y / static_cast<double>(n) - sum_log_x / used) /
                       std::log(static_cast<double>(m));
    return 1.0 / inv_alpha;
}

inline double alpha_index(const std::vector<double>& x) {
    int m = default_block_len(x.size());
    if (m < 2) throw std::invalid_argument("alpha_index: no valid default block length");
    return alpha_index(x, m);
}

// log Phi(z) for the standard normal, stable deep into the lower tail.
inline double log_norm_cdf(double z) {
    if (z > -33.0) {
        double p = 0.5 * std::erfc(-z / std::numbers::sqrt2);
        return std::log(std::max(p, 1e-320));
    }
    // Asymptotic expansion: Phi(z) ~ phi(z)/(-z) * (1 - 1/z^2 + 3/z^4).
    double z2 = z * z;
    return -0.5 * z2 - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(-z) +
           std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

// Anderson-Darling A^2 with Stephens' small-sample modification for the
// normality case with mean and variance estimated from the data.
inline double ad_statistic(std::vector<double> x) {
    std::size_t n = x.size();
    if (n < 8) throw std::invalid_argument("ad_statistic: need at least 8 samples");
    double mu = mean(x);
    double s2 = 0.0;
    for (double v : x) s2 += (v - mu) * (v - mu);
    s2 /= static_cast<double>(n - 1);
    if (s2 <= 0.0) throw std::invalid_argument("ad_statistic: zero variance");
    double sd = std::sqrt(s2);
    std::sort(x.begin(), x.end());
    double a2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double zi = (x[i] - mu) / sd;
        double zr = (x[n - 1 - i] - mu) / sd;
        a2 += (2.0 * static_cast<double>(i) + 1.0) * (log_norm_cdf(zi) + log_norm_cdf(-zr));
    }
    double nn = static_cast<double>(n);
    a2 = -nn - a2 / nn;
    return a2 * (1.0 + 0.75 / nn + 2.25 / (nn * nn));
}

// 5% critical value for the estimated-parameters case.
inline constexpr double kAdCritical5 = 0.752;

inline bool ad_rejects_normality(const std::vector<double>& x) {
    return ad_statistic(x) > kAdCritical5;
}

// Projects centered samples onto random unit directions and reports the
// fraction of directions whose projections PASS the normality test at the 5%
// level. rows: n_samples x dim, row-major. Zero-variance projections are
// skipped; if every direction is skipped the fraction is reported as 0.
inline double ad_fraction(const std::vector<double>& rows, std::size_t n_samples, std::size_t dim,
                          int n_dirs, Rng& rng) {
    if (n_samples < 8) throw std::invalid_argument("ad_fraction: need at least 8 samples");
    if (rows.size() != n_samples * dim) throw std::invalid_argument("ad_fraction: shape mismatch");
    std::vector<double> center(dim, 0.0);
    for (std::size_t i = 0; i < n_samples; ++i)
        for (std::size_t j = 0; j < dim; ++j) center[j] += rows[i * dim + j];
    for (double& c : center) c /= static_cast<double>(n_samples);
    std::vector<double> dir(dim);
    std::vector<double> proj(n_samples);
    int accepted = 0, tested = 0;
    for (int k = 0; k < n_dirs; ++k) {
        for (std::size_t j = 0; j < dim; ++j) dir[j] = rng.gaussian();
        double nrm = l2norm(dir);
        if (nrm == 0.0) continue;
        for (std::size_t j = 0; j < dim; ++j) dir[j] /= nrm;
        for (std::size_t i = 0; i < n_samples; ++i) {
            double s = 0.0;
            const double* r = rows.data() + i * dim;
            for (std::size_t j = 0; j < dim; ++j) s += (r[j] - center[j]) * dir[j];
            proj[i] = s;
        }
        double var = stddev_pop(proj);
        if (var <= 0.0) continue;  // degenerate direction
        tested += 1;
        if (!ad_rejects_normality(proj)) accepted += 1;
    }
    if (tested == 0) return 0.0;
    return static_cast<double>(accepted) / static_cast<double>(tested);
}

}  // namespace pgtail
