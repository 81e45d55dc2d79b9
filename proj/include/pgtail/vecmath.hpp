#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pgtail {

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double l2norm(const double* a, std::size_t n) { return std::sqrt(dot(a, a, n)); }

inline double l2norm(const std::vector<double>& a) { return l2norm(a.data(), a.size()); }

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline void scale_inplace(double* x, std::size_t n, double alpha) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

inline void scale_inplace(std::vector<double>& x, double alpha) {
    scale_inplace(x.data(), x.size(), alpha);
}

inline double mean(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Population standard deviation (divides by n).
inline double stddev_pop(const std::vector<double>& x) {
    double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size()));
}

inline double clip(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline bool all_finite(const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

inline bool all_finite(const std::vector<double>& x) { return all_finite(x.data(), x.size()); }

// Linear-interpolation percentile (q in [0,100]) of an unsorted copy.
inline double percentile(std::vector<double> x, double q) {
    if (x.empty()) throw std::invalid_argument("percentile: empty input");
    std::sort(x.begin(), x.end());
    double pos = q / 100.0 * static_cast<double>(x.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= x.size()) return x.back();
    double frac = pos - static_cast<double>(lo);
    return x[lo] * (1.0 - frac) + x[lo + 1] * frac;
}

inline double median(std::vector<double> x) { return percentile(std::move(x), 50.0); }

}  // namespace pgtail
