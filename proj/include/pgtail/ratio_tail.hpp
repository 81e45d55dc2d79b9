#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pgtail/rng.hpp"
#include "pgtail/vecmath.hpp"

namespace pgtail {

// Importance ratio between two centred one-dimensional Gaussians when samples
// come from the second (the behavior distribution):
//   rho(x) = pdf(x; 0, sigma1^2) / pdf(x; 0, sigma2^2).
// When sigma1 <= sigma2 the ratio is bounded by sigma2/sigma1. When
// sigma1 > sigma2 the ratio is unbounded with a power-law survival function
// whose index is sigma1^2 / (sigma1^2 - sigma2^2).
struct RatioTailSpec {
    double sigma1 = 1.0;  // numerator (current policy) std
    double sigma2 = 1.0;  // denominator (behavior policy) std

    bool bounded() const { return sigma1 <= sigma2; }

    double bound() const {
        if (!bounded()) throw std::logic_error("ratio_tail: unbounded case has no bound");
        return sigma2 / sigma1;
    }

    double predicted_alpha() const {
        if (bounded()) throw std::logic_error("ratio_tail: bounded case has no tail index");
        double s1 = sigma1 * sigma1, s2 = sigma2 * sigma2;
        return s1 / (s1 - s2);
    }
};

struct RatioTailResult {
    bool bounded = false;
    double max_ratio = 0.0;
    int bound_violations = 0;              // bounded case: count of rho > bound + 1e-9
    std::optional<double> fitted_alpha;    // unbounded case: -slope of the tail fit
    std::optional<double> predicted_alpha;
    std::size_t samples = 0;
    std::size_t tail_points = 0;
};

// Draws n samples from the behavior Gaussian, evaluates the importance ratio
// at each, and either checks the bound (bounded case) or fits the tail index
// from the top 1% of the empirical survival function in log-log coordinates.
inline RatioTailResult ratio_tail_demo(const RatioTailSpec& spec, std::size_t n,
                                       std::uint64_t seed) {
    if (spec.sigma1 <= 0.0 || spec.sigma2 <= 0.0)
        throw std::invalid_argument("ratio_tail: sigmas must be positive");
    if (n < 1000) throw std::invalid_argument("ratio_tail: need at least 1000 samples");
    Rng rng = Rng::stream(seed, "ratio_tail");
    std::vector<double> rho(n);
    double s1 = spec.sigma1 * spec.sigma1, s2 = spec.sigma2 * spec.sigma2;
    double log_scale = std::log(spec.sigma2 / spec.sigma1);
    double quad = 0.5 * (1.0 / s1 - 1.0 / s2);
    for (std::size_t i = 0; i < n; ++i) {
        double x = spec.sigma2 * rng.gaussian();
        rho[i] = std::exp(log_scale - quad * x * x);
    }
    RatioTailResult res;
    res.bounded = spec.bounded();
    res.samples = n;
    res.max_ratio = *std::max_element(rho.begin(), rho.end());
    if (res.bounded) {
        double limit = spec.bound() + 1e-9;
        for (double r : rho)
            if (r > limit) ++res.bound_violations;
        return res;
    }
    res.predicted_alpha = spec.predicted_alpha();
    // Least-squares fit of log survival probability against log ratio over
    // the largest 1% of samples; survival at the i-th order statistic
    // (ascending, 0-based) is (n - 1 - i) / n, so the top point is excluded.
    std::sort(rho.begin(), rho.end());
    std::size_t tail_start = n - n / 100;
    std::vector<double> lx, ly;
    for (std::size_t i = tail_start; i + 1 < n; ++i) {
        double surv = static_cast<double>(n - 1 - i) / static_cast<double>(n);
        lx.push_back(std::log(rho[i]));
        ly.push_back(std::log(surv));
    }
    res.tail_points = lx.size();
    if (lx.size() < 10) throw std::runtime_error("ratio_tail: too few tail points for the fit");
    double mx = mean(lx), my = mean(ly);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx <= 0.0) throw std::runtime_error("ratio_tail: degenerate tail abscissae");
    res.fitted_alpha = -sxy / sxx;
    return res;
}

}  // namespace pgtail
