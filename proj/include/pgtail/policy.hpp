#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pgtail/mlp.hpp"
#include "pgtail/rng.hpp"

namespace pgtail {

inline constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

// Diagonal-Gaussian log density: sum_j of -log(sigma_j) - 0.5*log(2*pi)
//                                         - 0.5*((a_j - mu_j)/sigma_j)^2.
// log_std is the state-independent learned vector.
inline double gaussian_log_prob(const double* mean, const double* log_std, const double* action,
                                int dim) {
    double lp = 0.0;
    for (int j = 0; j < dim; ++j) {
        double sd = std::exp(log_std[j]);
        if (!std::isfinite(sd) || sd <= 0.0)
            throw std::invalid_argument("gaussian_log_prob: non-finite std");
        double z = (action[j] - mean[j]) / sd;
        lp += -log_std[j] - 0.5 * kLog2Pi - 0.5 * z * z;
    }
    return lp;
}

// d logp / d mean_j = (a_j - mu_j) / sigma_j^2
// d logp / d log_std_j = ((a_j - mu_j)/sigma_j)^2 - 1
inline void gaussian_log_prob_grads(const double* mean, const double* log_std,
                                    const double* action, int dim, double* dmean,
                                    double* dlog_std) {
    for (int j = 0; j < dim; ++j) {
        double sd = std::exp(log_std[j]);
        double diff = action[j] - mean[j];
        double z = diff / sd;
        dmean[j] = diff / (sd * sd);
        dlog_std[j] = z * z - 1.0;
    }
}

inline void gaussian_sample(const double* mean, const double* log_std, int dim, Rng& rng,
                            double* action) {
    for (int j = 0; j < dim; ++j) action[j] = mean[j] + std::exp(log_std[j]) * rng.gaussian();
}

// KL(p1 || p2) for diagonal Gaussians, summed over dimensions:
//   log(s2/s1) + (s1^2 + (mu1-mu2)^2) / (2 s2^2) - 1/2
inline double gaussian_kl(const double* mu1, const double* ls1, const double* mu2,
                          const double* ls2, int dim) {
    double kl = 0.0;
    for (int j = 0; j < dim; ++j) {
        double v1 = std::exp(2.0 * ls1[j]);
        double v2 = std::exp(2.0 * ls2[j]);
        double dm = mu1[j] - mu2[j];
        kl += ls2[j] - ls1[j] + (v1 + dm * dm) / (2.0 * v2) - 0.5;
    }
    return kl;
}

// Differential entropy of a diagonal Gaussian: sum_j log_std_j + 0.5*log(2*pi*e).
inline double gaussian_entropy(const double* log_std, int dim) {
    double h = 0.0;
    for (int j = 0; j < dim; ++j) h += log_std[j] + 0.5 * (kLog2Pi + 1.0);
    return h;
}

// Standalone policy object for the module-level API; training uses the flat
// agent layout instead.
struct GaussianPolicy {
    MlpSpec mean_net;
    ParamVector params;
    std::vector<double> log_std;

    int action_dim() const { return mean_net.output_dim; }

    std::vector<double> mean(const std::vector<double>& state) const {
        return mlp_forward(mean_net, params, state);
    }

    double log_prob(const std::vector<double>& state, const std::vector<double>& action) const {
        if (static_cast<int>(action.size()) != action_dim())
            throw std::invalid_argument("log_prob: action dimension mismatch");
        auto mu = mean(state);
        return gaussian_log_prob(mu.data(), log_std.data(), action.data(), action_dim());
    }
};

inline GaussianPolicy make_policy(int obs_dim, const std::vector<int>& hidden, int action_dim,
                                  Rng& rng) {
    GaussianPolicy p;
    p.mean_net = MlpSpec{obs_dim, hidden, action_dim};
    p.params = init_params(p.mean_net, rng, "actor");
    p.log_std.assign(static_cast<std::size_t>(action_dim), 0.0);
    return p;
}

}  // namespace pgtail
