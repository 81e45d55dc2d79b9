#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgtail/vecmath.hpp"

namespace pgtail {

enum class OptKind { sgd, adam };

inline const char* opt_kind_name(OptKind k) { return k == OptKind::sgd ? "sgd" : "adam"; }

inline OptKind opt_kind_from(const std::string& s) {
    if (s == "sgd") return OptKind::sgd;
    if (s == "adam") return OptKind::adam;
    throw std::invalid_argument("unknown optimizer kind: " + s);
}

struct OptimizerState {
    OptKind kind = OptKind::adam;
    double lr = 1e-3;
    std::vector<double> m;  // first moment (adam)
    std::vector<double> v;  // second moment (adam)
    std::int64_t step_count = 0;

    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double eps = 1e-8;

    static OptimizerState make(OptKind kind, double lr, std::size_t n) {
        OptimizerState s;
        s.kind = kind;
        s.lr = lr;
        if (kind == OptKind::adam) {
            s.m.assign(n, 0.0);
            s.v.assign(n, 0.0);
        }
        return s;
    }
};

// In-place parameter update. Adam uses bias-corrected moments.
inline void optimizer_step(OptimizerState& st, std::vector<double>& params,
                           const std::vector<double>& grad) {
    if (grad.size() != params.size())
        throw std::invalid_argument("optimizer_step: grad/param length mismatch");
    if (!all_finite(grad)) throw std::invalid_argument("optimizer_step: non-finite gradient");
    st.step_count += 1;
    if (st.kind == OptKind::sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= st.lr * grad[i];
        return;
    }
    double b1t = 1.0 - std::pow(OptimizerState::beta1, static_cast<double>(st.step_count));
    double b2t = 1.0 - std::pow(OptimizerState::beta2, static_cast<double>(st.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m[i] = OptimizerState::beta1 * st.m[i] + (1.0 - OptimizerState::beta1) * grad[i];
        st.v[i] = OptimizerState::beta2 * st.v[i] + (1.0 - OptimizerState::beta2) * grad[i] * grad[i];
        double mhat = st.m[i] / b1t;
        double vhat = st.v[i] / b2t;
        params[i] -= st.lr * mhat / (std::sqrt(vhat) + OptimizerState::eps);
    }
}

// Scales g in place so its L2 norm is at most max_norm; returns the scale used.
inline double global_grad_clip_inplace(std::vector<double>& g, double max_norm) {
    if (max_norm <= 0.0) throw std::invalid_argument("global_grad_clip: max_norm must be positive");
    double n = l2norm(g);
    if (n <= max_norm || n == 0.0) return 1.0;
    double s = max_norm / n;
    scale_inplace(g.data(), g.size(), s);
    return s;
}

inline std::vector<double> global_grad_clip(std::vector<double> g, double max_norm) {
    global_grad_clip_inplace(g, max_norm);
    return g;
}

}  // namespace pgtail
