#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pgtail/tailstats.hpp"
#include "pgtail/vecmath.hpp"

namespace pgtail {

struct AdvantageBatch {
    std::vector<double> raw;            // GAE advantages A
    std::vector<double> normalized;     // (A - mean)/std, the batch A-hat
    std::vector<double> returns;        // value-regression targets (= target_values)
    std::vector<double> values;         // critic values at sampling time
    std::vector<double> target_values;  // A + V
};

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> target_values;
};

// Backward recursion over TD residuals:
//   delta_t = r_t + gamma*V_{t+1}*(1 - done_t) - V_t
//   A_t     = delta_t + gamma*lambda*(1 - done_t)*A_{t+1}
// values has T+1 entries (bootstrap last); done cuts both the bootstrap and
// the recursion so episodes stay isolated.
inline GaeResult gae(const std::vector<double>& rewards, const std::vector<std::uint8_t>& dones,
                     const std::vector<double>& values, double gamma, double lam) {
    std::size_t T = rewards.size();
    if (dones.size() != T || values.size() != T + 1)
        throw std::invalid_argument("gae: length mismatch");
    if (gamma < 0.0 || gamma > 1.0 || lam < 0.0 || lam > 1.0)
        throw std::invalid_argument("gae: gamma and lambda must lie in [0,1]");
    GaeResult out;
    out.advantages.resize(T);
    out.target_values.resize(T);
    double next_adv = 0.0;
    for (std::size_t i = T; i-- > 0;) {
        double nonterminal = dones[i] ? 0.0 : 1.0;
        double delta = rewards[i] + gamma * values[i + 1] * nonterminal - values[i];
        next_adv = delta + gamma * lam * nonterminal * next_adv;
        out.advantages[i] = next_adv;
        out.target_values[i] = next_adv + values[i];
    }
    return out;
}

// Standardizes with the population std; a near-constant batch maps to zeros.
inline std::vector<double> normalize(const std::vector<double>& raw) {
    if (raw.size() < 2) throw std::invalid_argument("normalize: need at least 2 values");
    double m = mean(raw);
    double sd = stddev_pop(raw);
    std::vector<double> out(raw.size());
    if (sd < 1e-8) return out;  // zeros
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - m) / sd;
    return out;
}

// Floors negative advantages at lower_threshold; positives pass through.
inline std::vector<double> clip_advantages(const std::vector<double>& a, double lower_threshold) {
    if (lower_threshold >= 0.0)
        throw std::invalid_argument("clip_advantages: threshold must be negative");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], lower_threshold);
    return out;
}

struct LogAbsHistogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<int> counts;
};

inline LogAbsHistogram log_abs_histogram(const std::vector<double>& v, int bins = 24) {
    LogAbsHistogram h;
    std::vector<double> lv;
    lv.reserve(v.size());
    for (double x : v) {
        double a = std::abs(x);
        if (a > 0.0) lv.push_back(std::log(a));
    }
    if (lv.empty()) return h;
    h.lo = *std::min_element(lv.begin(), lv.end());
    h.hi = *std::max_element(lv.begin(), lv.end());
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    double width = h.hi - h.lo;
    for (double x : lv) {
        int b = width > 0.0 ? static_cast<int>((x - h.lo) / width * bins) : 0;
        if (b >= bins) b = bins - 1;
        h.counts[static_cast<std::size_t>(b)] += 1;
    }
    return h;
}

// Sign-grouped tail summary of raw advantages. A group needs >= 4 samples and
// positive variance for kurtosis; otherwise it is reported absent.
struct GroupedTailStats {
    std::optional<double> kurtosis_neg;
    std::optional<double> kurtosis_pos;
    int n_neg = 0;
    int n_pos = 0;
    LogAbsHistogram hist_neg;
    LogAbsHistogram hist_pos;
};

inline GroupedTailStats grouped_tail_stats(const std::vector<double>& raw) {
    std::vector<double> neg, pos;
    for (double a : raw) {
        if (a < 0.0) neg.push_back(a);
        if (a > 0.0) pos.push_back(a);
    }
    GroupedTailStats out;
    out.n_neg = static_cast<int>(neg.size());
    out.n_pos = static_cast<int>(pos.size());
    if (neg.size() >= 4 && stddev_pop(neg) > 0.0) out.kurtosis_neg = kurtosis(neg);
    if (pos.size() >= 4 && stddev_pop(pos) > 0.0) out.kurtosis_pos = kurtosis(pos);
    out.hist_neg = log_abs_histogram(neg);
    out.hist_pos = log_abs_histogram(pos);
    return out;
}

}  // namespace pgtail
