#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgtail/agent.hpp"
#include "pgtail/losses.hpp"
#include "pgtail/rng.hpp"
#include "pgtail/tailstats.hpp"
#include "pgtail/vecmath.hpp"

namespace pgtail {

// Training phase at which an instrumented iteration runs. `none` marks
// on-policy captures, which are tagged by iteration index instead.
enum class Stage { none, init, half_max, max };

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::none: return "on_policy";
        case Stage::init: return "init";
        case Stage::half_max: return "half_max";
        case Stage::max: return "max";
    }
    return "?";
}

// What to instrument during a run. Capture is strictly read-only with its own
// RNG streams, so enabling it never changes the parameter trajectory.
struct CapturePlan {
    bool on_policy = false;   // first minibatch step of every `on_policy_every`-th iteration
    bool off_policy = false;  // all steps of iterations where an armed stage triggers
    bool heuristics = false;  // recompute per-sample gradients under clip variants (a)-(d)
    bool capture_init = true;
    bool capture_half = true;
    bool capture_max = true;
    bool stop_after_capture = false;  // end the run once every armed stage was captured
    int on_policy_every = 10;
    int ad_dirs = 100;     // random directions for the normality-fraction estimator
    bool with_ad = true;   // run the normality fraction on the per-sample gradient matrices
    bool keep_samples = false;  // retain raw per-sample quantity rows
    double heuristic_ratio_eps = 0.2;
    double heuristic_grad_clip = 0.5;

    bool any() const { return on_policy || off_policy; }
    bool stage_armed(Stage s) const {
        if (s == Stage::init) return capture_init;
        if (s == Stage::half_max) return capture_half;
        if (s == Stage::max) return capture_max;
        return false;
    }
};

// Per-sample scalar quantities recorded at a captured step.
struct GradSampleRow {
    double actor_norm = 0.0;
    double critic_norm = 0.0;
    double adv = 0.0;
    double rho = 0.0;
    double norm_over_adv = 0.0;  // actor_norm / |adv|
    double norm_over_rho = 0.0;  // actor_norm / rho
    double ret = 0.0;            // value-regression target (empirical return proxy)
    double value = 0.0;          // current critic estimate
};

struct GradSampleMatrix {
    int iteration = 0;
    int step = 0;  // 1-based gradient-step index within the iteration
    Stage stage = Stage::none;
    std::string variant;  // empty = the run's own objective
    std::vector<GradSampleRow> rows;
};

// One estimator evaluation on one captured quantity. `saturated` marks values
// the estimator could not produce (e.g. kurtosis of an all-constant column).
struct TailReport {
    std::string quantity;
    std::string estimator;  // kurtosis | alpha_index | ad_fraction | absent
    std::string variant;    // empty = the run's own objective
    Stage stage = Stage::none;
    int iteration = -1;
    int step = -1;
    double value = 0.0;
    bool saturated = false;
    int sample_count = 0;
    std::uint64_t seed = 0;
};

struct CaptureSink {
    std::vector<TailReport> reports;
    std::vector<GradSampleMatrix> matrices;
};

namespace detail {

inline void tail_scalar_reports(const std::string& quantity, const std::vector<double>& column,
                                const GradSampleMatrix& meta, std::uint64_t seed,
                                std::vector<TailReport>& out) {
    TailReport base;
    base.quantity = quantity;
    base.variant = meta.variant;
    base.stage = meta.stage;
    base.iteration = meta.iteration;
    base.step = meta.step;
    base.sample_count = static_cast<int>(column.size());
    base.seed = seed;
    TailReport k = base;
    k.estimator = "kurtosis";
    try {
        k.value = kurtosis(column);
    } catch (const std::exception&) {
        k.value = 0.0;
        k.saturated = true;
    }
    out.push_back(k);
    TailReport a = base;
    a.estimator = "alpha_index";
    try {
        a.value = alpha_index(column);
    } catch (const std::exception&) {
        a.value = 0.0;
        a.saturated = true;
    }
    out.push_back(a);
}

}  // namespace detail

// Computes per-sample gradients of the configured objective over a minibatch
// at the current parameters, then summarizes each tracked quantity with the
// kurtosis and alpha-index estimators and (optionally) the per-partition
// Anderson-Darling accepted fraction of the raw gradient matrices.
//
// `per_sample_clip > 0` clips each per-sample gradient to that norm before
// any quantity is computed (heuristic variant (d)).
inline GradSampleMatrix capture_step(const Agent& agent, const LossConfig& lc,
                                     const std::vector<SampleRef>& minibatch,
                                     double per_sample_clip, int iteration, int step, Stage stage,
                                     const std::string& variant, std::uint64_t seed, int ad_dirs,
                                     bool with_ad, std::vector<TailReport>& out_reports) {
    if (minibatch.empty()) throw std::invalid_argument("capture_step: empty minibatch");
    std::size_t n = minibatch.size();
    std::size_t p = agent.n_params();
    std::size_t actor_len = agent.actor_partition_len();
    std::size_t critic_len = agent.critic_partition_len();
    GradSampleMatrix m;
    m.iteration = iteration;
    m.step = step;
    m.stage = stage;
    m.variant = variant;
    m.rows.resize(n);
    std::vector<double> grads(n * p, 0.0);
    AgentWorkspace ws;
    ws.resize(agent);
    for (std::size_t i = 0; i < n; ++i) {
        double* g = grads.data() + i * p;
        SampleStats st;
        accumulate_sample_grad(agent, lc, minibatch[i], 1.0, ws, g, &st);
        if (per_sample_clip > 0.0) {
            double norm = 0.0;
            for (std::size_t j = 0; j < p; ++j) norm += g[j] * g[j];
            norm = std::sqrt(norm);
            if (norm > per_sample_clip) {
                double s = per_sample_clip / norm;
                for (std::size_t j = 0; j < p; ++j) g[j] *= s;
            }
        }
        GradSampleRow& row = m.rows[i];
        double an = 0.0, cn = 0.0;
        for (std::size_t j = 0; j < actor_len; ++j) an += g[j] * g[j];
        for (std::size_t j = actor_len; j < p; ++j) cn += g[j] * g[j];
        row.actor_norm = std::sqrt(an);
        row.critic_norm = std::sqrt(cn);
        row.adv = minibatch[i].adv;
        row.rho = st.rho;
        row.norm_over_adv = row.actor_norm / std::max(std::abs(row.adv), 1e-12);
        row.norm_over_rho = row.actor_norm / st.rho;
        row.ret = minibatch[i].v_trg;
        row.value = st.value;
    }
    auto column = [&](double GradSampleRow::* field) {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = m.rows[i].*field;
        return c;
    };
    detail::tail_scalar_reports("actor_grad_norm", column(&GradSampleRow::actor_norm), m, seed,
                                out_reports);
    detail::tail_scalar_reports("critic_grad_norm", column(&GradSampleRow::critic_norm), m, seed,
                                out_reports);
    detail::tail_scalar_reports("advantage", column(&GradSampleRow::adv), m, seed, out_reports);
    detail::tail_scalar_reports("ratio", column(&GradSampleRow::rho), m, seed, out_reports);
    detail::tail_scalar_reports("actor_norm_over_adv", column(&GradSampleRow::norm_over_adv), m,
                                seed, out_reports);
    detail::tail_scalar_reports("actor_norm_over_ratio", column(&GradSampleRow::norm_over_rho), m,
                                seed, out_reports);
    detail::tail_scalar_reports("return", column(&GradSampleRow::ret), m, seed, out_reports);
    detail::tail_scalar_reports("value_estimate", column(&GradSampleRow::value), m, seed,
                                out_reports);
    if (with_ad) {
        // Gather each partition's rows contiguously and test Gaussianity of
        // random one-dimensional projections. Direction draws come from a
        // dedicated stream keyed by (iteration, step, variant, partition), so
        // captures are deterministic and independent of the run's streams.
        auto run_ad = [&](const char* label, std::size_t off, std::size_t len) {
            std::vector<double> part(n * len);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < len; ++j) part[i * len + j] = grads[i * p + off + j];
            Rng ad_rng = Rng::stream(seed, std::string("ad|") + variant + "|i" +
                                               std::to_string(iteration) + "|s" +
                                               std::to_string(step) + "|" + label);
            TailReport r;
            r.quantity = label;
            r.estimator = "ad_fraction";
            r.variant = variant;
            r.stage = stage;
            r.iteration = iteration;
            r.step = step;
            r.sample_count = static_cast<int>(n);
            r.seed = seed;
            r.value = ad_fraction(part, n, len, ad_dirs, ad_rng);
            out_reports.push_back(r);
        };
        run_ad("actor_grad", 0, actor_len);
        run_ad("critic_grad", actor_len, critic_len);
    }
    return m;
}

struct HeuristicVariant {
    std::string name;
    LossConfig lc;
    double per_sample_clip = 0.0;
};

// The additive clip stack applied on top of the unclipped surrogate:
// (a) none, (b) + probability-ratio clipping, (c) + value clipping,
// (d) + per-sample gradient-norm clipping.
inline std::vector<HeuristicVariant> heuristic_variants(const LossConfig& base, double ratio_eps,
                                                        double grad_clip) {
    std::vector<HeuristicVariant> v(4);
    LossConfig plain = base;
    plain.ratio_clip_eps = 0.0;
    plain.value_clip = false;
    plain.a2c_actor = false;
    plain.grad_clip_max = 0.0;
    v[0] = {"none", plain, 0.0};
    LossConfig rc = plain;
    rc.ratio_clip_eps = ratio_eps;
    v[1] = {"ratio_clip", rc, 0.0};
    LossConfig vc = rc;
    vc.value_clip = true;
    v[2] = {"ratio_value_clip", vc, 0.0};
    v[3] = {"ratio_value_grad_clip", vc, grad_clip};
    return v;
}

// Recomputes the capture under each heuristic variant at the same parameters
// and minibatch. The projection-normality estimator is reserved for the run's
// own objective, so variant sweeps only pay for scalar estimators.
inline void progressive_heuristics(const Agent& agent, const LossConfig& base,
                                   const std::vector<SampleRef>& minibatch, int iteration,
                                   int step, Stage stage, std::uint64_t seed, double ratio_eps,
                                   double grad_clip, bool keep_samples, CaptureSink& sink) {
    for (const HeuristicVariant& hv : heuristic_variants(base, ratio_eps, grad_clip)) {
        GradSampleMatrix m =
            capture_step(agent, hv.lc, minibatch, hv.per_sample_clip, iteration, step, stage,
                         hv.name, seed, 0, false, sink.reports);
        if (keep_samples) sink.matrices.push_back(std::move(m));
    }
}

}  // namespace pgtail
