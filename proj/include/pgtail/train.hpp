#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgtail/advantage.hpp"
#include "pgtail/agent.hpp"
#include "pgtail/block_gmom.hpp"
#include "pgtail/capture.hpp"
#include "pgtail/config.hpp"
#include "pgtail/losses.hpp"
#include "pgtail/optimizer.hpp"
#include "pgtail/rollout.hpp"
#include "pgtail/tailstats.hpp"
#include "pgtail/vecmath.hpp"

namespace pgtail {

// Everything that evolves across iterations. A checkpoint is exactly this
// struct flattened to text; restoring it resumes the run bit-for-bit.
struct RunState {
    HarnessConfig cfg;
    Agent agent;
    OptimizerState opt;
    Env env;
    Rng rollout_rng{0};
    Rng shuffle_rng{0};
    Rng noise_rng{0};
    EpisodeTracker episode;
    int iteration = 0;
    std::vector<double> recent_returns;  // per-iteration mean returns, last 10
    bool half_reached = false;
    bool max_reached = false;
    int half_iteration = -1;
    int max_iteration = -1;
    // Stage captures still owed to an armed off-policy plan.
    bool init_pending = true;
    bool half_pending = false;
    bool max_pending = false;
    bool diverged = false;
    std::string divergence_note;

    double running_mean_return() const {
        return recent_returns.empty() ? -std::numeric_limits<double>::infinity()
                                      : mean(recent_returns);
    }
};

inline RunState make_run_state(const HarnessConfig& cfg) {
    cfg.validate();
    RunState rs;
    rs.cfg = cfg;
    rs.env = Env::make(cfg.env);
    Rng init_rng = Rng::stream(cfg.seed, "init");
    rs.agent = make_agent(rs.env.obs_dim(), rs.env.action_dim(), cfg.hidden, init_rng);
    rs.opt = OptimizerState::make(OptKind::adam, cfg.lr, rs.agent.n_params());
    rs.rollout_rng = Rng::stream(cfg.seed, "rollout");
    rs.shuffle_rng = Rng::stream(cfg.seed, "shuffle");
    rs.noise_rng = Rng::stream(cfg.seed, "reward_noise");
    return rs;
}

struct IterationReport {
    int iteration = 0;
    double mean_return = 0.0;  // over episodes completed in this iteration's rollout
    int episodes = 0;
    double mean_kl = 0.0;  // behavior policy vs post-update policy over the batch states
    double actor_loss = 0.0;
    double value_loss = 0.0;
    double combined_loss = 0.0;
    double ratio_min = 1.0;
    double ratio_max = 1.0;
    double ratio_mean = 1.0;
    double grad_norm_mean = 0.0;  // aggregated minibatch gradient, before any clipping
    double adv_kurtosis = 0.0;      // after normalization, before optional clipping
    double adv_kurtosis_post = 0.0;  // after optional clipping
    bool adv_kurtosis_valid = false;
    double running_mean_return = 0.0;
    bool half_reached = false;
    bool max_reached = false;
    int steps_done = 0;
    bool diverged = false;
};

// One full iteration: rollout, advantage estimation, epochs of minibatch
// updates under the configured objective and aggregation, then the KL drift
// of the updated policy from the behavior policy. Capture hooks observe
// per-sample gradients read-only and never touch the run's RNG streams.
inline IterationReport train_iteration(RunState& rs, const CapturePlan* plan = nullptr,
                                       CaptureSink* sink = nullptr) {
    const HarnessConfig& cfg = rs.cfg;
    if (rs.diverged) throw std::logic_error("train_iteration: run already diverged");
    const int T = cfg.steps_per_iter;
    const int mbs = cfg.minibatch_size();
    const LossConfig lc = cfg.loss_config();

    IterationReport rep;
    rep.iteration = rs.iteration;

    // Which capture applies to this iteration, decided before any update.
    Stage capture_stage = Stage::none;
    bool capture_all_steps = false;
    bool capture_first_step = false;
    if (plan && sink) {
        if (plan->off_policy) {
            if (rs.init_pending && plan->capture_init) {
                capture_stage = Stage::init;
                rs.init_pending = false;
                capture_all_steps = true;
            } else if (rs.half_pending && plan->capture_half) {
                capture_stage = Stage::half_max;
                rs.half_pending = false;
                capture_all_steps = true;
            } else if (rs.max_pending && plan->capture_max) {
                capture_stage = Stage::max;
                rs.max_pending = false;
                capture_all_steps = true;
            }
        }
        if (!capture_all_steps && plan->on_policy && plan->on_policy_every > 0 &&
            rs.iteration % plan->on_policy_every == 0)
            capture_first_step = true;
    }

    RewardNoise noise = cfg.reward_noise();
    Trajectory tr = collect_rollout(rs.agent, rs.env, T, rs.rollout_rng, noise, rs.episode,
                                    nullptr, &rs.noise_rng);
    GaeResult g = gae(tr.rewards, tr.dones, tr.values, cfg.gamma, cfg.lam);
    std::vector<double> adv = normalize(g.advantages);
    try {
        rep.adv_kurtosis = kurtosis(adv);
        rep.adv_kurtosis_valid = true;
    } catch (const std::exception&) {
        rep.adv_kurtosis_valid = false;
    }
    if (cfg.advantage_clip) adv = clip_advantages(adv, *cfg.advantage_clip);
    if (rep.adv_kurtosis_valid) {
        try {
            rep.adv_kurtosis_post = kurtosis(adv);
        } catch (const std::exception&) {
            rep.adv_kurtosis_valid = false;
        }
    }

    Agent behavior = rs.agent;  // frozen snapshot for ratios-by-construction and KL

    AgentWorkspace ws;
    ws.resize(rs.agent);
    std::vector<double> grad(rs.agent.n_params(), 0.0);
    std::vector<double> block_grads;
    const std::vector<ParamPartition> partitions = {
        {0, rs.agent.actor_partition_len()},
        {rs.agent.actor_partition_len(), rs.agent.critic_partition_len()}};
    std::vector<SampleRef> minibatch(static_cast<std::size_t>(mbs));

    double rmin = std::numeric_limits<double>::infinity();
    double rmax = -std::numeric_limits<double>::infinity();
    double rsum = 0.0, actor_sum = 0.0, value_sum = 0.0, combined_sum = 0.0, gnorm_sum = 0.0;
    long long nsamples = 0;
    int step_index = 0;

    try {
        for (int epoch = 0; epoch < cfg.epochs && !rs.diverged; ++epoch) {
            std::vector<int> perm = rs.shuffle_rng.permutation(T);
            for (int mb = 0; mb < cfg.minibatches; ++mb) {
                ++step_index;
                for (int j = 0; j < mbs; ++j) {
                    int idx = perm[static_cast<std::size_t>(mb * mbs + j)];
                    SampleRef& s = minibatch[static_cast<std::size_t>(j)];
                    s.obs = tr.obs_row(idx);
                    s.action = tr.act_row(idx);
                    s.behavior_logp = tr.logp[static_cast<std::size_t>(idx)];
                    s.adv = adv[static_cast<std::size_t>(idx)];
                    s.v_old = tr.values[static_cast<std::size_t>(idx)];
                    s.v_trg = g.target_values[static_cast<std::size_t>(idx)];
                }

                bool capture_here =
                    sink && (capture_all_steps || (capture_first_step && step_index == 1));
                if (capture_here) {
                    GradSampleMatrix m = capture_step(
                        rs.agent, lc, minibatch, 0.0, rs.iteration, step_index, capture_stage,
                        "", cfg.seed, plan->ad_dirs, plan->with_ad, sink->reports);
                    if (plan->keep_samples) sink->matrices.push_back(std::move(m));
                    if (plan->heuristics && capture_all_steps)
                        progressive_heuristics(rs.agent, lc, minibatch, rs.iteration, step_index,
                                               capture_stage, cfg.seed,
                                               plan->heuristic_ratio_eps,
                                               plan->heuristic_grad_clip, plan->keep_samples,
                                               *sink);
                }

                double step_actor = 0.0, step_value = 0.0;
                if (lc.aggregation == Aggregation::block_gmom) {
                    int b = cfg.gmom_blocks;
                    int block_len = mbs / b;
                    block_grads.assign(static_cast<std::size_t>(b) * rs.agent.n_params(), 0.0);
                    for (int k = 0; k < b; ++k) {
                        double* row = block_grads.data() +
                                      static_cast<std::size_t>(k) * rs.agent.n_params();
                        for (int j = 0; j < block_len; ++j) {
                            SampleStats st;
                            accumulate_sample_grad(rs.agent, lc,
                                                   minibatch[static_cast<std::size_t>(
                                                       k * block_len + j)],
                                                   1.0 / block_len, ws, row, &st);
                            rmin = std::min(rmin, st.rho);
                            rmax = std::max(rmax, st.rho);
                            rsum += st.rho;
                            step_actor += -st.actor_obj;
                            step_value += st.value_sq_err;
                            ++nsamples;
                        }
                    }
                    grad = robust_aggregate(block_grads.data(), b, rs.agent.n_params(),
                                            partitions, cfg.weiszfeld_iters);
                } else {
                    std::fill(grad.begin(), grad.end(), 0.0);
                    for (int j = 0; j < mbs; ++j) {
                        SampleStats st;
                        accumulate_sample_grad(rs.agent, lc, minibatch[static_cast<std::size_t>(j)],
                                               1.0 / mbs, ws, grad.data(), &st);
                        rmin = std::min(rmin, st.rho);
                        rmax = std::max(rmax, st.rho);
                        rsum += st.rho;
                        step_actor += -st.actor_obj;
                        step_value += st.value_sq_err;
                        ++nsamples;
                    }
                }
                step_actor /= mbs;
                step_value /= mbs;
                double step_combined = step_actor + lc.value_coeff * step_value;
                if (!std::isfinite(step_combined) || !all_finite(grad))
                    throw std::runtime_error("non-finite loss or gradient at step " +
                                             std::to_string(step_index));
                actor_sum += step_actor;
                value_sum += step_value;
                combined_sum += step_combined;
                gnorm_sum += l2norm(grad);
                if (lc.grad_clip_max > 0.0) global_grad_clip_inplace(grad, lc.grad_clip_max);
                optimizer_step(rs.opt, rs.agent.params.values, grad);
            }
        }
    } catch (const std::exception& e) {
        rs.diverged = true;
        rs.divergence_note =
            "iteration " + std::to_string(rs.iteration) + ": " + e.what();
    }

    rep.steps_done = step_index;
    if (nsamples > 0) {
        rep.ratio_min = rmin;
        rep.ratio_max = rmax;
        rep.ratio_mean = rsum / static_cast<double>(nsamples);
    }
    if (step_index > 0) {
        rep.actor_loss = actor_sum / step_index;
        rep.value_loss = value_sum / step_index;
        rep.combined_loss = combined_sum / step_index;
        rep.grad_norm_mean = gnorm_sum / step_index;
    }
    rep.mean_kl = mean_kl(behavior, rs.agent, tr.obs.data(), T, tr.obs_dim);

    rep.episodes = static_cast<int>(tr.episode_returns.size());
    if (rep.episodes > 0) rep.mean_return = mean(tr.episode_returns);
    else rep.mean_return = rs.recent_returns.empty() ? 0.0 : rs.recent_returns.back();
    rs.recent_returns.push_back(rep.mean_return);
    if (rs.recent_returns.size() > 10) rs.recent_returns.erase(rs.recent_returns.begin());
    double running = mean(rs.recent_returns);
    rep.running_mean_return = running;
    // Stage thresholds measure progress from the random-agent baseline toward
    // the declared target, so they stay ordered for cost-style (negative)
    // returns as well.
    double half_threshold = cfg.random_return + 0.5 * (cfg.target_return - cfg.random_return);
    if (!rs.half_reached && running >= half_threshold) {
        rs.half_reached = true;
        rs.half_iteration = rs.iteration;
        rs.half_pending = true;
    }
    if (!rs.max_reached && running >= cfg.target_return) {
        rs.max_reached = true;
        rs.max_iteration = rs.iteration;
        rs.max_pending = true;
    }
    rep.half_reached = rs.half_reached;
    rep.max_reached = rs.max_reached;
    rep.diverged = rs.diverged;
    ++rs.iteration;
    return rep;
}

// Complete artifact of one run: resolved config, per-iteration reports, tail
// reports from any capture plan, and the final status.
struct RunRecord {
    HarnessConfig config;
    std::vector<IterationReport> iterations;
    CaptureSink capture;
    bool diverged = false;
    std::string divergence_note;
    double final_return = 0.0;  // mean of the last <=10 iterations' mean returns
    int half_iteration = -1;
    int max_iteration = -1;
    std::vector<Stage> absent_stages;  // armed for capture but never reached
};

inline double final_return_of(const std::vector<IterationReport>& reps) {
    if (reps.empty()) return 0.0;
    std::size_t k = std::min<std::size_t>(10, reps.size());
    double s = 0.0;
    for (std::size_t i = reps.size() - k; i < reps.size(); ++i) s += reps[i].mean_return;
    return s / static_cast<double>(k);
}

// Runs up to cfg.iterations iterations (stopping early on divergence or, if
// the plan says so, once every armed capture stage has fired). The callback
// sees the live state after each iteration; checkpointing and streaming
// output hang off it.
inline RunRecord run_training(
    const HarnessConfig& cfg, const CapturePlan* plan = nullptr,
    const std::function<void(const RunState&, const IterationReport&)>& on_iteration = {},
    RunState* final_state_out = nullptr) {
    RunState rs = make_run_state(cfg);
    RunRecord rec;
    rec.config = cfg;
    for (int it = 0; it < cfg.iterations; ++it) {
        IterationReport rep = train_iteration(rs, plan, &rec.capture);
        rec.iterations.push_back(rep);
        if (on_iteration) on_iteration(rs, rep);
        if (rs.diverged) break;
        if (plan && plan->off_policy && plan->stop_after_capture) {
            bool owed = (plan->capture_init && rs.init_pending) ||
                        (plan->capture_half && rs.half_pending) ||
                        (plan->capture_max && rs.max_pending);
            bool reachable = (plan->capture_half && !rs.half_reached) ||
                             (plan->capture_max && !rs.max_reached);
            if (!owed && !reachable) break;
        }
    }
    rec.diverged = rs.diverged;
    rec.divergence_note = rs.divergence_note;
    rec.final_return = final_return_of(rec.iterations);
    rec.half_iteration = rs.half_iteration;
    rec.max_iteration = rs.max_iteration;
    if (plan && plan->off_policy) {
        if (plan->capture_half && !rs.half_reached) rec.absent_stages.push_back(Stage::half_max);
        if (plan->capture_max && !rs.max_reached) rec.absent_stages.push_back(Stage::max);
        for (Stage s : rec.absent_stages) {
            TailReport r;
            r.quantity = "stage_absent";
            r.estimator = "absent";
            r.stage = s;
            r.saturated = true;
            r.seed = cfg.seed;
            rec.capture.reports.push_back(r);
        }
    }
    if (final_state_out) *final_state_out = std::move(rs);
    return rec;
}

// Mean return of an untrained agent, for report normalization. Uses its own
// streams derived from the seed, so it never interacts with training runs.
inline double random_agent_return(EnvKind kind, std::uint64_t seed, int episodes = 20,
                                  const std::vector<int>& hidden = {64, 64}) {
    Env env = Env::make(kind);
    Rng init_rng = Rng::stream(seed, "random_agent_init");
    Agent agent = make_agent(env.obs_dim(), env.action_dim(), hidden, init_rng);
    Rng rng = Rng::stream(seed, "random_agent_rollout");
    EpisodeTracker ep;
    RewardNoise no_noise;
    std::vector<double> returns;
    int T = episodes * kEpisodeLimit;
    Trajectory tr = collect_rollout(agent, env, T, rng, no_noise, ep, nullptr, nullptr);
    return tr.episode_returns.empty() ? 0.0 : mean(tr.episode_returns);
}

}  // namespace pgtail
