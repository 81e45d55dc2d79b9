#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pgtail/agent.hpp"
#include "pgtail/env.hpp"
#include "pgtail/rng.hpp"

namespace pgtail {

// Heavy-tailed training-reward contamination: with probability `prob` per
// step, scale * Pareto(shape) is subtracted from the reward fed to advantage
// estimation. The environment's true reward is kept alongside so return
// reporting stays comparable across noisy and clean runs.
struct RewardNoise {
    double prob = 0.0;
    double shape = 1.5;
    double scale = 5.0;

    bool enabled() const { return prob > 0.0; }

    double draw(Rng& rng) const {
        double u = rng.uniform01();
        if (u >= prob) return 0.0;
        double p = std::pow(1.0 - rng.uniform01(), -1.0 / shape);  // standard Pareto, >= 1
        return -scale * p;
    }
};

struct Trajectory {
    int T = 0;
    int obs_dim = 0;
    int act_dim = 0;
    std::vector<double> obs;       // T x obs_dim, row-major
    std::vector<double> actions;   // T x act_dim (pre-clip, as sampled)
    std::vector<double> rewards;   // training rewards (noise applied)
    std::vector<double> clean_rewards;
    std::vector<std::uint8_t> dones;
    std::vector<double> logp;      // behavior log-probs of sampled actions
    std::vector<double> values;    // T+1 critic values, bootstrap last
    std::vector<double> episode_returns;  // clean returns of episodes finished in this window

    const double* obs_row(int i) const { return obs.data() + static_cast<std::size_t>(i) * obs_dim; }
    const double* act_row(int i) const {
        return actions.data() + static_cast<std::size_t>(i) * act_dim;
    }
};

// Clean-return accumulator for the episode in progress; spans rollout windows
// and is therefore part of the checkpointable run state.
struct EpisodeTracker {
    double ret = 0.0;
    int len = 0;
};

// Samples T steps from the current policy, auto-resetting on episode end.
// Fully determined by (agent, env state, rng states). The reward-noise
// channel draws from its own stream (noise_rng) so enabling noise never
// perturbs the action/reset sequence. If fixed_action is given (tests only)
// it replaces the sampled action but log-probs are still the policy's.
inline Trajectory collect_rollout(const Agent& agent, Env& env, int T, Rng& rng,
                                  const RewardNoise& noise, EpisodeTracker& episode,
                                  const double* fixed_action = nullptr,
                                  Rng* noise_rng = nullptr) {
    if (T <= 0) throw std::invalid_argument("collect_rollout: T must be positive");
    if (noise.enabled() && noise_rng == nullptr)
        throw std::invalid_argument("collect_rollout: reward noise needs its own rng stream");
    Trajectory tr;
    tr.T = T;
    tr.obs_dim = env.obs_dim();
    tr.act_dim = env.action_dim();
    tr.obs.resize(static_cast<std::size_t>(T) * tr.obs_dim);
    tr.actions.resize(static_cast<std::size_t>(T) * tr.act_dim);
    tr.rewards.resize(T);
    tr.clean_rewards.resize(T);
    tr.dones.resize(T);
    tr.logp.resize(T);
    tr.values.resize(static_cast<std::size_t>(T) + 1);

    if (env.state.observation.empty()) env.reset(rng);

    AgentWorkspace ws;
    ws.resize(agent);
    std::vector<double> action(static_cast<std::size_t>(tr.act_dim));
    for (int t = 0; t < T; ++t) {
        const auto& o = env.observation();
        std::copy(o.begin(), o.end(), tr.obs.begin() + static_cast<std::size_t>(t) * tr.obs_dim);
        actor_forward(agent, o.data(), ws);
        const double* mu = ws.actor.act.back().data();
        if (!all_finite(mu, static_cast<std::size_t>(tr.act_dim)))
            throw std::runtime_error("collect_rollout: non-finite policy output");
        gaussian_sample(mu, agent.log_std(), tr.act_dim, rng, action.data());
        if (fixed_action) std::copy(fixed_action, fixed_action + tr.act_dim, action.begin());
        tr.logp[t] = gaussian_log_prob(mu, agent.log_std(), action.data(), tr.act_dim);
        tr.values[t] = critic_forward(agent, o.data(), ws);
        std::copy(action.begin(), action.end(),
                  tr.actions.begin() + static_cast<std::size_t>(t) * tr.act_dim);
        StepResult sr = env.step(action.data());
        tr.clean_rewards[t] = sr.reward;
        tr.rewards[t] = sr.reward + (noise.enabled() ? noise.draw(*noise_rng) : 0.0);
        tr.dones[t] = sr.done ? 1 : 0;
        episode.ret += sr.reward;
        episode.len += 1;
        if (sr.done) {
            tr.episode_returns.push_back(episode.ret);
            episode = EpisodeTracker{};
            env.reset(rng);
        }
    }
    tr.values[T] = critic_forward(agent, env.observation().data(), ws);
    return tr;
}

}  // namespace pgtail
