#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pgtail/mlp.hpp"
#include "pgtail/policy.hpp"
#include "pgtail/rng.hpp"

namespace pgtail {

// Actor-critic pair stored as ONE flat parameter vector laid out as
// [actor weights | log_std | critic weights]. A single optimizer state covers
// the whole vector; robust aggregation and capture partition it by network
// (log_std belongs to the actor partition).
struct Agent {
    MlpSpec actor;   // obs_dim -> action_dim (policy mean)
    MlpSpec critic;  // obs_dim -> 1
    ParamVector params;
    std::size_t actor_size = 0;    // actor net weights, excluding log_std
    std::size_t logstd_offset = 0;
    std::size_t critic_offset = 0;

    int obs_dim() const { return actor.input_dim; }
    int action_dim() const { return actor.output_dim; }
    std::size_t n_params() const { return params.size(); }

    const double* actor_params() const { return params.values.data(); }
    const double* log_std() const { return params.values.data() + logstd_offset; }
    double* log_std() { return params.values.data() + logstd_offset; }
    const double* critic_params() const { return params.values.data() + critic_offset; }

    // Actor partition = net weights plus log_std (contiguous by construction).
    std::size_t actor_partition_len() const { return critic_offset; }
    std::size_t critic_partition_len() const { return n_params() - critic_offset; }
};

inline Agent make_agent(int obs_dim, int action_dim, const std::vector<int>& hidden, Rng& rng) {
    Agent a;
    a.actor = MlpSpec{obs_dim, hidden, action_dim};
    a.critic = MlpSpec{obs_dim, hidden, 1};
    ParamVector pa = init_params(a.actor, rng, "actor");
    ParamVector pc = init_params(a.critic, rng, "critic");
    a.actor_size = pa.size();
    a.params.values = std::move(pa.values);
    a.params.layout = std::move(pa.layout);
    a.logstd_offset = a.params.values.size();
    a.params.layout.push_back(
        LayerDesc{"actor.log_std", action_dim, 1, a.logstd_offset});
    for (int j = 0; j < action_dim; ++j) a.params.values.push_back(0.0);
    a.critic_offset = a.params.values.size();
    for (auto& d : pc.layout) {
        d.offset += a.critic_offset;
        a.params.layout.push_back(d);
    }
    a.params.values.insert(a.params.values.end(), pc.values.begin(), pc.values.end());
    a.params.check();
    return a;
}

// Scratch for one forward/backward evaluation of both networks.
struct AgentWorkspace {
    MlpWorkspace actor;
    MlpWorkspace critic;
    std::vector<double> dmean;
    std::vector<double> dlogstd;
    std::vector<double> dvalue{0.0};

    void resize(const Agent& a) {
        actor.resize(a.actor);
        critic.resize(a.critic);
        dmean.assign(static_cast<std::size_t>(a.action_dim()), 0.0);
        dlogstd.assign(static_cast<std::size_t>(a.action_dim()), 0.0);
        dvalue.assign(1, 0.0);
    }
};

inline void actor_forward(const Agent& a, const double* obs, AgentWorkspace& ws) {
    mlp_forward(a.actor, a.actor_params(), obs, ws.actor);
}

inline double critic_forward(const Agent& a, const double* obs, AgentWorkspace& ws) {
    mlp_forward(a.critic, a.critic_params(), obs, ws.critic);
    return ws.critic.act.back()[0];
}

inline double critic_value(const Agent& a, const std::vector<double>& obs) {
    MlpWorkspace ws;
    mlp_forward(a.critic, a.critic_params(), obs.data(), ws);
    return ws.act.back()[0];
}

}  // namespace pgtail
