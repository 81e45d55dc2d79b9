#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pgtail/agent.hpp"
#include "pgtail/vecmath.hpp"

namespace pgtail {

enum class Aggregation { mean, block_gmom };

// Which pieces of the update are active. eps/grad_clip use 0 for "disabled".
struct LossConfig {
    double ratio_clip_eps = 0.0;
    bool value_clip = false;
    double value_coeff = 2.0;
    double entropy_coeff = 0.0;
    double grad_clip_max = 0.0;
    Aggregation aggregation = Aggregation::mean;
    bool a2c_actor = false;  // actor term -mean(A*logpi) instead of -mean(rho*A)

    void check() const {
        if (ratio_clip_eps != 0.0 && (ratio_clip_eps <= 0.0 || ratio_clip_eps >= 1.0))
            throw std::invalid_argument("LossConfig: ratio_clip_eps must lie in (0,1) when enabled");
        if (value_coeff <= 0.0) throw std::invalid_argument("LossConfig: value_coeff must be positive");
    }
};

// rho_i = exp(logpi_theta - logpi_behavior), elementwise.
inline std::vector<double> ratio(const std::vector<double>& logp_new,
                                 const std::vector<double>& logp_behavior) {
    if (logp_new.size() != logp_behavior.size())
        throw std::invalid_argument("ratio: length mismatch");
    std::vector<double> out(logp_new.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double e = logp_new[i] - logp_behavior[i];
        if (!std::isfinite(e)) throw std::invalid_argument("ratio: non-finite exponent");
        out[i] = std::exp(e);
    }
    return out;
}

// Minimized form of the plain surrogate objective E[rho*A]: -mean(rho_i*A_i).
inline double surrogate_noclip_loss(const std::vector<double>& rho,
                                    const std::vector<double>& adv) {
    if (rho.size() != adv.size()) throw std::invalid_argument("surrogate_noclip_loss: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) s += rho[i] * adv[i];
    return -s / static_cast<double>(rho.size());
}

// -mean( min(rho*A, clip(rho, 1-eps, 1+eps)*A) ): the pessimistic clipped bound.
inline double ppo_clip_loss(const std::vector<double>& rho, const std::vector<double>& adv,
                            double eps) {
    if (rho.size() != adv.size()) throw std::invalid_argument("ppo_clip_loss: length mismatch");
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("ppo_clip_loss: eps must lie in (0,1)");
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double u = rho[i] * adv[i];
        double c = clip(rho[i], 1.0 - eps, 1.0 + eps) * adv[i];
        s += std::min(u, c);
    }
    return -s / static_cast<double>(rho.size());
}

// Unclipped: mean (V - V_trg)^2.
// Clipped:   mean max{ (V - V_trg)^2, (clip(V, V_old +- eps) - V_trg)^2 }.
inline double value_loss(const std::vector<double>& v, const std::vector<double>& v_trg,
                         const std::vector<double>& v_old, double eps, bool clipped) {
    if (v.size() != v_trg.size() || (clipped && v.size() != v_old.size()))
        throw std::invalid_argument("value_loss: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double e = v[i] - v_trg[i];
        double term = e * e;
        if (clipped) {
            double vc = clip(v[i], v_old[i] - eps, v_old[i] + eps);
            double ec = vc - v_trg[i];
            term = std::max(term, ec * ec);
        }
        s += term;
    }
    return s / static_cast<double>(v.size());
}

// -mean(A_i * logpi_i) with A treated as a constant.
inline double a2c_loss(const std::vector<double>& logp, const std::vector<double>& adv) {
    if (logp.size() != adv.size()) throw std::invalid_argument("a2c_loss: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < logp.size(); ++i) s += adv[i] * logp[i];
    return -s / static_cast<double>(logp.size());
}

// Closed-form diagonal-Gaussian KL(old || new) averaged over the given states.
inline double mean_kl(const Agent& old_agent, const Agent& new_agent, const double* obs_rows,
                      int n, int obs_dim) {
    if (n <= 0) throw std::invalid_argument("mean_kl: need at least one state");
    MlpWorkspace wo, wn;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* o = obs_rows + static_cast<std::size_t>(i) * obs_dim;
        mlp_forward(old_agent.actor, old_agent.actor_params(), o, wo);
        mlp_forward(new_agent.actor, new_agent.actor_params(), o, wn);
        s += gaussian_kl(wo.act.back().data(), old_agent.log_std(), wn.act.back().data(),
                         new_agent.log_std(), old_agent.action_dim());
    }
    return s / static_cast<double>(n);
}

// One training sample as consumed by the update.
struct SampleRef {
    const double* obs;
    const double* action;
    double behavior_logp;
    double adv;        // normalized (and possibly clipped) advantage
    double v_old;      // critic value at sampling time
    double v_trg;      // value-regression target
};

struct SampleStats {
    double logp = 0.0;
    double rho = 1.0;
    double value = 0.0;
    double actor_obj = 0.0;  // per-sample surrogate objective value (maximized form)
    double value_sq_err = 0.0;
};

// Adds weight * d(loss_i)/d(params) for one sample into grad, where loss_i is
//   actor term + value_coeff * value term - entropy_coeff * entropy.
// Branch selection matches the scalar losses above: ties take the unclipped
// branch, and a clipped-branch win contributes zero gradient through the
// flat side of the clip.
inline void accumulate_sample_grad(const Agent& agent, const LossConfig& lc, const SampleRef& s,
                                   double weight, AgentWorkspace& ws, double* grad,
                                   SampleStats* stats = nullptr) {
    int adim = agent.action_dim();
    actor_forward(agent, s.obs, ws);
    const double* mu = ws.actor.act.back().data();
    const double* log_std = agent.log_std();
    double logp = gaussian_log_prob(mu, log_std, s.action, adim);
    double rho = std::exp(logp - s.behavior_logp);

    // d(actor loss)/d(logp)
    double dlogp;
    double actor_obj;
    if (lc.a2c_actor) {
        dlogp = -s.adv;
        actor_obj = s.adv * logp;
    } else if (lc.ratio_clip_eps > 0.0) {
        double eps = lc.ratio_clip_eps;
        double u = rho * s.adv;
        double c = clip(rho, 1.0 - eps, 1.0 + eps) * s.adv;
        if (u <= c) {
            dlogp = -s.adv * rho;  // unclipped branch active (d rho/d logp = rho)
            actor_obj = u;
        } else {
            dlogp = 0.0;  // clipped branch active and rho outside the band
            actor_obj = c;
        }
    } else {
        dlogp = -s.adv * rho;
        actor_obj = rho * s.adv;
    }

    gaussian_log_prob_grads(mu, log_std, s.action, adim, ws.dmean.data(), ws.dlogstd.data());
    for (int j = 0; j < adim; ++j) ws.dmean[j] *= dlogp * weight;
    mlp_backward(agent.actor, agent.actor_params(), ws.actor, ws.dmean.data(), grad);
    double* glogstd = grad + agent.logstd_offset;
    for (int j = 0; j < adim; ++j)
        glogstd[j] += weight * (dlogp * ws.dlogstd[j] - lc.entropy_coeff);

    double v = critic_forward(agent, s.obs, ws);
    double e = v - s.v_trg;
    double dv = 2.0 * e;
    double sq = e * e;
    if (lc.value_clip) {
        double vc = clip(v, s.v_old - lc.ratio_clip_eps, s.v_old + lc.ratio_clip_eps);
        double ec = vc - s.v_trg;
        if (ec * ec > sq) {
            sq = ec * ec;
            dv = 0.0;  // max picked the clipped branch; clip is flat outside the band
        }
    }
    ws.dvalue[0] = lc.value_coeff * dv * weight;
    mlp_backward(agent.critic, agent.critic_params(), ws.critic, ws.dvalue.data(),
                 grad + agent.critic_offset);

    if (stats) {
        stats->logp = logp;
        stats->rho = rho;
        stats->value = v;
        stats->actor_obj = actor_obj;
        stats->value_sq_err = sq;
    }
}

// Scalar loss matching accumulate_sample_grad, for finite-difference checks.
inline double sample_loss(const Agent& agent, const LossConfig& lc, const SampleRef& s,
                          AgentWorkspace& ws) {
    int adim = agent.action_dim();
    actor_forward(agent, s.obs, ws);
    const double* mu = ws.actor.act.back().data();
    double logp = gaussian_log_prob(mu, agent.log_std(), s.action, adim);
    double rho = std::exp(logp - s.behavior_logp);
    double actor_obj;
    if (lc.a2c_actor) {
        actor_obj = s.adv * logp;
    } else if (lc.ratio_clip_eps > 0.0) {
        double u = rho * s.adv;
        double c = clip(rho, 1.0 - lc.ratio_clip_eps, 1.0 + lc.ratio_clip_eps) * s.adv;
        actor_obj = std::min(u, c);
    } else {
        actor_obj = rho * s.adv;
    }
    double v = critic_forward(agent, s.obs, ws);
    double e = v - s.v_trg;
    double vterm = e * e;
    if (lc.value_clip) {
        double vc = clip(v, s.v_old - lc.ratio_clip_eps, s.v_old + lc.ratio_clip_eps);
        vterm = std::max(vterm, (vc - s.v_trg) * (vc - s.v_trg));
    }
    double entropy = gaussian_entropy(agent.log_std(), adim);
    return -actor_obj + lc.value_coeff * vterm - lc.entropy_coeff * entropy;
}

// Generic per-sample gradient matrix: row i is the gradient of sample i's
// loss; the mean of the rows equals the batch-loss gradient by linearity.
template <class LossGradFn>
inline std::vector<std::vector<double>> per_sample_grads(int n_samples, std::size_t n_params,
                                                         LossGradFn&& fn) {
    if (n_samples <= 0) throw std::invalid_argument("per_sample_grads: empty batch");
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        rows[static_cast<std::size_t>(i)].assign(n_params, 0.0);
        fn(i, rows[static_cast<std::size_t>(i)].data());
    }
    return rows;
}

}  // namespace pgtail
