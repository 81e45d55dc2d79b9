#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgtail/rng.hpp"
#include "pgtail/vecmath.hpp"

namespace pgtail {

enum class EnvKind { pendulum, pointmass };

inline const char* env_name(EnvKind k) { return k == EnvKind::pendulum ? "pendulum" : "pointmass"; }

inline EnvKind env_from(const std::string& s) {
    if (s == "pendulum") return EnvKind::pendulum;
    if (s == "pointmass") return EnvKind::pointmass;
    throw std::invalid_argument("unknown env: " + s);
}

struct EnvState {
    std::vector<double> observation;
    std::vector<double> internal;
    int t = 0;
};

struct StepResult {
    double reward = 0.0;
    bool done = false;
};

inline constexpr int kEpisodeLimit = 200;

// Maps an angle to (-pi, pi].
inline double wrap_angle(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return theta - two_pi * std::ceil((theta - std::numbers::pi) / two_pi);
}

// Torque-limited swing-up pendulum. internal = (theta, theta_dot).
// Reward is evaluated on the pre-step state with the clipped torque; the
// update is semi-implicit Euler with the angular velocity clipped to [-8, 8].
struct Pendulum {
    static constexpr int obs_dim = 3;
    static constexpr int action_dim = 1;
    static constexpr double g = 10.0, m = 1.0, l = 1.0, dt = 0.05;
    static constexpr double max_torque = 2.0, max_speed = 8.0;

    static void reset(EnvState& s, Rng& rng) {
        double theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
        double theta_dot = rng.uniform(-1.0, 1.0);
        s.internal = {theta, theta_dot};
        s.t = 0;
        observe(s);
    }

    static void observe(EnvState& s) {
        s.observation = {std::cos(s.internal[0]), std::sin(s.internal[0]), s.internal[1]};
    }

    static StepResult step(EnvState& s, const double* action) {
        double u = clip(action[0], -max_torque, max_torque);
        double theta = s.internal[0];
        double theta_dot = s.internal[1];
        double cost = wrap_angle(theta) * wrap_angle(theta) + 0.1 * theta_dot * theta_dot +
                      0.001 * u * u;
        double theta_ddot = (3.0 * g / (2.0 * l)) * std::sin(theta) + 3.0 * u / (m * l * l);
        theta_dot = clip(theta_dot + theta_ddot * dt, -max_speed, max_speed);
        theta = theta + theta_dot * dt;
        s.internal[0] = theta;
        s.internal[1] = theta_dot;
        s.t += 1;
        observe(s);
        return {-cost, s.t >= kEpisodeLimit};
    }
};

// 2-D point mass pushed by a bounded force toward the origin.
// internal = (px, py, vx, vy); reward on the pre-step position.
struct PointMass {
    static constexpr int obs_dim = 4;
    static constexpr int action_dim = 2;
    static constexpr double dt = 0.05;

    static void reset(EnvState& s, Rng& rng) {
        s.internal = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-0.5, 0.5),
                      rng.uniform(-0.5, 0.5)};
        s.t = 0;
        observe(s);
    }

    static void observe(EnvState& s) { s.observation = s.internal; }

    static StepResult step(EnvState& s, const double* action) {
        double ax = clip(action[0], -1.0, 1.0);
        double ay = clip(action[1], -1.0, 1.0);
        double px = s.internal[0], py = s.internal[1];
        double cost = px * px + py * py + 0.01 * (ax * ax + ay * ay);
        double vx = s.internal[2] + dt * ax;
        double vy = s.internal[3] + dt * ay;
        s.internal = {px + dt * vx, py + dt * vy, vx, vy};
        s.t += 1;
        observe(s);
        return {-cost, s.t >= kEpisodeLimit};
    }
};

// Value-type environment: kind plus current state, checkpointable as plain
// numbers. Resets draw from the caller's RNG stream.
struct Env {
    EnvKind kind = EnvKind::pendulum;
    EnvState state;

    static Env make(EnvKind kind) {
        Env e;
        e.kind = kind;
        return e;
    }

    int obs_dim() const { return kind == EnvKind::pendulum ? Pendulum::obs_dim : PointMass::obs_dim; }
    int action_dim() const {
        return kind == EnvKind::pendulum ? Pendulum::action_dim : PointMass::action_dim;
    }

    void reset(Rng& rng) {
        if (kind == EnvKind::pendulum)
            Pendulum::reset(state, rng);
        else
            PointMass::reset(state, rng);
    }

    StepResult step(const double* action) {
        return kind == EnvKind::pendulum ? Pendulum::step(state, action)
                                         : PointMass::step(state, action);
    }

    StepResult step(const std::vector<double>& action) {
        if (action.size() != static_cast<std::size_t>(action_dim()))
            throw std::invalid_argument("Env::step: action dimension mismatch");
        return step(action.data());
    }

    const std::vector<double>& observation() const { return state.observation; }

    // Rebuilds the observation from internal state (after checkpoint load).
    void refresh_observation() {
        if (kind == EnvKind::pendulum)
            Pendulum::observe(state);
        else
            PointMass::observe(state);
    }
};

}  // namespace pgtail
