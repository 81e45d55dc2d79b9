#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgtail/env.hpp"
#include "pgtail/losses.hpp"
#include "pgtail/rng.hpp"
#include "pgtail/rollout.hpp"

namespace pgtail {

enum class Algorithm { ppo, ppo_noclip, robust_ppo_noclip, a2c };

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::ppo: return "ppo";
        case Algorithm::ppo_noclip: return "ppo_noclip";
        case Algorithm::robust_ppo_noclip: return "robust_ppo_noclip";
        case Algorithm::a2c: return "a2c";
    }
    return "?";
}

inline Algorithm algorithm_from(const std::string& s) {
    if (s == "ppo") return Algorithm::ppo;
    if (s == "ppo_noclip") return Algorithm::ppo_noclip;
    if (s == "robust_ppo_noclip") return Algorithm::robust_ppo_noclip;
    if (s == "a2c") return Algorithm::a2c;
    throw std::invalid_argument("unknown algorithm: " + s);
}

// Full experiment configuration. Construction goes through resolve() so that
// algorithm- and environment-dependent defaults are materialized exactly once
// and every resolved value is echoed into run metadata.
struct HarnessConfig {
    Algorithm algorithm = Algorithm::ppo;
    EnvKind env = EnvKind::pendulum;
    std::uint64_t seed = 0;
    int iterations = 300;
    int steps_per_iter = 2048;
    int minibatches = 32;
    int epochs = 10;
    double gamma = 0.99;
    double lam = 0.95;
    double ratio_clip_eps = 0.2;  // 0 disables ratio and value clipping
    double value_coeff = 2.0;
    double entropy_coeff = 0.0;
    double grad_clip = 0.5;  // 0 disables
    double lr = 3e-4;
    int gmom_blocks = 8;
    int weiszfeld_iters = 100;
    std::optional<double> advantage_clip;  // negative threshold, absent = off
    double noise_prob = 0.0;
    double noise_shape = 1.5;
    double noise_scale = 5.0;
    double target_return = -450.0;
    double random_return = -1300.0;
    std::vector<int> hidden{64, 64};
    int checkpoint_every = 0;  // iterations between checkpoints, 0 = none

    LossConfig loss_config() const {
        LossConfig lc;
        lc.ratio_clip_eps = ratio_clip_eps;
        lc.value_clip = ratio_clip_eps > 0.0;
        lc.value_coeff = value_coeff;
        lc.entropy_coeff = entropy_coeff;
        lc.grad_clip_max = grad_clip;
        lc.aggregation = algorithm == Algorithm::robust_ppo_noclip ? Aggregation::block_gmom
                                                                   : Aggregation::mean;
        lc.a2c_actor = algorithm == Algorithm::a2c;
        lc.check();
        return lc;
    }

    RewardNoise reward_noise() const { return RewardNoise{noise_prob, noise_shape, noise_scale}; }

    int minibatch_size() const { return steps_per_iter / minibatches; }

    void validate() const {
        if (iterations <= 0 || steps_per_iter <= 0 || minibatches <= 0 || epochs <= 0)
            throw std::invalid_argument("config: iteration/batch counts must be positive");
        if (steps_per_iter % minibatches != 0)
            throw std::invalid_argument("config: steps_per_iter must divide into minibatches");
        if (gamma < 0.0 || gamma > 1.0 || lam < 0.0 || lam > 1.0)
            throw std::invalid_argument("config: gamma and lambda must lie in [0,1]");
        if (lr <= 0.0) throw std::invalid_argument("config: lr must be positive");
        if (ratio_clip_eps < 0.0 || ratio_clip_eps >= 1.0)
            throw std::invalid_argument("config: ratio_clip_eps must lie in [0,1)");
        if (grad_clip < 0.0) throw std::invalid_argument("config: grad_clip must be >= 0");
        if (gmom_blocks <= 0 || gmom_blocks > minibatch_size())
            throw std::invalid_argument("config: gmom_blocks must lie in [1, minibatch size]");
        if (algorithm == Algorithm::robust_ppo_noclip && minibatch_size() % gmom_blocks != 0)
            throw std::invalid_argument(
                "config: gmom_blocks must divide the minibatch size so no sample is dropped");
        if (weiszfeld_iters <= 0)
            throw std::invalid_argument("config: weiszfeld_iters must be positive");
        if (advantage_clip && *advantage_clip >= 0.0)
            throw std::invalid_argument("config: advantage_clip threshold must be negative");
        if (noise_prob < 0.0 || noise_prob > 1.0)
            throw std::invalid_argument("config: noise.prob must lie in [0,1]");
        if (hidden.empty()) throw std::invalid_argument("config: hidden layer list is empty");
        loss_config();  // throws on inconsistent loss settings
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer value for " + key + ": '" + v + "'");
    }
}

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// Applies one key=value assignment. Used for both file lines and CLI
// overrides so the two paths cannot drift apart.
inline void config_apply(HarnessConfig& c, const std::string& key, const std::string& value) {
    using detail::parse_double;
    using detail::parse_int;
    if (key == "algorithm") c.algorithm = algorithm_from(value);
    else if (key == "env") c.env = env_from(value);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "iterations") c.iterations = static_cast<int>(parse_int(key, value));
    else if (key == "steps_per_iter") c.steps_per_iter = static_cast<int>(parse_int(key, value));
    else if (key == "minibatches") c.minibatches = static_cast<int>(parse_int(key, value));
    else if (key == "epochs") c.epochs = static_cast<int>(parse_int(key, value));
    else if (key == "gamma") c.gamma = parse_double(key, value);
    else if (key == "lambda") c.lam = parse_double(key, value);
    else if (key == "ratio_clip_eps") c.ratio_clip_eps = parse_double(key, value);
    else if (key == "value_coeff") c.value_coeff = parse_double(key, value);
    else if (key == "entropy_coeff") c.entropy_coeff = parse_double(key, value);
    else if (key == "grad_clip") c.grad_clip = parse_double(key, value);
    else if (key == "lr") c.lr = parse_double(key, value);
    else if (key == "gmom.blocks") c.gmom_blocks = static_cast<int>(parse_int(key, value));
    else if (key == "gmom.weiszfeld_iters") c.weiszfeld_iters = static_cast<int>(parse_int(key, value));
    else if (key == "advantage_clip") {
        if (value == "none") c.advantage_clip.reset();
        else c.advantage_clip = parse_double(key, value);
    }
    else if (key == "noise.prob") c.noise_prob = parse_double(key, value);
    else if (key == "noise.shape") c.noise_shape = parse_double(key, value);
    else if (key == "noise.scale") c.noise_scale = parse_double(key, value);
    else if (key == "target_return") c.target_return = parse_double(key, value);
    else if (key == "random_return") c.random_return = parse_double(key, value);
    else if (key == "hidden") {
        std::vector<int> h;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (!item.empty()) h.push_back(static_cast<int>(parse_int(key, item)));
        }
        if (h.empty()) throw std::invalid_argument("config: hidden needs at least one layer");
        c.hidden = h;
    }
    else if (key == "checkpoint_every") c.checkpoint_every = static_cast<int>(parse_int(key, value));
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

// Per-(algorithm, env) defaults. Applied for keys the source did not set, so
// a config file stating only "algorithm = ppo_noclip" still gets the right
// learning rate, clip settings, and episode budget.
inline void apply_profile_defaults(HarnessConfig& c, bool lr_set, bool eps_set, bool gclip_set,
                                   bool epochs_set, bool iters_set, bool target_set,
                                   bool random_set) {
    bool noclip_family =
        c.algorithm == Algorithm::ppo_noclip || c.algorithm == Algorithm::robust_ppo_noclip;
    if (!lr_set) c.lr = noclip_family ? 8e-5 : 3e-4;
    if (!eps_set) c.ratio_clip_eps = c.algorithm == Algorithm::ppo ? 0.2 : 0.0;
    if (!gclip_set) c.grad_clip = c.algorithm == Algorithm::ppo ? 0.5 : 0.0;
    if (!epochs_set) c.epochs = c.algorithm == Algorithm::a2c ? 1 : 10;
    if (!iters_set) c.iterations = c.env == EnvKind::pendulum ? 300 : 150;
    if (!target_set) c.target_return = c.env == EnvKind::pendulum ? -450.0 : -40.0;
    if (!random_set) c.random_return = c.env == EnvKind::pendulum ? -1300.0 : -4800.0;
}

// Parses the key=value text form ('#' comments, blank lines ignored) and then
// applies CLI-style overrides. Unknown keys are errors in both sources.
inline HarnessConfig parse_config(const std::string& text,
                                  const std::vector<std::string>& overrides = {}) {
    HarnessConfig c;
    bool lr_set = false, eps_set = false, gclip_set = false, epochs_set = false,
         iters_set = false, target_set = false, random_set = false;
    std::vector<std::pair<std::string, std::string>> kvs;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key=value, got '" + line + "'");
        kvs.emplace_back(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    for (const std::string& ov : overrides) {
        std::size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("override: expected key=value, got '" + ov + "'");
        kvs.emplace_back(detail::trim(ov.substr(0, eq)), detail::trim(ov.substr(eq + 1)));
    }
    for (const auto& [k, v] : kvs) {
        config_apply(c, k, v);
        if (k == "lr") lr_set = true;
        if (k == "ratio_clip_eps") eps_set = true;
        if (k == "grad_clip") gclip_set = true;
        if (k == "epochs") epochs_set = true;
        if (k == "iterations") iters_set = true;
        if (k == "target_return") target_set = true;
        if (k == "random_return") random_set = true;
    }
    apply_profile_defaults(c, lr_set, eps_set, gclip_set, epochs_set, iters_set, target_set,
                           random_set);
    c.validate();
    return c;
}

// Canonical text form: fixed key order, full-precision doubles, every
// resolved value explicit. Reparsing reproduces the config exactly.
inline std::string serialize_config(const HarnessConfig& c) {
    using detail::format_g17;
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    };
    kv("algorithm", algorithm_name(c.algorithm));
    kv("env", env_name(c.env));
    kv("seed", std::to_string(c.seed));
    kv("iterations", std::to_string(c.iterations));
    kv("steps_per_iter", std::to_string(c.steps_per_iter));
    kv("minibatches", std::to_string(c.minibatches));
    kv("epochs", std::to_string(c.epochs));
    kv("gamma", format_g17(c.gamma));
    kv("lambda", format_g17(c.lam));
    kv("ratio_clip_eps", format_g17(c.ratio_clip_eps));
    kv("value_coeff", format_g17(c.value_coeff));
    kv("entropy_coeff", format_g17(c.entropy_coeff));
    kv("grad_clip", format_g17(c.grad_clip));
    kv("lr", format_g17(c.lr));
    kv("gmom.blocks", std::to_string(c.gmom_blocks));
    kv("gmom.weiszfeld_iters", std::to_string(c.weiszfeld_iters));
    kv("advantage_clip", c.advantage_clip ? format_g17(*c.advantage_clip) : "none");
    kv("noise.prob", format_g17(c.noise_prob));
    kv("noise.shape", format_g17(c.noise_shape));
    kv("noise.scale", format_g17(c.noise_scale));
    kv("target_return", format_g17(c.target_return));
    kv("random_return", format_g17(c.random_return));
    std::string h;
    for (std::size_t i = 0; i < c.hidden.size(); ++i) {
        if (i) h += ",";
        h += std::to_string(c.hidden[i]);
    }
    kv("hidden", h);
    kv("checkpoint_every", std::to_string(c.checkpoint_every));
    return out;
}

// Hash of the canonical form with the seed line removed, so runs of one
// experiment across seeds share a hash while any other change separates them.
inline std::uint64_t config_hash(const HarnessConfig& c) {
    std::string s = serialize_config(c);
    std::string without_seed;
    std::stringstream ss(s);
    std::string line;
    while (std::getline(ss, line))
        if (line.rfind("seed ", 0) != 0) {
            without_seed += line;
            without_seed += "\n";
        }
    return fnv1a64(without_seed);
}

inline std::string config_hash_hex(const HarnessConfig& c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash(c)));
    return buf;
}

inline std::string run_id(const HarnessConfig& c) {
    return config_hash_hex(c) + "-s" + std::to_string(c.seed);
}

}  // namespace pgtail
