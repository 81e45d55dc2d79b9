#pragma once

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgtail/config.hpp"
#include "pgtail/train.hpp"

namespace pgtail {

namespace detail {

inline void ck_line(std::string& out, const std::string& s) {
    out += s;
    out += "\n";
}

inline void ck_doubles(std::string& out, const std::string& name,
                       const std::vector<double>& v) {
    out += name;
    out += " ";
    out += std::to_string(v.size());
    out += "\n";
    char buf[64];
    for (double d : v) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", d);
        out += buf;
    }
}

struct CkReader {
    std::istringstream in;
    explicit CkReader(const std::string& s) : in(s) {}

    std::string token() {
        std::string t;
        if (!(in >> t)) throw std::runtime_error("checkpoint: unexpected end of file");
        return t;
    }

    std::string expect(const std::string& name) {
        std::string t = token();
        if (t != name)
            throw std::runtime_error("checkpoint: expected '" + name + "', found '" + t + "'");
        return t;
    }

    long long integer(const std::string& name) {
        expect(name);
        return std::stoll(token());
    }

    std::uint64_t u64(const std::string& name) {
        expect(name);
        return std::stoull(token());
    }

    double real(const std::string& name) {
        expect(name);
        return std::stod(token());
    }

    std::vector<double> doubles(const std::string& name) {
        expect(name);
        std::size_t n = static_cast<std::size_t>(std::stoull(token()));
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::stod(token());
        return v;
    }
};

}  // namespace detail

// Text snapshot of the complete run state. All reals are written with 17
// significant digits, which strtod maps back to the identical bit pattern,
// so save -> load -> continue reproduces an uninterrupted run exactly.
inline std::string save_checkpoint(const RunState& rs) {
    using detail::ck_doubles;
    using detail::ck_line;
    std::string out;
    ck_line(out, "pgtail_checkpoint 1");
    std::string cfg = serialize_config(rs.cfg);
    std::size_t cfg_lines = 0;
    for (char ch : cfg)
        if (ch == '\n') ++cfg_lines;
    ck_line(out, "config " + std::to_string(cfg_lines));
    out += cfg;
    ck_line(out, "iteration " + std::to_string(rs.iteration));
    ck_doubles(out, "params", rs.agent.params.values);
    ck_line(out, std::string("opt_kind ") + opt_kind_name(rs.opt.kind));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", rs.opt.lr);
    ck_line(out, std::string("opt_lr ") + buf);
    ck_line(out, "opt_step_count " + std::to_string(rs.opt.step_count));
    ck_doubles(out, "opt_m", rs.opt.m);
    ck_doubles(out, "opt_v", rs.opt.v);
    ck_line(out, "rng_rollout " + std::to_string(rs.rollout_rng.state));
    ck_line(out, "rng_shuffle " + std::to_string(rs.shuffle_rng.state));
    ck_line(out, "rng_noise " + std::to_string(rs.noise_rng.state));
    ck_line(out, std::string("env_kind ") + env_name(rs.env.kind));
    ck_line(out, "env_t " + std::to_string(rs.env.state.t));
    ck_doubles(out, "env_internal", rs.env.state.internal);
    std::snprintf(buf, sizeof(buf), "%.17g", rs.episode.ret);
    ck_line(out, std::string("episode_ret ") + buf);
    ck_line(out, "episode_len " + std::to_string(rs.episode.len));
    ck_doubles(out, "recent_returns", rs.recent_returns);
    ck_line(out, "half_reached " + std::to_string(rs.half_reached ? 1 : 0));
    ck_line(out, "max_reached " + std::to_string(rs.max_reached ? 1 : 0));
    ck_line(out, "half_iteration " + std::to_string(rs.half_iteration));
    ck_line(out, "max_iteration " + std::to_string(rs.max_iteration));
    ck_line(out, "init_pending " + std::to_string(rs.init_pending ? 1 : 0));
    ck_line(out, "half_pending " + std::to_string(rs.half_pending ? 1 : 0));
    ck_line(out, "max_pending " + std::to_string(rs.max_pending ? 1 : 0));
    ck_line(out, "diverged " + std::to_string(rs.diverged ? 1 : 0));
    ck_line(out, "end");
    return out;
}

inline RunState load_checkpoint(const std::string& text) {
    std::istringstream all(text);
    std::string header;
    std::getline(all, header);
    if (header != "pgtail_checkpoint 1")
        throw std::runtime_error("checkpoint: unrecognized header '" + header + "'");
    std::string count_line;
    std::getline(all, count_line);
    std::istringstream cl(count_line);
    std::string tag;
    std::size_t n_cfg = 0;
    if (!(cl >> tag >> n_cfg) || tag != "config")
        throw std::runtime_error("checkpoint: missing config section");
    std::string cfg_text;
    for (std::size_t i = 0; i < n_cfg; ++i) {
        std::string line;
        if (!std::getline(all, line)) throw std::runtime_error("checkpoint: truncated config");
        cfg_text += line;
        cfg_text += "\n";
    }
    HarnessConfig cfg = parse_config(cfg_text);

    std::string rest((std::istreambuf_iterator<char>(all)), std::istreambuf_iterator<char>());
    detail::CkReader r(rest);
    RunState rs = make_run_state(cfg);
    rs.iteration = static_cast<int>(r.integer("iteration"));
    std::vector<double> params = r.doubles("params");
    if (params.size() != rs.agent.n_params())
        throw std::runtime_error("checkpoint: parameter count mismatch");
    rs.agent.params.values = std::move(params);
    r.expect("opt_kind");
    rs.opt.kind = opt_kind_from(r.token());
    rs.opt.lr = r.real("opt_lr");
    rs.opt.step_count = r.integer("opt_step_count");
    rs.opt.m = r.doubles("opt_m");
    rs.opt.v = r.doubles("opt_v");
    if (rs.opt.kind == OptKind::adam &&
        (rs.opt.m.size() != rs.agent.n_params() || rs.opt.v.size() != rs.agent.n_params()))
        throw std::runtime_error("checkpoint: optimizer state size mismatch");
    rs.rollout_rng.state = r.u64("rng_rollout");
    rs.shuffle_rng.state = r.u64("rng_shuffle");
    rs.noise_rng.state = r.u64("rng_noise");
    r.expect("env_kind");
    rs.env.kind = env_from(r.token());
    rs.env.state.t = static_cast<int>(r.integer("env_t"));
    rs.env.state.internal = r.doubles("env_internal");
    if (!rs.env.state.internal.empty()) rs.env.refresh_observation();
    else rs.env.state.observation.clear();
    rs.episode.ret = r.real("episode_ret");
    rs.episode.len = static_cast<int>(r.integer("episode_len"));
    rs.recent_returns = r.doubles("recent_returns");
    rs.half_reached = r.integer("half_reached") != 0;
    rs.max_reached = r.integer("max_reached") != 0;
    rs.half_iteration = static_cast<int>(r.integer("half_iteration"));
    rs.max_iteration = static_cast<int>(r.integer("max_iteration"));
    rs.init_pending = r.integer("init_pending") != 0;
    rs.half_pending = r.integer("half_pending") != 0;
    rs.max_pending = r.integer("max_pending") != 0;
    rs.diverged = r.integer("diverged") != 0;
    r.expect("end");
    return rs;
}

}  // namespace pgtail
