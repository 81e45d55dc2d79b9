#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgtail/capture.hpp"
#include "pgtail/config.hpp"
#include "pgtail/train.hpp"

namespace pgtail {

inline void write_text_file(const std::string& path, const std::string& content) {
    // Write-then-rename so readers never observe a half-written file.
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open for writing: " + tmp);
        f << content;
        if (!f.good()) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// One fact per line. Fixed key order; everything a downstream aggregation
// needs to group or join on is embedded in each record.
inline std::string jsonl_record(const HarnessConfig& cfg, int iteration, int step,
                                const std::string& quantity, const std::string& estimator,
                                double value, const std::string& stage = "",
                                const std::string& variant = "", int sample_count = -1,
                                bool saturated = false) {
    nlohmann::ordered_json j;
    j["run_id"] = run_id(cfg);
    j["config_hash"] = config_hash_hex(cfg);
    j["seed"] = cfg.seed;
    j["env"] = env_name(cfg.env);
    j["algorithm"] = algorithm_name(cfg.algorithm);
    j["iteration"] = iteration;
    j["step"] = step;
    j["quantity"] = quantity;
    j["estimator"] = estimator;
    if (std::isfinite(value)) {
        j["value"] = value;
    } else {
        j["value"] = 0.0;
        saturated = true;
    }
    if (!stage.empty()) j["stage"] = stage;
    if (!variant.empty()) j["variant"] = variant;
    if (sample_count >= 0) j["sample_count"] = sample_count;
    if (saturated) j["saturated"] = true;
    return j.dump();
}

inline void append_iteration_records(const HarnessConfig& cfg, const IterationReport& r,
                                     std::vector<std::string>& lines) {
    auto raw = [&](const std::string& q, double v) {
        lines.push_back(jsonl_record(cfg, r.iteration, -1, q, "raw", v));
    };
    raw("mean_return", r.mean_return);
    raw("episodes", static_cast<double>(r.episodes));
    raw("mean_kl", r.mean_kl);
    raw("actor_loss", r.actor_loss);
    raw("value_loss", r.value_loss);
    raw("combined_loss", r.combined_loss);
    raw("ratio_min", r.ratio_min);
    raw("ratio_max", r.ratio_max);
    raw("ratio_mean", r.ratio_mean);
    raw("grad_norm_mean", r.grad_norm_mean);
    raw("running_mean_return", r.running_mean_return);
    if (r.adv_kurtosis_valid) {
        lines.push_back(
            jsonl_record(cfg, r.iteration, -1, "advantage_batch", "kurtosis", r.adv_kurtosis));
        lines.push_back(jsonl_record(cfg, r.iteration, -1, "advantage_batch_postclip", "kurtosis",
                                     r.adv_kurtosis_post));
    }
}

inline void append_tail_report_record(const HarnessConfig& cfg, const TailReport& t,
                                      std::vector<std::string>& lines) {
    lines.push_back(jsonl_record(cfg, t.iteration, t.step, t.quantity, t.estimator, t.value,
                                 stage_name(t.stage), t.variant, t.sample_count, t.saturated));
}

inline void append_run_summary_records(const HarnessConfig& cfg, const RunRecord& rec,
                                       std::vector<std::string>& lines) {
    lines.push_back(jsonl_record(cfg, -1, -1, "final_return", "raw", rec.final_return));
    lines.push_back(
        jsonl_record(cfg, -1, -1, "status", "raw", rec.diverged ? 1.0 : 0.0));
    lines.push_back(jsonl_record(cfg, -1, -1, "half_max_iteration", "raw",
                                 static_cast<double>(rec.half_iteration)));
    lines.push_back(
        jsonl_record(cfg, -1, -1, "max_iteration", "raw", static_cast<double>(rec.max_iteration)));
}

inline std::string run_jsonl(const RunRecord& rec) {
    std::vector<std::string> lines;
    for (const IterationReport& r : rec.iterations) append_iteration_records(rec.config, r, lines);
    for (const TailReport& t : rec.capture.reports)
        append_tail_report_record(rec.config, t, lines);
    append_run_summary_records(rec.config, rec, lines);
    std::string out;
    for (const std::string& l : lines) {
        out += l;
        out += "\n";
    }
    return out;
}

// Raw per-sample capture rows, one line per sample per captured step.
inline std::string sample_matrices_csv(const std::vector<GradSampleMatrix>& ms) {
    std::ostringstream out;
    out << "iteration,step,stage,variant,sample,actor_grad_norm,critic_grad_norm,advantage,ratio,"
           "actor_norm_over_adv,actor_norm_over_ratio,return,value_estimate\n";
    char buf[512];
    for (const GradSampleMatrix& m : ms)
        for (std::size_t i = 0; i < m.rows.size(); ++i) {
            const GradSampleRow& r = m.rows[i];
            std::snprintf(buf, sizeof(buf),
                          "%d,%d,%s,%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          m.iteration, m.step, stage_name(m.stage),
                          m.variant.empty() ? "run_objective" : m.variant.c_str(), i,
                          r.actor_norm, r.critic_norm, r.adv, r.rho, r.norm_over_adv,
                          r.norm_over_rho, r.ret, r.value);
            out << buf;
        }
    return out.str();
}

}  // namespace pgtail
