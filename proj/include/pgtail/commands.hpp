#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgtail/checkpoint.hpp"
#include "pgtail/config.hpp"
#include "pgtail/ratio_tail.hpp"
#include "pgtail/records.hpp"
#include "pgtail/report.hpp"
#include "pgtail/scheduler.hpp"
#include "pgtail/synth.hpp"
#include "pgtail/train.hpp"

namespace pgtail {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDiverged = 2;

namespace detail {

inline std::string iso_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::mutex& print_mutex() {
    static std::mutex m;
    return m;
}

inline void say(const std::string& s) {
    std::lock_guard<std::mutex> lock(print_mutex());
    std::fputs((s + "\n").c_str(), stdout);
    std::fflush(stdout);
}

}  // namespace detail

inline std::string detail_csv(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::vector<std::uint64_t> expand_seeds(std::uint64_t seed, const std::string& seeds_range) {
    if (seeds_range.empty()) return {seed};
    std::size_t dots = seeds_range.find("..");
    if (dots == std::string::npos)
        throw std::invalid_argument("--seeds expects A..B, got '" + seeds_range + "'");
    std::uint64_t a = std::stoull(seeds_range.substr(0, dots));
    std::uint64_t b = std::stoull(seeds_range.substr(dots + 2));
    if (b < a) throw std::invalid_argument("--seeds range is empty: " + seeds_range);
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
    return out;
}

// Timestamps and wall-clock facts live only in this sidecar, never in the
// JSONL stream, so repeated runs stay byte-identical.
inline std::string run_meta_json(const HarnessConfig& cfg, const std::string& started,
                                 const std::string& finished, double seconds, bool diverged,
                                 const std::string& note) {
    nlohmann::ordered_json j;
    j["run_id"] = run_id(cfg);
    j["config_hash"] = config_hash_hex(cfg);
    j["started"] = started;
    j["finished"] = finished;
    j["wall_seconds"] = seconds;
    j["status"] = diverged ? "diverged" : "completed";
    if (!note.empty()) j["divergence_note"] = note;
    j["resolved_config"] = serialize_config(cfg);
    return j.dump(2) + "\n";
}

// Trains one seed into its own directory; returns the finished record.
inline RunRecord train_one_run(const HarnessConfig& cfg, const std::string& run_dir,
                               const CapturePlan* plan = nullptr) {
    namespace fs = std::filesystem;
    fs::create_directories(run_dir);
    std::string started = detail::iso_now();
    auto t0 = std::chrono::steady_clock::now();
    auto on_iteration = [&](const RunState& rs, const IterationReport& rep) {
        if (cfg.checkpoint_every > 0 && (rep.iteration + 1) % cfg.checkpoint_every == 0) {
            char ckname[64];
            std::snprintf(ckname, sizeof(ckname), "checkpoint_%06d.txt", rep.iteration + 1);
            write_text_file(run_dir + "/" + ckname, save_checkpoint(rs));
        }
    };
    RunState final_state = make_run_state(cfg);
    RunRecord rec = run_training(cfg, plan, on_iteration, &final_state);
    auto t1 = std::chrono::steady_clock::now();
    write_text_file(run_dir + "/config.txt", serialize_config(cfg));
    write_text_file(run_dir + "/run.jsonl", run_jsonl(rec));
    write_text_file(run_dir + "/checkpoint_final.txt", save_checkpoint(final_state));
    if (!rec.capture.matrices.empty())
        write_text_file(run_dir + "/capture_samples.csv",
                        sample_matrices_csv(rec.capture.matrices));
    write_text_file(run_dir + "/meta.json",
                    run_meta_json(cfg, started, detail::iso_now(),
                                  std::chrono::duration<double>(t1 - t0).count(), rec.diverged,
                                  rec.divergence_note));
    return rec;
}

// Shared driver for `train` and `diagnose`: fan seeds out to the worker pool,
// then link every finished run into the output index in seed order.
inline int run_seed_set(const HarnessConfig& base, const std::vector<std::uint64_t>& seeds,
                        const std::string& out_dir, int workers, const CapturePlan* plan) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir + "/runs");
    std::vector<HarnessConfig> cfgs;
    for (std::uint64_t s : seeds) {
        HarnessConfig c = base;
        c.seed = s;
        c.validate();
        cfgs.push_back(c);
    }
    std::vector<std::string> dirs(cfgs.size());
    std::vector<RunRecord> recs(cfgs.size());
    run_jobs(cfgs.size(), workers, [&](std::size_t i) {
        dirs[i] = out_dir + "/runs/" + run_id(cfgs[i]);
        recs[i] = train_one_run(cfgs[i], dirs[i], plan);
        char line[256];
        std::snprintf(line, sizeof(line), "%s: final_return %.2f%s", run_id(cfgs[i]).c_str(),
                      recs[i].final_return, recs[i].diverged ? " [diverged]" : "");
        detail::say(line);
    });
    nlohmann::ordered_json index = nlohmann::ordered_json::array();
    bool any_diverged = false;
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        nlohmann::ordered_json e;
        e["run_id"] = run_id(cfgs[i]);
        e["dir"] = dirs[i];
        e["status"] = recs[i].diverged ? "diverged" : "completed";
        e["final_return"] = recs[i].final_return;
        index.push_back(e);
        any_diverged = any_diverged || recs[i].diverged;
    }
    write_text_file(out_dir + "/index.json", index.dump(2) + "\n");
    return any_diverged ? kExitDiverged : kExitOk;
}

inline int cmd_train(const HarnessConfig& base, const std::vector<std::uint64_t>& seeds,
                     const std::string& out_dir, int workers) {
    return run_seed_set(base, seeds, out_dir, workers, nullptr);
}

inline int cmd_diagnose(const HarnessConfig& base, const std::vector<std::uint64_t>& seeds,
                        const std::string& out_dir, int workers, const std::string& mode,
                        const std::string& stages, bool heuristics, bool dump_samples,
                        int ad_dirs) {
    CapturePlan plan;
    if (mode == "on_policy") {
        plan.on_policy = true;
    } else if (mode == "off_policy") {
        plan.off_policy = true;
        plan.stop_after_capture = true;
        plan.capture_init = plan.capture_half = plan.capture_max = false;
        std::stringstream ss(stages.empty() ? std::string("init,half_max,max") : stages);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item == "init") plan.capture_init = true;
            else if (item == "half_max" || item == "half") plan.capture_half = true;
            else if (item == "max") plan.capture_max = true;
            else throw std::invalid_argument("unknown stage '" + item + "'");
        }
    } else {
        throw std::invalid_argument("--mode must be on_policy or off_policy");
    }
    plan.heuristics = heuristics;
    plan.keep_samples = dump_samples;
    plan.ad_dirs = ad_dirs;
    return run_seed_set(base, seeds, out_dir, workers, &plan);
}

inline int cmd_synth_kurtosis(const std::vector<double>& shapes, std::size_t dim,
                              const std::vector<std::size_t>& sizes,
                              const std::vector<std::uint64_t>& seeds,
                              const std::string& out_path, int replicates = 1) {
    std::vector<KurtosisStudyRow> rows =
        synth_pareto_study(shapes, dim, sizes, seeds, true, replicates);
    std::string csv = "dist,shape,size,seed,kurtosis_fourth_root\n";
    char buf[160];
    for (const KurtosisStudyRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.10g,%zu,%llu,%.10g\n", r.dist.c_str(), r.shape,
                      r.size, static_cast<unsigned long long>(r.seed), r.kurt);
        csv += buf;
    }
    write_text_file(out_path, csv);
    detail::say("wrote " + out_path + " (" + std::to_string(rows.size()) + " rows)");
    return kExitOk;
}

inline int cmd_synth_ratio_tail(double sigma1, double sigma2, std::size_t n, std::uint64_t seed,
                                const std::string& out_path) {
    RatioTailSpec spec{sigma1, sigma2};
    RatioTailResult res = ratio_tail_demo(spec, n, seed);
    std::string csv =
        "sigma1,sigma2,n,bounded,max_ratio,bound,bound_violations,predicted_alpha,fitted_alpha\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%zu,%d,%.10g,%s,%d,%s,%s\n", sigma1, sigma2, n,
                  res.bounded ? 1 : 0, res.max_ratio,
                  res.bounded ? detail_csv(spec.bound()).c_str() : "",
                  res.bound_violations,
                  res.predicted_alpha ? detail_csv(*res.predicted_alpha).c_str() : "",
                  res.fitted_alpha ? detail_csv(*res.fitted_alpha).c_str() : "");
    csv += buf;
    write_text_file(out_path, csv);
    detail::say("wrote " + out_path);
    return kExitOk;
}

inline int cmd_synth_gmom(double shape, std::size_t n, int blocks, int trials, std::uint64_t seed,
                          const std::string& out_path) {
    GmomBenchResult res = gmom_bench(shape, n, blocks, trials, seed);
    std::string csv = "trial,gmom_abs_err,mean_abs_err,weiszfeld_monotone\n";
    char buf[160];
    for (const GmomBenchRow& r : res.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%d\n", r.trial, r.gmom_abs_err,
                      r.mean_abs_err, r.weiszfeld_monotone ? 1 : 0);
        csv += buf;
    }
    write_text_file(out_path, csv);
    std::snprintf(buf, sizeof(buf),
                  "blocks=%d trials=%d gmom_p95=%.6g mean_p95=%.6g gmom_wins=%d/%d monotone=%s",
                  res.blocks, trials, res.gmom_p95, res.mean_p95, res.gmom_wins, trials,
                  res.all_monotone ? "yes" : "NO");
    detail::say(buf);
    return kExitOk;
}

inline int cmd_report(const std::vector<std::string>& inputs, const std::string& out_dir,
                      bool force) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    for (const std::string& in : inputs) {
        fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<std::string> found;
            for (const auto& e : fs::recursive_directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".jsonl")
                    found.push_back(e.path().string());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (fs::is_regular_file(p)) {
            files.push_back(p.string());
        } else {
            throw std::runtime_error("report: no such input: " + in);
        }
    }
    if (files.empty()) throw std::runtime_error("report: no .jsonl inputs found");
    std::vector<ResultRecord> records;
    for (const std::string& f : files) {
        std::vector<ResultRecord> rs = parse_jsonl(read_text_file(f));
        records.insert(records.end(), rs.begin(), rs.end());
    }
    auto bundle = build_report(records, force);
    fs::create_directories(out_dir);
    for (const auto& [name, content] : bundle) write_text_file(out_dir + "/" + name, content);
    detail::say("report: " + std::to_string(records.size()) + " records from " +
                std::to_string(files.size()) + " files -> " + std::to_string(bundle.size()) +
                " artifacts in " + out_dir);
    return kExitOk;
}

}  // namespace pgtail
