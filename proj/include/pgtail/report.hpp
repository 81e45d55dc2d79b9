#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgtail/svg.hpp"
#include "pgtail/train.hpp"
#include "pgtail/vecmath.hpp"

namespace pgtail {

// One parsed JSONL line from a run stream.
struct ResultRecord {
    std::string run_id;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string env;
    std::string algorithm;
    int iteration = -1;
    int step = -1;
    std::string quantity;
    std::string estimator;
    double value = 0.0;
    std::string stage;
    std::string variant;
    int sample_count = -1;
    bool saturated = false;
};

inline std::vector<ResultRecord> parse_jsonl(const std::string& text) {
    std::vector<ResultRecord> out;
    std::istringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("jsonl line " + std::to_string(lineno) + ": " + e.what());
        }
        ResultRecord r;
        r.run_id = j.at("run_id").get<std::string>();
        r.config_hash = j.at("config_hash").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.env = j.at("env").get<std::string>();
        r.algorithm = j.at("algorithm").get<std::string>();
        r.iteration = j.at("iteration").get<int>();
        r.step = j.at("step").get<int>();
        r.quantity = j.at("quantity").get<std::string>();
        r.estimator = j.at("estimator").get<std::string>();
        r.value = j.at("value").get<double>();
        if (j.contains("stage")) r.stage = j["stage"].get<std::string>();
        if (j.contains("variant")) r.variant = j["variant"].get<std::string>();
        if (j.contains("sample_count")) r.sample_count = j["sample_count"].get<int>();
        if (j.contains("saturated")) r.saturated = j["saturated"].get<bool>();
        out.push_back(std::move(r));
    }
    return out;
}

// Series identity for aggregation: one environment/algorithm pair, which must
// map to a single config hash unless the caller forces pooling.
inline std::string series_label(const ResultRecord& r) { return r.env + "/" + r.algorithm; }

inline void check_series_hashes(const std::vector<ResultRecord>& records, bool force) {
    if (force) return;
    std::map<std::string, std::set<std::string>> hashes;
    for (const ResultRecord& r : records) hashes[series_label(r)].insert(r.config_hash);
    for (const auto& [label, hs] : hashes)
        if (hs.size() > 1) {
            std::string msg = "report: series '" + label + "' mixes " +
                              std::to_string(hs.size()) +
                              " different config hashes (differently-configured runs);"
                              " rerun with --force to pool them anyway";
            throw std::runtime_error(msg);
        }
}

struct SeriesCurve {
    std::string label;
    std::vector<double> x;
    std::vector<double> mean_v;
    std::vector<double> lo;  // mean - std
    std::vector<double> hi;  // mean + std
    std::vector<int> n;
};

// Per-iteration mean and spread across runs for one scalar quantity.
inline std::vector<SeriesCurve> curves_by_iteration(const std::vector<ResultRecord>& records,
                                                    const std::string& quantity,
                                                    const std::string& estimator) {
    std::map<std::string, std::map<int, std::vector<double>>> grouped;
    for (const ResultRecord& r : records) {
        if (r.quantity != quantity || r.estimator != estimator || r.saturated) continue;
        if (r.iteration < 0) continue;
        grouped[series_label(r)][r.iteration].push_back(r.value);
    }
    std::vector<SeriesCurve> out;
    for (const auto& [label, by_iter] : grouped) {
        SeriesCurve c;
        c.label = label;
        for (const auto& [it, vals] : by_iter) {
            double m = mean(vals);
            double sd = vals.size() > 1 ? stddev_pop(vals) : 0.0;
            c.x.push_back(it);
            c.mean_v.push_back(m);
            c.lo.push_back(m - sd);
            c.hi.push_back(m + sd);
            c.n.push_back(static_cast<int>(vals.size()));
        }
        out.push_back(std::move(c));
    }
    return out;
}

// Median across runs of one captured quantity at each gradient step of an
// instrumented iteration (off-policy anatomy curves).
inline std::vector<SeriesCurve> curves_by_step(const std::vector<ResultRecord>& records,
                                               const std::string& quantity,
                                               const std::string& estimator,
                                               const std::string& stage) {
    std::map<std::string, std::map<int, std::vector<double>>> grouped;
    for (const ResultRecord& r : records) {
        if (r.quantity != quantity || r.estimator != estimator || r.saturated) continue;
        if (r.step < 0 || r.stage != stage) continue;
        std::string label = series_label(r);
        if (!r.variant.empty()) label += "/" + r.variant;
        grouped[label][r.step].push_back(r.value);
    }
    std::vector<SeriesCurve> out;
    for (const auto& [label, by_step] : grouped) {
        SeriesCurve c;
        c.label = label;
        for (const auto& [st, vals] : by_step) {
            std::vector<double> copy = vals;
            c.x.push_back(st);
            c.mean_v.push_back(median(copy));
            c.lo.push_back(c.mean_v.back());
            c.hi.push_back(c.mean_v.back());
            c.n.push_back(static_cast<int>(vals.size()));
        }
        out.push_back(std::move(c));
    }
    return out;
}

struct FinalReturnRow {
    std::string env;
    std::string algorithm;
    int runs = 0;
    double median_final = 0.0;
    double random_baseline = 0.0;
    double ppo_max = 0.0;
    bool normalized_valid = false;
    double normalized = 0.0;  // (median - random) / (ppo_max - random)
};

// Final returns per series, normalized against the best PPO run in the same
// inputs and a same-build untrained-agent baseline.
inline std::vector<FinalReturnRow> final_return_table(const std::vector<ResultRecord>& records) {
    std::map<std::pair<std::string, std::string>, std::vector<double>> finals;
    std::map<std::string, double> ppo_max;
    for (const ResultRecord& r : records) {
        if (r.quantity != "final_return" || r.estimator != "raw") continue;
        finals[{r.env, r.algorithm}].push_back(r.value);
        if (r.algorithm == "ppo") {
            auto it = ppo_max.find(r.env);
            if (it == ppo_max.end() || r.value > it->second) ppo_max[r.env] = r.value;
        }
    }
    std::map<std::string, double> random_baseline;
    for (const auto& [key, vals] : finals) {
        (void)vals;
        const std::string& env = key.first;
        if (!random_baseline.count(env))
            random_baseline[env] = random_agent_return(env_from(env), 0, 25);
    }
    std::vector<FinalReturnRow> rows;
    for (const auto& [key, vals] : finals) {
        FinalReturnRow row;
        row.env = key.first;
        row.algorithm = key.second;
        row.runs = static_cast<int>(vals.size());
        std::vector<double> copy = vals;
        row.median_final = median(copy);
        row.random_baseline = random_baseline[row.env];
        auto pm = ppo_max.find(row.env);
        if (pm != ppo_max.end() && pm->second != row.random_baseline) {
            row.ppo_max = pm->second;
            row.normalized =
                (row.median_final - row.random_baseline) / (row.ppo_max - row.random_baseline);
            row.normalized_valid = true;
        }
        rows.push_back(row);
    }
    return rows;
}

namespace detail {

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace detail

inline std::string curves_csv(const std::vector<SeriesCurve>& curves, const std::string& x_name,
                              const std::string& value_name) {
    std::string out = "series," + x_name + "," + value_name + ",spread_lo,spread_hi,n\n";
    for (const SeriesCurve& c : curves)
        for (std::size_t i = 0; i < c.x.size(); ++i)
            out += c.label + "," + detail::csv_num(c.x[i]) + "," + detail::csv_num(c.mean_v[i]) +
                   "," + detail::csv_num(c.lo[i]) + "," + detail::csv_num(c.hi[i]) + "," +
                   std::to_string(c.n[i]) + "\n";
    return out;
}

inline std::string final_returns_csv(const std::vector<FinalReturnRow>& rows) {
    std::string out = "env,algorithm,runs,median_final_return,random_baseline,ppo_max,normalized\n";
    for (const FinalReturnRow& r : rows) {
        out += r.env + "," + r.algorithm + "," + std::to_string(r.runs) + "," +
               detail::csv_num(r.median_final) + "," + detail::csv_num(r.random_baseline) + ",";
        out += r.normalized_valid ? detail::csv_num(r.ppo_max) : std::string("");
        out += ",";
        out += r.normalized_valid ? detail::csv_num(r.normalized) : std::string("");
        out += "\n";
    }
    return out;
}

inline std::vector<ChartSeries> to_chart_series(const std::vector<SeriesCurve>& curves,
                                                bool with_band) {
    std::vector<ChartSeries> out;
    for (const SeriesCurve& c : curves) {
        ChartSeries s;
        s.label = c.label;
        s.x = c.x;
        s.y = c.mean_v;
        bool banded = false;
        if (with_band)
            for (std::size_t i = 0; i < c.n.size(); ++i)
                if (c.n[i] > 1) banded = true;
        if (banded) {
            s.band_lo = c.lo;
            s.band_hi = c.hi;
        }
        out.push_back(std::move(s));
    }
    return out;
}

// The full artifact bundle for a set of run streams: file name -> content.
inline std::vector<std::pair<std::string, std::string>> build_report(
    const std::vector<ResultRecord>& records, bool force) {
    if (records.empty()) throw std::runtime_error("report: no input records");
    check_series_hashes(records, force);
    std::vector<std::pair<std::string, std::string>> files;

    auto add_curveset = [&files](const std::string& name, const std::vector<SeriesCurve>& cs,
                                 const std::string& x_name, const std::string& v_name,
                                 const std::string& title) {
        if (cs.empty()) return;
        files.emplace_back(name + ".csv", curves_csv(cs, x_name, v_name));
        ChartSpec spec;
        spec.title = title;
        spec.x_label = x_name;
        spec.y_label = v_name;
        files.emplace_back(name + ".svg", render_line_chart(spec, to_chart_series(cs, true)));
    };

    add_curveset("returns_by_iteration", curves_by_iteration(records, "mean_return", "raw"),
                 "iteration", "mean_return", "Mean episode return per iteration");
    add_curveset("kl_by_iteration", curves_by_iteration(records, "mean_kl", "raw"), "iteration",
                 "mean_kl", "Mean KL drift per iteration");
    add_curveset("advantage_kurtosis_by_iteration",
                 curves_by_iteration(records, "advantage_batch_postclip", "kurtosis"), "iteration",
                 "kurtosis_fourth_root", "Post-clip advantage kurtosis per iteration");

    // On-policy capture kurtosis vs iteration.
    {
        std::vector<ResultRecord> onp;
        for (const ResultRecord& r : records)
            if (r.stage == "on_policy") onp.push_back(r);
        add_curveset("actor_grad_kurtosis_by_iteration",
                     curves_by_iteration(onp, "actor_grad_norm", "kurtosis"), "iteration",
                     "kurtosis_fourth_root", "Actor gradient-norm kurtosis (on-policy steps)");
    }
    // Off-policy anatomy curves per stage.
    for (const char* stage : {"init", "half_max", "max"}) {
        std::vector<SeriesCurve> cs =
            curves_by_step(records, "actor_grad_norm", "kurtosis", stage);
        add_curveset(std::string("actor_grad_kurtosis_by_step_") + stage, cs, "step",
                     "kurtosis_fourth_root",
                     std::string("Actor gradient-norm kurtosis across one iteration (") + stage +
                         ")");
        std::vector<SeriesCurve> cr =
            curves_by_step(records, "actor_norm_over_ratio", "kurtosis", stage);
        add_curveset(std::string("actor_over_ratio_kurtosis_by_step_") + stage, cr, "step",
                     "kurtosis_fourth_root",
                     std::string("Actor-norm/ratio kurtosis across one iteration (") + stage +
                         ")");
    }

    std::vector<FinalReturnRow> finals = final_return_table(records);
    if (!finals.empty()) files.emplace_back("final_returns.csv", final_returns_csv(finals));
    return files;
}

}  // namespace pgtail
