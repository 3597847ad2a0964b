#include "riskbandit/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace riskbandit {

using nlohmann::json;

namespace {

json nullable(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fit_json(const SlopeFit& f) {
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"points", f.points}};
}

json series_json(const std::optional<SeriesStats>& s) {
    if (!s) return nullptr;
    return {{"mean", s->mean.back()}, {"se", s->stderr_.back()}};
}

std::string csv_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

TheoremBounds bounds_for(const InstanceOracle& oracle, const InstanceSpec& instance, const PolicySpec& policy,
                         std::size_t horizon) {
    const RiskLevel& level = instance.level;
    if (const auto* c = std::get_if<RcLcbConfig>(&policy)) {
        return theorem_bounds(oracle, c->sg, std::nullopt, level, horizon);
    }
    if (const auto* c = std::get_if<RcLcbHtConfig>(&policy)) {
        return theorem_bounds(oracle, SubGaussianParams{}, c->moments, level, horizon);
    }
    if (const auto* c = std::get_if<ConLcbConfig>(&policy)) {
        auto p = make_policy(*c, instance, horizon);
        const auto& con = dynamic_cast<const ConLcb&>(*p);
        const std::vector<double> rates(con.rates().begin(), con.rates().end());
        const SubGaussianParams sg = c->sg ? *c->sg : SubGaussianParams::calibrated(c->sigma, level);
        return theorem_bounds(oracle, sg, std::nullopt, level, horizon, rates);
    }
    if (const auto* c = std::get_if<BaselineLcbConfig>(&policy)) {
        const SubGaussianParams sg =
            c->flag_constraint ? c->flag_constraint->sg : SubGaussianParams::calibrated(c->sigma, level);
        return theorem_bounds(oracle, sg, std::nullopt, level, horizon);
    }
    const auto& c = std::get<BaselineCvarLcbConfig>(policy);
    return theorem_bounds(oracle, c.sg, std::nullopt, level, horizon);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const MonteCarloOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    validate_config(config);
    ExperimentResult res;
    res.config = config;
    res.oracle = classify(config.instance);
    res.policy = resolve_policy(config.policy, config.instance);
    if (config.analysis.lower_bounds) res.etas = instance_eta(config.instance, res.oracle);

    for (std::size_t T : config.horizons) {
        HorizonResult h;
        h.horizon = T;
        h.report = monte_carlo(config.instance, res.policy, T, config.reps, config.base_seed, options);
        if (config.analysis.bounds) {
            h.bounds = bounds_for(res.oracle, config.instance, res.policy, T);
            h.slack = compare_to_bounds(h.report, *h.bounds, bound_family_for(res.policy));
        }
        res.horizons.push_back(std::move(h));
    }
    if (config.analysis.tradeoff_infeasible) {
        res.tradeoff = tradeoff_experiment(config.instance, *config.analysis.tradeoff_infeasible, res.policy,
                                           config.horizons, config.reps, config.base_seed, options);
    }
    res.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

std::string trajectory_csv(const AggregateReport& r) {
    std::ostringstream os;
    const std::size_t K = r.pulls_mean.empty() ? 0 : r.pulls_mean.front().size();
    os << "t";
    for (std::size_t k = 0; k < K; ++k) os << ",mean_pulls_" << k;
    for (std::size_t k = 0; k < K; ++k) os << ",se_pulls_" << k;
    os << ",regret_sub_mean,regret_sub_se,regret_inf_mean,regret_inf_se,regret_risk_mean,regret_risk_se"
          ",flag_error_rate\n";
    for (std::size_t c = 0; c < r.checkpoints.size(); ++c) {
        os << r.checkpoints[c];
        for (std::size_t k = 0; k < K; ++k) os << "," << format_double(r.pulls_mean[c][k]);
        for (std::size_t k = 0; k < K; ++k) os << "," << format_double(r.pulls_se[c][k]);
        for (const auto* s : {&r.regret_sub, &r.regret_inf, &r.regret_risk}) {
            if (*s) {
                os << "," << format_double((*s)->mean[c]) << "," << format_double((*s)->stderr_[c]);
            } else {
                os << ",,";
            }
        }
        os << ",";
        if (c + 1 == r.checkpoints.size() && r.checkpoints[c] == r.horizon) os << format_double(r.flag_error_rate);
        os << "\n";
    }
    return os.str();
}

std::string bounds_csv(const HorizonResult& h, const std::optional<std::vector<EtaResult>>& etas) {
    std::ostringstream os;
    os << "arm,category,mean_pulls,se_pulls,rhs,slack,violated,eta,lower_bound\n";
    for (const auto& row : h.slack) {
        os << row.arm << "," << to_string(row.category) << "," << format_double(row.mean_pulls) << ","
           << format_double(row.stderr_pulls) << "," << csv_cell(row.rhs) << "," << csv_cell(row.slack) << ","
           << (row.violated ? "true" : "false") << ",";
        if (etas) {
            const EtaResult& e = (*etas)[row.arm];
            if (std::isfinite(e.eta)) os << format_double(e.eta);
            os << "," << format_double(theorem4_lower_bound(e, h.horizon));
        } else {
            os << ",";
        }
        os << "\n";
    }
    return os.str();
}

std::string tradeoff_csv(const TradeoffResult& t) {
    std::ostringstream os;
    os << "horizon,reps,regret_mean,regret_se,flag_error_feasible,flag_error_infeasible\n";
    for (const auto& r : t.rows) {
        os << r.horizon << "," << r.reps << "," << format_double(r.regret_mean) << "," << format_double(r.regret_se)
           << "," << format_double(r.flag_error_feasible) << "," << format_double(r.flag_error_infeasible) << "\n";
    }
    return os.str();
}

json policy_to_json(const PolicySpec& policy) {
    json j{{"name", policy_name(policy)}};
    auto sg_json = [](const SubGaussianParams& sg) {
        return json{{"sigma", sg.sigma}, {"d_big", sg.d_big}, {"d_small", sg.d_small}};
    };
    if (const auto* c = std::get_if<RcLcbConfig>(&policy)) {
        j["subgaussian"] = sg_json(c->sg);
        j["tau"] = c->tau;
        j["k_inflated"] = c->k_inflated;
    } else if (const auto* c = std::get_if<RcLcbHtConfig>(&policy)) {
        j["p"] = c->moments.p;
        j["b_bound"] = c->moments.b_bound;
        j["tau"] = c->tau;
    } else if (const auto* c = std::get_if<ConLcbConfig>(&policy)) {
        j["sigma"] = c->sigma;
        if (c->sg) j["subgaussian"] = sg_json(*c->sg);
    } else if (const auto* c = std::get_if<BaselineLcbConfig>(&policy)) {
        j["sigma"] = c->sigma;
    } else if (const auto* c = std::get_if<BaselineCvarLcbConfig>(&policy)) {
        j["subgaussian"] = sg_json(c->sg);
    }
    return j;
}

json summary_json(const ExperimentResult& res) {
    const InstanceOracle& o = res.oracle;
    json oracle;
    oracle["feasible"] = o.is_feasible;
    oracle["single_constraint"] = o.single_constraint;
    oracle["feasible_set"] = o.feasible_set;
    oracle["deceiver_set"] = o.deceiver_set;
    oracle["optimal_set"] = o.optimal_set;
    oracle["mu_star"] = o.is_feasible ? json(o.mu_star) : json(nullptr);
    oracle["cvar_star"] = o.is_feasible ? json(nullptr) : json(o.cvar_star);
    oracle["relaxed_constraints"] = o.relaxed;
    oracle["thresholds"] = o.thresholds;
    oracle["arms"] = json::array();
    for (std::size_t k = 0; k < o.num_arms; ++k) {
        json a;
        a["arm"] = k;
        a["category"] = to_string(o.categories[k]);
        a["objective"] = o.attributes[0][k];
        json attrs = json::array();
        for (std::size_t i = 1; i < o.attributes.size(); ++i) attrs.push_back(o.attributes[i][k]);
        a["constraint_values"] = attrs;
        a["gap_mean"] = o.gap_mean[k];
        a["gap_tau"] = o.gap_tau[k];
        a["gap_risk"] = o.gap_risk[k];
        oracle["arms"].push_back(a);
    }

    json lower = nullptr;
    if (res.etas) {
        lower = json::array();
        for (std::size_t k = 0; k < res.etas->size(); ++k) {
            const auto& e = (*res.etas)[k];
            lower.push_back({{"arm", k},
                             {"eta", finite_or_null(e.eta)},
                             {"coefficient", nullable(e.lower_bound_coefficient())},
                             {"coefficient_infinite", e.coefficient_infinite()}});
        }
    }

    json results = json::array();
    for (const auto& h : res.horizons) {
        const AggregateReport& r = h.report;
        json j;
        j["horizon"] = h.horizon;
        j["reps"] = r.reps;
        j["flag_errors"] = r.flag_errors;
        j["flag_error_rate"] = r.flag_error_rate;
        j["flag_error_bound"] = h.bounds ? json(h.bounds->flag_error_bound) : json(nullptr);
        j["t_star"] = h.bounds ? nullable(h.bounds->t_star) : json(nullptr);
        j["t_star_ht"] = h.bounds ? nullable(h.bounds->t_star_ht) : json(nullptr);
        j["pulls_mean"] = r.final_pulls_mean();
        j["pulls_se"] = r.final_pulls_se();
        j["regret"] = {{"sub", series_json(r.regret_sub)},
                       {"inf", series_json(r.regret_inf)},
                       {"risk", series_json(r.regret_risk)}};
        j["slope_fit"] = fit_json(r.slope_fit);
        json arms = json::array();
        for (const auto& row : h.slack) {
            json a{{"arm", row.arm},
                   {"category", to_string(row.category)},
                   {"mean_pulls", row.mean_pulls},
                   {"se_pulls", row.stderr_pulls},
                   {"rhs", nullable(row.rhs)},
                   {"slack", nullable(row.slack)},
                   {"violated", row.violated}};
            a["lower_bound"] = res.etas ? json(theorem4_lower_bound((*res.etas)[row.arm], h.horizon)) : json(nullptr);
            arms.push_back(a);
        }
        j["arms"] = arms;
        results.push_back(j);
    }

    json tradeoff = nullptr;
    if (res.tradeoff) {
        tradeoff = json::object();
        tradeoff["rows"] = json::array();
        for (const auto& row : res.tradeoff->rows) {
            tradeoff["rows"].push_back({{"horizon", row.horizon},
                                        {"reps", row.reps},
                                        {"regret_mean", row.regret_mean},
                                        {"regret_se", row.regret_se},
                                        {"flag_error_feasible", row.flag_error_feasible},
                                        {"flag_error_infeasible", row.flag_error_infeasible}});
        }
        tradeoff["regret_vs_log_t"] = fit_json(res.tradeoff->regret_vs_log_t);
        tradeoff["flag_decay_feasible"] = fit_json(res.tradeoff->flag_decay_feasible);
        tradeoff["flag_decay_infeasible"] = fit_json(res.tradeoff->flag_decay_infeasible);
    }

    json doc;
    doc["tool"] = "riskbandit";
    doc["version"] = kToolVersion;
    doc["seed"] = res.config.base_seed;
    doc["fingerprint"] = o.fingerprint;
    doc["config"] = to_json(res.config);
    doc["policy"] = policy_to_json(res.policy);
    doc["oracle"] = oracle;
    doc["lower_bounds"] = lower;
    doc["results"] = results;
    doc["tradeoff"] = tradeoff;
    return doc;
}

json diagnostics_json(const ExperimentResult& res) {
    json runs = json::array();
    for (const auto& h : res.horizons) {
        runs.push_back({{"horizon", h.horizon}, {"episode_seconds_total", h.report.elapsed_seconds}});
    }
    return {{"tool", "riskbandit"},
            {"version", kToolVersion},
            {"elapsed_seconds", res.elapsed_seconds},
            {"threads", default_thread_count()},
            {"horizons", runs}};
}

std::string console_summary(const ExperimentResult& res) {
    std::ostringstream os;
    const auto& o = res.oracle;
    os << "instance " << o.fingerprint << " (" << (o.is_feasible ? "feasible" : "infeasible") << "), policy "
       << policy_name(res.policy) << ", reps " << res.config.reps << "\n";
    for (const auto& h : res.horizons) {
        const auto& r = h.report;
        char line[256];
        os << "T = " << h.horizon << "\n";
        std::snprintf(line, sizeof line, "  %-4s %-22s %12s %10s %12s %s\n", "arm", "category", "mean_pulls", "se",
                      "bound", "");
        os << line;
        for (std::size_t k = 0; k < o.num_arms; ++k) {
            std::string bound = "n/a";
            std::string mark;
            for (const auto& row : h.slack) {
                if (row.arm == k && row.rhs) {
                    bound = format_double(std::round(*row.rhs * 10) / 10);
                    if (row.violated) mark = "VIOLATED";
                }
            }
            std::snprintf(line, sizeof line, "  %-4zu %-22s %12.1f %10.2f %12s %s\n", k, to_string(o.categories[k]),
                          r.final_pulls_mean()[k], r.final_pulls_se()[k], bound.c_str(), mark.c_str());
            os << line;
        }
        double regret = 0.0;
        for (const auto* s : {&r.regret_sub, &r.regret_inf, &r.regret_risk}) {
            if (*s) regret += (*s)->mean.back();
        }
        std::snprintf(line, sizeof line, "  flag error rate %.4f (%zu/%zu), regret at T %.2f\n", r.flag_error_rate,
                      r.flag_errors, r.reps, regret);
        os << line;
    }
    if (res.tradeoff) {
        os << "tradeoff: regret ~ log T slope " << res.tradeoff->regret_vs_log_t.slope << " (R^2 "
           << res.tradeoff->regret_vs_log_t.r2 << "), infeasible flag-error log-log slope "
           << res.tradeoff->flag_decay_infeasible.slope << "\n";
    }
    return os.str();
}

std::vector<std::pair<std::string, std::string>> render_outputs(const ExperimentResult& res) {
    std::vector<std::pair<std::string, std::string>> files;
    if (res.config.outputs.csv) {
        for (const auto& h : res.horizons) {
            const std::string suffix = "_T" + std::to_string(h.horizon) + ".csv";
            files.emplace_back("trajectory" + suffix, trajectory_csv(h.report));
            if (!h.slack.empty()) files.emplace_back("bounds" + suffix, bounds_csv(h, res.etas));
        }
        if (res.tradeoff) files.emplace_back("tradeoff.csv", tradeoff_csv(*res.tradeoff));
    }
    if (res.config.outputs.summary) files.emplace_back("summary.json", summary_json(res).dump(2) + "\n");
    files.emplace_back("diagnostics.json", diagnostics_json(res).dump(2) + "\n");
    return files;
}

void write_files_atomically(const std::string& dir, const std::vector<std::pair<std::string, std::string>>& files) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir + "': " + (ec ? ec.message() : "not a directory"));
    }
    std::vector<fs::path> temps;
    auto cleanup = [&] {
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& [name, content] : files) {
        const fs::path tmp = fs::path(dir) / ("." + name + ".tmp");
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) {
            cleanup();
            throw IoError("cannot write '" + tmp.string() + "'");
        }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        fs::rename(temps[i], fs::path(dir) / files[i].first, ec);
        if (ec) {
            cleanup();
            throw IoError("cannot rename '" + temps[i].string() + "': " + ec.message());
        }
    }
}

}  // namespace riskbandit
