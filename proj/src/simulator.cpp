#include "riskbandit/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <variant>

#include "riskbandit/rng.hpp"

namespace riskbandit {

std::vector<std::size_t> checkpoint_schedule(std::size_t horizon) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < 64; ++j) {
        const std::size_t denom = std::size_t{1} << j;
        const std::size_t c = (horizon + denom - 1) / denom;
        if (c == 0) break;
        out.push_back(c);
        if (c == 1) break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

RunRecord run_episode(const InstanceSpec& spec, const InstanceOracle& oracle, const PolicySpec& policy_spec,
                      std::size_t horizon, std::uint64_t seed, const RoundHook& hook) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t K = spec.num_arms();
    if (horizon < K) throw std::invalid_argument("horizon must be at least the number of arms");
    if (oracle.num_arms != K) throw std::invalid_argument("oracle does not match the instance");

    auto policy = make_policy(policy_spec, spec, horizon);
    std::vector<Rng> streams;
    streams.reserve(K);
    for (std::size_t k = 0; k < K; ++k) streams.emplace_back(derive_seed(seed, k));
    std::vector<std::vector<ArmModel>> coords(K);
    for (std::size_t k = 0; k < K; ++k) coords[k] = spec.coordinates(k);

    RunRecord rec;
    rec.seed = seed;
    rec.checkpoints = checkpoint_schedule(horizon);
    std::vector<double> draw(spec.dimension());
    std::size_t next_cp = 0;
    for (std::size_t t = 1; t <= horizon; ++t) {
        const std::size_t arm = policy->select();
        for (std::size_t c = 0; c < draw.size(); ++c) draw[c] = sample(coords[arm][c], streams[arm]);
        policy->observe(arm, draw);
        if (hook) hook(*policy, t);
        if (next_cp < rec.checkpoints.size() && rec.checkpoints[next_cp] == t) {
            const auto p = policy->pulls();
            rec.pulls_at.emplace_back(p.begin(), p.end());
            ++next_cp;
        }
    }
    rec.pull_counts = rec.pulls_at.back();
    rec.flag = policy->feasibility_flag();

    auto weighted = [&](auto&& weight) {
        std::vector<double> out;
        for (const auto& counts : rec.pulls_at) {
            double r = 0.0;
            for (std::size_t k = 0; k < K; ++k) r += weight(k) * static_cast<double>(counts[k]);
            out.push_back(r);
        }
        return out;
    };
    if (oracle.is_feasible) {
        rec.regret_sub = weighted([&](std::size_t k) {
            return oracle.categories[k] == ArmCategory::FeasibleSuboptimal ? oracle.gap_mean[k] : 0.0;
        });
        rec.regret_inf = weighted([&](std::size_t k) { return oracle.gap_tau[k]; });
    } else {
        rec.regret_risk = weighted([&](std::size_t k) { return oracle.gap_risk[k]; });
    }
    rec.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

RunRecord run_episode(const InstanceSpec& spec, const PolicySpec& policy, std::size_t horizon,
                      std::uint64_t seed) {
    return run_episode(spec, classify(spec), policy, horizon, seed);
}

SlopeFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least squares needs >= 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    SlopeFit fit;
    fit.points = x.size();
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
    return fit;
}

namespace {

struct MeanSe {
    double mean;
    double se;
};

template <class Get>
MeanSe mean_se(std::size_t n, Get get) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += get(r);
    const double mean = sum / static_cast<double>(n);
    if (n < 2) return {mean, 0.0};
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double d = get(r) - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n))};
}

std::optional<SeriesStats> series(const std::vector<RunRecord>& runs,
                                  std::vector<double> RunRecord::*member) {
    if ((runs.front().*member).empty()) return std::nullopt;
    SeriesStats s;
    const std::size_t C = (runs.front().*member).size();
    for (std::size_t c = 0; c < C; ++c) {
        const auto ms = mean_se(runs.size(), [&](std::size_t r) { return (runs[r].*member)[c]; });
        s.mean.push_back(ms.mean);
        s.stderr_.push_back(ms.se);
    }
    return s;
}

}  // namespace

AggregateReport aggregate(const InstanceOracle& oracle, const std::string& policy, std::size_t horizon,
                          std::uint64_t base_seed, const std::vector<RunRecord>& runs) {
    if (runs.empty()) throw std::invalid_argument("aggregate needs at least one run");
    AggregateReport rep;
    rep.fingerprint = oracle.fingerprint;
    rep.policy = policy;
    rep.horizon = horizon;
    rep.reps = runs.size();
    rep.base_seed = base_seed;
    rep.instance_feasible = oracle.is_feasible;
    rep.checkpoints = runs.front().checkpoints;
    const std::size_t K = oracle.num_arms;
    for (std::size_t c = 0; c < rep.checkpoints.size(); ++c) {
        std::vector<double> m(K), s(K);
        for (std::size_t k = 0; k < K; ++k) {
            const auto ms = mean_se(runs.size(), [&](std::size_t r) {
                return static_cast<double>(runs[r].pulls_at[c][k]);
            });
            m[k] = ms.mean;
            s[k] = ms.se;
        }
        rep.pulls_mean.push_back(std::move(m));
        rep.pulls_se.push_back(std::move(s));
    }
    rep.regret_sub = series(runs, &RunRecord::regret_sub);
    rep.regret_inf = series(runs, &RunRecord::regret_inf);
    rep.regret_risk = series(runs, &RunRecord::regret_risk);
    for (const auto& r : runs) {
        if (r.flag != oracle.is_feasible) ++rep.flag_errors;
        rep.elapsed_seconds += r.elapsed_seconds;
    }
    rep.flag_error_rate = static_cast<double>(rep.flag_errors) / static_cast<double>(runs.size());

    std::vector<double> total(rep.checkpoints.size(), 0.0);
    for (const auto* s : {&rep.regret_sub, &rep.regret_inf, &rep.regret_risk}) {
        if (!*s) continue;
        for (std::size_t c = 0; c < total.size(); ++c) total[c] += (*s)->mean[c];
    }
    const std::size_t C = rep.checkpoints.size();
    if (C >= 4) {
        std::vector<double> x, y;
        for (std::size_t c = C / 2; c < C; ++c) {
            x.push_back(std::log(static_cast<double>(rep.checkpoints[c])));
            y.push_back(total[c]);
        }
        rep.slope_fit = least_squares(x, y);
    }
    return rep;
}

std::size_t default_thread_count() {
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RISKBANDIT_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return std::min<std::size_t>(v, 1024);
    }
    return hw;
}

AggregateReport monte_carlo(const InstanceSpec& spec, const PolicySpec& policy, std::size_t horizon,
                            std::size_t reps, std::uint64_t base_seed, const MonteCarloOptions& options,
                            std::vector<RunRecord>* runs_out) {
    if (reps == 0) throw std::invalid_argument("reps must be at least 1");
    const InstanceOracle oracle = classify(spec);
    // Surface configuration errors once, before spawning workers.
    make_policy(policy, spec, horizon);

    std::vector<RunRecord> runs(reps);
    const std::size_t threads =
        std::min(reps, options.threads > 0 ? options.threads : default_thread_count());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::string failure_context;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= reps) return;
            const std::uint64_t seed = derive_seed(base_seed, r);
            try {
                runs[r] = run_episode(spec, oracle, policy, horizon, seed);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                    std::ostringstream os;
                    os << "episode failed at rep " << r << " (seed " << seed << ")";
                    failure_context = os.str();
                }
                next.store(reps);
                return;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const std::exception& e) {
            throw std::runtime_error(failure_context + ": " + e.what());
        }
    }
    AggregateReport report = aggregate(oracle, policy_name(policy), horizon, base_seed, runs);
    if (runs_out) *runs_out = std::move(runs);
    return report;
}

BoundFamily bound_family_for(const PolicySpec& policy) {
    if (std::holds_alternative<RcLcbHtConfig>(policy)) return BoundFamily::HeavyTail;
    if (std::holds_alternative<ConLcbConfig>(policy)) return BoundFamily::Constrained;
    return BoundFamily::SubGaussian;
}

std::vector<SlackRow> compare_to_bounds(const AggregateReport& report, const TheoremBounds& bounds,
                                        BoundFamily family) {
    if (report.fingerprint != bounds.fingerprint) {
        throw std::invalid_argument("report and bounds describe different instances (fingerprint " +
                                    report.fingerprint + " vs " + bounds.fingerprint + ")");
    }
    if (report.horizon != bounds.horizon) {
        throw std::invalid_argument("report and bounds use different horizons");
    }
    std::vector<SlackRow> rows;
    const auto& mean = report.final_pulls_mean();
    const auto& se = report.final_pulls_se();
    for (std::size_t k = 0; k < bounds.arms.size(); ++k) {
        const ArmBounds& ab = bounds.arms[k];
        SlackRow row;
        row.arm = k;
        row.category = ab.category;
        row.mean_pulls = mean[k];
        row.stderr_pulls = se[k];
        switch (family) {
            case BoundFamily::SubGaussian: row.rhs = ab.rhs; break;
            case BoundFamily::HeavyTail: row.rhs = ab.rhs_ht; break;
            case BoundFamily::Constrained: row.rhs = ab.rhs_con; break;
        }
        if (row.rhs) {
            row.slack = *row.rhs - row.mean_pulls;
            row.violated = row.mean_pulls > *row.rhs + 3.0 * row.stderr_pulls;
        }
        rows.push_back(row);
    }
    return rows;
}

TradeoffResult tradeoff_experiment(const InstanceSpec& feasible_spec, const InstanceSpec& infeasible_spec,
                                   const PolicySpec& policy, const std::vector<std::size_t>& horizons,
                                   std::size_t reps, std::uint64_t base_seed,
                                   const MonteCarloOptions& options) {
    if (reps == 0) throw std::invalid_argument("reps must be at least 1");
    if (horizons.size() < 2) throw std::invalid_argument("tradeoff needs at least two horizons");
    if (feasible_spec.num_arms() != infeasible_spec.num_arms() ||
        feasible_spec.level.alpha() != infeasible_spec.level.alpha()) {
        throw std::invalid_argument("tradeoff instances must share arm count and risk level");
    }
    if (!classify(feasible_spec).is_feasible) throw std::invalid_argument("first tradeoff instance must be feasible");
    if (classify(infeasible_spec).is_feasible) throw std::invalid_argument("second tradeoff instance must be infeasible");

    TradeoffResult out;
    std::vector<double> log_t, regret, log_err_f, log_err_i;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        const std::size_t T = horizons[h];
        std::vector<RunRecord> feasible_runs;
        const auto f = monte_carlo(feasible_spec, policy, T, reps, derive_seed(base_seed, 2 * h), options,
                                   &feasible_runs);
        const auto i = monte_carlo(infeasible_spec, policy, T, reps, derive_seed(base_seed, 2 * h + 1), options);
        TradeoffRow row;
        row.horizon = T;
        row.reps = reps;
        const auto total = mean_se(reps, [&](std::size_t r) {
            return feasible_runs[r].regret_sub.back() + feasible_runs[r].regret_inf.back();
        });
        row.regret_mean = total.mean;
        row.regret_se = total.se;
        row.flag_error_feasible = f.flag_error_rate;
        row.flag_error_infeasible = i.flag_error_rate;
        out.rows.push_back(row);

        const double smooth = static_cast<double>(reps) + 1.0;
        log_t.push_back(std::log(static_cast<double>(T)));
        regret.push_back(row.regret_mean);
        log_err_f.push_back(std::log((static_cast<double>(f.flag_errors) + 0.5) / smooth));
        log_err_i.push_back(std::log((static_cast<double>(i.flag_errors) + 0.5) / smooth));
    }
    out.regret_vs_log_t = least_squares(log_t, regret);
    out.flag_decay_feasible = least_squares(log_t, log_err_f);
    out.flag_decay_infeasible = least_squares(log_t, log_err_i);
    return out;
}

}  // namespace riskbandit
