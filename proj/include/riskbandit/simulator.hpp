#pragma once

// Episode loop, pseudo-regret accounting, seeded Monte-Carlo aggregation and
// comparison of empirical pull counts with the closed-form bounds.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "riskbandit/instances.hpp"
#include "riskbandit/policies.hpp"

namespace riskbandit {

// Sorted, deduplicated {ceil(T / 2^j)} including T.
std::vector<std::size_t> checkpoint_schedule(std::size_t horizon);

struct RunRecord {
    std::vector<std::size_t> checkpoints;
    std::vector<std::vector<std::size_t>> pulls_at;  // [checkpoint][arm]
    std::vector<std::size_t> pull_counts;            // N_k(T)
    // Empty when not applicable: sub/inf on feasible instances, risk on infeasible ones.
    std::vector<double> regret_sub;
    std::vector<double> regret_inf;
    std::vector<double> regret_risk;
    bool flag = false;
    std::uint64_t seed = 0;
    double elapsed_seconds = 0.0;
};

// Called after every observe with the 1-based round just completed.
using RoundHook = std::function<void(const Policy&, std::size_t)>;

RunRecord run_episode(const InstanceSpec& spec, const InstanceOracle& oracle, const PolicySpec& policy,
                      std::size_t horizon, std::uint64_t seed, const RoundHook& hook = {});
RunRecord run_episode(const InstanceSpec& spec, const PolicySpec& policy, std::size_t horizon,
                      std::uint64_t seed);

struct SeriesStats {
    std::vector<double> mean;
    std::vector<double> stderr_;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

// Ordinary least squares y ~ a + b x.
SlopeFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct AggregateReport {
    std::string fingerprint;
    std::string policy;
    std::size_t horizon = 0;
    std::size_t reps = 0;
    std::uint64_t base_seed = 0;
    bool instance_feasible = false;
    std::vector<std::size_t> checkpoints;
    std::vector<std::vector<double>> pulls_mean;  // [checkpoint][arm]
    std::vector<std::vector<double>> pulls_se;
    std::optional<SeriesStats> regret_sub;
    std::optional<SeriesStats> regret_inf;
    std::optional<SeriesStats> regret_risk;
    std::size_t flag_errors = 0;
    double flag_error_rate = 0.0;
    // Total regret (sub + inf, or risk) against log t over the last half of checkpoints.
    SlopeFit slope_fit;
    double elapsed_seconds = 0.0;  // summed over episodes

    const std::vector<double>& final_pulls_mean() const { return pulls_mean.back(); }
    const std::vector<double>& final_pulls_se() const { return pulls_se.back(); }
};

struct MonteCarloOptions {
    // 0: RISKBANDIT_THREADS if set, else hardware concurrency.
    std::size_t threads = 0;
};

std::size_t default_thread_count();

// Episode r uses seed derive_seed(base_seed, r). `runs`, when given, receives
// every RunRecord ordered by rep.
AggregateReport monte_carlo(const InstanceSpec& spec, const PolicySpec& policy, std::size_t horizon,
                            std::size_t reps, std::uint64_t base_seed,
                            const MonteCarloOptions& options = {},
                            std::vector<RunRecord>* runs = nullptr);

AggregateReport aggregate(const InstanceOracle& oracle, const std::string& policy, std::size_t horizon,
                          std::uint64_t base_seed, const std::vector<RunRecord>& runs);

enum class BoundFamily { SubGaussian, HeavyTail, Constrained };
BoundFamily bound_family_for(const PolicySpec& policy);

struct SlackRow {
    std::size_t arm = 0;
    ArmCategory category = ArmCategory::Optimal;
    double mean_pulls = 0.0;
    double stderr_pulls = 0.0;
    std::optional<double> rhs;  // nullopt: not applicable
    std::optional<double> slack;
    bool violated = false;  // mean exceeds rhs by more than 3 standard errors
};

std::vector<SlackRow> compare_to_bounds(const AggregateReport& report, const TheoremBounds& bounds,
                                        BoundFamily family);

struct TradeoffRow {
    std::size_t horizon = 0;
    double regret_mean = 0.0;  // sub + inf on the feasible instance
    double regret_se = 0.0;
    double flag_error_feasible = 0.0;
    double flag_error_infeasible = 0.0;
    std::size_t reps = 0;
};

struct TradeoffResult {
    std::vector<TradeoffRow> rows;
    SlopeFit regret_vs_log_t;
    // log-log slopes of (errors + 0.5) / (reps + 1) against T.
    SlopeFit flag_decay_feasible;
    SlopeFit flag_decay_infeasible;
};

TradeoffResult tradeoff_experiment(const InstanceSpec& feasible_spec, const InstanceSpec& infeasible_spec,
                                   const PolicySpec& policy, const std::vector<std::size_t>& horizons,
                                   std::size_t reps, std::uint64_t base_seed,
                                   const MonteCarloOptions& options = {});

}  // namespace riskbandit
