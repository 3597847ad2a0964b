#pragma once

// Runs a parsed experiment and renders its artifacts (CSV, JSON summary,
// diagnostics, console table).

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskbandit/config.hpp"
#include "riskbandit/lower_bounds.hpp"
#include "riskbandit/simulator.hpp"

namespace riskbandit {

inline constexpr const char* kToolVersion = "1.0.0";

struct HorizonResult {
    std::size_t horizon = 0;
    AggregateReport report;
    std::optional<TheoremBounds> bounds;
    std::vector<SlackRow> slack;
};

struct ExperimentResult {
    ExperimentConfig config;
    InstanceOracle oracle;
    PolicySpec policy;
    std::optional<std::vector<EtaResult>> etas;
    std::vector<HorizonResult> horizons;
    std::optional<TradeoffResult> tradeoff;
    double elapsed_seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const MonteCarloOptions& options = {});

// Bounds matching the policy's estimator family.
TheoremBounds bounds_for(const InstanceOracle& oracle, const InstanceSpec& instance, const PolicySpec& policy,
                         std::size_t horizon);

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_double(double x);

std::string trajectory_csv(const AggregateReport& report);
std::string bounds_csv(const HorizonResult& result, const std::optional<std::vector<EtaResult>>& etas);
std::string tradeoff_csv(const TradeoffResult& result);
nlohmann::json policy_to_json(const PolicySpec& policy);
nlohmann::json summary_json(const ExperimentResult& result);
nlohmann::json diagnostics_json(const ExperimentResult& result);
std::string console_summary(const ExperimentResult& result);

// File name -> content for everything the experiment emits.
std::vector<std::pair<std::string, std::string>> render_outputs(const ExperimentResult& result);

// Writes every file to a temporary name in `dir`, then renames them into
// place. On failure, removes the temporaries and throws IoError.
void write_files_atomically(const std::string& dir,
                            const std::vector<std::pair<std::string, std::string>>& files);

}  // namespace riskbandit
