#pragma once

// Experiment configuration: strict-schema JSON parsing, validation with
// path-qualified errors, canonical serialization and the shipped presets.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskbandit/instances.hpp"
#include "riskbandit/policies.hpp"

namespace riskbandit {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

// Policy block as written in the file; unset fields take instance-derived defaults.
struct PolicyConfig {
    std::string name = "rc_lcb";
    std::optional<double> sigma;
    std::optional<double> d_big;
    std::optional<double> d_small;
    bool k_inflated = false;
    std::optional<double> p;        // rclcb_ht
    std::optional<double> b_bound;  // rclcb_ht
};

struct OutputConfig {
    std::string dir = "results";
    bool csv = true;
    bool summary = true;
};

struct AnalysisConfig {
    bool bounds = true;
    bool lower_bounds = true;
    // Tradeoff mode: the main instance is the feasible one.
    std::optional<InstanceSpec> tradeoff_infeasible;
};

struct ExperimentConfig {
    std::string name;
    InstanceSpec instance;
    PolicyConfig policy;
    std::vector<std::size_t> horizons;
    std::size_t reps = 1;
    std::uint64_t base_seed = 0;
    OutputConfig outputs;
    AnalysisConfig analysis;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config(const nlohmann::json& document);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json instance_to_json(const InstanceSpec& spec);

// Concrete policy parameters for an instance.
PolicySpec resolve_policy(const PolicyConfig& policy, const InstanceSpec& instance);

// Re-runs the cross-field checks (after command-line overrides).
void validate_config(const ExperimentConfig& config);

std::vector<std::string> preset_names();
// Throws std::invalid_argument for unknown names.
std::string preset_text(const std::string& name);

}  // namespace riskbandit
