#include <map>
#include <stdexcept>

#include "riskbandit/config.hpp"

namespace riskbandit {

namespace {

// Three unit-variance Gaussian arms; CVaR_0.95 = mean + 2.0627.
constexpr const char* kThreeArms = R"([
      {"kind": "gaussian", "mu": 0.1, "sigma": 1.0, "label": "a"},
      {"kind": "gaussian", "mu": 0.0, "sigma": 1.0, "label": "b"},
      {"kind": "gaussian", "mu": 0.5, "sigma": 1.0, "label": "c"}
    ])";

std::string three_arm_instance(const char* tau) {
    return std::string(R"({"alpha": 0.95, "tau": )") + tau + R"(, "arms": )" + kThreeArms + "}";
}

const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> table = {
        {"feasible3",
         R"({"name": "feasible3", "instance": )" + three_arm_instance("2.3") + R"(,
  "policy": {"name": "rc_lcb"},
  "horizon": [2500, 5000, 10000, 20000], "reps": 200, "base_seed": 1})"},
        {"infeasible3",
         R"({"name": "infeasible3", "instance": )" + three_arm_instance("1.0") + R"(,
  "policy": {"name": "rc_lcb"},
  "horizon": 20000, "reps": 200, "base_seed": 2})"},
        {"deceiver",
         R"({"name": "deceiver",
  "instance": {"alpha": 0.95, "tau": 2.5, "arms": [
      {"kind": "gaussian", "mu": -0.5, "sigma": 2.0, "label": "deceiver"},
      {"kind": "gaussian", "mu": 0.0, "sigma": 1.0, "label": "safe"}]},
  "policy": {"name": "rc_lcb"},
  "horizon": 20000, "reps": 200, "base_seed": 3})"},
        {"heavy_tail",
         R"({"name": "heavy_tail",
  "instance": {"alpha": 0.95, "tau": 3.8, "arms": [
      {"kind": "shifted_pareto", "shape": 3.0, "scale": 1.0, "shift": 0.0, "label": "best"},
      {"kind": "shifted_pareto", "shape": 3.0, "scale": 1.0, "shift": 0.5, "label": "costly"},
      {"kind": "shifted_pareto", "shape": 3.0, "scale": 1.0, "shift": 1.0, "label": "risky"}]},
  "policy": {"name": "rclcb_ht", "p": 1.5},
  "horizon": [5000, 10000, 20000], "reps": 200, "base_seed": 4})"},
        {"con_lcb2",
         R"({"name": "con_lcb2",
  "instance": {"alpha": 0.95, "arms": [
      {"kind": "gaussian", "mu": 0.0, "sigma": 1.0, "label": "optimal"},
      {"kind": "gaussian", "mu": 0.5, "sigma": 1.0, "label": "costly"},
      {"kind": "gaussian", "mu": -0.5, "sigma": 2.0, "label": "deceiver"},
      {"kind": "gaussian", "mu": 1.0, "sigma": 1.0, "label": "doubly_infeasible"}],
    "objective": {"attribute": {"kind": "mean"}},
    "constraints": [
      {"attribute": {"kind": "cvar", "alpha": 0.95}, "threshold": 2.7},
      {"attribute": {"kind": "cvar", "alpha": 0.99}, "threshold": 3.3}]},
  "policy": {"name": "con_lcb"},
  "horizon": 20000, "reps": 200, "base_seed": 5})"},
        {"tradeoff",
         R"({"name": "tradeoff", "instance": )" + three_arm_instance("2.3") + R"(,
  "policy": {"name": "rc_lcb"},
  "horizon": [1000, 4000, 16000], "reps": 200, "base_seed": 6,
  "analysis": {"tradeoff": {"infeasible_instance": )" + three_arm_instance("1.0") + "}}}"},
    };
    return table;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, text] : presets()) out.push_back(name);
    return out;
}

std::string preset_text(const std::string& name) {
    const auto it = presets().find(name);
    if (it == presets().end()) {
        std::string known;
        for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw std::invalid_argument("unknown preset '" + name + "' (" + known + ")");
    }
    return it->second;
}

}  // namespace riskbandit
