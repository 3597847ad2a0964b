#pragma once

// Arm models with exact risk oracles, instance classification and the
// closed-form upper bounds on expected pulls.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "riskbandit/risk_core.hpp"
#include "riskbandit/rng.hpp"

namespace riskbandit {

struct ConstantArm {
    double value = 0.0;
};
struct GaussianArm {
    double mu = 0.0;
    double sigma = 1.0;
};
struct UniformArm {
    double lo = 0.0;
    double hi = 1.0;
};
// Lomax tail P(X - shift > x) = (scale / (scale + x))^shape for x >= 0.
struct ShiftedParetoArm {
    double shape = 3.0;
    double scale = 1.0;
    double shift = 0.0;
};
struct DiscreteArm {
    std::vector<double> values;
    std::vector<double> probabilities;
};

using ArmKind = std::variant<ConstantArm, GaussianArm, UniformArm, ShiftedParetoArm, DiscreteArm>;

struct ArmModel {
    ArmKind kind;
    std::string label;

    void validate() const;
};

ArmModel constant_arm(double value, std::string label = {});
ArmModel gaussian_arm(double mu, double sigma, std::string label = {});
ArmModel uniform_arm(double lo, double hi, std::string label = {});
ArmModel shifted_pareto_arm(double shape, double scale, double shift, std::string label = {});
ArmModel discrete_arm(std::vector<double> values, std::vector<double> probabilities,
                      std::string label = {});

double sample(const ArmModel& model, Rng& rng);
double arm_quantile(const ArmModel& model, double u);
double arm_mean(const ArmModel& model);
double arm_var(const ArmModel& model, const RiskLevel& level);
double arm_cvar(const ArmModel& model, const RiskLevel& level);
// E|X|^p, the moment bounded by B in the heavy-tailed setting.
double arm_abs_moment(const ArmModel& model, double p);
// Sub-Gaussian proxy when the kind admits one (Gaussian sigma, half-range for
// bounded kinds); nullopt for ShiftedPareto.
std::optional<double> subgaussian_proxy(const ArmModel& model);

enum class AttributeKind { Mean, Cvar, Custom };

// One scalar functional g_i of an arm's loss vector, read from a single coordinate.
struct Attribute {
    AttributeKind kind = AttributeKind::Mean;
    std::size_t coordinate = 0;
    double alpha = 0.95;  // Cvar only
    // Custom only: estimator over the coordinate's arrival-ordered samples and
    // the exact value for the coordinate's model.
    std::function<double(std::span<const double>)> custom_estimate;
    std::function<double(const ArmModel&)> custom_exact;
    std::string name;

    std::string describe() const;
};

Attribute mean_attribute(std::size_t coordinate = 0);
Attribute cvar_attribute(double alpha, std::size_t coordinate = 0);

struct AttributeConstraint {
    Attribute attribute;
    double threshold = 0.0;
    // Concentration rate a_i; nullopt means "match the sub-Gaussian widths",
    // resolved against the policy's SubGaussianParams at the run horizon.
    std::optional<double> rate;
};

struct Objective {
    Attribute attribute = mean_attribute();
    std::optional<double> rate;
};

struct InstanceSpec {
    std::vector<ArmModel> arms;  // coordinate 0 of each arm
    // Empty, or one list per arm of the remaining D - 1 coordinates.
    std::vector<std::vector<ArmModel>> extra_coordinates;
    RiskLevel level{0.95};
    std::optional<double> tau;  // single-constraint mode
    Objective objective;        // multi-constraint mode
    std::vector<AttributeConstraint> constraints;

    std::size_t num_arms() const { return arms.size(); }
    std::size_t dimension() const;
    bool multi_constraint() const { return !constraints.empty(); }
    std::vector<ArmModel> coordinates(std::size_t arm) const;
    // Constraint list in effect: the single CVaR constraint, or `constraints`.
    std::vector<AttributeConstraint> effective_constraints() const;
    Attribute effective_objective() const;

    void validate() const;
};

double attribute_value(const Attribute& attribute, std::span<const ArmModel> coordinates);

// Stable 64-bit hash of every parameter that defines the instance, hex encoded.
std::string instance_fingerprint(const InstanceSpec& spec);

enum class ArmCategory { Optimal, FeasibleSuboptimal, Deceiver, InfeasibleSuboptimal, Risky };
const char* to_string(ArmCategory category);

struct InstanceOracle {
    std::string fingerprint;
    std::size_t num_arms = 0;
    bool single_constraint = true;
    // attributes[0] is the objective g_0, attributes[i] the i-th constrained one.
    std::vector<std::vector<double>> attributes;
    std::vector<double> thresholds;  // tau_1..tau_m
    std::vector<double> means;       // g_0
    std::vector<double> cvars;       // g_1 (the CVaR in single-constraint mode)

    bool is_feasible = false;
    std::vector<std::size_t> feasible_set;
    std::vector<std::size_t> deceiver_set;
    std::vector<std::size_t> optimal_set;
    double mu_star = 0.0;    // feasible case
    double cvar_star = 0.0;  // infeasible case; g*_{i*} in multi-constraint mode
    std::size_t relaxed = 0; // i*: constraints relaxed on an infeasible instance

    std::vector<double> gap_mean;  // Delta(k)
    std::vector<double> gap_tau;   // Delta_tau(k); max over constraints when m > 1
    std::vector<double> gap_risk;  // Delta_risk(k), infeasible case
    std::vector<std::vector<double>> gap_constraint;  // [i-1][k] = Delta_{i,tau_i}(k)
    std::vector<ArmCategory> categories;
};

InstanceOracle classify(const InstanceSpec& spec);

// Gaps below this are treated as zero.
inline constexpr double kZeroGap = 1e-12;

struct ArmBounds {
    ArmCategory category = ArmCategory::Optimal;
    // sub-Gaussian RC-LCB
    std::optional<double> u, v, w, rhs;
    // bounded-moment RCLCB-HT
    std::optional<double> u_ht, v_ht, w_ht, rhs_ht;
    // Con-LCB, feasible instances
    std::optional<double> rhs_con;
};

struct TheoremBounds {
    std::string fingerprint;
    std::size_t horizon = 0;
    std::vector<ArmBounds> arms;
    std::optional<double> t_star;     // infeasible instances, sub-Gaussian v_k
    std::optional<double> t_star_ht;  // infeasible instances, bounded-moment v_k
    double flag_error_bound = 0.0;    // 1/T feasible, K/T infeasible (m/T Con-LCB)
};

// `con_rates` holds a_0..a_m when Con-LCB bounds are wanted.
TheoremBounds theorem_bounds(const InstanceOracle& oracle, const SubGaussianParams& sg,
                             const std::optional<MomentParams>& mp, const RiskLevel& level,
                             std::size_t horizon, std::span<const double> con_rates = {});

// Smallest T >= K with T > sum_k v_k(T); nullopt if none below `limit`.
std::optional<std::size_t> find_t_star(const std::function<double(std::size_t)>& budget,
                                       std::size_t num_arms, std::size_t limit);

}  // namespace riskbandit
