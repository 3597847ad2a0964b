#pragma once

// Sequential select/observe policies: RC-LCB, RCLCB-HT, Con-LCB and two
// unconstrained baselines. Arms are 0-based.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "riskbandit/instances.hpp"
#include "riskbandit/risk_core.hpp"

namespace riskbandit {

struct RcLcbConfig {
    SubGaussianParams sg;
    RiskLevel level{0.95};
    double tau = 0.0;
    // Use log(2 D K T^2) in the CVaR width instead of log(2 D T^2).
    bool k_inflated = false;
};

struct RcLcbHtConfig {
    MomentParams moments;
    RiskLevel level{0.95};
    double tau = 0.0;
};

struct ConLcbConfig {
    // Empty constraint list: take objective and constraints from the instance.
    Objective objective;
    std::vector<AttributeConstraint> constraints;
    // Used to resolve unset rates so widths match the RC-LCB ones. Without
    // `sg`, CVaR attributes use SubGaussianParams::calibrated(sigma, level).
    double sigma = 1.0;
    std::optional<SubGaussianParams> sg;
};

struct BaselineLcbConfig {
    double sigma = 1.0;
    // Only used for the feasibility flag.
    std::optional<RcLcbConfig> flag_constraint;
};

struct BaselineCvarLcbConfig {
    SubGaussianParams sg;
    RiskLevel level{0.95};
    std::optional<double> tau;  // only used for the feasibility flag
};

using PolicySpec =
    std::variant<RcLcbConfig, RcLcbHtConfig, ConLcbConfig, BaselineLcbConfig, BaselineCvarLcbConfig>;

std::string policy_name(const PolicySpec& spec);

// Rates that make sqrt(log(2T^2) / (a n)) equal the RC-LCB widths.
double matched_mean_rate(double sigma, std::size_t horizon);
double matched_cvar_rate(const RiskLevel& level, const SubGaussianParams& sg, std::size_t horizon);
double con_width(std::size_t n, double rate, std::size_t horizon);

class Policy {
public:
    Policy(std::size_t num_arms, std::size_t horizon);
    virtual ~Policy() = default;

    // Arm to play at round `round() + 1`. Repeated calls before observe return
    // the same arm.
    std::size_t select();
    void observe(std::size_t arm, std::span<const double> sample);
    void observe(std::size_t arm, double sample) { observe(arm, std::span<const double>(&sample, 1)); }

    // K-hat computed from the current statistics.
    std::vector<std::size_t> plausibly_feasible_set() const;
    // Only valid once all T rounds have been observed.
    bool feasibility_flag() const;

    std::size_t num_arms() const { return pulls_.size(); }
    std::size_t horizon() const { return horizon_; }
    std::size_t round() const { return round_; }
    std::span<const std::size_t> pulls() const { return pulls_; }

    virtual std::string name() const = 0;

protected:
    // Called after initialization; every arm has at least one sample.
    virtual std::size_t choose() = 0;
    virtual void record(std::size_t arm, std::span<const double> sample) = 0;
    virtual bool plausibly_feasible(std::size_t arm) const = 0;

    // Lowest index among the minimizers of `score` over `arms`.
    template <class Score>
    static std::size_t argmin(std::span<const std::size_t> arms, Score score) {
        std::size_t best = arms.front();
        double best_value = score(best);
        for (std::size_t i = 1; i < arms.size(); ++i) {
            const double v = score(arms[i]);
            if (v < best_value) {
                best_value = v;
                best = arms[i];
            }
        }
        return best;
    }
    const std::vector<std::size_t>& all_arms() const { return all_arms_; }

private:
    std::size_t horizon_;
    std::size_t round_ = 0;
    std::vector<std::size_t> pulls_;
    std::vector<std::size_t> all_arms_;
    std::optional<std::size_t> pending_;
};

class RcLcb final : public Policy {
public:
    RcLcb(std::size_t num_arms, std::size_t horizon, const RcLcbConfig& config);
    std::string name() const override { return "rc_lcb"; }

    double mean_lcb(std::size_t arm) const { return mean_lcb_[arm]; }
    double cvar_lcb(std::size_t arm) const { return cvar_lcb_[arm]; }

protected:
    std::size_t choose() override;
    void record(std::size_t arm, std::span<const double> sample) override;
    bool plausibly_feasible(std::size_t arm) const override;

private:
    RcLcbConfig config_;
    std::vector<UpperTail> tails_;
    std::vector<double> sums_;
    std::vector<double> mean_lcb_;
    std::vector<double> cvar_lcb_;
};

class RcLcbHt final : public Policy {
public:
    RcLcbHt(std::size_t num_arms, std::size_t horizon, const RcLcbHtConfig& config);
    std::string name() const override { return "rclcb_ht"; }

protected:
    std::size_t choose() override;
    void record(std::size_t arm, std::span<const double> sample) override;
    bool plausibly_feasible(std::size_t arm) const override;

private:
    RcLcbHtConfig config_;
    double delta_;
    std::vector<UpperTail> tails_;
    std::vector<double> truncated_sums_;
    std::vector<double> mean_lcb_;
    std::vector<double> cvar_lcb_;
};

class ConLcb final : public Policy {
public:
    // `config` must carry the full objective and constraint list here; see
    // make_policy for the instance fallback.
    ConLcb(std::size_t num_arms, std::size_t horizon, const ConLcbConfig& config);
    std::string name() const override { return "con_lcb"; }

    // a_0..a_m after resolving unset rates.
    std::span<const double> rates() const { return rates_; }
    std::size_t constraint_count() const { return thresholds_.size(); }
    // Plausibly feasible arms for constraint i (1-based) alone.
    std::vector<std::size_t> constraint_set(std::size_t i) const;

protected:
    std::size_t choose() override;
    void record(std::size_t arm, std::span<const double> sample) override;
    bool plausibly_feasible(std::size_t arm) const override;

private:
    struct Estimator {
        Attribute attribute;
        std::vector<UpperTail> tails;           // Cvar
        std::vector<double> sums;               // Mean
        std::vector<std::vector<double>> raw;   // Custom
        double rate = 0.0;
        // Unset rate: reuse the RC-LCB width formula so the two policies agree
        // bit for bit on a single CVaR constraint.
        bool matched = false;
        std::optional<SubGaussianParams> sg;  // matched Cvar
        double sigma = 1.0;                   // matched Mean
    };

    double width(std::size_t attr, std::size_t n) const;

    double estimate(std::size_t attr, std::size_t arm) const;
    bool satisfies(std::size_t i, std::size_t arm) const;

    std::vector<Estimator> estimators_;  // [0] objective, [i] constraint i
    std::vector<double> thresholds_;
    std::vector<double> rates_;
    std::vector<std::vector<double>> estimates_;  // [attr][arm]
    std::vector<std::vector<double>> widths_;     // [attr][arm]
};

class BaselineLcb final : public Policy {
public:
    BaselineLcb(std::size_t num_arms, std::size_t horizon, const BaselineLcbConfig& config);
    std::string name() const override { return "baseline_lcb"; }

protected:
    std::size_t choose() override;
    void record(std::size_t arm, std::span<const double> sample) override;
    bool plausibly_feasible(std::size_t arm) const override;

private:
    BaselineLcbConfig config_;
    std::vector<double> sums_;
    std::vector<double> mean_lcb_;
    std::vector<UpperTail> tails_;  // flag only
    std::vector<double> cvar_lcb_;
};

class BaselineCvarLcb final : public Policy {
public:
    BaselineCvarLcb(std::size_t num_arms, std::size_t horizon, const BaselineCvarLcbConfig& config);
    std::string name() const override { return "baseline_cvar_lcb"; }

protected:
    std::size_t choose() override;
    void record(std::size_t arm, std::span<const double> sample) override;
    bool plausibly_feasible(std::size_t arm) const override;

private:
    BaselineCvarLcbConfig config_;
    std::vector<UpperTail> tails_;
    std::vector<double> cvar_lcb_;
    std::vector<double> cvar_ucb_test_;
};

// Builds a policy for an instance. ConLcbConfig with no constraints inherits
// the instance's objective and constraints.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const InstanceSpec& instance,
                                    std::size_t horizon);

// Default sub-Gaussian parameters for an instance: calibrated constants at the
// largest per-arm proxy. Throws for arms without a proxy.
SubGaussianParams default_subgaussian(const InstanceSpec& instance);

}  // namespace riskbandit
