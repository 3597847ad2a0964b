#pragma once

// Risk-measure estimators over loss samples: empirical and truncated VaR/CVaR,
// the truncated empirical average, truncation schedules and the confidence
// widths used by the constrained LCB policies.
//
// Conventions: larger values are worse (losses). `log` is the natural log.
// Order statistics are descending, X_[1] >= X_[2] >= ... >= X_[n].

#include <cstddef>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

namespace riskbandit {

class RiskLevel {
public:
    explicit RiskLevel(double alpha);

    double alpha() const { return alpha_; }
    // Tail mass 1 - alpha.
    double beta() const { return beta_; }

private:
    double alpha_;
    double beta_;
};

struct SubGaussianParams {
    double sigma = 1.0;
    double d_big = 2.0;      // D_sigma
    double d_small = 0.125;  // d_sigma, 1 / (8 sigma^2) at sigma = 1

    void validate() const;

    // D = 2, d = 1 / (8 sigma^2).
    static SubGaussianParams conservative(double sigma);

    // Calibrated constants for a sigma-sub-Gaussian loss at the given level.
    // D = 2 and d = 1 / (4 s^2 beta^2 sigma^2), where s^2 is the asymptotic
    // variance of the empirical CVaR of a standard normal (see
    // `normal_cvar_asymptotic_variance`). The factor 4 leaves roughly a 2x
    // margin on the width over a pure Gaussian tail fit; coverage is checked
    // by `tools/riskbandit_calibrate`.
    static SubGaussianParams calibrated(double sigma, const RiskLevel& level);
};

// Asymptotic variance of sqrt(n) * (empirical CVaR - CVaR) for N(0, 1).
double normal_cvar_asymptotic_variance(const RiskLevel& level);

struct MomentParams {
    double p = 2.0;        // moment order, in (1, 2]
    double b_bound = 1.0;  // E|X|^p <= B

    void validate() const;
};

// Ceil/floor of n*beta with near-integers snapped, so that e.g. 20 * (1 - 0.95)
// yields pivot 1 rather than 2 from representation error in beta.
struct TailIndex {
    std::size_t pivot;  // ceil(n beta), at least 1
    std::size_t head;   // floor(n beta)
    double n_beta;
};
TailIndex tail_index(std::size_t n, double beta);

// Arrival-ordered samples plus a descending sorted view.
class SampleBuffer {
public:
    SampleBuffer() = default;
    explicit SampleBuffer(std::span<const double> values);

    void push(double x);

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    std::span<const double> samples() const { return samples_; }
    std::span<const double> sorted_desc() const { return sorted_; }
    // 1-based descending order statistic X_[i].
    double order_stat(std::size_t i) const;

private:
    std::vector<double> samples_;
    std::vector<double> sorted_;
};

// Empirical CVaR evaluated on a descending prefix holding at least the top ceil(n beta)
// order statistics of an n-sample multiset.
double cvar_from_descending(std::span<const double> desc_prefix, std::size_t n, double beta);
// Same, with every order statistic clamped to [-b_c, b_c]. Clamping is monotone,
// so clamped order statistics are the clamps of the original ones.
double clamped_cvar_from_descending(std::span<const double> desc_prefix, std::size_t n,
                                    double beta, double b_c);

double empirical_var(const SampleBuffer& buffer, const RiskLevel& level);
double empirical_cvar(const SampleBuffer& buffer, const RiskLevel& level);

// Truncated empirical average with level b_{m,i} = (B i / log(2/delta))^{1/p}
// applied to the i-th arrival.
double truncated_mean(const SampleBuffer& buffer, const MomentParams& params, double delta);
// Explicit per-arrival truncation levels.
double truncated_mean(std::span<const double> arrivals, std::span<const double> levels);
double tea_level(std::size_t i, const MomentParams& params, double delta);

double truncated_cvar(const SampleBuffer& buffer, const RiskLevel& level, double b_c);

double cvar_width_subgauss(std::size_t n, const RiskLevel& level, const SubGaussianParams& sg,
                           std::size_t horizon, bool k_inflated = false, std::size_t arms = 1);
double mean_width_subgauss(std::size_t n, double sigma, std::size_t horizon);
double mean_width_ht(std::size_t n, const MomentParams& params, std::size_t horizon);

// n at or below which the truncated-CVaR level stays at (B / beta)^{1/p}.
std::size_t cvar_trunc_threshold(const RiskLevel& level, const MomentParams& params, double delta);
double cvar_trunc_level(std::size_t n, const RiskLevel& level, const MomentParams& params,
                        double delta);
// Closed-form two-branch confidence bound for the truncated CVaR at delta = 1/T^2.
double cbs(std::size_t n, const RiskLevel& level, const MomentParams& params, std::size_t horizon);
// Bias plus deviation, B / b^{p-1} + b sqrt(44 log(6 T^2) / (n beta)), with b = b_{c,n}.
double ht_cvar_width(std::size_t n, const RiskLevel& level, const MomentParams& params,
                     std::size_t horizon);

double var_magnitude_bound(const MomentParams& params, const RiskLevel& level);
double cvar_truncation_bias(const MomentParams& params, const RiskLevel& level, double b_c);

// Exact top-ceil(n beta) order statistics for a fixed beta, maintained in
// O(log n + ceil(n beta)) per insertion. Used on the policy hot path where a
// full sorted view would cost O(n) per pull.
class UpperTail {
public:
    explicit UpperTail(double beta) : beta_(beta) {}

    void push(double x);

    std::size_t size() const { return n_; }
    double beta() const { return beta_; }
    // Descending top ceil(n beta) order statistics.
    std::span<const double> top() const { return top_; }

    double var() const;
    double cvar() const;
    double clamped_cvar(double b_c) const;

private:
    double beta_;
    std::size_t n_ = 0;
    std::vector<double> top_;
    std::priority_queue<double> rest_;
};

}  // namespace riskbandit
