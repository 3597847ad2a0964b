#pragma once

// KL-based lower-bound coefficients for Gaussian arm classes.

#include <cstddef>
#include <optional>
#include <vector>

#include "riskbandit/instances.hpp"
#include "riskbandit/risk_core.hpp"

namespace riskbandit {

// KL(N(mu1, s1^2) || N(mu2, s2^2)).
double kl_gaussian(double mu1, double sigma1, double mu2, double sigma2);

// phi(Phi^{-1}(alpha)) / beta, so that CVaR of N(mu, s^2) is mu + s * kappa.
double gaussian_cvar_factor(const RiskLevel& level);

struct GaussianParams {
    double mu = 0.0;
    double sigma = 1.0;
};

struct GaussianClass {
    enum class Mode { FixedSigma, FreeSigma };
    Mode mode = Mode::FixedSigma;
    double sigma = 1.0;  // FixedSigma
    double sigma_min = 1.0;  // FreeSigma
    double sigma_max = 1.0;
    double mean_lo = -1e3;
    double mean_hi = 1e3;

    static GaussianClass fixed(double sigma, double mean_lo, double mean_hi);
    static GaussianClass free(double sigma_min, double sigma_max, double mean_lo, double mean_hi);
    void validate() const;
    // Arm must belong to the class.
    void check_member(const GaussianParams& arm) const;
};

struct EtaResult {
    // 0 for arms that need no perturbation; +infinity when no class member
    // satisfies the constraints.
    double eta = 0.0;
    // Perturbed parameters at the infimum (on the closed boundary).
    std::optional<GaussianParams> minimizer;

    bool coefficient_infinite() const { return eta == 0.0; }
    // 1/eta (0 when eta is infinite); nullopt is the infinity marker for eta == 0.
    std::optional<double> lower_bound_coefficient() const;
};

// inf KL(arm, nu') over nu' in the class with mu(nu') <= mu_star and CVaR(nu') <= tau.
EtaResult eta_feasible(const GaussianParams& arm, double mu_star, double tau, const RiskLevel& level,
                       const GaussianClass& cls);
// inf KL(arm, nu') over nu' in the class with CVaR(nu') <= cvar_star.
EtaResult eta_infeasible(const GaussianParams& arm, double cvar_star, const RiskLevel& level,
                         const GaussianClass& cls);
// Unconstrained CVaR minimization: same infimum, evaluated numerically over
// (mu', sigma') with the CVaR taken from the arm-model oracle.
EtaResult eta_cvar_minimization(const GaussianParams& arm, double cvar_star, const RiskLevel& level,
                                const GaussianClass& cls);

// log(T) / eta, or 0 when eta is 0 or infinite.
double theorem4_lower_bound(const EtaResult& eta, std::size_t horizon);

// Per-arm eta for an all-Gaussian instance, using a fixed-sigma class at each
// arm's own sigma. nullopt when some arm is not Gaussian or the instance has
// several constraints.
std::optional<std::vector<EtaResult>> instance_eta(const InstanceSpec& spec, const InstanceOracle& oracle);

}  // namespace riskbandit
