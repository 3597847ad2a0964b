#include "riskbandit/lower_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/minima.hpp>

namespace riskbandit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kSigmaGrid = 4000;

// Minimizes KL(arm, (mu'(s), s)) over s in the class, where mu'(s) is the
// largest admissible mean at scale s (nullopt if none). The best mean at a
// fixed scale is min(arm.mu, mu'(s)) because KL is a parabola in mu'.
EtaResult profile_minimize(const GaussianParams& arm, const GaussianClass& cls,
                           const std::function<std::optional<double>(double)>& mean_cap) {
    auto value = [&](double s, GaussianParams* at) {
        const auto cap = mean_cap(s);
        if (!cap || *cap < cls.mean_lo) return kInf;
        const double mu = std::min(arm.mu, std::min(*cap, cls.mean_hi));
        if (at) *at = {mu, s};
        return kl_gaussian(arm.mu, arm.sigma, mu, s);
    };

    EtaResult res;
    if (cls.mode == GaussianClass::Mode::FixedSigma) {
        GaussianParams at;
        res.eta = value(cls.sigma, &at);
        if (std::isfinite(res.eta)) res.minimizer = at;
        return res;
    }

    const double lo = std::log(cls.sigma_min);
    const double hi = std::log(cls.sigma_max);
    if (hi == lo) {
        GaussianParams at;
        res.eta = value(cls.sigma_min, &at);
        if (std::isfinite(res.eta)) res.minimizer = at;
        return res;
    }
    std::size_t best_i = 0;
    double best = kInf;
    for (std::size_t i = 0; i <= kSigmaGrid; ++i) {
        const double s = std::exp(lo + (hi - lo) * static_cast<double>(i) / kSigmaGrid);
        const double v = value(s, nullptr);
        if (v < best) {
            best = v;
            best_i = i;
        }
    }
    res.eta = best;
    if (!std::isfinite(best)) return res;
    const double a = lo + (hi - lo) * static_cast<double>(best_i == 0 ? 0 : best_i - 1) / kSigmaGrid;
    const double b = lo + (hi - lo) * static_cast<double>(std::min(best_i + 1, kSigmaGrid)) / kSigmaGrid;
    const auto refined = boost::math::tools::brent_find_minima(
        [&](double ls) { return value(std::exp(ls), nullptr); }, a, b, 52);
    double best_s = std::exp(lo + (hi - lo) * static_cast<double>(best_i) / kSigmaGrid);
    if (refined.second < best) {
        res.eta = refined.second;
        best_s = std::exp(refined.first);
    }
    GaussianParams at;
    value(best_s, &at);
    res.minimizer = at;
    return res;
}

}  // namespace

double kl_gaussian(double mu1, double sigma1, double mu2, double sigma2) {
    if (!(sigma1 > 0.0 && sigma2 > 0.0)) throw std::invalid_argument("KL needs positive sigmas");
    const double d = mu1 - mu2;
    return std::log(sigma2 / sigma1) + (sigma1 * sigma1 + d * d) / (2.0 * sigma2 * sigma2) - 0.5;
}

double gaussian_cvar_factor(const RiskLevel& level) {
    const boost::math::normal_distribution<double> n01;
    return boost::math::pdf(n01, boost::math::quantile(n01, level.alpha())) / level.beta();
}

GaussianClass GaussianClass::fixed(double sigma, double mean_lo, double mean_hi) {
    GaussianClass c;
    c.mode = Mode::FixedSigma;
    c.sigma = sigma;
    c.mean_lo = mean_lo;
    c.mean_hi = mean_hi;
    c.validate();
    return c;
}

GaussianClass GaussianClass::free(double sigma_min, double sigma_max, double mean_lo, double mean_hi) {
    GaussianClass c;
    c.mode = Mode::FreeSigma;
    c.sigma_min = sigma_min;
    c.sigma_max = sigma_max;
    c.mean_lo = mean_lo;
    c.mean_hi = mean_hi;
    c.validate();
    return c;
}

void GaussianClass::validate() const {
    if (mode == Mode::FixedSigma) {
        if (!(sigma > 0.0)) throw std::invalid_argument("class sigma must be positive");
    } else if (!(sigma_min > 0.0 && sigma_min <= sigma_max)) {
        throw std::invalid_argument("class needs 0 < sigma_min <= sigma_max");
    }
    if (!(mean_lo < mean_hi)) throw std::invalid_argument("class mean range is empty");
}

void GaussianClass::check_member(const GaussianParams& arm) const {
    validate();
    if (arm.mu < mean_lo || arm.mu > mean_hi) throw std::invalid_argument("arm mean outside the class mean range");
    if (mode == Mode::FixedSigma ? arm.sigma != sigma : (arm.sigma < sigma_min || arm.sigma > sigma_max)) {
        throw std::invalid_argument("arm sigma outside the class");
    }
}

std::optional<double> EtaResult::lower_bound_coefficient() const {
    if (eta == 0.0) return std::nullopt;
    if (eta == kInf) return 0.0;
    return 1.0 / eta;
}

EtaResult eta_feasible(const GaussianParams& arm, double mu_star, double tau, const RiskLevel& level,
                       const GaussianClass& cls) {
    cls.check_member(arm);
    const double kappa = gaussian_cvar_factor(level);
    return profile_minimize(arm, cls, [&](double s) -> std::optional<double> {
        return std::min(mu_star, tau - s * kappa);
    });
}

EtaResult eta_infeasible(const GaussianParams& arm, double cvar_star, const RiskLevel& level,
                         const GaussianClass& cls) {
    cls.check_member(arm);
    const double kappa = gaussian_cvar_factor(level);
    return profile_minimize(arm, cls, [&](double s) -> std::optional<double> { return cvar_star - s * kappa; });
}

EtaResult eta_cvar_minimization(const GaussianParams& arm, double cvar_star, const RiskLevel& level,
                                const GaussianClass& cls) {
    cls.check_member(arm);
    // Largest mean whose CVaR stays at or below cvar_star, by bisection on the oracle.
    return profile_minimize(arm, cls, [&](double s) -> std::optional<double> {
        auto cvar_at = [&](double mu) { return arm_cvar(gaussian_arm(mu, s), level); };
        double lo = cls.mean_lo;
        double hi = cls.mean_hi;
        if (cvar_at(lo) > cvar_star) return std::nullopt;
        if (cvar_at(hi) <= cvar_star) return hi;
        for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
            const double mid = 0.5 * (lo + hi);
            (cvar_at(mid) <= cvar_star ? lo : hi) = mid;
        }
        return lo;
    });
}

double theorem4_lower_bound(const EtaResult& eta, std::size_t horizon) {
    if (horizon < 2) throw std::invalid_argument("lower bound needs T >= 2");
    if (!(eta.eta > 0.0) || !std::isfinite(eta.eta)) return 0.0;
    return std::log(static_cast<double>(horizon)) / eta.eta;
}

std::optional<std::vector<EtaResult>> instance_eta(const InstanceSpec& spec, const InstanceOracle& oracle) {
    if (!oracle.single_constraint) return std::nullopt;
    std::vector<GaussianParams> arms;
    double lo = kInf, hi = -kInf, smax = 0.0;
    for (const auto& m : spec.arms) {
        const auto* g = std::get_if<GaussianArm>(&m.kind);
        if (!g) return std::nullopt;
        arms.push_back({g->mu, g->sigma});
        lo = std::min(lo, g->mu);
        hi = std::max(hi, g->mu);
        smax = std::max(smax, g->sigma);
    }
    const double tau = oracle.thresholds.front();
    const double margin = 10.0 + 50.0 * smax + std::abs(tau) + std::abs(hi - lo);
    const RiskLevel& level = spec.level;
    std::vector<EtaResult> out;
    for (std::size_t k = 0; k < arms.size(); ++k) {
        const auto cls = GaussianClass::fixed(arms[k].sigma, lo - margin, hi + margin);
        if (oracle.categories[k] == ArmCategory::Optimal) {
            out.push_back(EtaResult{0.0, arms[k]});
        } else if (oracle.is_feasible) {
            out.push_back(eta_feasible(arms[k], oracle.mu_star, tau, level, cls));
        } else {
            out.push_back(eta_infeasible(arms[k], oracle.cvar_star, level, cls));
        }
    }
    return out;
}

}  // namespace riskbandit
