#include "riskbandit/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace riskbandit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double log_2t2(std::size_t horizon) {
    const double t = static_cast<double>(horizon);
    return std::log(2.0 * t * t);
}

}  // namespace

std::string policy_name(const PolicySpec& spec) {
    return std::visit(overloaded{
                          [](const RcLcbConfig&) { return std::string("rc_lcb"); },
                          [](const RcLcbHtConfig&) { return std::string("rclcb_ht"); },
                          [](const ConLcbConfig&) { return std::string("con_lcb"); },
                          [](const BaselineLcbConfig&) { return std::string("baseline_lcb"); },
                          [](const BaselineCvarLcbConfig&) { return std::string("baseline_cvar_lcb"); },
                      },
                      spec);
}

double matched_mean_rate(double sigma, std::size_t horizon) {
    const double t = static_cast<double>(horizon);
    return log_2t2(horizon) / (2.0 * sigma * sigma * std::log(t * t));
}

double matched_cvar_rate(const RiskLevel& level, const SubGaussianParams& sg, std::size_t horizon) {
    const double t = static_cast<double>(horizon);
    const double beta = level.beta();
    return sg.d_small * beta * beta * log_2t2(horizon) / std::log(2.0 * sg.d_big * t * t);
}

double con_width(std::size_t n, double rate, std::size_t horizon) {
    if (n == 0) throw std::invalid_argument("width needs n >= 1");
    return std::sqrt(log_2t2(horizon) / (rate * static_cast<double>(n)));
}

// ---------------------------------------------------------------- Policy

Policy::Policy(std::size_t num_arms, std::size_t horizon)
    : horizon_(horizon), pulls_(num_arms, 0), all_arms_(num_arms) {
    if (num_arms == 0) throw std::invalid_argument("policy needs at least one arm");
    if (horizon < num_arms) throw std::invalid_argument("horizon must be at least the number of arms");
    for (std::size_t k = 0; k < num_arms; ++k) all_arms_[k] = k;
}

std::size_t Policy::select() {
    if (round_ >= horizon_) throw std::invalid_argument("horizon exhausted");
    if (!pending_) pending_ = round_ < num_arms() ? round_ : choose();
    return *pending_;
}

void Policy::observe(std::size_t arm, std::span<const double> sample) {
    if (!pending_ || arm != *pending_) throw std::invalid_argument("protocol violation");
    if (sample.empty()) throw std::invalid_argument("empty sample");
    pending_.reset();
    record(arm, sample);
    ++pulls_[arm];
    ++round_;
}

std::vector<std::size_t> Policy::plausibly_feasible_set() const {
    for (std::size_t n : pulls_) {
        if (n == 0) throw std::invalid_argument("initialization incomplete");
    }
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < num_arms(); ++k) {
        if (plausibly_feasible(k)) out.push_back(k);
    }
    return out;
}

bool Policy::feasibility_flag() const {
    if (round_ != horizon_) throw std::invalid_argument("feasibility flag requested before the horizon");
    return !plausibly_feasible_set().empty();
}

// ---------------------------------------------------------------- RC-LCB

RcLcb::RcLcb(std::size_t num_arms, std::size_t horizon, const RcLcbConfig& config)
    : Policy(num_arms, horizon),
      config_(config),
      tails_(num_arms, UpperTail(config.level.beta())),
      sums_(num_arms, 0.0),
      mean_lcb_(num_arms, 0.0),
      cvar_lcb_(num_arms, 0.0) {
    config_.sg.validate();
}

void RcLcb::record(std::size_t arm, std::span<const double> sample) {
    const double x = sample[0];
    tails_[arm].push(x);
    sums_[arm] += x;
    const std::size_t n = tails_[arm].size();
    mean_lcb_[arm] = sums_[arm] / static_cast<double>(n) -
                     mean_width_subgauss(n, config_.sg.sigma, horizon());
    cvar_lcb_[arm] = tails_[arm].cvar() - cvar_width_subgauss(n, config_.level, config_.sg, horizon(),
                                                              config_.k_inflated, num_arms());
}

bool RcLcb::plausibly_feasible(std::size_t arm) const { return cvar_lcb_[arm] <= config_.tau; }

std::size_t RcLcb::choose() {
    const auto feasible = plausibly_feasible_set();
    if (!feasible.empty()) return argmin(feasible, [&](std::size_t k) { return mean_lcb_[k]; });
    return argmin(all_arms(), [&](std::size_t k) { return cvar_lcb_[k]; });
}

// ---------------------------------------------------------------- RCLCB-HT

RcLcbHt::RcLcbHt(std::size_t num_arms, std::size_t horizon, const RcLcbHtConfig& config)
    : Policy(num_arms, horizon),
      config_(config),
      tails_(num_arms, UpperTail(config.level.beta())),
      truncated_sums_(num_arms, 0.0),
      mean_lcb_(num_arms, 0.0),
      cvar_lcb_(num_arms, 0.0) {
    config_.moments.validate();
    if (config_.level.beta() > 0.5) throw std::invalid_argument("heavy-tail schedule requires alpha > 0.5");
    const double t = static_cast<double>(horizon);
    delta_ = 1.0 / (t * t);
}

void RcLcbHt::record(std::size_t arm, std::span<const double> sample) {
    const double x = sample[0];
    tails_[arm].push(x);
    const std::size_t n = tails_[arm].size();
    // TEA levels depend only on the arrival index, so the sum is incremental.
    if (std::abs(x) <= tea_level(n, config_.moments, delta_)) truncated_sums_[arm] += x;
    mean_lcb_[arm] = truncated_sums_[arm] / static_cast<double>(n) -
                     mean_width_ht(n, config_.moments, horizon());
    const double b_c = cvar_trunc_level(n, config_.level, config_.moments, delta_);
    cvar_lcb_[arm] = tails_[arm].clamped_cvar(b_c) -
                     ht_cvar_width(n, config_.level, config_.moments, horizon());
}

bool RcLcbHt::plausibly_feasible(std::size_t arm) const { return cvar_lcb_[arm] <= config_.tau; }

std::size_t RcLcbHt::choose() {
    const auto feasible = plausibly_feasible_set();
    if (!feasible.empty()) return argmin(feasible, [&](std::size_t k) { return mean_lcb_[k]; });
    return argmin(all_arms(), [&](std::size_t k) { return cvar_lcb_[k]; });
}

// ---------------------------------------------------------------- Con-LCB

ConLcb::ConLcb(std::size_t num_arms, std::size_t horizon, const ConLcbConfig& config)
    : Policy(num_arms, horizon) {
    if (config.constraints.empty()) throw std::invalid_argument("Con-LCB needs at least one constraint");
    if (!(config.sigma > 0.0)) throw std::invalid_argument("Con-LCB sigma must be positive");

    auto add = [&](const Attribute& attribute, const std::optional<double>& rate) {
        Estimator e;
        e.attribute = attribute;
        switch (attribute.kind) {
            case AttributeKind::Mean: e.sums.assign(num_arms, 0.0); break;
            case AttributeKind::Cvar:
                e.tails.assign(num_arms, UpperTail(RiskLevel(attribute.alpha).beta()));
                break;
            case AttributeKind::Custom:
                if (!attribute.custom_estimate) {
                    throw std::invalid_argument("custom attribute needs an estimator");
                }
                e.raw.assign(num_arms, {});
                break;
        }
        if (rate) {
            if (!(*rate > 0.0)) throw std::invalid_argument("Con-LCB rates must be positive");
            e.rate = *rate;
        } else if (attribute.kind == AttributeKind::Mean) {
            e.matched = true;
            e.sigma = config.sigma;
            e.rate = matched_mean_rate(config.sigma, horizon);
        } else if (attribute.kind == AttributeKind::Cvar) {
            const RiskLevel level(attribute.alpha);
            e.matched = true;
            e.sg = config.sg ? *config.sg : SubGaussianParams::calibrated(config.sigma, level);
            e.rate = matched_cvar_rate(level, *e.sg, horizon);
        } else {
            throw std::invalid_argument("custom attribute '" + attribute.name + "' needs an explicit rate");
        }
        rates_.push_back(e.rate);
        estimators_.push_back(std::move(e));
    };

    add(config.objective.attribute, config.objective.rate);
    for (const auto& c : config.constraints) {
        add(c.attribute, c.rate);
        thresholds_.push_back(c.threshold);
    }
    estimates_.assign(estimators_.size(), std::vector<double>(num_arms, 0.0));
    widths_.assign(estimators_.size(), std::vector<double>(num_arms, 0.0));
}

double ConLcb::width(std::size_t attr, std::size_t n) const {
    const Estimator& e = estimators_[attr];
    if (!e.matched) return con_width(n, e.rate, horizon());
    if (e.attribute.kind == AttributeKind::Mean) return mean_width_subgauss(n, e.sigma, horizon());
    return cvar_width_subgauss(n, RiskLevel(e.attribute.alpha), *e.sg, horizon());
}

double ConLcb::estimate(std::size_t attr, std::size_t arm) const {
    const Estimator& e = estimators_[attr];
    switch (e.attribute.kind) {
        case AttributeKind::Mean:
            return e.sums[arm] / static_cast<double>(pulls()[arm] + 1);
        case AttributeKind::Cvar: return e.tails[arm].cvar();
        case AttributeKind::Custom: return e.attribute.custom_estimate(e.raw[arm]);
    }
    return 0.0;
}

void ConLcb::record(std::size_t arm, std::span<const double> sample) {
    // Called before the pull counter advances, so this arm has pulls()[arm] + 1 samples.
    const std::size_t n = pulls()[arm] + 1;
    for (std::size_t a = 0; a < estimators_.size(); ++a) {
        Estimator& e = estimators_[a];
        if (e.attribute.coordinate >= sample.size()) {
            throw std::invalid_argument("sample has fewer coordinates than the attributes need");
        }
        const double x = sample[e.attribute.coordinate];
        switch (e.attribute.kind) {
            case AttributeKind::Mean: e.sums[arm] += x; break;
            case AttributeKind::Cvar: e.tails[arm].push(x); break;
            case AttributeKind::Custom: e.raw[arm].push_back(x); break;
        }
        estimates_[a][arm] = estimate(a, arm);
        widths_[a][arm] = width(a, n);
    }
}

bool ConLcb::satisfies(std::size_t i, std::size_t arm) const {
    return estimates_[i][arm] - widths_[i][arm] <= thresholds_[i - 1];
}

bool ConLcb::plausibly_feasible(std::size_t arm) const {
    for (std::size_t i = 1; i <= thresholds_.size(); ++i) {
        if (!satisfies(i, arm)) return false;
    }
    return true;
}

std::vector<std::size_t> ConLcb::constraint_set(std::size_t i) const {
    if (i == 0 || i > thresholds_.size()) throw std::out_of_range("constraint index");
    for (std::size_t n : pulls()) {
        if (n == 0) throw std::invalid_argument("initialization incomplete");
    }
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < num_arms(); ++k) {
        if (satisfies(i, k)) out.push_back(k);
    }
    return out;
}

std::size_t ConLcb::choose() {
    auto lcb = [&](std::size_t attr) {
        return [this, attr](std::size_t k) { return estimates_[attr][k] - widths_[attr][k]; };
    };
    const auto feasible = plausibly_feasible_set();
    if (!feasible.empty()) return argmin(feasible, lcb(0));

    // Relax constraints from index 1 upwards: candidates = cap_{j > i*} K_j.
    const std::size_t m = thresholds_.size();
    std::vector<std::size_t> candidates = all_arms();
    std::size_t istar = m;
    for (std::size_t j = m; j >= 1; --j) {
        std::vector<std::size_t> next;
        for (std::size_t k : candidates) {
            if (satisfies(j, k)) next.push_back(k);
        }
        if (next.empty()) break;
        candidates = std::move(next);
        istar = j - 1;
    }
    // istar >= 1 because the full intersection is empty.
    return argmin(candidates, lcb(istar));
}

// ---------------------------------------------------------------- baselines

BaselineLcb::BaselineLcb(std::size_t num_arms, std::size_t horizon, const BaselineLcbConfig& config)
    : Policy(num_arms, horizon),
      config_(config),
      sums_(num_arms, 0.0),
      mean_lcb_(num_arms, 0.0),
      cvar_lcb_(num_arms, 0.0) {
    if (config_.flag_constraint) {
        config_.flag_constraint->sg.validate();
        tails_.assign(num_arms, UpperTail(config_.flag_constraint->level.beta()));
    }
}

void BaselineLcb::record(std::size_t arm, std::span<const double> sample) {
    const double x = sample[0];
    sums_[arm] += x;
    const std::size_t n = pulls()[arm] + 1;
    mean_lcb_[arm] = sums_[arm] / static_cast<double>(n) - mean_width_subgauss(n, config_.sigma, horizon());
    if (config_.flag_constraint) {
        const auto& fc = *config_.flag_constraint;
        tails_[arm].push(x);
        cvar_lcb_[arm] = tails_[arm].cvar() -
                         cvar_width_subgauss(n, fc.level, fc.sg, horizon(), fc.k_inflated, num_arms());
    }
}

bool BaselineLcb::plausibly_feasible(std::size_t arm) const {
    if (!config_.flag_constraint) return true;
    return cvar_lcb_[arm] <= config_.flag_constraint->tau;
}

std::size_t BaselineLcb::choose() {
    return argmin(all_arms(), [&](std::size_t k) { return mean_lcb_[k]; });
}

BaselineCvarLcb::BaselineCvarLcb(std::size_t num_arms, std::size_t horizon,
                                 const BaselineCvarLcbConfig& config)
    : Policy(num_arms, horizon),
      config_(config),
      tails_(num_arms, UpperTail(config.level.beta())),
      cvar_lcb_(num_arms, 0.0) {
    config_.sg.validate();
}

void BaselineCvarLcb::record(std::size_t arm, std::span<const double> sample) {
    tails_[arm].push(sample[0]);
    const std::size_t n = tails_[arm].size();
    cvar_lcb_[arm] = tails_[arm].cvar() - cvar_width_subgauss(n, config_.level, config_.sg, horizon());
}

bool BaselineCvarLcb::plausibly_feasible(std::size_t arm) const {
    if (!config_.tau) return true;
    return cvar_lcb_[arm] <= *config_.tau;
}

std::size_t BaselineCvarLcb::choose() {
    return argmin(all_arms(), [&](std::size_t k) { return cvar_lcb_[k]; });
}

// ---------------------------------------------------------------- factory

SubGaussianParams default_subgaussian(const InstanceSpec& instance) {
    double sigma = 0.0;
    for (const auto& arm : instance.arms) {
        const auto proxy = subgaussian_proxy(arm);
        if (!proxy) {
            throw std::invalid_argument("arm '" + arm.label +
                                        "' has no sub-Gaussian proxy; give sigma explicitly");
        }
        sigma = std::max(sigma, *proxy);
    }
    if (sigma == 0.0) sigma = 1.0;
    return SubGaussianParams::calibrated(sigma, instance.level);
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const InstanceSpec& instance,
                                    std::size_t horizon) {
    const std::size_t K = instance.num_arms();
    if (horizon < K) throw std::invalid_argument("horizon must be at least the number of arms");
    return std::visit(
        overloaded{
            [&](const RcLcbConfig& c) -> std::unique_ptr<Policy> {
                return std::make_unique<RcLcb>(K, horizon, c);
            },
            [&](const RcLcbHtConfig& c) -> std::unique_ptr<Policy> {
                return std::make_unique<RcLcbHt>(K, horizon, c);
            },
            [&](const ConLcbConfig& c) -> std::unique_ptr<Policy> {
                if (!c.constraints.empty()) return std::make_unique<ConLcb>(K, horizon, c);
                ConLcbConfig full = c;
                full.constraints = instance.effective_constraints();
                if (instance.multi_constraint()) full.objective = instance.objective;
                return std::make_unique<ConLcb>(K, horizon, full);
            },
            [&](const BaselineLcbConfig& c) -> std::unique_ptr<Policy> {
                return std::make_unique<BaselineLcb>(K, horizon, c);
            },
            [&](const BaselineCvarLcbConfig& c) -> std::unique_ptr<Policy> {
                return std::make_unique<BaselineCvarLcb>(K, horizon, c);
            },
        },
        spec);
}

}  // namespace riskbandit
