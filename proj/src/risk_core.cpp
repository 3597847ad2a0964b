#include "riskbandit/risk_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace riskbandit {

namespace {

constexpr double kSnap = 1e-9;

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

double log_t2(std::size_t horizon, double factor) {
    const double t = static_cast<double>(horizon);
    return std::log(factor * t * t);
}

}  // namespace

RiskLevel::RiskLevel(double alpha) : alpha_(alpha), beta_(1.0 - alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("risk level alpha must lie in (0, 1), got " +
                                    std::to_string(alpha));
    }
}

void SubGaussianParams::validate() const {
    require(sigma >= 0.0, "sub-Gaussian sigma must be nonnegative");
    require(d_big > 0.0, "D_sigma must be positive");
    require(d_small > 0.0, "d_sigma must be positive");
}

double normal_cvar_asymptotic_variance(const RiskLevel& level) {
    const boost::math::normal_distribution<double> std_normal;
    const double beta = level.beta();
    const double v = boost::math::quantile(std_normal, level.alpha());
    const double phi = boost::math::pdf(std_normal, v);
    const double first = phi - v * beta;
    const double second = (1.0 + v * v) * beta - v * phi;
    return (second - first * first) / (beta * beta);
}

SubGaussianParams SubGaussianParams::conservative(double sigma) {
    require(sigma > 0.0, "sigma must be positive");
    return {sigma, 2.0, 1.0 / (8.0 * sigma * sigma)};
}

SubGaussianParams SubGaussianParams::calibrated(double sigma, const RiskLevel& level) {
    require(sigma > 0.0, "calibration needs sigma > 0");
    const double s2 = normal_cvar_asymptotic_variance(level);
    const double beta = level.beta();
    SubGaussianParams sg;
    sg.sigma = sigma;
    sg.d_big = 2.0;
    sg.d_small = 1.0 / (4.0 * s2 * beta * beta * sigma * sigma);
    return sg;
}

void MomentParams::validate() const {
    require(p > 1.0 && p <= 2.0, "p must be in (1, 2]");
    require(b_bound > 0.0, "B must be positive");
}

TailIndex tail_index(std::size_t n, double beta) {
    const double nb = static_cast<double>(n) * beta;
    const double nearest = std::round(nb);
    std::size_t pivot;
    std::size_t head;
    if (std::abs(nb - nearest) <= kSnap * std::max(1.0, nb)) {
        pivot = static_cast<std::size_t>(nearest);
        head = pivot;
    } else {
        pivot = static_cast<std::size_t>(std::ceil(nb));
        head = static_cast<std::size_t>(std::floor(nb));
    }
    pivot = std::clamp<std::size_t>(pivot, 1, n);
    head = std::min(head, n);
    return {pivot, head, nb};
}

SampleBuffer::SampleBuffer(std::span<const double> values)
    : samples_(values.begin(), values.end()), sorted_(values.begin(), values.end()) {
    std::stable_sort(sorted_.begin(), sorted_.end(), std::greater<>());
}

void SampleBuffer::push(double x) {
    samples_.push_back(x);
    // After equal elements, so earlier arrivals keep their rank.
    auto pos = std::upper_bound(sorted_.begin(), sorted_.end(), x, std::greater<>());
    sorted_.insert(pos, x);
}

double SampleBuffer::order_stat(std::size_t i) const {
    if (i == 0 || i > sorted_.size()) throw std::out_of_range("order statistic index");
    return sorted_[i - 1];
}

double cvar_from_descending(std::span<const double> desc, std::size_t n, double beta) {
    const TailIndex ti = tail_index(n, beta);
    const double pivot = desc[ti.pivot - 1];
    double excess = 0.0;
    for (std::size_t i = 0; i < ti.head; ++i) excess += desc[i] - pivot;
    return pivot + excess / ti.n_beta;
}

double clamped_cvar_from_descending(std::span<const double> desc, std::size_t n, double beta,
                                    double b_c) {
    const TailIndex ti = tail_index(n, beta);
    const auto clamp = [b_c](double x) { return std::min(std::max(x, -b_c), b_c); };
    const double pivot = clamp(desc[ti.pivot - 1]);
    double excess = 0.0;
    for (std::size_t i = 0; i < ti.head; ++i) excess += clamp(desc[i]) - pivot;
    return pivot + excess / ti.n_beta;
}

double empirical_var(const SampleBuffer& buffer, const RiskLevel& level) {
    if (buffer.empty()) throw std::invalid_argument("no samples");
    return buffer.order_stat(tail_index(buffer.size(), level.beta()).pivot);
}

double empirical_cvar(const SampleBuffer& buffer, const RiskLevel& level) {
    if (buffer.empty()) throw std::invalid_argument("no samples");
    return cvar_from_descending(buffer.sorted_desc(), buffer.size(), level.beta());
}

double tea_level(std::size_t i, const MomentParams& params, double delta) {
    return std::pow(params.b_bound * static_cast<double>(i) / std::log(2.0 / delta),
                    1.0 / params.p);
}

double truncated_mean(std::span<const double> arrivals, std::span<const double> levels) {
    if (arrivals.empty()) throw std::invalid_argument("no samples");
    if (levels.size() != arrivals.size()) {
        throw std::invalid_argument("one truncation level per arrival is required");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
        if (std::abs(arrivals[i]) <= levels[i]) sum += arrivals[i];
    }
    return sum / static_cast<double>(arrivals.size());
}

double truncated_mean(const SampleBuffer& buffer, const MomentParams& params, double delta) {
    if (buffer.empty()) throw std::invalid_argument("no samples");
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    params.validate();
    std::vector<double> levels(buffer.size());
    for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = tea_level(i + 1, params, delta);
    return truncated_mean(buffer.samples(), levels);
}

double truncated_cvar(const SampleBuffer& buffer, const RiskLevel& level, double b_c) {
    if (buffer.empty()) throw std::invalid_argument("no samples");
    require(b_c > 0.0, "truncation level must be positive");
    return clamped_cvar_from_descending(buffer.sorted_desc(), buffer.size(), level.beta(), b_c);
}

double cvar_width_subgauss(std::size_t n, const RiskLevel& level, const SubGaussianParams& sg,
                           std::size_t horizon, bool k_inflated, std::size_t arms) {
    require(n >= 1 && horizon >= 1, "width needs n >= 1 and T >= 1");
    const double factor = 2.0 * sg.d_big * (k_inflated ? static_cast<double>(arms) : 1.0);
    return std::sqrt(log_t2(horizon, factor) / (static_cast<double>(n) * sg.d_small)) /
           level.beta();
}

double mean_width_subgauss(std::size_t n, double sigma, std::size_t horizon) {
    require(n >= 1, "width needs n >= 1");
    return sigma * std::sqrt(2.0 * log_t2(horizon, 1.0) / static_cast<double>(n));
}

double mean_width_ht(std::size_t n, const MomentParams& params, std::size_t horizon) {
    require(n >= 1, "width needs n >= 1");
    return 4.0 * std::pow(params.b_bound, 1.0 / params.p) *
           std::pow(log_t2(horizon, 2.0) / static_cast<double>(n), (params.p - 1.0) / params.p);
}

namespace {

void require_heavy_tail_level(const RiskLevel& level) {
    if (level.beta() > 0.5) {
        throw std::invalid_argument("heavy-tail schedule requires alpha > 0.5");
    }
}

double trunc_crossover(const RiskLevel& level, const MomentParams& params, double delta) {
    const double beta = level.beta();
    const double pm1 = params.p - 1.0;
    return 44.0 * std::log(6.0 / delta) / (beta * beta * beta * pm1 * pm1);
}

}  // namespace

std::size_t cvar_trunc_threshold(const RiskLevel& level, const MomentParams& params,
                                 double delta) {
    require_heavy_tail_level(level);
    return static_cast<std::size_t>(std::floor(trunc_crossover(level, params, delta)));
}

double cvar_trunc_level(std::size_t n, const RiskLevel& level, const MomentParams& params,
                        double delta) {
    require_heavy_tail_level(level);
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    const double beta = level.beta();
    const double inv_p = 1.0 / params.p;
    if (n <= cvar_trunc_threshold(level, params, delta)) {
        return std::pow(params.b_bound / beta, inv_p);
    }
    const double nb = static_cast<double>(n) * beta;
    return std::pow(params.b_bound * (params.p - 1.0) * std::sqrt(nb) /
                        std::sqrt(44.0 * std::log(6.0 / delta)),
                    inv_p);
}

double cbs(std::size_t n, const RiskLevel& level, const MomentParams& params,
           std::size_t horizon) {
    require_heavy_tail_level(level);
    require(n >= 1, "cbs needs n >= 1");
    const double t = static_cast<double>(horizon);
    const double delta = 1.0 / (t * t);
    const double beta = level.beta();
    const double p = params.p;
    const double b_root = std::pow(params.b_bound, 1.0 / p);
    const double l = 44.0 * log_t2(horizon, 6.0);
    const double nd = static_cast<double>(n);
    if (n <= cvar_trunc_threshold(level, params, delta)) {
        return b_root * std::pow(beta, 1.0 - 1.0 / p) +
               b_root * std::sqrt(l) / (std::pow(beta, (2.0 + p) / (2.0 * p)) * std::sqrt(nd));
    }
    return b_root * std::pow(l / (nd * beta), (p - 1.0) / (2.0 * p)) * p /
           std::pow(p - 1.0, (p - 1.0) / p);
}

double ht_cvar_width(std::size_t n, const RiskLevel& level, const MomentParams& params,
                     std::size_t horizon) {
    const double t = static_cast<double>(horizon);
    const double b = cvar_trunc_level(n, level, params, 1.0 / (t * t));
    return params.b_bound / std::pow(b, params.p - 1.0) +
           b * std::sqrt(44.0 * log_t2(horizon, 6.0) / (static_cast<double>(n) * level.beta()));
}

double var_magnitude_bound(const MomentParams& params, const RiskLevel& level) {
    return std::pow(params.b_bound / std::min(level.alpha(), level.beta()), 1.0 / params.p);
}

double cvar_truncation_bias(const MomentParams& params, const RiskLevel& level, double b_c) {
    if (!(b_c > var_magnitude_bound(params, level))) {
        throw std::invalid_argument("truncation below VaR magnitude bound");
    }
    return params.b_bound / std::pow(b_c, params.p - 1.0);
}

void UpperTail::push(double x) {
    ++n_;
    if (!top_.empty() && x <= top_.back()) {
        rest_.push(x);
    } else {
        auto pos = std::upper_bound(top_.begin(), top_.end(), x, std::greater<>());
        top_.insert(pos, x);
    }
    const std::size_t want = tail_index(n_, beta_).pivot;
    while (top_.size() > want) {
        rest_.push(top_.back());
        top_.pop_back();
    }
    while (top_.size() < want) {
        top_.push_back(rest_.top());
        rest_.pop();
    }
}

double UpperTail::var() const {
    if (n_ == 0) throw std::invalid_argument("no samples");
    return top_.back();
}

double UpperTail::cvar() const {
    if (n_ == 0) throw std::invalid_argument("no samples");
    return cvar_from_descending(top_, n_, beta_);
}

double UpperTail::clamped_cvar(double b_c) const {
    if (n_ == 0) throw std::invalid_argument("no samples");
    return clamped_cvar_from_descending(top_, n_, beta_, b_c);
}

}  // namespace riskbandit
