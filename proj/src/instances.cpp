#include "riskbandit/instances.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace riskbandit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

struct SortedDiscrete {
    std::vector<double> values;
    std::vector<double> probs;
};

SortedDiscrete sorted_discrete(const DiscreteArm& d) {
    std::vector<std::size_t> order(d.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d.values[a] < d.values[b]; });
    SortedDiscrete out;
    for (std::size_t i : order) {
        out.values.push_back(d.values[i]);
        out.probs.push_back(d.probabilities[i]);
    }
    return out;
}

double discrete_quantile(const DiscreteArm& d, double u) {
    const SortedDiscrete s = sorted_discrete(d);
    double cum = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        cum += s.probs[i];
        if (cum >= u - 1e-12) return s.values[i];
    }
    return s.values.back();
}

const boost::math::normal_distribution<double>& std_normal() {
    static const boost::math::normal_distribution<double> dist;
    return dist;
}

// F^{-1}(1 - c), evaluated from c so that tiny tail masses stay accurate.
double upper_quantile(const ArmModel& model, double c) {
    if (const auto* g = std::get_if<GaussianArm>(&model.kind)) {
        return g->mu + g->sigma * boost::math::quantile(boost::math::complement(std_normal(), c));
    }
    if (const auto* p = std::get_if<ShiftedParetoArm>(&model.kind)) {
        return p->shift + p->scale * (std::pow(c, -1.0 / p->shape) - 1.0);
    }
    return arm_quantile(model, 1.0 - c);
}

// (1/beta) int_alpha^1 F^{-1}(u) du, integrated over the tail mass c = 1 - u.
double tail_quadrature(const ArmModel& model, const RiskLevel& level) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    double error = 0.0;
    double l1 = 0.0;
    const double integral = integrator.integrate([&](double c) { return upper_quantile(model, c); }, 0.0,
                                                 level.beta(), 1e-12, &error, &l1);
    if (!std::isfinite(integral) || error > 1e-9 * std::max(1.0, l1)) {
        std::ostringstream msg;
        msg << "CVaR quadrature did not converge for arm '" << model.label
            << "': estimate " << integral << ", error " << error << ", L1 " << l1;
        throw std::runtime_error(msg.str());
    }
    return integral / level.beta();
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void describe_arm(std::ostringstream& os, const ArmModel& m) {
    std::visit(overloaded{
                   [&](const ConstantArm& a) { os << "constant(" << fmt17(a.value) << ")"; },
                   [&](const GaussianArm& a) {
                       os << "gaussian(" << fmt17(a.mu) << "," << fmt17(a.sigma) << ")";
                   },
                   [&](const UniformArm& a) {
                       os << "uniform(" << fmt17(a.lo) << "," << fmt17(a.hi) << ")";
                   },
                   [&](const ShiftedParetoArm& a) {
                       os << "pareto(" << fmt17(a.shape) << "," << fmt17(a.scale) << ","
                          << fmt17(a.shift) << ")";
                   },
                   [&](const DiscreteArm& a) {
                       os << "discrete(";
                       for (std::size_t i = 0; i < a.values.size(); ++i) {
                           os << fmt17(a.values[i]) << ":" << fmt17(a.probabilities[i]) << ";";
                       }
                       os << ")";
                   },
               },
               m.kind);
}

}  // namespace

void ArmModel::validate() const {
    std::visit(overloaded{
                   [](const ConstantArm& a) { require(std::isfinite(a.value), "constant arm value must be finite"); },
                   [](const GaussianArm& a) { require(a.sigma > 0.0, "gaussian sigma must be positive"); },
                   [](const UniformArm& a) { require(a.lo < a.hi, "uniform arm needs lo < hi"); },
                   [](const ShiftedParetoArm& a) {
                       require(a.shape > 1.0, "pareto shape must exceed 1 (finite mean)");
                       require(a.scale > 0.0, "pareto scale must be positive");
                   },
                   [](const DiscreteArm& a) {
                       require(!a.values.empty(), "discrete arm needs at least one value");
                       require(a.values.size() == a.probabilities.size(),
                               "discrete arm needs one probability per value");
                       double total = 0.0;
                       for (double p : a.probabilities) {
                           require(p >= 0.0, "discrete probabilities must be nonnegative");
                           total += p;
                       }
                       require(std::abs(total - 1.0) <= 1e-12, "discrete probabilities must sum to 1");
                   },
               },
               kind);
}

ArmModel constant_arm(double value, std::string label) {
    ArmModel m{ConstantArm{value}, std::move(label)};
    m.validate();
    return m;
}

ArmModel gaussian_arm(double mu, double sigma, std::string label) {
    ArmModel m{GaussianArm{mu, sigma}, std::move(label)};
    m.validate();
    return m;
}

ArmModel uniform_arm(double lo, double hi, std::string label) {
    ArmModel m{UniformArm{lo, hi}, std::move(label)};
    m.validate();
    return m;
}

ArmModel shifted_pareto_arm(double shape, double scale, double shift, std::string label) {
    ArmModel m{ShiftedParetoArm{shape, scale, shift}, std::move(label)};
    m.validate();
    return m;
}

ArmModel discrete_arm(std::vector<double> values, std::vector<double> probabilities,
                      std::string label) {
    ArmModel m{DiscreteArm{std::move(values), std::move(probabilities)}, std::move(label)};
    m.validate();
    return m;
}

double sample(const ArmModel& model, Rng& rng) {
    return std::visit(
        overloaded{
            [](const ConstantArm& a) { return a.value; },
            [&](const GaussianArm& a) {
                // Box-Muller, cosine branch only.
                const double r = std::sqrt(-2.0 * std::log(rng.uniform_pos()));
                return a.mu + a.sigma * r * std::cos(2.0 * std::numbers::pi * rng.uniform());
            },
            [&](const UniformArm& a) { return a.lo + (a.hi - a.lo) * rng.uniform(); },
            [&](const ShiftedParetoArm& a) {
                return a.shift + a.scale * (std::pow(rng.uniform_pos(), -1.0 / a.shape) - 1.0);
            },
            [&](const DiscreteArm& a) {
                const double u = rng.uniform();
                double cum = 0.0;
                for (std::size_t i = 0; i < a.values.size(); ++i) {
                    cum += a.probabilities[i];
                    if (u < cum) return a.values[i];
                }
                return a.values.back();
            },
        },
        model.kind);
}

double arm_quantile(const ArmModel& model, double u) {
    return std::visit(
        overloaded{
            [](const ConstantArm& a) { return a.value; },
            [&](const GaussianArm& a) {
                if (u <= 0.0) return -std::numeric_limits<double>::infinity();
                if (u >= 1.0) return std::numeric_limits<double>::infinity();
                return a.mu + a.sigma * boost::math::quantile(std_normal(), u);
            },
            [&](const UniformArm& a) { return a.lo + (a.hi - a.lo) * u; },
            [&](const ShiftedParetoArm& a) {
                if (u >= 1.0) return std::numeric_limits<double>::infinity();
                return a.shift + a.scale * (std::pow(1.0 - u, -1.0 / a.shape) - 1.0);
            },
            [&](const DiscreteArm& a) { return discrete_quantile(a, u); },
        },
        model.kind);
}

double arm_mean(const ArmModel& model) {
    return std::visit(overloaded{
                          [](const ConstantArm& a) { return a.value; },
                          [](const GaussianArm& a) { return a.mu; },
                          [](const UniformArm& a) { return 0.5 * (a.lo + a.hi); },
                          [](const ShiftedParetoArm& a) { return a.shift + a.scale / (a.shape - 1.0); },
                          [](const DiscreteArm& a) {
                              double m = 0.0;
                              for (std::size_t i = 0; i < a.values.size(); ++i) {
                                  m += a.values[i] * a.probabilities[i];
                              }
                              return m;
                          },
                      },
                      model.kind);
}

double arm_var(const ArmModel& model, const RiskLevel& level) {
    return arm_quantile(model, level.alpha());
}

double arm_cvar(const ArmModel& model, const RiskLevel& level) {
    const double alpha = level.alpha();
    const double beta = level.beta();
    return std::visit(
        overloaded{
            [](const ConstantArm& a) { return a.value; },
            [&](const GaussianArm& a) {
                const double z = boost::math::quantile(std_normal(), alpha);
                return a.mu + a.sigma * boost::math::pdf(std_normal(), z) / beta;
            },
            [&](const UniformArm& a) { return a.lo + 0.5 * (1.0 + alpha) * (a.hi - a.lo); },
            [&](const ShiftedParetoArm&) { return tail_quadrature(model, level); },
            [&](const DiscreteArm& a) {
                const double v = discrete_quantile(a, alpha);
                double excess = 0.0;
                for (std::size_t i = 0; i < a.values.size(); ++i) {
                    excess += a.probabilities[i] * std::max(a.values[i] - v, 0.0);
                }
                return v + excess / beta;
            },
        },
        model.kind);
}

double arm_abs_moment(const ArmModel& model, double p) {
    require(p > 0.0, "moment order must be positive");
    if (const auto* c = std::get_if<ConstantArm>(&model.kind)) return std::pow(std::abs(c->value), p);
    if (const auto* d = std::get_if<DiscreteArm>(&model.kind)) {
        double m = 0.0;
        for (std::size_t i = 0; i < d->values.size(); ++i) {
            m += d->probabilities[i] * std::pow(std::abs(d->values[i]), p);
        }
        return m;
    }
    if (const auto* pa = std::get_if<ShiftedParetoArm>(&model.kind); pa && pa->shape <= p) {
        return std::numeric_limits<double>::infinity();
    }
    boost::math::quadrature::tanh_sinh<double> integrator;
    double error = 0.0, l1 = 0.0, error_hi = 0.0, l1_hi = 0.0;
    const double lower = integrator.integrate(
        [&](double u) { return std::pow(std::abs(arm_quantile(model, u)), p); }, 0.0, 0.5, 1e-12, &error, &l1);
    const double upper = integrator.integrate(
        [&](double c) { return std::pow(std::abs(upper_quantile(model, c)), p); }, 0.0, 0.5, 1e-12, &error_hi,
        &l1_hi);
    const double value = lower + upper;
    error += error_hi;
    l1 += l1_hi;
    if (!std::isfinite(value) || error > 1e-8 * std::max(1.0, l1)) {
        throw std::runtime_error("moment quadrature did not converge for arm '" + model.label + "'");
    }
    return value;
}

std::optional<double> subgaussian_proxy(const ArmModel& model) {
    return std::visit(
        overloaded{
            [](const ConstantArm&) -> std::optional<double> { return 0.0; },
            [](const GaussianArm& a) -> std::optional<double> { return a.sigma; },
            [](const UniformArm& a) -> std::optional<double> { return 0.5 * (a.hi - a.lo); },
            [](const ShiftedParetoArm&) -> std::optional<double> { return std::nullopt; },
            [](const DiscreteArm& a) -> std::optional<double> {
                const auto [lo, hi] = std::minmax_element(a.values.begin(), a.values.end());
                return 0.5 * (*hi - *lo);
            },
        },
        model.kind);
}

std::string Attribute::describe() const {
    std::ostringstream os;
    switch (kind) {
        case AttributeKind::Mean: os << "mean"; break;
        case AttributeKind::Cvar: os << "cvar(" << fmt17(alpha) << ")"; break;
        case AttributeKind::Custom: os << "custom(" << name << ")"; break;
    }
    os << "@" << coordinate;
    return os.str();
}

Attribute mean_attribute(std::size_t coordinate) {
    Attribute a;
    a.kind = AttributeKind::Mean;
    a.coordinate = coordinate;
    return a;
}

Attribute cvar_attribute(double alpha, std::size_t coordinate) {
    RiskLevel check(alpha);
    (void)check;
    Attribute a;
    a.kind = AttributeKind::Cvar;
    a.coordinate = coordinate;
    a.alpha = alpha;
    return a;
}

std::size_t InstanceSpec::dimension() const {
    return 1 + (extra_coordinates.empty() ? 0 : extra_coordinates.front().size());
}

std::vector<ArmModel> InstanceSpec::coordinates(std::size_t arm) const {
    std::vector<ArmModel> out{arms.at(arm)};
    if (!extra_coordinates.empty()) {
        const auto& extra = extra_coordinates.at(arm);
        out.insert(out.end(), extra.begin(), extra.end());
    }
    return out;
}

std::vector<AttributeConstraint> InstanceSpec::effective_constraints() const {
    if (multi_constraint()) return constraints;
    AttributeConstraint c;
    c.attribute = cvar_attribute(level.alpha());
    c.threshold = tau.value_or(std::numeric_limits<double>::infinity());
    return {c};
}

Attribute InstanceSpec::effective_objective() const {
    return multi_constraint() ? objective.attribute : mean_attribute();
}

void InstanceSpec::validate() const {
    require(!arms.empty(), "instance needs at least one arm");
    for (const auto& a : arms) a.validate();
    if (!extra_coordinates.empty()) {
        require(extra_coordinates.size() == arms.size(),
                "extra coordinates must be given for every arm");
        for (const auto& row : extra_coordinates) {
            require(row.size() == extra_coordinates.front().size(),
                    "every arm must have the same dimension");
            for (const auto& a : row) a.validate();
        }
    }
    if (tau.has_value() && multi_constraint()) {
        throw std::invalid_argument("choose single-constraint or multi-constraint mode");
    }
    require(tau.has_value() || multi_constraint(),
            "instance needs either tau or a constraint list");
    const std::size_t dim = dimension();
    auto check_attribute = [&](const Attribute& a) {
        require(a.coordinate < dim, "attribute coordinate out of range");
        if (a.kind == AttributeKind::Custom) {
            require(a.custom_estimate && a.custom_exact, "custom attribute needs estimator and oracle");
        }
    };
    check_attribute(effective_objective());
    for (const auto& c : constraints) {
        check_attribute(c.attribute);
        if (c.rate) require(*c.rate > 0.0, "constraint rate must be positive");
    }
    if (objective.rate) require(*objective.rate > 0.0, "objective rate must be positive");
}

double attribute_value(const Attribute& attribute, std::span<const ArmModel> coordinates) {
    const ArmModel& m = coordinates[attribute.coordinate];
    switch (attribute.kind) {
        case AttributeKind::Mean: return arm_mean(m);
        case AttributeKind::Cvar: return arm_cvar(m, RiskLevel(attribute.alpha));
        case AttributeKind::Custom: return attribute.custom_exact(m);
    }
    return 0.0;
}

std::string instance_fingerprint(const InstanceSpec& spec) {
    std::ostringstream os;
    os << "alpha=" << fmt17(spec.level.alpha()) << ";";
    if (spec.tau) os << "tau=" << fmt17(*spec.tau) << ";";
    for (std::size_t k = 0; k < spec.num_arms(); ++k) {
        os << "arm" << k << "=";
        for (const auto& m : spec.coordinates(k)) describe_arm(os, m);
        os << ";";
    }
    if (spec.multi_constraint()) {
        os << "g0=" << spec.objective.attribute.describe() << ";";
        if (spec.objective.rate) os << "a0=" << fmt17(*spec.objective.rate) << ";";
        for (const auto& c : spec.constraints) {
            os << "g=" << c.attribute.describe() << "<=" << fmt17(c.threshold);
            if (c.rate) os << ",a=" << fmt17(*c.rate);
            os << ";";
        }
    }
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : os.str()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

const char* to_string(ArmCategory category) {
    switch (category) {
        case ArmCategory::Optimal: return "optimal";
        case ArmCategory::FeasibleSuboptimal: return "feasible_suboptimal";
        case ArmCategory::Deceiver: return "deceiver";
        case ArmCategory::InfeasibleSuboptimal: return "infeasible_suboptimal";
        case ArmCategory::Risky: return "risky";
    }
    return "unknown";
}

InstanceOracle classify(const InstanceSpec& spec) {
    spec.validate();
    const std::size_t K = spec.num_arms();
    const auto constraints = spec.effective_constraints();
    const std::size_t m = constraints.size();

    InstanceOracle o;
    o.fingerprint = instance_fingerprint(spec);
    o.num_arms = K;
    o.single_constraint = !spec.multi_constraint();
    o.attributes.assign(m + 1, std::vector<double>(K));
    for (std::size_t k = 0; k < K; ++k) {
        const auto coords = spec.coordinates(k);
        o.attributes[0][k] = attribute_value(spec.effective_objective(), coords);
        for (std::size_t i = 0; i < m; ++i) {
            o.attributes[i + 1][k] = attribute_value(constraints[i].attribute, coords);
        }
    }
    for (const auto& c : constraints) o.thresholds.push_back(c.threshold);
    o.means = o.attributes[0];
    o.cvars = o.attributes[1];

    // compliant[i][k]: arm k satisfies constraint i+1
    std::vector<std::vector<bool>> compliant(m, std::vector<bool>(K));
    o.gap_constraint.assign(m, std::vector<double>(K, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            const double excess = o.attributes[i + 1][k] - o.thresholds[i];
            compliant[i][k] = excess <= 0.0;
            o.gap_constraint[i][k] = std::max(excess, 0.0);
        }
    }
    o.gap_mean.assign(K, 0.0);
    o.gap_tau.assign(K, 0.0);
    o.gap_risk.assign(K, 0.0);
    o.categories.assign(K, ArmCategory::Optimal);

    std::vector<bool> feasible(K, true);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t i = 0; i < m; ++i) feasible[k] = feasible[k] && compliant[i][k];
        for (std::size_t i = 0; i < m; ++i) o.gap_tau[k] = std::max(o.gap_tau[k], o.gap_constraint[i][k]);
        if (feasible[k]) o.feasible_set.push_back(k);
    }
    o.is_feasible = !o.feasible_set.empty();

    if (o.is_feasible) {
        o.mu_star = std::numeric_limits<double>::infinity();
        for (std::size_t k : o.feasible_set) o.mu_star = std::min(o.mu_star, o.means[k]);
        for (std::size_t k = 0; k < K; ++k) {
            const double gap = o.means[k] - o.mu_star;
            if (gap > kZeroGap) o.gap_mean[k] = gap;
            if (feasible[k]) {
                if (gap <= kZeroGap) {
                    o.optimal_set.push_back(k);
                    o.categories[k] = ArmCategory::Optimal;
                } else {
                    o.categories[k] = ArmCategory::FeasibleSuboptimal;
                }
            } else if (gap <= kZeroGap) {
                o.deceiver_set.push_back(k);
                o.categories[k] = ArmCategory::Deceiver;
            } else {
                o.categories[k] = ArmCategory::InfeasibleSuboptimal;
            }
        }
        return o;
    }

    // Infeasible: relax constraints 1..i* until K_{i*+1} = cap_{j > i*} K_j is nonempty.
    std::vector<std::vector<std::size_t>> suffix(m + 2);  // suffix[i] = K_i, 1-based
    for (std::size_t k = 0; k < K; ++k) suffix[m + 1].push_back(k);
    for (std::size_t i = m; i >= 1; --i) {
        for (std::size_t k : suffix[i + 1]) {
            if (compliant[i - 1][k]) suffix[i].push_back(k);
        }
    }
    std::size_t istar = 1;
    while (suffix[istar + 1].empty()) ++istar;
    o.relaxed = istar;
    const auto& candidates = suffix[istar + 1];
    const auto& g = o.attributes[istar];
    o.cvar_star = std::numeric_limits<double>::infinity();
    for (std::size_t k : candidates) o.cvar_star = std::min(o.cvar_star, g[k]);
    std::vector<bool> candidate(K, false);
    for (std::size_t k : candidates) candidate[k] = true;
    for (std::size_t k = 0; k < K; ++k) {
        double gap;
        if (candidate[k]) {
            gap = std::max(g[k] - o.cvar_star, 0.0);
        } else {
            // Violates a constraint more important than the relaxed ones.
            gap = 0.0;
            for (std::size_t j = istar + 1; j <= m; ++j) gap = std::max(gap, o.gap_constraint[j - 1][k]);
        }
        if (candidate[k] && gap <= kZeroGap) {
            o.optimal_set.push_back(k);
            o.categories[k] = ArmCategory::Optimal;
        } else {
            o.gap_risk[k] = gap;
            o.categories[k] = ArmCategory::Risky;
        }
    }
    return o;
}

std::optional<std::size_t> find_t_star(const std::function<double(std::size_t)>& budget,
                                       std::size_t num_arms, std::size_t limit) {
    for (std::size_t t = std::max<std::size_t>(num_arms, 2); t <= limit; ++t) {
        if (static_cast<double>(t) > budget(t)) return t;
    }
    return std::nullopt;
}

namespace {

std::optional<double> positive_gap(double gap) {
    if (gap > kZeroGap) return gap;
    return std::nullopt;
}

struct SubGaussianTerms {
    const SubGaussianParams& sg;
    double beta;

    double mean_term(double gap, std::size_t T) const {
        return 16.0 * sg.sigma * sg.sigma * std::log(static_cast<double>(T)) / (gap * gap);
    }
    double cvar_term(double gap, std::size_t T) const {
        const double t = static_cast<double>(T);
        return 4.0 * std::log(2.0 * sg.d_big * t * t) / (sg.d_small * beta * beta * gap * gap);
    }
};

struct MomentTerms {
    const MomentParams& mp;
    double beta;

    double mean_term(double gap, std::size_t T) const {
        const double p = mp.p;
        const double t = static_cast<double>(T);
        return std::pow(8.0 / gap, p / (p - 1.0)) * std::pow(mp.b_bound, 1.0 / (p - 1.0)) *
               std::log(2.0 * t * t);
    }
    double cvar_term(double gap, std::size_t T) const {
        const double p = mp.p;
        const double t = static_cast<double>(T);
        const double tail = std::pow(mp.b_bound, 2.0 / (p - 1.0)) *
                            std::pow(2.0 * p, 2.0 * p / (p - 1.0)) /
                            std::pow(gap, 2.0 * p / (p - 1.0));
        return 44.0 * std::log(6.0 * t * t) / (beta * (p - 1.0) * (p - 1.0)) *
               std::max(1.0 / (beta * beta), tail);
    }
};

// Fills u/v/w/rhs for one estimator family.
template <class Terms>
void fill_family(const InstanceOracle& o, std::size_t k, std::size_t T, const Terms& terms,
                 std::optional<double>& u, std::optional<double>& v, std::optional<double>& w,
                 std::optional<double>& rhs) {
    const auto cat = o.categories[k];
    const auto dmean = positive_gap(o.gap_mean[k]);
    const auto dtau = positive_gap(o.gap_tau[k]);
    const auto drisk = positive_gap(o.gap_risk[k]);
    const double K = static_cast<double>(o.num_arms);
    if (dmean && o.is_feasible) u = std::ceil(terms.mean_term(*dmean, T));
    if (dtau) v = std::ceil(terms.cvar_term(*dtau, T));
    if (drisk) w = std::ceil(terms.cvar_term(*drisk, T));
    switch (cat) {
        case ArmCategory::Optimal: break;
        case ArmCategory::FeasibleSuboptimal: rhs = terms.mean_term(*dmean, T) + 5.0; break;
        case ArmCategory::Deceiver: rhs = terms.cvar_term(*dtau, T) + 2.0; break;
        case ArmCategory::InfeasibleSuboptimal:
            rhs = std::min(terms.cvar_term(*dtau, T), terms.mean_term(*dmean, T)) + 5.0;
            break;
        case ArmCategory::Risky:
            if (drisk) rhs = terms.cvar_term(*drisk, T) + K + 2.0;
            break;
    }
}

}  // namespace

TheoremBounds theorem_bounds(const InstanceOracle& oracle, const SubGaussianParams& sg,
                             const std::optional<MomentParams>& mp, const RiskLevel& level,
                             std::size_t horizon, std::span<const double> con_rates) {
    if (horizon < 2) throw std::invalid_argument("theorem bounds need T >= 2");
    TheoremBounds b;
    b.fingerprint = oracle.fingerprint;
    b.horizon = horizon;
    const std::size_t K = oracle.num_arms;
    const double T = static_cast<double>(horizon);
    b.arms.resize(K);
    const double m = static_cast<double>(oracle.thresholds.size());
    if (oracle.is_feasible) {
        b.flag_error_bound = oracle.single_constraint ? 1.0 / T : m / T;
    } else {
        b.flag_error_bound = static_cast<double>(K) / T;
    }

    const SubGaussianTerms sg_terms{sg, level.beta()};
    std::optional<MomentTerms> mp_terms;
    if (mp) mp_terms.emplace(MomentTerms{*mp, level.beta()});

    for (std::size_t k = 0; k < K; ++k) {
        ArmBounds& ab = b.arms[k];
        ab.category = oracle.categories[k];
        if (oracle.single_constraint) {
            fill_family(oracle, k, horizon, sg_terms, ab.u, ab.v, ab.w, ab.rhs);
            if (mp_terms) fill_family(oracle, k, horizon, *mp_terms, ab.u_ht, ab.v_ht, ab.w_ht, ab.rhs_ht);
        }
        if (!con_rates.empty() && oracle.is_feasible) {
            if (con_rates.size() != oracle.thresholds.size() + 1) {
                throw std::invalid_argument("need one rate per attribute (objective first)");
            }
            const double log2t2 = std::log(2.0 * T * T);
            const double mean_term =
                oracle.gap_mean[k] > kZeroGap
                    ? 4.0 * log2t2 / (con_rates[0] * oracle.gap_mean[k] * oracle.gap_mean[k])
                    : std::numeric_limits<double>::infinity();
            double cons_term = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < oracle.thresholds.size(); ++i) {
                const double gap = oracle.gap_constraint[i][k];
                if (gap > kZeroGap) {
                    cons_term = std::min(cons_term, 4.0 * log2t2 / (con_rates[i + 1] * gap * gap));
                }
            }
            switch (ab.category) {
                case ArmCategory::FeasibleSuboptimal: ab.rhs_con = mean_term + 2.0 * m + 3.0; break;
                case ArmCategory::Deceiver: ab.rhs_con = cons_term + m; break;
                case ArmCategory::InfeasibleSuboptimal:
                    ab.rhs_con = std::min(mean_term, cons_term) + 2.0 * m + 3.0;
                    break;
                default: break;
            }
        }
    }

    if (!oracle.is_feasible && oracle.single_constraint) {
        constexpr std::size_t kLimit = 100'000'000;
        auto budget_of = [&](auto const& terms) {
            return [&oracle, terms](std::size_t t) {
                double total = 0.0;
                for (double gap : oracle.gap_tau) total += std::ceil(terms.cvar_term(gap, t));
                return total;
            };
        };
        const auto t_star = find_t_star(budget_of(sg_terms), K, kLimit);
        if (t_star) b.t_star = static_cast<double>(*t_star);
        if (mp_terms) {
            const auto t_ht = find_t_star(budget_of(*mp_terms), K, kLimit);
            if (t_ht) b.t_star_ht = static_cast<double>(*t_ht);
        }
    }
    return b;
}

}  // namespace riskbandit
