#include "riskbandit/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace riskbandit {

using nlohmann::json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& e : errors) os << "\n  " << e;
    return os.str();
}

// Collects every problem instead of stopping at the first.
class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& message) {
        errors.push_back((path.empty() ? std::string("<root>") : path) + ": " + message);
    }

    bool object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return false;
        }
        for (const auto& [key, value] : j.items()) {
            if (!allowed.count(key)) fail(join(path, key), "unknown key");
        }
        return true;
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }
    static std::string index(const std::string& path, std::size_t i) {
        return path + "[" + std::to_string(i) + "]";
    }

    const json* field(const json& j, const std::string& path, const std::string& key, bool required) {
        if (!j.is_object()) return nullptr;
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) fail(join(path, key), "missing required key");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& j, const std::string& path, const std::string& key,
                                 bool required) {
        const json* v = field(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            fail(join(path, key), "expected a number");
            return std::nullopt;
        }
        const double d = v->get<double>();
        if (!std::isfinite(d)) {
            fail(join(path, key), "expected a finite number");
            return std::nullopt;
        }
        return d;
    }

    std::optional<std::uint64_t> integer(const json& j, const std::string& path, const std::string& key,
                                         bool required) {
        const json* v = field(j, path, key, required);
        if (!v) return std::nullopt;
        return integer_value(*v, join(path, key));
    }

    std::optional<std::uint64_t> integer_value(const json& v, const std::string& path) {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            fail(path, "expected a nonnegative integer");
            return std::nullopt;
        }
        return v.get<std::uint64_t>();
    }

    std::optional<bool> boolean(const json& j, const std::string& path, const std::string& key, bool required) {
        const json* v = field(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) {
            fail(join(path, key), "expected true or false");
            return std::nullopt;
        }
        return v->get<bool>();
    }

    std::optional<std::string> string(const json& j, const std::string& path, const std::string& key,
                                      bool required) {
        const json* v = field(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            fail(join(path, key), "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::vector<double> numbers(const json& j, const std::string& path, const std::string& key) {
        std::vector<double> out;
        const json* v = field(j, path, key, true);
        if (!v) return out;
        if (!v->is_array()) {
            fail(join(path, key), "expected an array of numbers");
            return out;
        }
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_number()) {
                fail(index(join(path, key), i), "expected a number");
            } else {
                out.push_back((*v)[i].get<double>());
            }
        }
        return out;
    }

    // Runs a library validation and records its message under `path`.
    void check(const std::string& path, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            fail(path, e.what());
        }
    }
};

std::optional<ArmModel> read_arm(Reader& r, const json& j, const std::string& path) {
    if (!j.is_object()) {
        r.fail(path, "expected an object");
        return std::nullopt;
    }
    const auto kind = r.string(j, path, "kind", true);
    if (!kind) return std::nullopt;
    const std::string label = r.string(j, path, "label", false).value_or("");
    ArmModel arm;
    arm.label = label;
    if (*kind == "constant") {
        r.object(j, path, {"kind", "label", "value"});
        const auto v = r.number(j, path, "value", true);
        if (!v) return std::nullopt;
        arm.kind = ConstantArm{*v};
    } else if (*kind == "gaussian") {
        r.object(j, path, {"kind", "label", "mu", "sigma"});
        const auto mu = r.number(j, path, "mu", true);
        const auto sigma = r.number(j, path, "sigma", true);
        if (!mu || !sigma) return std::nullopt;
        arm.kind = GaussianArm{*mu, *sigma};
    } else if (*kind == "uniform") {
        r.object(j, path, {"kind", "label", "lo", "hi"});
        const auto lo = r.number(j, path, "lo", true);
        const auto hi = r.number(j, path, "hi", true);
        if (!lo || !hi) return std::nullopt;
        arm.kind = UniformArm{*lo, *hi};
    } else if (*kind == "shifted_pareto") {
        r.object(j, path, {"kind", "label", "shape", "scale", "shift"});
        const auto shape = r.number(j, path, "shape", true);
        const auto scale = r.number(j, path, "scale", true);
        const auto shift = r.number(j, path, "shift", false);
        if (!shape || !scale) return std::nullopt;
        arm.kind = ShiftedParetoArm{*shape, *scale, shift.value_or(0.0)};
    } else if (*kind == "discrete") {
        r.object(j, path, {"kind", "label", "values", "probabilities"});
        auto values = r.numbers(j, path, "values");
        auto probs = r.numbers(j, path, "probabilities");
        arm.kind = DiscreteArm{std::move(values), std::move(probs)};
    } else {
        r.fail(Reader::join(path, "kind"),
               "unknown arm kind '" + *kind + "' (constant, gaussian, uniform, shifted_pareto, discrete)");
        return std::nullopt;
    }
    const std::size_t before = r.errors.size();
    r.check(path, [&] { arm.validate(); });
    if (r.errors.size() != before) return std::nullopt;
    return arm;
}

std::optional<Attribute> read_attribute(Reader& r, const json& j, const std::string& path) {
    if (!r.object(j, path, {"kind", "alpha", "coordinate"})) return std::nullopt;
    const auto kind = r.string(j, path, "kind", true);
    const auto coordinate = r.integer(j, path, "coordinate", false).value_or(0);
    if (!kind) return std::nullopt;
    if (*kind == "mean") {
        if (j.contains("alpha")) r.fail(Reader::join(path, "alpha"), "only used by cvar attributes");
        return mean_attribute(coordinate);
    }
    if (*kind == "cvar") {
        const auto alpha = r.number(j, path, "alpha", true);
        if (!alpha) return std::nullopt;
        std::optional<Attribute> out;
        r.check(Reader::join(path, "alpha"), [&] { out = cvar_attribute(*alpha, coordinate); });
        return out;
    }
    r.fail(Reader::join(path, "kind"), "unknown attribute kind '" + *kind + "' (mean, cvar)");
    return std::nullopt;
}

std::optional<double> read_rate(Reader& r, const json& j, const std::string& path) {
    const auto rate = r.number(j, path, "rate", false);
    if (rate && !(*rate > 0.0)) r.fail(Reader::join(path, "rate"), "rate must be positive");
    return rate;
}

std::optional<InstanceSpec> read_instance(Reader& r, const json& j, const std::string& path) {
    if (!r.object(j, path, {"alpha", "tau", "arms", "extra_coordinates", "objective", "constraints"})) {
        return std::nullopt;
    }
    const std::size_t before = r.errors.size();
    InstanceSpec spec;
    const double alpha = r.number(j, path, "alpha", false).value_or(0.95);
    r.check(Reader::join(path, "alpha"), [&] { spec.level = RiskLevel(alpha); });
    spec.tau = r.number(j, path, "tau", false);

    if (const json* arms = r.field(j, path, "arms", true)) {
        if (!arms->is_array() || arms->empty()) {
            r.fail(Reader::join(path, "arms"), "expected a nonempty array of arms");
        } else {
            for (std::size_t i = 0; i < arms->size(); ++i) {
                if (auto a = read_arm(r, (*arms)[i], Reader::index(Reader::join(path, "arms"), i))) {
                    spec.arms.push_back(std::move(*a));
                }
            }
        }
    }
    if (const json* extra = r.field(j, path, "extra_coordinates", false)) {
        const std::string epath = Reader::join(path, "extra_coordinates");
        if (!extra->is_array()) {
            r.fail(epath, "expected one array of arms per arm");
        } else {
            for (std::size_t i = 0; i < extra->size(); ++i) {
                const json& row = (*extra)[i];
                std::vector<ArmModel> models;
                if (!row.is_array()) {
                    r.fail(Reader::index(epath, i), "expected an array of arms");
                    continue;
                }
                for (std::size_t c = 0; c < row.size(); ++c) {
                    if (auto a = read_arm(r, row[c], Reader::index(Reader::index(epath, i), c))) {
                        models.push_back(std::move(*a));
                    }
                }
                spec.extra_coordinates.push_back(std::move(models));
            }
        }
    }
    if (const json* obj = r.field(j, path, "objective", false)) {
        const std::string opath = Reader::join(path, "objective");
        if (r.object(*obj, opath, {"attribute", "rate"})) {
            if (const json* a = r.field(*obj, opath, "attribute", true)) {
                if (auto attr = read_attribute(r, *a, Reader::join(opath, "attribute"))) {
                    spec.objective.attribute = *attr;
                }
            }
            spec.objective.rate = read_rate(r, *obj, opath);
        }
    }
    if (const json* cons = r.field(j, path, "constraints", false)) {
        const std::string cpath = Reader::join(path, "constraints");
        if (!cons->is_array() || cons->empty()) {
            r.fail(cpath, "expected a nonempty array of constraints");
        } else {
            for (std::size_t i = 0; i < cons->size(); ++i) {
                const std::string ipath = Reader::index(cpath, i);
                const json& c = (*cons)[i];
                if (!r.object(c, ipath, {"attribute", "threshold", "rate"})) continue;
                AttributeConstraint ac;
                if (const json* a = r.field(c, ipath, "attribute", true)) {
                    if (auto attr = read_attribute(r, *a, Reader::join(ipath, "attribute"))) ac.attribute = *attr;
                }
                ac.threshold = r.number(c, ipath, "threshold", true).value_or(0.0);
                ac.rate = read_rate(r, c, ipath);
                spec.constraints.push_back(std::move(ac));
            }
        }
    }
    if (spec.tau && j.contains("constraints")) {
        r.fail(path, "choose single-constraint or multi-constraint mode");
    } else if (!spec.tau && !j.contains("constraints")) {
        r.fail(path, "needs either tau or constraints");
    } else if (j.contains("objective") && !j.contains("constraints")) {
        r.fail(Reader::join(path, "objective"), "only used with constraints");
    }
    if (r.errors.size() != before) return std::nullopt;
    r.check(path, [&] { spec.validate(); });
    if (r.errors.size() != before) return std::nullopt;
    return spec;
}

const std::set<std::string> kPolicyNames = {"rc_lcb", "rclcb_ht", "con_lcb", "baseline_lcb",
                                            "baseline_cvar_lcb"};

std::optional<PolicyConfig> read_policy(Reader& r, const json& j, const std::string& path) {
    if (!r.object(j, path, {"name", "sigma", "d_big", "d_small", "k_inflated", "p", "b_bound"})) {
        return std::nullopt;
    }
    PolicyConfig p;
    const auto name = r.string(j, path, "name", true);
    if (!name) return std::nullopt;
    if (!kPolicyNames.count(*name)) {
        r.fail(Reader::join(path, "name"),
               "unknown policy '" + *name + "' (rc_lcb, rclcb_ht, con_lcb, baseline_lcb, baseline_cvar_lcb)");
        return std::nullopt;
    }
    p.name = *name;
    p.sigma = r.number(j, path, "sigma", false);
    p.d_big = r.number(j, path, "d_big", false);
    p.d_small = r.number(j, path, "d_small", false);
    p.k_inflated = r.boolean(j, path, "k_inflated", false).value_or(false);
    p.p = r.number(j, path, "p", false);
    p.b_bound = r.number(j, path, "b_bound", false);

    auto unused = [&](const char* key) {
        if (j.contains(key)) r.fail(Reader::join(path, key), std::string("not used by ") + p.name);
    };
    const bool ht = p.name == "rclcb_ht";
    if (ht) {
        unused("sigma");
        unused("d_big");
        unused("d_small");
        unused("k_inflated");
        if (!p.p) r.fail(Reader::join(path, "p"), "missing required key");
    } else {
        unused("p");
        unused("b_bound");
        if (p.name != "rc_lcb" && p.name != "baseline_lcb") unused("k_inflated");
    }
    if (p.sigma && !(*p.sigma > 0.0)) r.fail(Reader::join(path, "sigma"), "sigma must be positive");
    if (p.d_big.has_value() != p.d_small.has_value()) {
        r.fail(path, "d_big and d_small must be given together");
    }
    if (p.d_big && !(*p.d_big > 0.0)) r.fail(Reader::join(path, "d_big"), "must be positive");
    if (p.d_small && !(*p.d_small > 0.0)) r.fail(Reader::join(path, "d_small"), "must be positive");
    if (p.p && !(*p.p > 1.0 && *p.p <= 2.0)) r.fail(Reader::join(path, "p"), "p must be in (1, 2]");
    if (p.b_bound && !(*p.b_bound > 0.0)) r.fail(Reader::join(path, "b_bound"), "B must be positive");
    return p;
}

// Checks that need a part which failed to parse are skipped.
void cross_checks(Reader& r, const ExperimentConfig& c, bool instance_ok, bool policy_ok) {
    if (c.reps == 0) r.fail("reps", "reps must be at least 1");
    if (!instance_ok) return;
    const std::size_t K = c.instance.num_arms();
    for (std::size_t i = 0; i < c.horizons.size(); ++i) {
        if (c.horizons[i] < std::max<std::size_t>(K, 2)) {
            r.fail(c.horizons.size() == 1 ? "horizon" : Reader::index("horizon", i),
                   "T = " + std::to_string(c.horizons[i]) + " is below the number of arms K = " +
                       std::to_string(K) + " (or 2)");
        }
    }
    if (!policy_ok) return;
    if (c.policy.name == "rclcb_ht" && c.instance.level.beta() > 0.5) {
        r.fail("instance.alpha", "heavy-tail schedule requires alpha > 0.5");
    }
    if (c.policy.name != "con_lcb" && c.instance.multi_constraint()) {
        r.fail("policy.name", c.policy.name + " needs a single-constraint instance (tau)");
    }
    if (c.analysis.tradeoff_infeasible) {
        const auto& inf = *c.analysis.tradeoff_infeasible;
        if (c.horizons.size() < 2) r.fail("horizon", "tradeoff mode needs a list of at least two horizons");
        if (inf.num_arms() != K || inf.level.alpha() != c.instance.level.alpha()) {
            r.fail("analysis.tradeoff.infeasible_instance", "must share arm count and alpha with instance");
        }
        r.check("analysis.tradeoff.infeasible_instance", [&] {
            if (classify(inf).is_feasible) throw std::invalid_argument("instance is feasible");
        });
        r.check("instance", [&] {
            if (!classify(c.instance).is_feasible) throw std::invalid_argument("tradeoff mode needs a feasible instance");
        });
    }
    if (r.errors.empty()) {
        r.check("policy", [&] { resolve_policy(c.policy, c.instance); });
    }
}

json arm_to_json(const ArmModel& m) {
    json j = std::visit(
        [](const auto& a) -> json {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, ConstantArm>) return {{"kind", "constant"}, {"value", a.value}};
            if constexpr (std::is_same_v<T, GaussianArm>) {
                return {{"kind", "gaussian"}, {"mu", a.mu}, {"sigma", a.sigma}};
            }
            if constexpr (std::is_same_v<T, UniformArm>) return {{"kind", "uniform"}, {"lo", a.lo}, {"hi", a.hi}};
            if constexpr (std::is_same_v<T, ShiftedParetoArm>) {
                return {{"kind", "shifted_pareto"}, {"shape", a.shape}, {"scale", a.scale}, {"shift", a.shift}};
            }
            if constexpr (std::is_same_v<T, DiscreteArm>) {
                return {{"kind", "discrete"}, {"values", a.values}, {"probabilities", a.probabilities}};
            }
        },
        m.kind);
    if (!m.label.empty()) j["label"] = m.label;
    return j;
}

json attribute_to_json(const Attribute& a) {
    json j;
    j["kind"] = a.kind == AttributeKind::Mean ? "mean" : "cvar";
    if (a.kind == AttributeKind::Cvar) j["alpha"] = a.alpha;
    j["coordinate"] = a.coordinate;
    return j;
}

double max_proxy(const InstanceSpec& instance) {
    double sigma = 0.0;
    for (std::size_t k = 0; k < instance.num_arms(); ++k) {
        for (const auto& m : instance.coordinates(k)) {
            const auto proxy = subgaussian_proxy(m);
            if (!proxy) {
                throw std::invalid_argument("arm '" + m.label + "' has no sub-Gaussian proxy; set policy.sigma");
            }
            sigma = std::max(sigma, *proxy);
        }
    }
    return sigma > 0.0 ? sigma : 1.0;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("<document>: ") + e.what()});
    }
    return parse_config(doc);
}

ExperimentConfig parse_config(const json& doc) {
    Reader r;
    ExperimentConfig c;
    if (!r.object(doc, "", {"name", "instance", "policy", "horizon", "reps", "base_seed", "outputs", "analysis"})) {
        throw ConfigError(r.errors);
    }
    c.name = r.string(doc, "", "name", false).value_or("");
    bool instance_ok = false;
    if (const json* inst = r.field(doc, "", "instance", true)) {
        if (auto spec = read_instance(r, *inst, "instance")) {
            c.instance = std::move(*spec);
            instance_ok = true;
        }
    }
    bool policy_ok = false;
    if (const json* pol = r.field(doc, "", "policy", true)) {
        if (auto p = read_policy(r, *pol, "policy")) {
            c.policy = *p;
            policy_ok = true;
        }
    }
    if (const json* h = r.field(doc, "", "horizon", true)) {
        if (h->is_array()) {
            if (h->empty()) r.fail("horizon", "expected at least one horizon");
            for (std::size_t i = 0; i < h->size(); ++i) {
                if (auto v = r.integer_value((*h)[i], Reader::index("horizon", i))) c.horizons.push_back(*v);
            }
        } else if (auto v = r.integer_value(*h, "horizon")) {
            c.horizons.push_back(*v);
        }
    }
    c.reps = r.integer(doc, "", "reps", false).value_or(1);
    c.base_seed = r.integer(doc, "", "base_seed", false).value_or(0);
    if (const json* out = r.field(doc, "", "outputs", false)) {
        if (r.object(*out, "outputs", {"dir", "csv", "summary"})) {
            c.outputs.dir = r.string(*out, "outputs", "dir", false).value_or(c.outputs.dir);
            c.outputs.csv = r.boolean(*out, "outputs", "csv", false).value_or(true);
            c.outputs.summary = r.boolean(*out, "outputs", "summary", false).value_or(true);
        }
    }
    if (const json* an = r.field(doc, "", "analysis", false)) {
        if (r.object(*an, "analysis", {"bounds", "lower_bounds", "tradeoff"})) {
            c.analysis.bounds = r.boolean(*an, "analysis", "bounds", false).value_or(true);
            c.analysis.lower_bounds = r.boolean(*an, "analysis", "lower_bounds", false).value_or(true);
            if (const json* t = r.field(*an, "analysis", "tradeoff", false)) {
                if (r.object(*t, "analysis.tradeoff", {"infeasible_instance"})) {
                    if (const json* inf = r.field(*t, "analysis.tradeoff", "infeasible_instance", true)) {
                        c.analysis.tradeoff_infeasible =
                            read_instance(r, *inf, "analysis.tradeoff.infeasible_instance");
                    }
                }
            }
        }
    }
    cross_checks(r, c, instance_ok, policy_ok);
    if (!r.errors.empty()) throw ConfigError(r.errors);
    return c;
}

void validate_config(const ExperimentConfig& config) {
    Reader r;
    cross_checks(r, config, true, true);
    if (!r.errors.empty()) throw ConfigError(r.errors);
}

json instance_to_json(const InstanceSpec& spec) {
    json j;
    j["alpha"] = spec.level.alpha();
    if (spec.tau) j["tau"] = *spec.tau;
    j["arms"] = json::array();
    for (const auto& a : spec.arms) j["arms"].push_back(arm_to_json(a));
    if (!spec.extra_coordinates.empty()) {
        j["extra_coordinates"] = json::array();
        for (const auto& row : spec.extra_coordinates) {
            json r = json::array();
            for (const auto& a : row) r.push_back(arm_to_json(a));
            j["extra_coordinates"].push_back(r);
        }
    }
    if (spec.multi_constraint()) {
        j["objective"]["attribute"] = attribute_to_json(spec.objective.attribute);
        if (spec.objective.rate) j["objective"]["rate"] = *spec.objective.rate;
        j["constraints"] = json::array();
        for (const auto& c : spec.constraints) {
            json cj{{"attribute", attribute_to_json(c.attribute)}, {"threshold", c.threshold}};
            if (c.rate) cj["rate"] = *c.rate;
            j["constraints"].push_back(cj);
        }
    }
    return j;
}

json to_json(const ExperimentConfig& c) {
    json j;
    if (!c.name.empty()) j["name"] = c.name;
    j["instance"] = instance_to_json(c.instance);
    json p{{"name", c.policy.name}};
    if (c.policy.sigma) p["sigma"] = *c.policy.sigma;
    if (c.policy.d_big) p["d_big"] = *c.policy.d_big;
    if (c.policy.d_small) p["d_small"] = *c.policy.d_small;
    if (c.policy.name == "rc_lcb" || c.policy.name == "baseline_lcb") p["k_inflated"] = c.policy.k_inflated;
    if (c.policy.p) p["p"] = *c.policy.p;
    if (c.policy.b_bound) p["b_bound"] = *c.policy.b_bound;
    j["policy"] = p;
    if (c.horizons.size() == 1) {
        j["horizon"] = c.horizons.front();
    } else {
        j["horizon"] = c.horizons;
    }
    j["reps"] = c.reps;
    j["base_seed"] = c.base_seed;
    j["outputs"] = {{"dir", c.outputs.dir}, {"csv", c.outputs.csv}, {"summary", c.outputs.summary}};
    j["analysis"] = {{"bounds", c.analysis.bounds}, {"lower_bounds", c.analysis.lower_bounds}};
    if (c.analysis.tradeoff_infeasible) {
        j["analysis"]["tradeoff"]["infeasible_instance"] = instance_to_json(*c.analysis.tradeoff_infeasible);
    }
    return j;
}

PolicySpec resolve_policy(const PolicyConfig& p, const InstanceSpec& instance) {
    auto subgaussian = [&](const RiskLevel& level) {
        const double sigma = p.sigma ? *p.sigma : max_proxy(instance);
        SubGaussianParams sg = SubGaussianParams::calibrated(sigma, level);
        if (p.d_big) {
            sg.d_big = *p.d_big;
            sg.d_small = *p.d_small;
        }
        sg.validate();
        return sg;
    };
    auto need_tau = [&]() {
        if (!instance.tau) throw std::invalid_argument(p.name + " needs a single-constraint instance (tau)");
        return *instance.tau;
    };

    if (p.name == "rc_lcb") {
        return RcLcbConfig{subgaussian(instance.level), instance.level, need_tau(), p.k_inflated};
    }
    if (p.name == "rclcb_ht") {
        MomentParams mp;
        mp.p = p.p.value_or(2.0);
        mp.validate();
        if (p.b_bound) {
            mp.b_bound = *p.b_bound;
        } else {
            double b = 0.0;
            for (const auto& arm : instance.arms) b = std::max(b, arm_abs_moment(arm, mp.p));
            if (!std::isfinite(b)) throw std::invalid_argument("an arm has an infinite p-th moment");
            mp.b_bound = b > 0.0 ? b : 1.0;
        }
        mp.validate();
        if (instance.level.beta() > 0.5) throw std::invalid_argument("heavy-tail schedule requires alpha > 0.5");
        return RcLcbHtConfig{mp, instance.level, need_tau()};
    }
    if (p.name == "con_lcb") {
        ConLcbConfig c;
        c.sigma = p.sigma ? *p.sigma : max_proxy(instance);
        if (p.d_big) c.sg = SubGaussianParams{c.sigma, *p.d_big, *p.d_small};
        // Reject custom or malformed rate setups now rather than in a worker.
        make_policy(c, instance, std::max<std::size_t>(instance.num_arms(), 2));
        return c;
    }
    if (p.name == "baseline_lcb") {
        BaselineLcbConfig c;
        const SubGaussianParams sg = subgaussian(instance.level);
        c.sigma = sg.sigma;
        if (instance.tau) c.flag_constraint = RcLcbConfig{sg, instance.level, *instance.tau, p.k_inflated};
        return c;
    }
    if (p.name == "baseline_cvar_lcb") {
        return BaselineCvarLcbConfig{subgaussian(instance.level), instance.level, instance.tau};
    }
    throw std::invalid_argument("unknown policy '" + p.name + "'");
}

}  // namespace riskbandit
