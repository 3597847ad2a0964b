#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "riskbandit/policies.hpp"
#include "riskbandit/rng.hpp"

using namespace riskbandit;

namespace {

// Width-1 CVaR constants at n = 1 for the given horizon.
SubGaussianParams unit_width(const RiskLevel& level, std::size_t T) {
    const double t = static_cast<double>(T);
    const double d_big = 1.0;
    return SubGaussianParams{1.0, d_big, std::log(2.0 * d_big * t * t) / (level.beta() * level.beta())};
}

InstanceSpec constants(std::vector<double> values, double tau) {
    InstanceSpec s;
    for (double v : values) s.arms.push_back(constant_arm(v));
    s.tau = tau;
    return s;
}

InstanceSpec three_gaussians(double tau) {
    InstanceSpec s;
    s.arms = {gaussian_arm(0.1, 1.0), gaussian_arm(0.0, 1.0), gaussian_arm(0.5, 1.0)};
    s.tau = tau;
    return s;
}

// One draw of every coordinate from the arm's own stream.
struct Streams {
    const InstanceSpec& spec;
    std::vector<Rng> rngs;
    std::vector<std::vector<ArmModel>> coords;

    Streams(const InstanceSpec& s, std::uint64_t seed) : spec(s) {
        for (std::size_t k = 0; k < s.num_arms(); ++k) {
            rngs.emplace_back(derive_seed(seed, k));
            coords.push_back(s.coordinates(k));
        }
    }
    std::vector<double> draw(std::size_t arm) {
        std::vector<double> x;
        for (const auto& m : coords[arm]) x.push_back(sample(m, rngs[arm]));
        return x;
    }
};

// Index policy on constant arms evaluated by hand: init round robin, then
// lowest index(value, n) with ties to the lower arm.
template <class Index>
std::vector<std::size_t> replay_constant(const std::vector<double>& values, std::size_t T, Index index) {
    std::vector<std::size_t> n(values.size(), 0), out;
    for (std::size_t t = 0; t < T; ++t) {
        std::size_t pick = t;
        if (t >= values.size()) {
            pick = 0;
            for (std::size_t k = 1; k < values.size(); ++k) {
                if (index(values[k], n[k]) < index(values[pick], n[pick])) pick = k;
            }
        }
        ++n[pick];
        out.push_back(pick);
    }
    return out;
}

std::vector<std::size_t> play(Policy& p, const InstanceSpec& spec, std::uint64_t seed) {
    Streams streams(spec, seed);
    std::vector<std::size_t> actions;
    while (p.round() < p.horizon()) {
        const std::size_t arm = p.select();
        actions.push_back(arm);
        p.observe(arm, streams.draw(arm));
    }
    return actions;
}

}  // namespace

TEST_CASE("initialization is round robin for every policy") {
    const auto inst = constants({3.0, 1.0, 2.0}, 100.0);
    const RiskLevel level(0.95);
    const std::vector<PolicySpec> specs{
        RcLcbConfig{SubGaussianParams{}, level, 100.0, false},
        RcLcbHtConfig{MomentParams{2.0, 9.0}, level, 100.0},
        ConLcbConfig{},
        BaselineLcbConfig{},
        BaselineCvarLcbConfig{SubGaussianParams{}, level, std::nullopt},
    };
    for (const auto& spec : specs) {
        auto p = make_policy(spec, inst, 20);
        CHECK_THROWS_WITH(p->plausibly_feasible_set(), "initialization incomplete");
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(p->select() == k);
            CHECK(p->select() == k);  // idempotent until observed
            p->observe(k, 1.0);
        }
        for (std::size_t k = 0; k < 3; ++k) CHECK(p->pulls()[k] == 1);
        CHECK(p->round() == 3);
    }
}

TEST_CASE("protocol errors") {
    const auto inst = constants({0.0, 1.0}, 100.0);
    auto p = make_policy(RcLcbConfig{SubGaussianParams{}, RiskLevel(0.95), 100.0, false}, inst, 3);
    CHECK_THROWS_WITH(p->observe(1, 0.0), "protocol violation");
    CHECK(p->select() == 0);
    CHECK_THROWS_WITH(p->observe(1, 0.0), "protocol violation");
    p->observe(0, 0.0);
    CHECK_THROWS(p->feasibility_flag());
    p->observe(p->select(), 1.0);
    const auto a = p->select();
    p->observe(a, a == 0 ? 0.0 : 1.0);
    CHECK_THROWS_WITH(p->select(), "horizon exhausted");
    CHECK_NOTHROW(p->feasibility_flag());
}

TEST_CASE("RC-LCB on constant arms") {
    const RiskLevel level(0.95);
    SUBCASE("slack threshold picks the lower mean") {
        const auto inst = constants({0.0, 1.0}, 100.0);
        // Narrow widths: the 1-arm LCB never drops below the 0-arm one.
        RcLcb p(2, 10, RcLcbConfig{SubGaussianParams{0.1, 2.0, 0.125}, level, 100.0, false});
        const auto actions = play(p, inst, 1);
        for (std::size_t t = 2; t < 10; ++t) CHECK(actions[t] == 0);
        CHECK(p.plausibly_feasible_set() == std::vector<std::size_t>{0, 1});
        CHECK(p.feasibility_flag());
    }
    SUBCASE("unit sigma follows the hand-evaluated index") {
        const auto inst = constants({0.0, 1.0}, 100.0);
        RcLcb p(2, 10, RcLcbConfig{SubGaussianParams{1.0, 2.0, 0.125}, level, 100.0, false});
        const auto actions = play(p, inst, 1);
        const auto expected = replay_constant({0.0, 1.0}, 10, [](double value, std::size_t n) {
            return value - std::sqrt(2.0 * std::log(100.0) / static_cast<double>(n));
        });
        CHECK(actions == expected);
        CHECK(actions[4] == 1);  // width 3.03/sqrt(n) lets the 1-arm back in
    }
    SUBCASE("empty set falls back to the CVaR LCB") {
        const auto inst = constants({0.0, 1.0}, -10.0);
        RcLcb p(2, 10, RcLcbConfig{unit_width(level, 10), level, -10.0, false});
        const auto actions = play(p, inst, 1);
        for (std::size_t t = 2; t < 10; ++t) CHECK(actions[t] == 0);
        CHECK(p.plausibly_feasible_set().empty());
        CHECK(!p.feasibility_flag());
    }
    SUBCASE("forced unit width filters the high arm") {
        const auto inst = constants({0.0, 10.0}, 5.0);
        RcLcb p(2, 10, RcLcbConfig{unit_width(level, 10), level, 5.0, false});
        p.observe(p.select(), 0.0);
        p.observe(p.select(), 10.0);
        CHECK(p.cvar_lcb(0) == doctest::Approx(-1.0));
        CHECK(p.plausibly_feasible_set() == std::vector<std::size_t>{0});
        CHECK(p.plausibly_feasible_set() == p.plausibly_feasible_set());
    }
}

TEST_CASE("feasibility flag on constant arms") {
    const RiskLevel level(0.95);
    for (std::size_t T : {1, 2, 10, 100}) {
        RcLcb p(1, T, RcLcbConfig{SubGaussianParams{}, level, 5.0, false});
        play(p, constants({0.0}, 5.0), 3);
        CHECK(p.feasibility_flag());
    }
    // Infeasible constant 10 with tau 5 is flagged once the width drops below 5.
    const auto sg = unit_width(level, 50);
    for (std::size_t T : {10, 50, 200}) {
        RcLcb p(1, T, RcLcbConfig{sg, level, 5.0, false});
        play(p, constants({10.0}, 5.0), 3);
        const bool wide = cvar_width_subgauss(T, level, sg, T) >= 5.0;
        CHECK(p.feasibility_flag() == wide);
    }
    // Boundary inclusion: threshold exactly at the arm CVaR.
    RcLcb p(1, 1000, RcLcbConfig{SubGaussianParams{}, level, 2.5, false});
    play(p, constants({2.5}, 2.5), 3);
    CHECK(p.feasibility_flag());
}

TEST_CASE("RCLCB-HT") {
    CHECK_THROWS(RcLcbHt(2, 10, RcLcbHtConfig{MomentParams{2.0, 1.0}, RiskLevel(0.4), 10.0}));
    const auto inst = constants({0.0, 0.5}, 50.0);
    const std::size_t T = 2000;
    RcLcbHt p(2, T, RcLcbHtConfig{MomentParams{2.0, 1.0}, RiskLevel(0.95), 50.0});
    const auto actions = play(p, inst, 2);
    // Truncation level for the i-th sample is sqrt(i / log(2 T^2)); 0.5 is zeroed until it is reached.
    const double log2t2 = std::log(2.0 * T * T);
    const auto expected = replay_constant({0.0, 0.5}, T, [&](double value, std::size_t n) {
        double sum = 0.0;
        for (std::size_t i = 1; i <= n; ++i) sum += value <= std::sqrt(i / log2t2) ? value : 0.0;
        return sum / n - 4.0 * std::sqrt(log2t2 / n);
    });
    CHECK(actions == expected);
    CHECK(p.pulls()[0] > 5 * p.pulls()[1]);
    // Identical arms: ties go to the lowest index, so pulls cycle 0, 1, 2.
    RcLcbHt q(3, 50, RcLcbHtConfig{MomentParams{2.0, 1.0}, RiskLevel(0.95), 50.0});
    const auto same = play(q, constants({0.3, 0.3, 0.3}, 50.0), 2);
    for (std::size_t t = 0; t < same.size(); ++t) CHECK(same[t] == t % 3);
    RcLcbHt r(3, 50, RcLcbHtConfig{MomentParams{2.0, 1.0}, RiskLevel(0.95), 50.0});
    CHECK(play(r, constants({0.3, 0.3, 0.3}, 50.0), 9) == same);
}

TEST_CASE("Con-LCB reduces to RC-LCB on one CVaR constraint") {
    for (double tau : {2.3, 1.0, 2.15}) {
        const auto inst = three_gaussians(tau);
        const auto sg = default_subgaussian(inst);
        for (std::uint64_t seed : {1, 2, 3}) {
            RcLcb rc(3, 1000, RcLcbConfig{sg, inst.level, tau, false});
            ConLcbConfig cc;
            cc.sg = sg;
            auto con = make_policy(cc, inst, 1000);
            const auto a = play(rc, inst, seed);
            const auto b = play(*con, inst, seed);
            CHECK(a == b);
            CHECK(rc.feasibility_flag() == con->feasibility_flag());
        }
    }
}

TEST_CASE("Con-LCB with slack constraints is a plain mean LCB") {
    const auto inst = three_gaussians(1e9);
    ConLcbConfig cc;
    cc.sigma = 1.0;
    auto con = make_policy(cc, inst, 2000);
    BaselineLcb base(3, 2000, BaselineLcbConfig{1.0, std::nullopt});
    CHECK(play(*con, inst, 9) == play(base, inst, 9));
}

TEST_CASE("Con-LCB relaxation cascade") {
    // Coordinate 0 carries g_1, coordinate 1 carries g_2; the objective is coordinate 0's mean.
    InstanceSpec s;
    s.arms = {constant_arm(10.0), constant_arm(10.0)};
    s.extra_coordinates = {{constant_arm(0.0)}, {constant_arm(10.0)}};
    s.objective.attribute = mean_attribute(0);
    s.objective.rate = 1e6;
    s.constraints = {{mean_attribute(0), 0.0, 1e6}, {mean_attribute(1), 0.0, 1e6}};
    auto p = make_policy(ConLcbConfig{}, s, 20);
    auto* con = dynamic_cast<ConLcb*>(p.get());
    REQUIRE(con);
    const auto actions = play(*con, s, 4);
    CHECK(con->constraint_set(1).empty());
    CHECK(con->constraint_set(2) == std::vector<std::size_t>{0});
    CHECK(con->plausibly_feasible_set().empty());
    for (std::size_t t = 2; t < actions.size(); ++t) CHECK(actions[t] == 0);
    CHECK(!con->feasibility_flag());
    CHECK(con->rates().size() == 3);
}

TEST_CASE("matched rates reproduce the RC-LCB widths") {
    const RiskLevel level(0.95);
    const auto sg = SubGaussianParams::calibrated(1.3, level);
    for (std::size_t T : {100, 1000, 20000}) {
        for (std::size_t n : {1, 7, 500}) {
            CHECK(con_width(n, matched_mean_rate(1.3, T), T) ==
                  doctest::Approx(mean_width_subgauss(n, 1.3, T)).epsilon(1e-12));
            CHECK(con_width(n, matched_cvar_rate(level, sg, T), T) ==
                  doctest::Approx(cvar_width_subgauss(n, level, sg, T)).epsilon(1e-12));
        }
        CHECK(con_width(2, 0.5, T) < con_width(1, 0.5, T));
    }
}

TEST_CASE("baselines") {
    BaselineLcb b(2, 30, BaselineLcbConfig{0.1, std::nullopt});
    const auto a = play(b, constants({0.0, 1.0}, 0.0), 1);
    for (std::size_t t = 2; t < a.size(); ++t) CHECK(a[t] == 0);
    BaselineLcb wide(2, 30, BaselineLcbConfig{1.0, std::nullopt});
    CHECK(play(wide, constants({0.0, 1.0}, 0.0), 1) ==
          replay_constant({0.0, 1.0}, 30, [](double value, std::size_t n) {
              return value - std::sqrt(2.0 * std::log(900.0) / static_cast<double>(n));
          }));

    // Equal values: ties to the lowest index make the pulls cycle.
    BaselineCvarLcb c(3, 30, BaselineCvarLcbConfig{SubGaussianParams{}, RiskLevel(0.95), std::nullopt});
    const auto eq = play(c, constants({1.0, 1.0, 1.0}, 0.0), 1);
    for (std::size_t t = 0; t < eq.size(); ++t) CHECK(eq[t] == t % 3);

    // With an unreachable threshold RC-LCB always takes the CVaR branch.
    const auto inst = three_gaussians(-1e300);
    const auto sg = default_subgaussian(inst);
    RcLcb rc(3, 1500, RcLcbConfig{sg, inst.level, -1e300, false});
    BaselineCvarLcb bc(3, 1500, BaselineCvarLcbConfig{sg, inst.level, std::nullopt});
    CHECK(play(rc, inst, 5) == play(bc, inst, 5));
}

TEST_CASE("baseline CVaR LCB concentrates on the minimum-CVaR arm") {
    const auto inst = three_gaussians(1.0);
    const auto sg = default_subgaussian(inst);
    const std::size_t T = 20000;
    double share = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        BaselineCvarLcb p(3, T, BaselineCvarLcbConfig{sg, inst.level, std::nullopt});
        play(p, inst, seed);
        share += static_cast<double>(p.pulls()[1]) / T / 20.0;
    }
    CHECK(share > 0.5);
}

TEST_CASE("baseline LCB converges to the deceiver") {
    InstanceSpec s;
    s.arms = {gaussian_arm(-0.5, 2.0), gaussian_arm(0.0, 1.0)};
    s.tau = 2.5;
    int majority = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        BaselineLcb p(2, 10000, BaselineLcbConfig{2.0, std::nullopt});
        play(p, s, seed);
        majority += 2 * p.pulls()[0] > 10000;
    }
    CHECK(majority >= 9);
}

TEST_CASE("determinism and isolation") {
    const auto inst = three_gaussians(2.3);
    const auto sg = default_subgaussian(inst);
    RcLcb a(3, 800, RcLcbConfig{sg, inst.level, 2.3, false});
    RcLcb b(3, 800, RcLcbConfig{sg, inst.level, 2.3, false});
    RcLcb c(3, 800, RcLcbConfig{sg, inst.level, 2.3, false});
    Streams sa(inst, 77), sb(inst, 77), sc(inst, 78);
    while (a.round() < 800) {
        const auto ka = a.select();
        const auto kc = c.select();
        a.observe(ka, sa.draw(ka));
        c.observe(kc, sc.draw(kc));  // interleaved, different stream
        const auto kb = b.select();
        b.observe(kb, sb.draw(kb));
        REQUIRE(ka == kb);
        for (std::size_t k = 0; k < 3; ++k) {
            REQUIRE(a.cvar_lcb(k) == b.cvar_lcb(k));
            REQUIRE(a.mean_lcb(k) == b.mean_lcb(k));
        }
        const auto& pulls = a.pulls();
        REQUIRE(std::accumulate(pulls.begin(), pulls.end(), std::size_t{0}) == a.round());
    }
}

TEST_CASE("truly feasible arms stay in the plausible set") {
    const auto inst = three_gaussians(2.3);
    const auto sg = default_subgaussian(inst);
    const std::size_t T = 1000;
    const int reps = 10000;
    int dropped[2] = {0, 0};
    for (int r = 0; r < reps; ++r) {
        RcLcb p(3, T, RcLcbConfig{sg, inst.level, 2.3, false});
        Streams st(inst, derive_seed(31, r));
        bool lost[2] = {false, false};
        while (p.round() < T) {
            const auto k = p.select();
            p.observe(k, st.draw(k));
            for (std::size_t j = 0; j < 2; ++j) {
                lost[j] = lost[j] || p.cvar_lcb(j) > 2.3;
            }
        }
        for (int j = 0; j < 2; ++j) dropped[j] += lost[j];
    }
    for (int j = 0; j < 2; ++j) {
        const double rate = static_cast<double>(dropped[j]) / reps;
        const double bound = 2.0 / T;
        CHECK(rate <= bound + 3.0 * std::sqrt(bound * (1.0 - bound) / reps));
    }
}
