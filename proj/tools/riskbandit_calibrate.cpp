// Monte-Carlo check of the calibrated sub-Gaussian CVaR width: how often the
// empirical CVaR of n Gaussian samples leaves [c - w, c + w] for the width w
// used by RC-LCB at horizon T. The nominal per-round miss rate is 1/T^2.

#include <cstdio>
#include <vector>

#include <CLI11.hpp>

#include "riskbandit/instances.hpp"
#include "riskbandit/rng.hpp"

int main(int argc, char** argv) {
    using namespace riskbandit;
    CLI::App app{"Coverage of the calibrated CVaR confidence width"};
    std::size_t trials = 20000;
    std::size_t horizon = 100;
    std::uint64_t seed = 1;
    double sigma = 1.0;
    std::vector<double> alphas{0.9, 0.95, 0.99};
    std::vector<std::size_t> sizes{5, 20, 100, 500, 2000};
    app.add_option("--trials", trials, "Samples per (alpha, n) cell");
    app.add_option("--horizon", horizon, "T used in the width");
    app.add_option("--seed", seed);
    app.add_option("--sigma", sigma);
    app.add_option("--alpha", alphas);
    app.add_option("--n", sizes);
    CLI11_PARSE(app, argc, argv);

    std::printf("%-6s %-6s %-10s %-12s %-12s %-12s\n", "alpha", "n", "width", "miss_upper", "miss_lower",
                "nominal");
    for (double a : alphas) {
        const RiskLevel level(a);
        const SubGaussianParams sg = SubGaussianParams::calibrated(sigma, level);
        const ArmModel arm = gaussian_arm(0.0, sigma);
        const double truth = arm_cvar(arm, level);
        for (std::size_t n : sizes) {
            const double w = cvar_width_subgauss(n, level, sg, horizon);
            Rng rng(derive_seed(seed, n));
            std::size_t upper = 0, lower = 0;
            for (std::size_t t = 0; t < trials; ++t) {
                SampleBuffer buf;
                for (std::size_t i = 0; i < n; ++i) buf.push(sample(arm, rng));
                const double c = empirical_cvar(buf, level);
                upper += c > truth + w;
                lower += c < truth - w;
            }
            const double T = static_cast<double>(horizon);
            std::printf("%-6.3g %-6zu %-10.4g %-12.3g %-12.3g %-12.3g\n", a, n, w,
                        static_cast<double>(upper) / trials, static_cast<double>(lower) / trials, 1.0 / (T * T));
        }
    }
    return 0;
}
