#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fouest/fbm.hpp"
#include "fouest/fou.hpp"

using namespace fouest;

namespace {

double rel_diff(double a, double b) {
    const double scale = std::max(std::fabs(a), std::fabs(b));
    return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

// zero-noise hook: drives the simulator with an identically-zero driver
struct ZeroSampler {
    std::int64_t n;
    std::int64_t count() const { return n; }
    std::vector<double> sample(RngSeed) const {
        return std::vector<double>(static_cast<std::size_t>(n), 0.0);
    }
};

// residual of the integral equation X_t = x0 + theta int_0^t X ds + B_t,
// quadrature taken at `stride` refined points, normalized by the path's
// magnitude so exploding theta>0 paths are comparable
double integral_equation_residual(const SimulatedPair& pair, const FouParams& params,
                                  std::int64_t stride) {
    const SampledPath& xr = *pair.fou_refined;
    const std::int64_t rho = xr.grid.count / pair.fou.grid.count;
    REQUIRE(rho % stride == 0);
    const double dt_eff = xr.grid.dt * static_cast<double>(stride);

    double max_x = 0.0;
    for (double v : pair.fou.values) max_x = std::max(max_x, std::fabs(v));

    double worst = 0.0;
    double integral = 0.0;
    std::int64_t j = 0;
    for (std::int64_t k = 0; k <= pair.fou.grid.count; ++k) {
        while (j + stride <= k * rho) {
            integral += 0.5 * dt_eff *
                        (xr.values[static_cast<std::size_t>(j)] +
                         xr.values[static_cast<std::size_t>(j + stride)]);
            j += stride;
        }
        const double residual =
            std::fabs(pair.fou.values[static_cast<std::size_t>(k)] - params.x0 -
                      params.theta * integral -
                      pair.driver.values[static_cast<std::size_t>(k)]);
        worst = std::max(worst, residual);
    }
    return worst / (1.0 + max_x);
}

}  // namespace

TEST_CASE("grid spec derived quantities") {
    CHECK(GridSpec(5, 2.0).steps() == 25);
    CHECK(GridSpec(10, 4.0).steps() == 10000);
    CHECK(GridSpec(64, 1.2).steps() == 147);
    CHECK(GridSpec(8, 1.2).steps() == 12);
    CHECK(GridSpec(10, 2.0).dt() == 0.1);
    CHECK_THROWS_AS(GridSpec(0, 2.0), InvalidParameter);
    CHECK_THROWS_AS(GridSpec(5, 1.0), InvalidParameter);
}

TEST_CASE("zero-noise skeleton") {
    const HurstIndex h(0.45);
    const SampledPath path = zero_noise_path(FouParams(2.0, 1.0, h), GridSpec(5, 2.0));
    CHECK(rel_diff(path.values[5], 7.3890560989306502) < 1e-13);

    const SampledPath flat = zero_noise_path(FouParams(0.0, 3.0, h), GridSpec(4, 2.0));
    for (double v : flat.values) CHECK(v == 3.0);

    const SampledPath decay = zero_noise_path(FouParams(-1.0, 1.0, h), GridSpec(4, 2.0));
    CHECK(rel_diff(decay.values[4], 0.36787944117144232) < 1e-13);

    CHECK_THROWS_AS(zero_noise_path(FouParams(2.0, 1.0, h), GridSpec(2, 10.0)),
                    OverflowDetected);

    const SampledPath scaled = zero_noise_path(FouParams(2.0, 1.0, h), GridSpec(2, 10.0), true);
    CHECK(scaled.scaled());
    // value at k: x0 e^{theta k/n}; check log2 of the represented value
    const std::int64_t k = 1024;
    const double expected_log2 = 2.0 * (static_cast<double>(k) / 2.0) * std::log2(std::exp(1.0));
    const double got_log2 = std::log2(std::fabs(scaled.values[static_cast<std::size_t>(k)])) +
                            static_cast<double>(scaled.scale2[static_cast<std::size_t>(k)]);
    CHECK(std::fabs(got_log2 - expected_log2) < 1e-9 * expected_log2);
}

TEST_CASE("theta=0 reduces exactly to x0 + driver") {
    const GridSpec grid(8, 2.0);
    const FouParams params(0.0, 1.0, HurstIndex(0.3));
    const SimulatedPair pair = simulate_fou(params, grid, Scheme(), RngSeed{77});
    REQUIRE(pair.fou.values.size() == pair.driver.values.size());
    for (std::size_t i = 0; i < pair.fou.values.size(); ++i)
        CHECK(pair.fou.values[i] == 1.0 + pair.driver.values[i]);
}

TEST_CASE("zero-noise hook reproduces the exponential skeleton") {
    const GridSpec grid(5, 2.0);
    const Scheme scheme(Scheme::Kind::exact_representation, 8);
    const ZeroSampler hook{grid.steps() * scheme.oversample};
    const FouParams params(2.0, 1.0, HurstIndex(0.45));
    const SimulatedPair pair = simulate_fou_with(hook, params, grid, scheme, RngSeed{1});
    // with B == 0 the quadrature is exact and X_k = x0 e^{theta k / n}
    CHECK(rel_diff(pair.fou.values[5], 7.3890560989306502) < 1e-12);
    for (double v : pair.driver.values) CHECK(v == 0.0);

    // euler on the refined grid converges to the same skeleton
    double prev_gap = std::numeric_limits<double>::infinity();
    for (std::int64_t rho : {2, 8, 32}) {
        const Scheme euler(Scheme::Kind::euler, rho);
        const ZeroSampler hook2{grid.steps() * rho};
        const SimulatedPair ep = simulate_fou_with(hook2, params, grid, euler, RngSeed{1});
        const double gap = std::fabs(ep.fou.values[5] - 7.3890560989306502);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("simulated moments match the quadrature oracle (theta<0)") {
    const double theta = -3.0;
    const HurstIndex h(0.45);
    const GridSpec grid(10, 2.0);
    const double big_t = grid.horizon();
    const FouParams params(theta, 1.0, h);

    // exact Gaussian variance of X_T from the explicit solution:
    // Var X_T = theta^2 e^{2 theta T} Q2 + 2 theta e^{theta T} Cr + T^{2H},
    // Q2 = int int e^{-theta(u+z)} R(u,z), Cr = int e^{-theta u} R(u,T).
    const int quad_n = 1500;
    const double hq = big_t / quad_n;
    std::vector<double> w(quad_n + 1, hq), expf(quad_n + 1);
    w[0] *= 0.5;
    w[quad_n] *= 0.5;
    for (int i = 0; i <= quad_n; ++i) expf[i] = std::exp(-theta * hq * i);
    double q2 = 0.0, cr = 0.0;
    for (int i = 0; i <= quad_n; ++i) {
        const double ti = hq * i;
        cr += w[i] * expf[i] * covariance_r(ti, big_t, h);
        double row = 0.0;
        for (int j = 0; j <= quad_n; ++j)
            row += w[j] * expf[j] * covariance_r(ti, hq * j, h);
        q2 += w[i] * expf[i] * row;
    }
    const double e_theta_t = std::exp(theta * big_t);
    const double oracle_var = theta * theta * e_theta_t * e_theta_t * q2 +
                              2.0 * theta * e_theta_t * cr +
                              std::pow(big_t, 2.0 * h.value());

    const int reps = 1000;
    const Scheme scheme(Scheme::Kind::exact_representation, 8);
    const CirculantFgnSampler sampler(grid.steps() * scheme.oversample,
                                      grid.dt() / static_cast<double>(scheme.oversample), h);
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < reps; ++r) {
        const SimulatedPair pair = simulate_fou_with(
            sampler, params, grid, scheme, RngSeed{derive_seed(314, 0, static_cast<unsigned>(r))});
        const double xt = pair.fou.values.back();
        sum += xt;
        sumsq += xt * xt;
    }
    const double mean = sum / reps;
    const double var = (sumsq - reps * mean * mean) / (reps - 1);

    // mean X_T = x0 e^{theta T} ~ 9.4e-14, statistically zero
    CHECK(std::fabs(mean) < 3.0 * std::sqrt(oracle_var / reps));
    CHECK(std::fabs(var - oracle_var) < 3.0 * oracle_var * std::sqrt(2.0 / (reps - 1)));
}

TEST_CASE("integral-equation residual shrinks as quadrature refines") {
    // documented tolerance curve: normalized residual at effective
    // oversample rho stays below tol(rho) = 2/rho, which halves when rho
    // doubles. For theta > 0 the smooth exponential term dominates the
    // quadrature error and each doubling shrinks the residual ~4x; for
    // theta < 0 the rough fBm term dominates and per-step shrink is noisy
    // (max over a growing set of O(step^{1/2+H}) random contributions), so
    // the gate there is the tolerance curve plus total shrink.
    const GridSpec grid(10, 2.0);
    const Scheme scheme(Scheme::Kind::exact_representation, 32);

    {
        const FouParams params(2.0, 1.0, HurstIndex(0.45));
        const SimulatedPair pair =
            simulate_fou(params, grid, scheme, RngSeed{2718}, /*keep_refined=*/true);
        const double r8 = integral_equation_residual(pair, params, 4);   // rho_eff = 8
        const double r16 = integral_equation_residual(pair, params, 2);  // rho_eff = 16
        const double r32 = integral_equation_residual(pair, params, 1);  // rho_eff = 32
        CHECK(r8 >= 2.0 * r16);
        CHECK(r16 >= 2.0 * r32);
        CHECK(r8 <= 2.0 / 8.0);
    }

    for (std::uint64_t seed : {1ull, 7ull, 99ull, 2718ull}) {
        const FouParams params(-3.0, 1.0, HurstIndex(0.45));
        const SimulatedPair pair =
            simulate_fou(params, grid, scheme, RngSeed{seed}, /*keep_refined=*/true);
        const double r8 = integral_equation_residual(pair, params, 4);
        const double r16 = integral_equation_residual(pair, params, 2);
        const double r32 = integral_equation_residual(pair, params, 1);
        CHECK(r8 <= 2.0 / 8.0);
        CHECK(r16 <= 2.0 / 16.0);
        CHECK(r32 <= 2.0 / 32.0);
        CHECK(r8 >= 2.0 * r32);  // two doublings shrink at least 2x in total
    }
}

TEST_CASE("exact-representation and euler converge to each other") {
    const GridSpec grid(10, 2.0);
    const FouParams params(-3.0, 1.0, HurstIndex(0.45));
    double prev_gap = std::numeric_limits<double>::infinity();
    for (std::int64_t rho : {2, 8, 32}) {
        const SimulatedPair exact = simulate_fou(
            params, grid, Scheme(Scheme::Kind::exact_representation, rho), RngSeed{55});
        const SimulatedPair euler =
            simulate_fou(params, grid, Scheme(Scheme::Kind::euler, rho), RngSeed{55});
        // same seed and refinement share the same driver
        CHECK(exact.driver.values == euler.driver.values);
        double gap = 0.0;
        for (std::size_t i = 0; i < exact.fou.values.size(); ++i)
            gap = std::max(gap, std::fabs(exact.fou.values[i] - euler.fou.values[i]));
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("mean-reverting envelope |X| <= |x0| + 2 sup|B| + quadrature slack") {
    const GridSpec grid(10, 2.0);
    const Scheme scheme(Scheme::Kind::exact_representation, 8);
    const FouParams params(-3.0, 1.0, HurstIndex(0.45));
    const double dtp = grid.dt() / static_cast<double>(scheme.oversample);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const SimulatedPair pair = simulate_fou(params, grid, scheme, RngSeed{seed});
        double max_x = 0.0, max_b = 0.0;
        for (double v : pair.fou.values) max_x = std::max(max_x, std::fabs(v));
        for (double v : pair.driver.values) max_b = std::max(max_b, std::fabs(v));
        const double slack = max_b * (params.theta * dtp) * (params.theta * dtp) + 1e-12;
        CHECK(max_x <= std::fabs(params.x0) + 2.0 * max_b + slack);
    }
}

TEST_CASE("scaled mode activates for large positive theta horizons") {
    const GridSpec grid(4, 6.0);  // steps=4096, T=1024, theta*T = 2048
    const FouParams params(2.0, 1.0, HurstIndex(0.45));
    const SimulatedPair pair =
        simulate_fou(params, grid, Scheme(Scheme::Kind::exact_representation, 2), RngSeed{9});
    REQUIRE(pair.fou.scaled());
    CHECK(pair.fou.values[0] == 1.0);
    CHECK(pair.fou.scale2[0] == 0);
    CHECK_FALSE(pair.driver.scaled());
    // late exponents track theta * t / ln 2
    const std::size_t last = pair.fou.values.size() - 1;
    const double expect = 2.0 * grid.horizon() * std::log2(std::exp(1.0));
    const double got = static_cast<double>(pair.fou.scale2[last]) +
                       std::log2(std::fabs(pair.fou.values[last]));
    CHECK(std::fabs(got - expect) < 60.0);  // within the random O(1) factor

    // euler variant stays finite too
    const SimulatedPair ep =
        simulate_fou(params, grid, Scheme(Scheme::Kind::euler, 2), RngSeed{9});
    CHECK(ep.fou.scaled());
}

TEST_CASE("memory budget guard") {
    CHECK_THROWS_AS(simulate_fou(FouParams(-1.0, 1.0, HurstIndex(0.3)), GridSpec(6000, 2.0),
                                 Scheme(), RngSeed{1}),
                    MemoryBudgetExceeded);
}
