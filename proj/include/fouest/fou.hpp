#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fouest/errors.hpp"
#include "fouest/fbm.hpp"
#include "fouest/scaled.hpp"
#include "fouest/types.hpp"

namespace fouest {

// Model triple of the Langevin equation dX = theta X dt + dB^H, X_0 = x0.
struct FouParams {
    double theta = 0.0;
    double x0 = 0.0;
    HurstIndex h;

    FouParams(double theta_, double x0_, HurstIndex h_) : theta(theta_), x0(x0_), h(h_) {
        if (!std::isfinite(theta) || !std::isfinite(x0))
            throw InvalidParameter("FouParams: theta and x0 must be finite");
    }
};

// Observation design: points k/n for 0 <= k <= n^m. m is real and > 1;
// the step count is floor(n^m).
struct GridSpec {
    std::int64_t n = 1;
    double m = 2.0;

    GridSpec(std::int64_t n_, double m_) : n(n_), m(m_) {
        if (n < 1) throw InvalidParameter("GridSpec: n must be >= 1");
        if (!(m > 1.0)) throw InvalidParameter("GridSpec: m must be > 1");
    }

    std::int64_t steps() const {
        // the nudge keeps exact powers like 10^4 from landing on 9999.999...
        return static_cast<std::int64_t>(
            std::floor(std::pow(static_cast<double>(n), m) + 1e-9));
    }
    double dt() const { return 1.0 / static_cast<double>(n); }
    double horizon() const { return static_cast<double>(steps()) / static_cast<double>(n); }
};

struct Scheme {
    enum class Kind { exact_representation, euler };
    Kind kind = Kind::exact_representation;
    std::int64_t oversample = 8;

    Scheme() = default;
    Scheme(Kind k, std::int64_t rho) : kind(k), oversample(rho) {
        if (oversample < 1) throw InvalidParameter("Scheme: oversample must be >= 1");
    }
};

inline const char* scheme_kind_name(Scheme::Kind k) {
    return k == Scheme::Kind::exact_representation ? "exact-representation" : "euler";
}
inline Scheme::Kind scheme_kind_from_name(const std::string& s) {
    if (s == "exact-representation") return Scheme::Kind::exact_representation;
    if (s == "euler") return Scheme::Kind::euler;
    throw InvalidParameter("unknown scheme kind '" + s + "'");
}

// A simulated fOU path together with the fBm that drove it. The refined
// copies (simulation grid before subsampling) are kept only on request;
// the decomposition check needs them for the interior integrals.
struct SimulatedPair {
    SampledPath fou;
    SampledPath driver;
    std::optional<SampledPath> fou_refined;
    std::optional<SampledPath> driver_refined;
};

// Raw values overflow double range once theta*T crosses ~709; simulation
// switches to mantissa/exponent output safely below that.
inline constexpr double kScaledModeThreshold = 600.0;

// Deterministic skeleton x0 * e^{theta t} on the observation grid.
inline SampledPath zero_noise_path(const FouParams& params, const GridSpec& grid,
                                   bool scaled = false) {
    const std::int64_t steps = grid.steps();
    const double dt = grid.dt();
    if (!scaled) {
        if (params.theta * grid.horizon() > 700.0)
            throw OverflowDetected("zero_noise_path: theta*T > 700; request scaled mode");
        std::vector<double> values(static_cast<std::size_t>(steps) + 1);
        for (std::int64_t k = 0; k <= steps; ++k)
            values[static_cast<std::size_t>(k)] =
                params.x0 * std::exp(params.theta * static_cast<double>(k) * dt);
        return SampledPath(UniformGrid(dt, steps), std::move(values));
    }
    constexpr double kLog2E = 1.4426950408889634;
    std::vector<double> mantissa(static_cast<std::size_t>(steps) + 1);
    std::vector<std::int64_t> exponent(static_cast<std::size_t>(steps) + 1);
    for (std::int64_t k = 0; k <= steps; ++k) {
        const double lg = params.theta * static_cast<double>(k) * dt * kLog2E;
        const double e = std::floor(lg);
        mantissa[static_cast<std::size_t>(k)] = params.x0 * std::exp2(lg - e);
        exponent[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(e);
    }
    return SampledPath(UniformGrid(dt, steps), std::move(mantissa), std::move(exponent));
}

// Simulate the fOU pair on grid.steps() observation points, driving it with
// an exact fGn draw on the oversample-times-finer grid.
//
// exact-representation evaluates
//   X_t = x0 e^{theta t} + theta e^{theta t} int_0^t e^{-theta s} B_s ds + B_t
// with trapezoid quadrature on the refined grid; euler iterates
// X[j+1] = X[j](1 + theta dt') + dB[j] there. Both subsample to the
// observation grid. theta*T beyond the scaled threshold (positive theta)
// switches the fOU output to mantissa/exponent form; the driver B^H grows
// only like t^H and always stays plain.
//
// SamplerT needs count() and sample(seed) -> increment vector; production
// code passes CirculantFgnSampler, tests may inject e.g. a zero-noise hook.
template <typename SamplerT>
SimulatedPair simulate_fou_with(const SamplerT& sampler,
                                const FouParams& params, const GridSpec& grid,
                                const Scheme& scheme, RngSeed seed,
                                bool keep_refined = false) {
    const std::int64_t steps = grid.steps();
    const std::int64_t rho = scheme.oversample;
    const std::int64_t refined = steps * rho;
    const double dt = grid.dt();
    const double dtp = dt / static_cast<double>(rho);

    if (sampler.count() != refined)
        throw InvalidParameter("simulate_fou_with: sampler count does not match grid");

    const std::vector<double> incr = sampler.sample(seed);
    std::vector<double> b(static_cast<std::size_t>(refined) + 1);
    b[0] = 0.0;
    {
        double acc = 0.0;
        for (std::int64_t j = 0; j < refined; ++j) {
            acc += incr[static_cast<std::size_t>(j)];
            b[static_cast<std::size_t>(j) + 1] = acc;
        }
    }

    const double theta = params.theta;
    const bool scaled = theta > 0.0 && theta * grid.horizon() > kScaledModeThreshold;
    if (scaled && keep_refined)
        throw OverflowDetected("simulate_fou: refined retention unsupported in scaled mode");
    const std::size_t obs_len = static_cast<std::size_t>(steps) + 1;

    std::vector<double> x_obs(obs_len);
    std::vector<std::int64_t> x_exp;
    std::vector<double> x_refined;
    if (keep_refined) x_refined.resize(static_cast<std::size_t>(refined) + 1);

    if (scheme.kind == Scheme::Kind::exact_representation) {
        if (!scaled) {
            // J_j = e^{theta s_j} int_0^{s_j} e^{-theta u} B_u du, trapezoid:
            // J_j = e^{theta dt'} (J_{j-1} + dt'/2 B_{j-1}) + dt'/2 B_j.
            // Bounded for theta < 0 where the direct integral explodes.
            const double d = std::exp(theta * dtp);
            double j_acc = 0.0;
            x_obs[0] = params.x0;
            if (keep_refined) x_refined[0] = params.x0;
            for (std::int64_t j = 1; j <= refined; ++j) {
                const std::size_t js = static_cast<std::size_t>(j);
                j_acc = d * (j_acc + 0.5 * dtp * b[js - 1]) + 0.5 * dtp * b[js];
                const double s = static_cast<double>(j) * dtp;
                const double value = params.x0 * std::exp(theta * s) + theta * j_acc + b[js];
                if (keep_refined) x_refined[js] = value;
                if (j % rho == 0) x_obs[static_cast<std::size_t>(j / rho)] = value;
            }
        } else {
            // Carry W_j = x0 + theta I_j + e^{-theta s_j} B_j (all O(1)) and
            // put e^{theta s_j} into the exponent. e^{-theta s} underflows to
            // zero exactly where its contribution drops below resolution.
            constexpr double kLog2E = 1.4426950408889634;
            x_exp.assign(obs_len, 0);
            double i_acc = 0.0;
            double g_prev = 1.0;
            x_obs[0] = params.x0;
            for (std::int64_t j = 1; j <= refined; ++j) {
                const std::size_t js = static_cast<std::size_t>(j);
                const double s = static_cast<double>(j) * dtp;
                const double g = std::exp(-theta * s);
                i_acc += 0.5 * dtp * (g_prev * b[js - 1] + g * b[js]);
                g_prev = g;
                if (j % rho == 0) {
                    const double w = params.x0 + theta * i_acc + g * b[js];
                    const double lg = theta * s * kLog2E;
                    const double e = std::floor(lg);
                    const std::size_t k = static_cast<std::size_t>(j / rho);
                    x_obs[k] = w * std::exp2(lg - e);
                    x_exp[k] = static_cast<std::int64_t>(e);
                }
            }
        }
    } else {  // euler
        const double growth = 1.0 + theta * dtp;
        if (!scaled) {
            double x = params.x0;
            x_obs[0] = x;
            if (keep_refined) x_refined[0] = x;
            for (std::int64_t j = 0; j < refined; ++j) {
                x = x * growth + incr[static_cast<std::size_t>(j)];
                if (keep_refined) x_refined[static_cast<std::size_t>(j) + 1] = x;
                if ((j + 1) % rho == 0) x_obs[static_cast<std::size_t>((j + 1) / rho)] = x;
            }
        } else {
            x_exp.assign(obs_len, 0);
            double mant = params.x0;
            std::int64_t e2 = 0;
            x_obs[0] = params.x0;
            for (std::int64_t j = 0; j < refined; ++j) {
                const double noise = std::ldexp(
                    incr[static_cast<std::size_t>(j)],
                    static_cast<int>(ScaledValue::clamp_shift(-e2)));
                mant = mant * growth + noise;
                while (std::fabs(mant) >= 0x1p512) {
                    mant = std::ldexp(mant, -512);
                    e2 += 512;
                }
                if ((j + 1) % rho == 0) {
                    int k = 0;
                    const double f = std::frexp(mant, &k);
                    const std::size_t idx = static_cast<std::size_t>((j + 1) / rho);
                    x_obs[idx] = f;
                    x_exp[idx] = e2 + k;
                }
            }
        }
    }

    std::vector<double> b_obs(obs_len);
    for (std::int64_t k = 0; k <= steps; ++k)
        b_obs[static_cast<std::size_t>(k)] = b[static_cast<std::size_t>(k * rho)];

    SimulatedPair pair{
        SampledPath(UniformGrid(dt, steps), std::move(x_obs), std::move(x_exp)),
        SampledPath(UniformGrid(dt, steps), std::move(b_obs)),
        std::nullopt,
        std::nullopt,
    };
    if (keep_refined) {
        pair.fou_refined = SampledPath(UniformGrid(dtp, refined), std::move(x_refined));
        pair.driver_refined = SampledPath(UniformGrid(dtp, refined), std::move(b));
    }
    return pair;
}

inline constexpr std::int64_t kDefaultMaxRefinedPoints = std::int64_t{1} << 27;

inline SimulatedPair simulate_fou(const FouParams& params, const GridSpec& grid,
                                  const Scheme& scheme, RngSeed seed,
                                  bool keep_refined = false,
                                  std::int64_t max_refined_points = kDefaultMaxRefinedPoints) {
    const std::int64_t refined = grid.steps() * scheme.oversample;
    if (refined > max_refined_points)
        throw MemoryBudgetExceeded("simulate_fou: refined grid of " + std::to_string(refined) +
                                   " points exceeds budget of " +
                                   std::to_string(max_refined_points));
    CirculantFgnSampler sampler(refined, grid.dt() / static_cast<double>(scheme.oversample),
                                params.h);
    return simulate_fou_with(sampler, params, grid, scheme, seed, keep_refined);
}

}  // namespace fouest
