#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "fouest/errors.hpp"
#include "fouest/fou.hpp"
#include "fouest/scaled.hpp"
#include "fouest/types.hpp"

namespace fouest {

enum class Method { theta_hat, lse, terminal, hu_song };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::theta_hat: return "theta-hat";
        case Method::lse: return "lse";
        case Method::terminal: return "terminal";
        case Method::hu_song: return "hu-song";
    }
    return "?";
}

inline Method method_from_name(const std::string& s) {
    if (s == "theta-hat") return Method::theta_hat;
    if (s == "lse") return Method::lse;
    if (s == "terminal") return Method::terminal;
    if (s == "hu-song") return Method::hu_song;
    throw InvalidParameter("unknown estimator method '" + s + "'");
}

struct Estimate {
    double value = 0.0;
    Method method = Method::theta_hat;
    std::int64_t n = 0;
    std::optional<double> m;       // horizon exponent, when derivable
    std::optional<double> h_used;  // hu-song only

    Estimate(double value_, Method method_, std::int64_t n_, std::optional<double> m_ = {},
             std::optional<double> h_used_ = {})
        : value(value_), method(method_), n(n_), m(m_), h_used(h_used_) {
        if (!std::isfinite(value)) throw OverflowDetected("Estimate: non-finite value");
    }
};

namespace detail {

inline ScaledValue path_value(const SampledPath& path, std::size_t i) {
    return ScaledValue{path.values[i], path.exponent2(i)};
}

inline void require_step(const SampledPath& path, double delta, const char* who) {
    if (!(delta > 0.0)) throw InvalidParameter(std::string(who) + ": delta must be > 0");
    if (std::fabs(path.grid.dt / delta - 1.0) > 1e-12)
        throw InvalidParameter(std::string(who) + ": path step " +
                               std::to_string(path.grid.dt) + " does not match delta " +
                               std::to_string(delta));
    if (path.grid.count < 1)
        throw InvalidParameter(std::string(who) + ": need at least 2 points");
}

// Sums over k < count in ascending k (fixed order keeps runs
// bit-reproducible): num = sum X_k (X_{k+1}-X_k), den = sum X_k^2.
inline void fold_ratio_sums(const SampledPath& path, ScaledAccumulator& num,
                            ScaledAccumulator& den) {
    const std::size_t count = static_cast<std::size_t>(path.grid.count);
    for (std::size_t k = 0; k < count; ++k) {
        const ScaledValue xk = path_value(path, k);
        const ScaledValue dx = scaled_sub(path_value(path, k + 1), xk);
        num.add(scaled_mul(xk, dx));
        den.add(scaled_mul(xk, xk));
    }
}

inline std::optional<double> horizon_exponent(std::int64_t count, std::int64_t n) {
    if (n < 2 || count < 1) return std::nullopt;
    return std::log(static_cast<double>(count)) / std::log(static_cast<double>(n));
}

}  // namespace detail

// Discretized least-squares estimator on step delta:
//   sum X_{t_{i-1}} (X_{t_i} - X_{t_{i-1}}) / (delta * sum X_{t_{i-1}}^2).
// Scale-invariant in the path; NOT shift-invariant (adding a constant moves
// the estimate), so recentered inputs are the caller's responsibility.
inline Estimate theta_lse(const SampledPath& path, double delta) {
    detail::require_step(path, delta, "theta_lse");
    ScaledAccumulator num, den;
    detail::fold_ratio_sums(path, num, den);
    if (den.is_zero()) throw ZeroDenominator("theta_lse: sum of squares is zero");
    const double value = ScaledAccumulator::ratio(num, den) / delta;
    const std::int64_t n = static_cast<std::int64_t>(std::llround(1.0 / delta));
    return Estimate(value, Method::lse, n, detail::horizon_exponent(path.grid.count, n));
}

// The high-frequency drift estimator on the grid t_k = k/n:
//   theta_hat = sum X_k (X_{k+1}-X_k) / ((1/n) sum X_k^2).
// Identical formula to theta_lse at delta = 1/n, and computed through it.
inline Estimate theta_hat(const SampledPath& path, std::int64_t n) {
    if (n < 1) throw InvalidParameter("theta_hat: n must be >= 1");
    Estimate e = theta_lse(path, 1.0 / static_cast<double>(n));
    return Estimate(e.value, Method::theta_hat, n, e.m);
}

// Terminal-value estimator X_T^2 / (2 delta sum_{i<last} X_i^2);
// nonnegative by construction, meaningful for theta > 0 regimes.
inline Estimate theta_terminal(const SampledPath& path, double delta) {
    detail::require_step(path, delta, "theta_terminal");
    ScaledAccumulator den;
    const std::size_t count = static_cast<std::size_t>(path.grid.count);
    for (std::size_t k = 0; k < count; ++k) {
        const ScaledValue xk = detail::path_value(path, k);
        den.add(scaled_mul(xk, xk));
    }
    if (den.is_zero()) throw ZeroDenominator("theta_terminal: sum of squares is zero");
    const ScaledValue last = detail::path_value(path, count).normalized();
    ScaledAccumulator num;
    num.add(scaled_mul(last, last));
    const double value = ScaledAccumulator::ratio(num, den) / (2.0 * delta);
    const std::int64_t n = static_cast<std::int64_t>(std::llround(1.0 / delta));
    return Estimate(value, Method::terminal, n, detail::horizon_exponent(path.grid.count, n));
}

// Discretized power-type estimator for theta < 0, observations at
// delta, 2 delta, ..., N delta (values[0] is not an observation):
//   -( (1/(N H Gamma(2H))) sum_{k=1}^{N} X_{k delta}^2 )^{-1/(2H)}.
inline Estimate theta_hu_song(const SampledPath& path, double delta, HurstIndex h) {
    detail::require_step(path, delta, "theta_hu_song");
    const std::size_t count = static_cast<std::size_t>(path.grid.count);
    ScaledAccumulator sum;
    for (std::size_t k = 1; k <= count; ++k) {
        const ScaledValue xk = detail::path_value(path, k);
        sum.add(scaled_mul(xk, xk));
    }
    if (sum.is_zero()) throw ZeroDenominator("theta_hu_song: sum of squares is zero");
    const double hh = h.value();
    const double norm = static_cast<double>(count) * hh * std::tgamma(2.0 * hh);
    // work in log2 space so scaled paths cannot overflow the power
    const ScaledValue s = sum.total();
    const double log2_arg =
        std::log2(std::fabs(s.mantissa)) + static_cast<double>(s.exponent2) - std::log2(norm);
    const double value = -std::exp2(log2_arg * (-1.0 / (2.0 * hh)));
    const std::int64_t n = static_cast<std::int64_t>(std::llround(1.0 / delta));
    return Estimate(value, Method::hu_song, n, detail::horizon_exponent(path.grid.count, n),
                    hh);
}

// |theta_hat - RHS of the drift decomposition|
//   theta_hat = theta
//     + [ theta sum_k X_k int_{k/n}^{(k+1)/n} (X_s - X_k) ds
//         + sum_k X_k (B_{k+1} - B_k) ] / ((1/n) sum_k X_k^2),
// with the interior integrals evaluated by trapezoid on the retained
// refined grid, optionally thinned by `stride` (refinement studies walk
// stride = 4, 2, 1 on one fixed path). Exact in continuous time; the
// returned residual is the quadrature error.
inline double decomposition_residual(const SimulatedPair& pair, const FouParams& params,
                                     const GridSpec& grid, std::int64_t stride = 1) {
    if (!pair.fou_refined || !pair.driver_refined)
        throw MissingDriver("decomposition_residual: pair lacks refined driver data");
    if (pair.fou.scaled())
        throw InvalidParameter("decomposition_residual: scaled paths not supported");
    const SampledPath& x = pair.fou;
    const SampledPath& b = pair.driver;
    const SampledPath& xr = *pair.fou_refined;

    const std::int64_t steps = grid.steps();
    if (x.grid.count != steps)
        throw InvalidParameter("decomposition_residual: pair does not match grid");
    const std::int64_t rho = xr.grid.count / steps;
    if (stride < 1 || rho % stride != 0)
        throw InvalidParameter("decomposition_residual: stride must divide oversample");

    const double theta_hat_value = theta_hat(x, grid.n).value;

    const double dt_eff = xr.grid.dt * static_cast<double>(stride);
    ScaledAccumulator quad_term, noise_term, den;
    for (std::int64_t k = 0; k < steps; ++k) {
        const std::size_t ks = static_cast<std::size_t>(k);
        const double xk = x.values[ks];
        // trapezoid of (X_s - X_k) over [k/n, (k+1)/n] at the thinned step
        double acc = 0.5 * (xr.values[static_cast<std::size_t>(k * rho)] - xk);
        for (std::int64_t j = stride; j < rho; j += stride)
            acc += xr.values[static_cast<std::size_t>(k * rho + j)] - xk;
        acc += 0.5 * (xr.values[static_cast<std::size_t>((k + 1) * rho)] - xk);
        quad_term.add(xk * acc * dt_eff);
        noise_term.add(xk * (b.values[ks + 1] - b.values[ks]));
        den.add(xk * xk);
    }
    if (den.is_zero()) throw ZeroDenominator("decomposition_residual: sum of squares is zero");

    ScaledAccumulator num;
    num.add(scaled_mul(ScaledValue{params.theta, 0}, quad_term.total()));
    num.add(noise_term.total());
    const double rhs =
        params.theta +
        ScaledAccumulator::ratio(num, den) * static_cast<double>(grid.n);
    return std::fabs(theta_hat_value - rhs);
}

}  // namespace fouest
