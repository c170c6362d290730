#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fouest/errors.hpp"
#include "fouest/fft.hpp"
#include "fouest/rng.hpp"
#include "fouest/types.hpp"

namespace fouest {

// Covariance kernel of fractional Brownian motion:
// R(t,s) = (s^2H + t^2H - |t-s|^2H) / 2.
inline double covariance_r(double t, double s, HurstIndex h) {
    const double p = 2.0 * h.value();
    return 0.5 * (std::pow(s, p) + std::pow(t, p) - std::pow(std::fabs(t - s), p));
}

// Autocovariance of fGn on step dt:
// gamma(k) = dt^2H * ((k+1)^2H - 2 k^2H + (k-1)^2H) / 2.
//
// For large k the three-term form cancels catastrophically, so it is
// rewritten as k^2H * f(1/k) with f(x) = ((1+x)^p + (1-x)^p - 2) / 2 and f
// evaluated by its even Taylor series once x is small.
inline double fgn_autocovariance(std::int64_t lag, double dt, HurstIndex h) {
    if (!(dt > 0.0)) throw InvalidParameter("fgn_autocovariance: dt must be > 0");
    if (lag < 0) throw InvalidParameter("fgn_autocovariance: lag must be >= 0");
    const double p = 2.0 * h.value();
    const double scale = std::pow(dt, p);
    if (lag == 0) return scale;
    const double k = static_cast<double>(lag);
    const double x = 1.0 / k;
    double f;
    if (x >= 1e-2) {
        f = 0.5 * (std::pow(1.0 + x, p) + std::pow(1.0 - x, p) - 2.0);
    } else {
        // truncation error ~ |c3| x^6 < 5e-14 at the switch point
        const double x2 = x * x;
        const double c1 = (p - 2.0) * (p - 3.0) / 12.0;
        const double c2 = (p - 2.0) * (p - 3.0) * (p - 4.0) * (p - 5.0) / 360.0;
        f = 0.5 * p * (p - 1.0) * x2 * (1.0 + x2 * (c1 + x2 * c2));
    }
    return scale * std::pow(k, p) * f;
}

// fGn -> fBm: prefix sums with a prepended zero.
inline SampledPath cumulate(const std::vector<double>& increments, double dt = 1.0) {
    std::vector<double> values(increments.size() + 1);
    values[0] = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < increments.size(); ++i) {
        if (!std::isfinite(increments[i]))
            throw InvalidParameter("cumulate: non-finite increment");
        acc += increments[i];
        values[i + 1] = acc;
    }
    return SampledPath(UniformGrid(dt, static_cast<std::int64_t>(increments.size())),
                       std::move(values));
}

// Exact stationary Gaussian sampler by circulant embedding (Davies-Harte).
//
// The target autocovariance gamma(0..count-1) is embedded into a circulant
// of even size M >= 2*count (next power of two here, which both keeps the
// FFT fast and simply extends the embedding to lag M/2 -- the first `count`
// outputs of the longer exact sequence still have exactly the right law).
// With lambda = DFT(first circulant row), drawing
//   a_0     = sqrt(lambda_0 / M) Z_0,
//   a_{M/2} = sqrt(lambda_{M/2} / M) Z',
//   a_j     = sqrt(lambda_j / (2M)) (U_j + i V_j),   0 < j < M/2,
// and applying the unnormalized backward transform gives a real sequence
// whose covariance is exactly the embedded kernel. For fGn the eigenvalues
// are nonnegative up to rounding noise; anything below -1e-10 * max is an
// error, anything negative above that is clipped to zero.
//
// Normal variates are consumed in bin order j = 0, 1(U,V), ..., M/2: exactly
// M per draw, so a draw is a pure function of (count, dt, h, seed).
class CirculantFgnSampler {
  public:
    CirculantFgnSampler(std::int64_t count, double dt, HurstIndex h)
        : count_(count), dt_(dt), h_(h), embed_size_(embedding_size(count)),
          transform_(embed_size_) {
        if (count < 1) throw InvalidParameter("CirculantFgnSampler: count must be >= 1");
        const std::size_t m = embed_size_;
        const std::size_t half = m / 2;

        std::vector<double> kernel(m);
        for (std::size_t j = 0; j <= half; ++j)
            kernel[j] = fgn_autocovariance(static_cast<std::int64_t>(j), dt, h);
        for (std::size_t j = half + 1; j < m; ++j) kernel[j] = kernel[m - j];

        // eigenvalues = forward r2c transform of the (symmetric) kernel
        std::vector<double> lambda(half + 1);
        {
            detail::FftwArray<double> in(m);
            detail::FftwArray<fftw_complex> out(half + 1);
            for (std::size_t j = 0; j < m; ++j) in[j] = kernel[j];
            fftw_plan plan;
            {
                std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
                plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(), out.data(),
                                            FFTW_ESTIMATE);
            }
            fftw_execute(plan);
            {
                std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
                fftw_destroy_plan(plan);
            }
            for (std::size_t j = 0; j <= half; ++j) lambda[j] = out[j][0];
        }

        double max_lambda = 0.0;
        for (double l : lambda) max_lambda = std::max(max_lambda, l);
        const double tolerance = -1e-10 * max_lambda;
        for (double& l : lambda) {
            if (l < tolerance)
                throw NonPositiveDefiniteEmbedding(
                    "circulant embedding: eigenvalue " + std::to_string(l) +
                    " below tolerance " + std::to_string(tolerance));
            if (l < 0.0) l = 0.0;  // rounding noise only
        }

        amplitude_.resize(half + 1);
        const double inv_m = 1.0 / static_cast<double>(m);
        for (std::size_t j = 0; j <= half; ++j)
            amplitude_[j] = std::sqrt(lambda[j] * inv_m);
    }

    std::int64_t count() const { return count_; }
    double dt() const { return dt_; }
    HurstIndex hurst() const { return h_; }

    // One exact fGn draw; safe to call concurrently on a shared sampler.
    std::vector<double> sample(RngSeed seed) const {
        const std::size_t m = embed_size_;
        const std::size_t half = m / 2;
        GaussianStream gauss(seed);

        detail::FftwArray<fftw_complex> spectrum(half + 1);
        spectrum[0][0] = amplitude_[0] * gauss.normal();
        spectrum[0][1] = 0.0;
        const double inv_sqrt2 = 0x1.6a09e667f3bcdp-1;  // 1/sqrt(2)
        for (std::size_t j = 1; j < half; ++j) {
            const double w = amplitude_[j] * inv_sqrt2;
            spectrum[j][0] = w * gauss.normal();
            spectrum[j][1] = w * gauss.normal();
        }
        spectrum[half][0] = amplitude_[half] * gauss.normal();
        spectrum[half][1] = 0.0;

        detail::FftwArray<double> series(m);
        transform_.execute(spectrum.data(), series.data());
        return std::vector<double>(series.data(), series.data() + count_);
    }

    static std::size_t embedding_size(std::int64_t count) {
        std::size_t m = 2;
        while (m < 2 * static_cast<std::size_t>(count)) m <<= 1;
        return m;
    }

  private:
    std::int64_t count_;
    double dt_;
    HurstIndex h_;
    std::size_t embed_size_;
    detail::HalfComplexToReal transform_;
    std::vector<double> amplitude_;
};

inline std::vector<double> sample_fgn_circulant(std::int64_t count, double dt, HurstIndex h,
                                                RngSeed seed) {
    return CirculantFgnSampler(count, dt, h).sample(seed);
}

// Reference exact fBm sampler: Cholesky factor of the Gram matrix
// [R(t_i,t_j)] applied to iid normals. O(count^3) -- the small-N oracle the
// circulant sampler is checked against, deliberately self-contained.
inline SampledPath sample_fbm_cholesky(UniformGrid grid, HurstIndex h, RngSeed seed) {
    const std::int64_t n = grid.count;
    if (n < 1) throw InvalidParameter("sample_fbm_cholesky: grid.count must be >= 1");
    if (n > 4096) throw GridTooLarge("sample_fbm_cholesky: grid.count > 4096");

    const std::size_t nn = static_cast<std::size_t>(n);
    std::vector<double> gram(nn * nn);
    for (std::size_t i = 0; i < nn; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            gram[i * nn + j] =
                covariance_r(grid.time(static_cast<std::int64_t>(i + 1)),
                             grid.time(static_cast<std::int64_t>(j + 1)), h);

    // in-place lower Cholesky
    for (std::size_t j = 0; j < nn; ++j) {
        double d = gram[j * nn + j];
        for (std::size_t k = 0; k < j; ++k) d -= gram[j * nn + k] * gram[j * nn + k];
        if (!(d > 0.0))
            throw FactorizationFailure("sample_fbm_cholesky: Gram matrix not positive definite");
        const double l = std::sqrt(d);
        gram[j * nn + j] = l;
        for (std::size_t i = j + 1; i < nn; ++i) {
            double s = gram[i * nn + j];
            for (std::size_t k = 0; k < j; ++k) s -= gram[i * nn + k] * gram[j * nn + k];
            gram[i * nn + j] = s / l;
        }
    }

    GaussianStream gauss(seed);
    std::vector<double> z(nn);
    for (double& v : z) v = gauss.normal();

    std::vector<double> values(nn + 1);
    values[0] = 0.0;
    for (std::size_t i = 0; i < nn; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += gram[i * nn + k] * z[k];
        values[i + 1] = s;
    }
    return SampledPath(grid, std::move(values));
}

}  // namespace fouest
