#pragma once

#include <cmath>
#include <cstdint>

namespace fouest {

// A real number carried as mantissa * 2^exponent2. Lets sums and paths
// survive magnitudes like e^{theta*T} with theta*T in the thousands, far
// beyond double range, without extended precision.
struct ScaledValue {
    double mantissa = 0.0;
    std::int64_t exponent2 = 0;

    // Bring mantissa into [0.5,1) (or zero) so products of two normalized
    // values cannot overflow.
    ScaledValue normalized() const {
        if (mantissa == 0.0) return {0.0, 0};
        int k = 0;
        const double m = std::frexp(mantissa, &k);
        return {m, exponent2 + k};
    }

    double to_double() const {
        return std::ldexp(mantissa, static_cast<int>(clamp_shift(exponent2)));
    }

    static std::int64_t clamp_shift(std::int64_t s) {
        // |shift| beyond ~2100 is indistinguishable from +-inf/0 in double;
        // clamping keeps ldexp's int argument safe.
        constexpr std::int64_t kMax = 4096;
        return s > kMax ? kMax : (s < -kMax ? -kMax : s);
    }
};

inline ScaledValue scaled_mul(ScaledValue a, ScaledValue b) {
    a = a.normalized();
    b = b.normalized();
    return {a.mantissa * b.mantissa, a.exponent2 + b.exponent2};
}

inline ScaledValue scaled_sub(ScaledValue a, ScaledValue b) {
    a = a.normalized();
    b = b.normalized();
    if (a.mantissa == 0.0) return {-b.mantissa, b.exponent2};
    if (b.mantissa == 0.0) return a;
    const std::int64_t e = a.exponent2 > b.exponent2 ? a.exponent2 : b.exponent2;
    const double ma = std::ldexp(a.mantissa, static_cast<int>(ScaledValue::clamp_shift(a.exponent2 - e)));
    const double mb = std::ldexp(b.mantissa, static_cast<int>(ScaledValue::clamp_shift(b.exponent2 - e)));
    return {ma - mb, e};
}

// Overflow-safe compensated summation.
//
// Documented format: the running sum is mantissa * 2^exponent2 where
// mantissa = hi + lo (Neumaier compensation). Folding a term first aligns
// exponents by shifting the smaller-scale side down, exactly like denormal
// alignment in hardware floating point; terms more than ~2100 binary orders
// below the current scale vanish, as they would in any double sum. After
// every fold the mantissa is renormalized into [2^-512, 2^512) by moving
// whole 512-bit blocks into exponent2, so |mantissa| < 2^512 always holds
// on exit from add().
//
// Folding is order-dependent only at the rounding level; the compensation
// keeps any permutation of the same multiset within ~1 ulp of the exact sum
// at the dominant scale.
class ScaledAccumulator {
  public:
    void add(double mantissa, std::int64_t exponent2 = 0) {
        if (mantissa == 0.0) return;
        if (hi_ == 0.0 && lo_ == 0.0) {
            hi_ = mantissa;
            exp2_ = exponent2;
            renormalize();
            return;
        }
        double term = mantissa;
        const std::int64_t d = exponent2 - exp2_;
        if (d > 0) {
            // incoming term has the larger scale: shift the accumulator down
            const int s = static_cast<int>(ScaledValue::clamp_shift(d));
            hi_ = std::ldexp(hi_, -s);
            lo_ = std::ldexp(lo_, -s);
            exp2_ = exponent2;
        } else if (d < 0) {
            term = std::ldexp(term, static_cast<int>(ScaledValue::clamp_shift(d)));
        }
        const double s = hi_ + term;
        if (std::fabs(hi_) >= std::fabs(term))
            lo_ += (hi_ - s) + term;
        else
            lo_ += (term - s) + hi_;
        hi_ = s;
        renormalize();
    }

    void add(ScaledValue v) { add(v.mantissa, v.exponent2); }

    bool is_zero() const { return hi_ + lo_ == 0.0; }

    ScaledValue total() const { return ScaledValue{hi_ + lo_, exp2_}.normalized(); }

    // Collapse to double; infinities are the caller's problem.
    double to_double() const { return total().to_double(); }

    // num/den without materializing either side as a double.
    static double ratio(const ScaledAccumulator& num, const ScaledAccumulator& den) {
        const ScaledValue n = num.total(), d = den.total();
        const double q = n.mantissa / d.mantissa;
        return std::ldexp(q, static_cast<int>(ScaledValue::clamp_shift(n.exponent2 - d.exponent2)));
    }

  private:
    void renormalize() {
        if (hi_ == 0.0 && lo_ == 0.0) {
            hi_ = lo_ = 0.0;
            return;
        }
        while (std::fabs(hi_) >= 0x1p512) {
            hi_ = std::ldexp(hi_, -512);
            lo_ = std::ldexp(lo_, -512);
            exp2_ += 512;
        }
        while (hi_ != 0.0 && std::fabs(hi_) < 0x1p-512) {
            hi_ = std::ldexp(hi_, 512);
            lo_ = std::ldexp(lo_, 512);
            exp2_ -= 512;
        }
    }

    double hi_ = 0.0;
    double lo_ = 0.0;
    std::int64_t exp2_ = 0;
};

}  // namespace fouest
