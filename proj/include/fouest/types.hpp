#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fouest/errors.hpp"

namespace fouest {

inline constexpr const char* kArtifactVersion = "fouest 1.0.0";

// Hurst index, validated to the open interval (0,1). Samplers accept the
// whole range; the estimator theory needs h < 1/2 and enforces that where
// it matters, not here.
class HurstIndex {
  public:
    explicit HurstIndex(double h) : h_(h) {
        if (!(h > 0.0 && h < 1.0))
            throw InvalidParameter("HurstIndex: h must lie in (0,1), got " + std::to_string(h));
    }
    double value() const { return h_; }

  private:
    double h_;
};

// Uniform time grid anchored at t=0: point i sits at i*dt. count is the
// number of steps, so a path on this grid has count+1 values. count==0 is
// the degenerate single-point grid (needed for empty increment sequences).
struct UniformGrid {
    double dt = 1.0;
    std::int64_t count = 1;

    UniformGrid(double dt_, std::int64_t count_) : dt(dt_), count(count_) {
        if (!(dt > 0.0)) throw InvalidParameter("UniformGrid: dt must be > 0");
        if (count < 0) throw InvalidParameter("UniformGrid: count must be >= 0");
    }
    double time(std::int64_t i) const { return static_cast<double>(i) * dt; }
};

// Real-valued path sampled on a UniformGrid. values has count+1 entries.
//
// Scaled mode: when scale2 is non-empty it holds one base-2 exponent per
// point and the represented value at i is values[i] * 2^scale2[i]. This is
// how paths whose magnitudes exceed double range (theta*T beyond ~700) are
// carried; values then stores mantissas and stays finite.
struct SampledPath {
    UniformGrid grid;
    std::vector<double> values;
    std::vector<std::int64_t> scale2;  // empty in plain mode

    SampledPath(UniformGrid g, std::vector<double> v, std::vector<std::int64_t> s2 = {})
        : grid(g), values(std::move(v)), scale2(std::move(s2)) {
        if (static_cast<std::int64_t>(values.size()) != grid.count + 1)
            throw InvalidParameter("SampledPath: values length must equal grid.count + 1");
        if (!scale2.empty() && scale2.size() != values.size())
            throw InvalidParameter("SampledPath: scale2 length must match values");
        for (double x : values)
            if (!std::isfinite(x)) throw OverflowDetected("SampledPath: non-finite value");
    }

    bool scaled() const { return !scale2.empty(); }
    std::int64_t exponent2(std::size_t i) const { return scale2.empty() ? 0 : scale2[i]; }

    // Plain-double view of point i; overflows to inf for scaled paths whose
    // exponent exceeds double range (callers that care must check).
    double at(std::size_t i) const {
        std::int64_t e = exponent2(i);
        e = e > 4096 ? 4096 : (e < -4096 ? -4096 : e);
        return std::ldexp(values[i], static_cast<int>(e));
    }
};

// Seed for the deterministic samplers. Identical seed + identical
// parameters means bit-identical output.
struct RngSeed {
    std::uint64_t value = 0;
};

}  // namespace fouest
