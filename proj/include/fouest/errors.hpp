#pragma once

#include <stdexcept>
#include <string>

namespace fouest {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad argument values (rejected type invariants, malformed config).
struct InvalidParameter : Error {
    using Error::Error;
};

// Circulant embedding produced an eigenvalue below -tol * max.
struct NonPositiveDefiniteEmbedding : Error {
    using Error::Error;
};

// Cholesky oracle refused a grid above its O(N^2) memory guard.
struct GridTooLarge : Error {
    using Error::Error;
};

// Gram matrix turned out numerically non positive definite.
struct FactorizationFailure : Error {
    using Error::Error;
};

// A value left double range while scaled mode was not active.
struct OverflowDetected : Error {
    using Error::Error;
};

// Refined grid would exceed the configured point budget.
struct MemoryBudgetExceeded : Error {
    using Error::Error;
};

// Estimator denominator is exactly zero: theta is unidentifiable.
struct ZeroDenominator : Error {
    using Error::Error;
};

// Decomposition check asked for a pair simulated without its driver.
struct MissingDriver : Error {
    using Error::Error;
};

// Exhaustive scan guard tripped (pair scans, lemma sums).
struct ScanTooLarge : Error {
    using Error::Error;
};

}  // namespace fouest
