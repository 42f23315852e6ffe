#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mw {

/// Least-squares slope of y against x. Returns 0 for fewer than two points.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Slope of log(value) against log(level+1) across a refinement ladder.
/// This is the rate used by the "divergence suspected" rule: a constant whose
/// log grows in the log of the refinement level with slope above the
/// threshold is flagged. Non-finite or non-positive values yield +inf (treated
/// as divergent by callers).
double log_level_slope(const std::vector<double>& values);

/// Slope of log(value) against log(scale); used for power-law rate fits of
/// ess-sup criteria against the minimum sampled distance to a singularity.
double log_log_slope(const std::vector<double>& scales, const std::vector<double>& values);

/// Divergence verdict shared by the constant estimators: at least three
/// ladder levels and a fitted log-level slope above `threshold`.
bool divergence_suspected(const std::vector<double>& ladder_values, double threshold = 0.1);

/// Deterministic RNG for every randomized estimator in the library.
inline std::mt19937_64 seeded_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace mw
