#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "piquant/rotation_codec.hpp"

namespace piquant {

enum class Distribution : std::uint8_t { gaussian = 0, uniform = 1 };

const char* distribution_name(Distribution d);

struct ErrorStats {
    int lambda = 0;
    Distribution distribution = Distribution::uniform;
    std::uint64_t sample_count = 0;
    double mean_abs_err_x = 0.0;
    double mean_abs_err_y = 0.0;
    double max_abs_err = 0.0;
    double bound_eq14 = 0.0;  // 2 * (1 + pibar) * 10^-lambda / pi
};

struct OracleResult {
    RotationCode code = 0;
    double error = 0.0;  // Euclidean distance to the nearest decoded point
};

// Exhaustive search over every code; the ground truth for encoder quality.
// Refuses lambda > 2 (more than 10^4 codes).
OracleResult oracle_nearest_code(PlanarPoint p, const PrecisionConfig& cfg);

// Decoded location of every code, indexed by code. Lets callers amortize
// the oracle's table across many queries. Refuses lambda > 2.
std::vector<PlanarPoint> oracle_decode_table(const PrecisionConfig& cfg);
OracleResult oracle_nearest_code(PlanarPoint p, std::span<const PlanarPoint> table);

// Roundtrip statistics over n random points: Gaussian N(0,1) clipped to
// [-1,1]^2 or uniform U(-1,1)^2. Deterministic for a fixed seed regardless
// of thread count (per-sample errors are reduced by pairwise summation).
ErrorStats empirical_error_stats(Distribution dist, std::uint64_t n,
                                 const PrecisionConfig& cfg, std::uint64_t seed);

// Mean roundtrip error and representable-point density over an R x R grid
// covering [-1,1]^2. Density decodes every code at lambda <= 2 and a
// 10^4-code subsample above.
struct GridReport {
    std::uint32_t resolution = 0;
    std::vector<double> mean_err;        // R*R, row-major, x fastest
    std::vector<std::uint64_t> density;  // decoded codes per cell
    std::uint64_t codes_in_domain = 0;
};

GridReport error_grid(const PrecisionConfig& cfg, std::uint32_t resolution);

// Coefficient ablation: the standard pibar against the truncated-rational
// analog (10^-lambda alone) and the integer-part-3 analog (3 + pibar).
struct AblationRow {
    std::string variant;
    Distribution distribution;
    std::uint64_t sample_count = 0;
    double mean_err = 0.0;  // averaged over both components
};

std::vector<AblationRow> pibar_ablation(std::uint64_t n, std::uint64_t seed, int lambda = 3);

struct TrajectorySample {
    double theta = 0.0;
    double x = 0.0;
    double y = 0.0;
};

// The rotation curve sampled at n evenly spaced angles in [0, theta_max].
std::vector<TrajectorySample> trajectory_samples(double theta_max, std::uint64_t n,
                                                 const PrecisionConfig& cfg);

// Deterministic sum independent of thread count; also the reduction used
// inside the stats above.
double pairwise_sum(std::span<const double> values);

}  // namespace piquant
