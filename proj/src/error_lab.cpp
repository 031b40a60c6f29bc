#include "piquant/error_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "piquant/errors.hpp"
#include "piquant/rng.hpp"

namespace piquant {

namespace {

constexpr int kOracleMaxLambda = 2;

void check_oracle_lambda(int lambda) {
    if (lambda > kOracleMaxLambda) {
        throw ConfigError("oracle refuses lambda > 2 (exhaustive over all codes)");
    }
}

std::vector<PlanarPoint> draw_points(Distribution dist, std::uint64_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<PlanarPoint> pts(n);
    for (auto& p : pts) {
        if (dist == Distribution::uniform) {
            p.x = rng.uniform(-1.0, 1.0);
            p.y = rng.uniform(-1.0, 1.0);
        } else {
            // Clipped, not rescaled, so the scaled-domain precondition holds.
            p.x = std::clamp(rng.gaussian(), -1.0, 1.0);
            p.y = std::clamp(rng.gaussian(), -1.0, 1.0);
        }
    }
    return pts;
}

ErrorStats stats_over_points(std::span<const PlanarPoint> pts, const PrecisionConfig& cfg,
                             Distribution dist) {
    const std::uint64_t n = pts.size();
    std::vector<double> err_x(n), err_y(n);

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const PlanarPoint p = pts[i];
        const PlanarPoint q = decode_code(encode_pair(p, cfg), cfg);
        err_x[i] = std::fabs(q.x - p.x);
        err_y[i] = std::fabs(q.y - p.y);
    }

    ErrorStats s;
    s.lambda = cfg.lambda;
    s.distribution = dist;
    s.sample_count = n;
    if (n > 0) {
        s.mean_abs_err_x = pairwise_sum(err_x) / static_cast<double>(n);
        s.mean_abs_err_y = pairwise_sum(err_y) / static_cast<double>(n);
        s.max_abs_err = std::max(*std::max_element(err_x.begin(), err_x.end()),
                                 *std::max_element(err_y.begin(), err_y.end()));
    }
    s.bound_eq14 = 2.0 * (1.0 + cfg.pibar) * std::pow(10.0, -cfg.lambda) / std::numbers::pi;
    return s;
}

}  // namespace

const char* distribution_name(Distribution d) {
    return d == Distribution::gaussian ? "gaussian" : "uniform";
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t mid = values.size() / 2;
    return pairwise_sum(values.first(mid)) + pairwise_sum(values.subspan(mid));
}

std::vector<PlanarPoint> oracle_decode_table(const PrecisionConfig& cfg) {
    check_oracle_lambda(cfg.lambda);
    std::vector<PlanarPoint> table(cfg.code_modulus);
    for (std::uint64_t c = 0; c < cfg.code_modulus; ++c) {
        table[c] = decode_code(c, cfg);
    }
    return table;
}

OracleResult oracle_nearest_code(PlanarPoint p, std::span<const PlanarPoint> table) {
    OracleResult best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::uint64_t c = 0; c < table.size(); ++c) {
        const double dx = table[c].x - p.x;
        const double dy = table[c].y - p.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best.code = c;
        }
    }
    best.error = std::sqrt(best_d2);
    return best;
}

OracleResult oracle_nearest_code(PlanarPoint p, const PrecisionConfig& cfg) {
    check_oracle_lambda(cfg.lambda);
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw DomainError("oracle_nearest_code: non-finite input");
    }
    OracleResult best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::uint64_t c = 0; c < cfg.code_modulus; ++c) {
        const PlanarPoint q = decode_code(c, cfg);
        const double dx = q.x - p.x;
        const double dy = q.y - p.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best.code = c;
        }
    }
    best.error = std::sqrt(best_d2);
    return best;
}

ErrorStats empirical_error_stats(Distribution dist, std::uint64_t n,
                                 const PrecisionConfig& cfg, std::uint64_t seed) {
    if (n < 1) throw ConfigError("empirical_error_stats: n must be >= 1");
    const std::vector<PlanarPoint> pts = draw_points(dist, n, seed);
    return stats_over_points(pts, cfg, dist);
}

GridReport error_grid(const PrecisionConfig& cfg, std::uint32_t resolution) {
    if (resolution < 16) throw ConfigError("error_grid: resolution must be >= 16");

    GridReport report;
    report.resolution = resolution;
    report.mean_err.assign(static_cast<std::size_t>(resolution) * resolution, 0.0);
    report.density.assign(static_cast<std::size_t>(resolution) * resolution, 0);

    // Mean roundtrip error per cell, evaluated on a fixed 4x4 interior
    // subgrid; parallel over cells, each cell reduced serially.
    constexpr int kSub = 4;
    const double cell = 2.0 / resolution;
#pragma omp parallel for schedule(static)
    for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(report.mean_err.size()); ++idx) {
        const std::uint32_t cy = static_cast<std::uint32_t>(idx) / resolution;
        const std::uint32_t cx = static_cast<std::uint32_t>(idx) % resolution;
        double acc = 0.0;
        for (int sy = 0; sy < kSub; ++sy) {
            for (int sx = 0; sx < kSub; ++sx) {
                const double x = -1.0 + (cx + (sx + 0.5) / kSub) * cell;
                const double y = -1.0 + (cy + (sy + 0.5) / kSub) * cell;
                acc += roundtrip_error({x, y}, cfg);
            }
        }
        report.mean_err[idx] = acc / (kSub * kSub);
    }

    // Representable-point density: every code at lambda <= 2, a uniform
    // 10^4-code stride above.
    const std::uint64_t stride = cfg.lambda <= 2 ? 1 : cfg.code_modulus / 10000;
    for (std::uint64_t c = 0; c < cfg.code_modulus; c += stride) {
        const PlanarPoint p = decode_code(c, cfg);
        if (p.x < -1.0 || p.x >= 1.0 || p.y < -1.0 || p.y >= 1.0) continue;
        const auto cx = static_cast<std::uint32_t>((p.x + 1.0) / cell);
        const auto cy = static_cast<std::uint32_t>((p.y + 1.0) / cell);
        report.density[static_cast<std::size_t>(cy) * resolution + cx] += 1;
        report.codes_in_domain += 1;
    }
    return report;
}

std::vector<AblationRow> pibar_ablation(std::uint64_t n, std::uint64_t seed, int lambda) {
    const double pibar = build_pibar(lambda);
    const struct {
        const char* name;
        double coefficient;
    } variants[] = {
        {"pibar", pibar},
        {"pibar1", std::pow(10.0, -lambda)},  // truncated rational analog
        {"pibar2", 3.0 + pibar},              // nonzero integer part analog
    };

    std::vector<AblationRow> rows;
    for (const Distribution dist : {Distribution::gaussian, Distribution::uniform}) {
        // One sample set per distribution, shared across variants, so the
        // comparison is noise-free.
        const std::vector<PlanarPoint> pts = draw_points(dist, n, seed);
        for (const auto& variant : variants) {
            const PrecisionConfig cfg = PrecisionConfig::with_coefficient(lambda, variant.coefficient);
            const ErrorStats s = stats_over_points(pts, cfg, dist);
            rows.push_back({variant.name, dist, n, 0.5 * (s.mean_abs_err_x + s.mean_abs_err_y)});
        }
    }
    return rows;
}

std::vector<TrajectorySample> trajectory_samples(double theta_max, std::uint64_t n,
                                                 const PrecisionConfig& cfg) {
    if (n < 2) throw ConfigError("trajectory_samples: n must be >= 2");
    if (!std::isfinite(theta_max) || theta_max < 0.0) {
        throw ConfigError("trajectory_samples: theta_max must be finite and >= 0");
    }
    std::vector<TrajectorySample> out(n);
    const double step = theta_max / static_cast<double>(n - 1);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const double theta = step * static_cast<double>(i);
        out[i] = {theta, std::cos(theta) + std::cos(cfg.pibar * theta),
                  std::sin(theta) + std::sin(cfg.pibar * theta)};
    }
    return out;
}

}  // namespace piquant
