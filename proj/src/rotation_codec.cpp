#include "piquant/rotation_codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "piquant/errors.hpp"

namespace piquant {

namespace {

constexpr double kPow10Neg[5] = {1.0, 1e-1, 1e-2, 1e-3, 1e-4};
constexpr double kPow10Neg2[5] = {1.0, 1e-2, 1e-4, 1e-6, 1e-8};
constexpr std::uint64_t kPow10[9] = {1ull,      10ull,      100ull,
                                     1000ull,   10000ull,   100000ull,
                                     1000000ull, 10000000ull, 100000000ull};

void check_lambda(int lambda) {
    if (lambda < 1 || lambda > 4) {
        throw ConfigError("lambda must be in [1, 4], got " + std::to_string(lambda));
    }
}

}  // namespace

double build_pibar(int lambda) {
    check_lambda(lambda);
    return kPow10Neg[lambda] + kPow10Neg2[lambda] * kPiFracTail;
}

PrecisionConfig PrecisionConfig::make(int lambda) {
    return with_coefficient(lambda, build_pibar(lambda));
}

PrecisionConfig PrecisionConfig::with_coefficient(int lambda, double coefficient) {
    check_lambda(lambda);
    if (!std::isfinite(coefficient) || coefficient <= 0.0) {
        throw ConfigError("rotation coefficient must be finite and positive");
    }
    PrecisionConfig cfg;
    cfg.lambda = lambda;
    cfg.pibar = coefficient;
    cfg.digit_modulus = kPow10[lambda];
    cfg.code_modulus = kPow10[2 * lambda];
    cfg.angle_unit = kTau * kPow10Neg[lambda];
    return cfg;
}

double frac(double v) {
    double f = v - std::floor(v);
    if (f >= 1.0) f = 0.0;  // v just below an integer can round up
    return f;
}

GeometricSolution solve_geometry(PlanarPoint p, const PrecisionConfig& cfg) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw DomainError("solve_geometry: non-finite input");
    }
    const double r2 = p.x * p.x + p.y * p.y;
    // Absolute slack so decoder outputs, which can sit a few ulp above the
    // radius-2 circle, stay encodable.
    if (r2 > 4.0 + 1e-12) {
        throw DomainError("solve_geometry: x^2 + y^2 > 4");
    }

    GeometricSolution s;
    // alpha is arbitrary at the origin (beta = pi/2 collapses the radius);
    // fix it to 0 so the encoding is deterministic.
    s.alpha = (p.x == 0.0 && p.y == 0.0) ? 0.0 : std::atan2(p.y, p.x);
    s.beta = std::acos(std::min(1.0, std::sqrt(r2) * 0.5));

    double delta = std::fmod(s.alpha - s.beta, kTau);
    if (delta < 0.0) delta += kTau;
    if (delta >= kTau) delta = 0.0;
    s.delta = delta;

    // Branch-normalized matching target; shifting delta by 2*pi shifts
    // omega by exactly -pibar, so the fractional equation is preserved.
    s.omega = ((s.alpha + s.beta) - cfg.pibar * delta) / kTau;

    const double dm = static_cast<double>(cfg.digit_modulus);
    s.m = solve_m(s.omega, cfg);
    s.g = std::min<std::uint64_t>(static_cast<std::uint64_t>(delta / kTau * dm),
                                  cfg.digit_modulus - 1);
    return s;
}

std::uint64_t solve_m(double omega, const PrecisionConfig& cfg) {
    if (!std::isfinite(omega)) {
        throw DomainError("solve_m: non-finite omega");
    }
    const double dm = static_cast<double>(cfg.digit_modulus);
    return std::min<std::uint64_t>(static_cast<std::uint64_t>(frac(omega) * dm),
                                   cfg.digit_modulus - 1);
}

double solve_m_residual(std::uint64_t m, double omega, const PrecisionConfig& cfg) {
    if (!std::isfinite(omega)) {
        throw DomainError("solve_m_residual: non-finite omega");
    }
    double r = std::fabs(frac(static_cast<double>(m) * cfg.pibar) - frac(omega));
    return r > 0.5 ? 1.0 - r : r;
}

RotationCode encode_pair(PlanarPoint p, const PrecisionConfig& cfg) {
    const GeometricSolution s = solve_geometry(p, cfg);
    return s.m * cfg.digit_modulus + s.g;
}

PlanarPoint decode_code(RotationCode code, const PrecisionConfig& cfg) {
    if (code >= cfg.code_modulus) {
        throw FormatError("decode_code: code " + std::to_string(code) +
                          " out of range for lambda " + std::to_string(cfg.lambda));
    }
    const double theta = static_cast<double>(code) * cfg.angle_unit;
    const double phi = cfg.pibar * theta;
    return {std::cos(theta) + std::cos(phi), std::sin(theta) + std::sin(phi)};
}

double roundtrip_error(PlanarPoint p, const PrecisionConfig& cfg) {
    const PlanarPoint q = decode_code(encode_pair(p, cfg), cfg);
    return std::max(std::fabs(q.x - p.x), std::fabs(q.y - p.y));
}

double pointwise_error_bound(const PrecisionConfig& cfg) {
    return 2.0 * cfg.angle_unit * (1.0 + cfg.pibar);
}

}  // namespace piquant
