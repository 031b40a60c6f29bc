#pragma once

#include <cstdint>

namespace piquant {

// Decimal digits of pi starting at the 9th decimal place, i.e. the
// fractional part of pi * 10^8. Materialized as a literal: evaluating
// pi * 1e8 - 314159265 in binary64 would cancel away the top eight digits
// of the tail.
inline constexpr double kPiFracTail = 0.35897932384626433833;

inline constexpr double kTau = 6.283185307179586476925286766559;  // 2*pi

// Digit budget and derived constants of one codec instance. A code carries
// 2*lambda decimal digits; the angle grid step is 2*pi*10^-lambda.
struct PrecisionConfig {
    int lambda = 0;
    double pibar = 0.0;                 // irrational rotation coefficient
    std::uint64_t digit_modulus = 0;    // 10^lambda
    std::uint64_t code_modulus = 0;     // 10^(2*lambda)
    double angle_unit = 0.0;            // 2*pi*10^-lambda

    // Standard instance: pibar = 10^-lambda + 10^-2lambda * kPiFracTail.
    static PrecisionConfig make(int lambda);

    // Same layout with an arbitrary coefficient (ablation variants).
    // The coefficient must be finite and positive; no further checks.
    static PrecisionConfig with_coefficient(int lambda, double coefficient);
};

// Coefficient of the standard instance, 10^-lambda + 10^-2lambda * tail.
double build_pibar(int lambda);

struct PlanarPoint {
    double x = 0.0;
    double y = 0.0;
};

// Intermediates of the encoder for one point.
struct GeometricSolution {
    double alpha = 0.0;   // polar angle of the point, (-pi, pi]
    double beta = 0.0;    // arccos(|z|/2), [0, pi/2]
    double delta = 0.0;   // (alpha - beta) mod 2*pi, [0, 2*pi)
    double omega = 0.0;   // ((alpha + beta) - pibar*delta) / (2*pi)
    std::uint64_t m = 0;  // floor(frac(omega) * 10^lambda)
    std::uint64_t g = 0;  // floor(delta/(2*pi) * 10^lambda)
};

// Integer angle code in [0, 10^(2*lambda)); digit layout m * 10^lambda + g.
using RotationCode = std::uint64_t;

// Fractional part v - floor(v), in [0, 1) for any finite v.
double frac(double v);

// Solves the geometric system for a point with x^2 + y^2 <= 4.
// At the origin alpha is fixed to 0 by convention.
GeometricSolution solve_geometry(PlanarPoint p, const PrecisionConfig& cfg);

// Digit extraction: floor(frac(omega) * 10^lambda), clamped to the digit range.
std::uint64_t solve_m(double omega, const PrecisionConfig& cfg);

// |frac(m * pibar) - frac(omega)| folded into [0, 0.5]; certifies how well
// the digit extraction solved the fractional matching equation.
double solve_m_residual(std::uint64_t m, double omega, const PrecisionConfig& cfg);

RotationCode encode_pair(PlanarPoint p, const PrecisionConfig& cfg);

// theta = code * angle_unit; returns (cos theta + cos pibar*theta,
// sin theta + sin pibar*theta). Output radius is at most 2.
PlanarPoint decode_code(RotationCode code, const PrecisionConfig& cfg);

// Max-norm of decode(encode(p)) - p.
double roundtrip_error(PlanarPoint p, const PrecisionConfig& cfg);

// Worst-case roundtrip error, 2 * angle_unit * (1 + pibar): one grid step
// in the first rotation plus a grid step and coefficient slack in the second.
double pointwise_error_bound(const PrecisionConfig& cfg);

}  // namespace piquant
