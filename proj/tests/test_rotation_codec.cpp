#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "piquant/errors.hpp"
#include "piquant/rng.hpp"
#include "piquant/rotation_codec.hpp"

using namespace piquant;

namespace {

// Extended-precision evaluations of the coefficient formula, frozen as the
// nearest binary64 values.
constexpr double kPibarRef[5] = {0.0, 0.10358979323846264, 0.010035897932384626,
                                 0.0010003589793238462, 0.00010000358979323846};

std::vector<PlanarPoint> random_square_points(std::uint64_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<PlanarPoint> pts(n);
    for (auto& p : pts) {
        p.x = rng.uniform(-1.0, 1.0);
        p.y = rng.uniform(-1.0, 1.0);
    }
    return pts;
}

}  // namespace

TEST_CASE("build_pibar matches the extended-precision evaluation") {
    for (int lambda = 1; lambda <= 4; ++lambda) {
        const double pb = build_pibar(lambda);
        CHECK(std::fabs(pb - kPibarRef[lambda]) <= 4 * std::numeric_limits<double>::epsilon());
    }
}

TEST_CASE("build_pibar defining identity holds to a few ulp") {
    const double p10[5] = {0.0, 1e-1, 1e-2, 1e-3, 1e-4};
    const double p100[5] = {0.0, 1e-2, 1e-4, 1e-6, 1e-8};
    for (int lambda = 1; lambda <= 4; ++lambda) {
        const double pb = build_pibar(lambda);
        const double residual = pb - p10[lambda] - p100[lambda] * kPiFracTail;
        CHECK(std::fabs(residual) <= 4 * std::numeric_limits<double>::epsilon() * pb);
    }
}

TEST_CASE("build_pibar rejects lambda outside [1, 4]") {
    CHECK_THROWS_AS(build_pibar(0), ConfigError);
    CHECK_THROWS_AS(build_pibar(5), ConfigError);
    CHECK_THROWS_AS(build_pibar(-1), ConfigError);
}

TEST_CASE("PrecisionConfig invariants") {
    for (int lambda = 1; lambda <= 4; ++lambda) {
        const PrecisionConfig cfg = PrecisionConfig::make(lambda);
        CHECK(cfg.pibar > 0.0);
        CHECK(cfg.pibar < 0.2);
        CHECK(cfg.code_modulus == cfg.digit_modulus * cfg.digit_modulus);
        const double tau = cfg.angle_unit * static_cast<double>(cfg.digit_modulus);
        CHECK(std::fabs(tau - kTau) <= 8 * std::numeric_limits<double>::epsilon() * kTau);
    }
}

TEST_CASE("solve_geometry at the origin uses the alpha = 0 convention") {
    const PrecisionConfig cfg = PrecisionConfig::make(2);
    const GeometricSolution s = solve_geometry({0.0, 0.0}, cfg);
    CHECK(s.alpha == 0.0);
    CHECK(s.beta == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
}

TEST_CASE("solve_geometry at (1, 1): the coefficient terms cancel") {
    const PrecisionConfig cfg = PrecisionConfig::make(1);
    const GeometricSolution s = solve_geometry({1.0, 1.0}, cfg);
    CHECK(s.alpha == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
    CHECK(s.beta == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
    CHECK(s.delta == 0.0);
    CHECK(s.omega == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s.m == 2);
    CHECK(s.g == 0);
}

TEST_CASE("worked example: m extraction and residual at lambda = 4") {
    const PrecisionConfig cfg = PrecisionConfig::make(4);
    const double frac_omega = 0.97525751858;
    CHECK(solve_m(frac_omega, cfg) == 9752);
    const double residual = solve_m_residual(9752, frac_omega, cfg);
    CHECK(std::fabs(residual - 0.000022510916) < 1e-9);
    // Extended-precision value of the same residual.
    CHECK(residual == doctest::Approx(2.25109163385123e-05).epsilon(1e-9));
}

TEST_CASE("residual examples") {
    const PrecisionConfig cfg1 = PrecisionConfig::make(1);
    CHECK(solve_m_residual(0, 0.0, cfg1) == 0.0);
    // |2 * pibar(1) - 0.25|, evaluated in extended precision.
    CHECK(solve_m_residual(2, 0.25, cfg1) ==
          doctest::Approx(0.042820413523074713).epsilon(1e-12));
}

TEST_CASE("encode_pair digit layout and the (1,1) example") {
    const PrecisionConfig cfg = PrecisionConfig::make(1);
    CHECK(encode_pair({1.0, 1.0}, cfg) == 20);

    for (int lambda = 1; lambda <= 4; ++lambda) {
        const PrecisionConfig c = PrecisionConfig::make(lambda);
        for (const auto& p : random_square_points(2000, 11 + lambda)) {
            const GeometricSolution s = solve_geometry(p, c);
            const RotationCode code = encode_pair(p, c);
            CHECK(code / c.digit_modulus == s.m);
            CHECK(code % c.digit_modulus == s.g);
            CHECK(code < c.code_modulus);
        }
    }
}

TEST_CASE("encode of the origin decodes near the origin") {
    for (int lambda = 1; lambda <= 4; ++lambda) {
        const PrecisionConfig cfg = PrecisionConfig::make(lambda);
        const PlanarPoint q = decode_code(encode_pair({0.0, 0.0}, cfg), cfg);
        CHECK(std::hypot(q.x, q.y) <= pointwise_error_bound(cfg));
    }
}

TEST_CASE("decode_code exact anchors") {
    const PrecisionConfig cfg = PrecisionConfig::make(1);
    const PlanarPoint p0 = decode_code(0, cfg);
    CHECK(p0.x == 2.0);
    CHECK(p0.y == 0.0);

    // theta = 4*pi: first rotation returns to 1, second sits at pibar*4*pi.
    const PlanarPoint p20 = decode_code(20, cfg);
    CHECK(p20.x == doctest::Approx(1.2658143778227218).epsilon(1e-12));
    CHECK(p20.y == doctest::Approx(0.9640242302674343).epsilon(1e-12));
}

TEST_CASE("decode radius identity over the full code book") {
    for (int lambda : {1, 2}) {
        const PrecisionConfig cfg = PrecisionConfig::make(lambda);
        for (RotationCode c = 0; c < cfg.code_modulus; ++c) {
            const PlanarPoint p = decode_code(c, cfg);
            CHECK(p.x * p.x + p.y * p.y <= 4.0 + 8 * std::numeric_limits<double>::epsilon());
        }
    }
    // Spot checks where enumeration is too large.
    for (int lambda : {3, 4}) {
        const PrecisionConfig cfg = PrecisionConfig::make(lambda);
        Rng rng(99);
        for (int i = 0; i < 20000; ++i) {
            const RotationCode c = rng.below(cfg.code_modulus);
            const PlanarPoint p = decode_code(c, cfg);
            CHECK(p.x * p.x + p.y * p.y <= 4.0 + 8 * std::numeric_limits<double>::epsilon());
        }
    }
}

TEST_CASE("the last code satisfies the radius identity, not a fixed point") {
    const PrecisionConfig cfg = PrecisionConfig::make(2);
    const RotationCode last = cfg.code_modulus - 1;
    const PlanarPoint p = decode_code(last, cfg);
    const double theta = static_cast<double>(last) * cfg.angle_unit;
    const double expected = 2.0 + 2.0 * std::cos((1.0 - cfg.pibar) * theta);
    CHECK(p.x * p.x + p.y * p.y == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("domain and format errors") {
    const PrecisionConfig cfg = PrecisionConfig::make(2);
    CHECK_THROWS_AS(solve_geometry({3.0, 0.0}, cfg), DomainError);
    CHECK_THROWS_AS(solve_geometry({std::nan(""), 0.0}, cfg), DomainError);
    CHECK_THROWS_AS(solve_geometry({0.0, std::numeric_limits<double>::infinity()}, cfg),
                    DomainError);
    CHECK_THROWS_AS(decode_code(cfg.code_modulus, cfg), FormatError);
    CHECK_THROWS_AS(PrecisionConfig::with_coefficient(2, 0.0), ConfigError);
    CHECK_THROWS_AS(PrecisionConfig::with_coefficient(2, std::nan("")), ConfigError);
}

TEST_CASE("determinism: identical inputs give identical bits") {
    const PrecisionConfig cfg = PrecisionConfig::make(3);
    for (const auto& p : random_square_points(500, 5)) {
        const RotationCode c1 = encode_pair(p, cfg);
        const RotationCode c2 = encode_pair(p, cfg);
        CHECK(c1 == c2);
        const PlanarPoint q1 = decode_code(c1, cfg);
        const PlanarPoint q2 = decode_code(c1, cfg);
        CHECK(q1.x == q2.x);
        CHECK(q1.y == q2.y);
    }
}

TEST_CASE("m-residual stays below 10^-lambda over random points") {
    for (int lambda = 1; lambda <= 4; ++lambda) {
        const PrecisionConfig cfg = PrecisionConfig::make(lambda);
        const double limit = std::pow(10.0, -lambda);
        for (const auto& p : random_square_points(100000, 21 + lambda)) {
            const GeometricSolution s = solve_geometry(p, cfg);
            REQUIRE(solve_m_residual(s.m, s.omega, cfg) < limit);
        }
    }
}

TEST_CASE("pointwise roundtrip error stays below the grid bound") {
    for (int lambda = 1; lambda <= 4; ++lambda) {
        const PrecisionConfig cfg = PrecisionConfig::make(lambda);
        const double bound = pointwise_error_bound(cfg) + 1e-12;
        for (const auto& p : random_square_points(100000, 31 + lambda)) {
            REQUIRE(roundtrip_error(p, cfg) <= bound);
        }
    }
}

TEST_CASE("roundtrip of representable points at lambda = 1") {
    const PrecisionConfig cfg = PrecisionConfig::make(1);
    const double err_bound = pointwise_error_bound(cfg) + 1e-12;
    for (RotationCode c = 0; c < cfg.code_modulus; ++c) {
        const PlanarPoint p = decode_code(c, cfg);
        CHECK(roundtrip_error(p, cfg) <= err_bound);

        // The re-encoded code deviates by at most two grid steps in each
        // rotation angle.
        const RotationCode c2 = encode_pair(p, cfg);
        const double t1 = static_cast<double>(c) * cfg.angle_unit;
        const double t2 = static_cast<double>(c2) * cfg.angle_unit;
        auto circular = [](double a) {
            double r = std::fmod(std::fabs(a), kTau);
            return std::min(r, kTau - r);
        };
        CHECK(circular(t2 - t1) <= 2.0 * cfg.angle_unit + 1e-12);
        CHECK(circular(cfg.pibar * (t2 - t1)) <= 2.0 * cfg.angle_unit * (1.0 + cfg.pibar) + 1e-12);
    }
}

TEST_CASE("mean roundtrip error decreases strictly with lambda") {
    const auto pts = random_square_points(20000, 77);
    double prev = std::numeric_limits<double>::infinity();
    for (int lambda = 1; lambda <= 4; ++lambda) {
        const PrecisionConfig cfg = PrecisionConfig::make(lambda);
        double acc = 0.0;
        for (const auto& p : pts) acc += roundtrip_error(p, cfg);
        const double mean = acc / static_cast<double>(pts.size());
        CHECK(mean < prev);
        prev = mean;
    }
}

TEST_CASE("errors concentrate away from the origin at lambda = 2") {
    const PrecisionConfig cfg = PrecisionConfig::make(2);
    double inner_acc = 0.0, outer_acc = 0.0;
    std::uint64_t inner_n = 0, outer_n = 0;
    for (const auto& p : random_square_points(100000, 42)) {
        const double r = std::hypot(p.x, p.y);
        if (r < 0.3) {
            inner_acc += roundtrip_error(p, cfg);
            ++inner_n;
        } else if (r > 1.2) {
            outer_acc += roundtrip_error(p, cfg);
            ++outer_n;
        }
    }
    REQUIRE(inner_n > 0);
    REQUIRE(outer_n > 0);
    CHECK(inner_acc / inner_n < outer_acc / outer_n);
}
