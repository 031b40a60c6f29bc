// Wall-clock comparison of the serial reference kernels against the
// OpenMP-parallel ones, with a bit-identity check on every run.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "piquant/error_lab.hpp"
#include "piquant/rng.hpp"
#include "piquant/tensor_quant.hpp"

using namespace piquant;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    std::uint64_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000000;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 3;

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP disabled)\n");
#endif
    std::printf("%-10s %-8s %12s %12s %8s %s\n", "kernel", "lambda", "serial(s)",
                "parallel(s)", "speedup", "identical");

    Rng rng(7);
    DenseTensor t;
    t.shape = {n};
    t.values.resize(n);
    for (auto& v : t.values) v = rng.gaussian();

    for (int lambda : {1, 2, 4}) {
        const PrecisionConfig cfg = PrecisionConfig::make(lambda);

        QuantizedTensor q_serial, q_par;
        const double ts = time_best_of(reps, [&] { q_serial = quantize_tensor_serial(t, cfg); });
        const double tp = time_best_of(reps, [&] { q_par = quantize_tensor(t, cfg); });
        const bool same_q = q_serial.codes == q_par.codes && q_serial.scale_w == q_par.scale_w;
        std::printf("%-10s %-8d %12.4f %12.4f %7.2fx %s\n", "quantize", lambda, ts, tp,
                    ts / tp, same_q ? "yes" : "NO");

        DenseTensor d_serial, d_par;
        const double us = time_best_of(reps, [&] { d_serial = dequantize_tensor_serial(q_serial); });
        const double up = time_best_of(reps, [&] { d_par = dequantize_tensor(q_par); });
        const bool same_d = d_serial.values == d_par.values;
        std::printf("%-10s %-8d %12.4f %12.4f %7.2fx %s\n", "dequantize", lambda, us, up,
                    us / up, same_d ? "yes" : "NO");

        if (!same_q || !same_d) return 1;
    }

    // Stats kernel: thread count must not change the result.
    const PrecisionConfig cfg2 = PrecisionConfig::make(2);
    ErrorStats s1, sp;
#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    const double es = time_best_of(reps, [&] {
        s1 = empirical_error_stats(Distribution::uniform, n / 4, cfg2, 42);
    });
#ifdef _OPENMP
    omp_set_num_threads(max_threads);
#endif
    const double ep = time_best_of(reps, [&] {
        sp = empirical_error_stats(Distribution::uniform, n / 4, cfg2, 42);
    });
    const bool same_s = s1.mean_abs_err_x == sp.mean_abs_err_x &&
                        s1.mean_abs_err_y == sp.mean_abs_err_y &&
                        s1.max_abs_err == sp.max_abs_err;
    std::printf("%-10s %-8d %12.4f %12.4f %7.2fx %s\n", "stats", 2, es, ep, es / ep,
                same_s ? "yes" : "NO");
    return same_s ? 0 : 1;
}
