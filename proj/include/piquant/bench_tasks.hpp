#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "piquant/optimizers.hpp"
#include "piquant/rng.hpp"

namespace piquant {

// f(x, y) = (x^2 + y - 11)^2 + (x + y^2 - 7)^2
double himmelblau(double x, double y);
void himmelblau_grad(double x, double y, double& dx, double& dy);

enum class OptimizerKind : std::uint8_t { sgd = 0, adam = 1, pi_adam = 2, linear_adam = 3 };

const char* optimizer_name(OptimizerKind k);

struct DescentConfig {
    OptimizerKind optimizer = OptimizerKind::adam;
    int lambda = 2;       // pi_adam
    int bits = 8;         // linear_adam
    double learning_rate = 0.01;
    double epsilon = 1e-8;
    std::uint64_t steps = 2000;
};

struct DescentPoint {
    double x = 0.0;
    double y = 0.0;
    double f = 0.0;
};

struct DescentRun {
    std::string optimizer_id;
    double x0 = 0.0;
    double y0 = 0.0;
    std::vector<DescentPoint> trajectory;  // steps + 1 entries
    double final_f = 0.0;
    bool diverged = false;  // |x| or |y| exceeded 10^6; flagged, not fatal
};

// Iterates the optimizer on the Himmelblau gradient from (x0, y0),
// recording the full trajectory. Deterministic per (config, start, seed).
DescentRun run_descent(const DescentConfig& cfg, double x0, double y0, std::uint64_t seed);

// The four default start points, spread across the basins.
std::vector<std::pair<double, double>> default_descent_starts();

// Fully-connected tanh network; the last layer is linear (regression) or
// feeds a sigmoid (classification).
struct ToyModel {
    std::vector<std::uint64_t> layer_sizes;
    std::vector<DenseTensor> weights;  // shape {out, in}, row-major
    std::vector<DenseTensor> biases;   // shape {out}
};

// Weight magnitudes drawn in [0.4, 1.2]/sqrt(fan_in) with random signs and
// first-layer biases on a fixed lattice, so no unit starts dead.
ToyModel make_toy_model(const std::vector<std::uint64_t>& layer_sizes, Rng& rng);

enum class LossKind : std::uint8_t { mse = 0, binary_cross_entropy = 1 };

// Row-major batch of `count` rows; returns the outputs (count x out_dim).
std::vector<double> mlp_forward(const ToyModel& model, const std::vector<double>& inputs,
                                std::uint64_t count);

struct Gradients {
    std::vector<DenseTensor> weights;
    std::vector<DenseTensor> biases;
    double loss = 0.0;
};

// Analytic gradients of the mean loss over the batch.
Gradients mlp_backward(const ToyModel& model, const std::vector<double>& inputs,
                       const std::vector<double>& targets, std::uint64_t count,
                       LossKind loss);

enum class ToyTask : std::uint8_t { regression = 0, classification = 1 };

struct TrainConfig {
    ToyTask task = ToyTask::regression;
    OptimizerKind optimizer = OptimizerKind::adam;
    int lambda = 2;
    int bits = 8;
    std::uint64_t epochs = 300;
    double learning_rate = 1e-3;
    // Moment quantization at low lambda needs a denominator floor; 1e-8
    // turns second-moment noise into unbounded steps. Applied to every
    // optimizer so comparisons stay like-for-like.
    double epsilon = 1e-3;
    std::uint64_t sample_count = 192;
    std::uint64_t batch_size = 32;
    std::uint64_t hidden = 12;
    double noise = 0.15;
};

// Per-epoch loss over the full training set: epochs + 1 entries, the first
// measured before any update. Bit-reproducible per (config, seed).
std::vector<double> train_toy(const TrainConfig& cfg, std::uint64_t seed);

}  // namespace piquant
