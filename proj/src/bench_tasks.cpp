#include "piquant/bench_tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "piquant/errors.hpp"

namespace piquant {

namespace {

constexpr double kDivergenceLimit = 1e6;

AdamConfig adam_config_for(OptimizerKind kind, double lr, double epsilon, int lambda,
                           int bits) {
    AdamConfig cfg;
    cfg.learning_rate = lr;
    cfg.epsilon = epsilon;
    switch (kind) {
        case OptimizerKind::adam: cfg.quant_mode = QuantMode::none; break;
        case OptimizerKind::pi_adam:
            cfg.quant_mode = QuantMode::pi_quant;
            cfg.lambda = lambda;
            break;
        case OptimizerKind::linear_adam:
            cfg.quant_mode = QuantMode::linear_quant;
            cfg.bits = bits;
            break;
        case OptimizerKind::sgd: break;  // no state
    }
    return cfg;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Activations {
    // One entry per layer boundary: activations[0] is the input batch.
    std::vector<std::vector<double>> values;
};

Activations forward_all(const ToyModel& model, const std::vector<double>& inputs,
                        std::uint64_t count) {
    const std::size_t layers = model.weights.size();
    Activations acts;
    acts.values.resize(layers + 1);
    acts.values[0] = inputs;

    for (std::size_t l = 0; l < layers; ++l) {
        const std::uint64_t in_dim = model.layer_sizes[l];
        const std::uint64_t out_dim = model.layer_sizes[l + 1];
        const std::vector<double>& prev = acts.values[l];
        std::vector<double>& next = acts.values[l + 1];
        next.assign(count * out_dim, 0.0);

        const double* w = model.weights[l].values.data();
        const double* b = model.biases[l].values.data();
        const bool last = (l + 1 == layers);
        for (std::uint64_t r = 0; r < count; ++r) {
            for (std::uint64_t o = 0; o < out_dim; ++o) {
                double z = b[o];
                for (std::uint64_t i = 0; i < in_dim; ++i) {
                    z += w[o * in_dim + i] * prev[r * in_dim + i];
                }
                next[r * out_dim + o] = last ? z : std::tanh(z);
            }
        }
    }
    return acts;
}

std::vector<std::pair<double, double>> himmelblau_default_starts() {
    return {{0.0, 0.0}, {0.0, -5.0}, {-4.0, 4.0}, {4.0, -1.0}};
}

}  // namespace

double himmelblau(double x, double y) {
    const double a = x * x + y - 11.0;
    const double b = x + y * y - 7.0;
    return a * a + b * b;
}

void himmelblau_grad(double x, double y, double& dx, double& dy) {
    const double a = x * x + y - 11.0;
    const double b = x + y * y - 7.0;
    dx = 4.0 * x * a + 2.0 * b;
    dy = 2.0 * a + 4.0 * y * b;
}

const char* optimizer_name(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::adam: return "adam";
        case OptimizerKind::pi_adam: return "pi_adam";
        case OptimizerKind::linear_adam: return "linear_adam";
    }
    return "?";
}

std::vector<std::pair<double, double>> default_descent_starts() {
    return himmelblau_default_starts();
}

DescentRun run_descent(const DescentConfig& cfg, double x0, double y0,
                       std::uint64_t /*seed*/) {
    DescentRun run;
    run.optimizer_id = optimizer_name(cfg.optimizer);
    if (cfg.optimizer == OptimizerKind::pi_adam) {
        run.optimizer_id += "_l" + std::to_string(cfg.lambda);
    } else if (cfg.optimizer == OptimizerKind::linear_adam) {
        run.optimizer_id += "_b" + std::to_string(cfg.bits);
    }
    run.x0 = x0;
    run.y0 = y0;

    DenseTensor params = DenseTensor::from_values({x0, y0});
    const AdamConfig acfg =
        adam_config_for(cfg.optimizer, cfg.learning_rate, cfg.epsilon, cfg.lambda, cfg.bits);
    AdamState state = init_adam_state(params.shape, acfg);

    run.trajectory.reserve(cfg.steps + 1);
    run.trajectory.push_back({x0, y0, himmelblau(x0, y0)});

    for (std::uint64_t step = 0; step < cfg.steps; ++step) {
        DenseTensor grads = DenseTensor::from_values({0.0, 0.0});
        himmelblau_grad(params.values[0], params.values[1], grads.values[0],
                        grads.values[1]);
        if (cfg.optimizer == OptimizerKind::sgd) {
            sgd_step(params, grads, cfg.learning_rate);
        } else {
            optimizer_step(params, grads, state, acfg);
        }
        const double x = params.values[0];
        const double y = params.values[1];
        run.trajectory.push_back({x, y, himmelblau(x, y)});
        if (std::fabs(x) > kDivergenceLimit || std::fabs(y) > kDivergenceLimit) {
            run.diverged = true;
            break;
        }
    }
    run.final_f = run.trajectory.back().f;
    return run;
}

ToyModel make_toy_model(const std::vector<std::uint64_t>& layer_sizes, Rng& rng) {
    if (layer_sizes.size() < 2) throw ConfigError("model needs at least two layers");
    ToyModel model;
    model.layer_sizes = layer_sizes;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const std::uint64_t in_dim = layer_sizes[l];
        const std::uint64_t out_dim = layer_sizes[l + 1];

        DenseTensor w;
        w.shape = {out_dim, in_dim};
        w.values.resize(out_dim * in_dim);
        const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
        for (double& v : w.values) {
            const double mag = rng.uniform(0.4, 1.2) * scale;
            v = rng.uniform01() < 0.5 ? -mag : mag;
        }
        model.weights.push_back(std::move(w));

        DenseTensor b;
        b.shape = {out_dim};
        b.values.assign(out_dim, 0.0);
        if (l == 0 && out_dim > 1) {
            for (std::uint64_t o = 0; o < out_dim; ++o) {
                b.values[o] = -0.8 + 1.6 * static_cast<double>(o) /
                                         static_cast<double>(out_dim - 1);
            }
        }
        model.biases.push_back(std::move(b));
    }
    return model;
}

std::vector<double> mlp_forward(const ToyModel& model, const std::vector<double>& inputs,
                                std::uint64_t count) {
    if (inputs.size() != count * model.layer_sizes.front()) {
        throw DomainError("mlp_forward: batch shape mismatch");
    }
    return forward_all(model, inputs, count).values.back();
}

Gradients mlp_backward(const ToyModel& model, const std::vector<double>& inputs,
                       const std::vector<double>& targets, std::uint64_t count,
                       LossKind loss) {
    const std::uint64_t out_dim = model.layer_sizes.back();
    if (inputs.size() != count * model.layer_sizes.front()) {
        throw DomainError("mlp_backward: batch shape mismatch");
    }
    if (targets.size() != count * out_dim) {
        throw DomainError("mlp_backward: target shape mismatch");
    }

    const Activations acts = forward_all(model, inputs, count);
    const std::vector<double>& out = acts.values.back();
    const double inv_n = 1.0 / static_cast<double>(count * out_dim);

    // dL/d(pre-activation of the last layer); also accumulates the loss.
    double loss_acc = 0.0;
    std::vector<double> delta(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (loss == LossKind::mse) {
            const double d = out[i] - targets[i];
            loss_acc += d * d;
            delta[i] = 2.0 * d * inv_n;
        } else {
            const double p = sigmoid(out[i]);
            const double y = targets[i];
            // Clamped log keeps the loss finite for saturated outputs.
            constexpr double kTiny = 1e-12;
            loss_acc -= y * std::log(std::max(p, kTiny)) +
                        (1.0 - y) * std::log(std::max(1.0 - p, kTiny));
            delta[i] = (p - y) * inv_n;
        }
    }

    Gradients grads;
    grads.loss = loss_acc * inv_n;
    const std::size_t layers = model.weights.size();
    grads.weights.resize(layers);
    grads.biases.resize(layers);

    for (std::size_t l = layers; l-- > 0;) {
        const std::uint64_t in_dim = model.layer_sizes[l];
        const std::uint64_t odim = model.layer_sizes[l + 1];
        const std::vector<double>& prev = acts.values[l];

        DenseTensor& gw = grads.weights[l];
        gw.shape = {odim, in_dim};
        gw.values.assign(odim * in_dim, 0.0);
        DenseTensor& gb = grads.biases[l];
        gb.shape = {odim};
        gb.values.assign(odim, 0.0);

        for (std::uint64_t r = 0; r < count; ++r) {
            for (std::uint64_t o = 0; o < odim; ++o) {
                const double d = delta[r * odim + o];
                gb.values[o] += d;
                for (std::uint64_t i = 0; i < in_dim; ++i) {
                    gw.values[o * in_dim + i] += d * prev[r * in_dim + i];
                }
            }
        }

        if (l == 0) break;
        // Propagate through the weights and the tanh of the layer below.
        std::vector<double> next_delta(count * in_dim, 0.0);
        const double* w = model.weights[l].values.data();
        for (std::uint64_t r = 0; r < count; ++r) {
            for (std::uint64_t i = 0; i < in_dim; ++i) {
                double acc = 0.0;
                for (std::uint64_t o = 0; o < odim; ++o) {
                    acc += w[o * in_dim + i] * delta[r * odim + o];
                }
                const double h = prev[r * in_dim + i];
                next_delta[r * in_dim + i] = acc * (1.0 - h * h);
            }
        }
        delta = std::move(next_delta);
    }
    return grads;
}

std::vector<double> train_toy(const TrainConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);

    const std::uint64_t n = cfg.sample_count;
    std::vector<double> xs, ys;
    std::uint64_t in_dim = 0;
    if (cfg.task == ToyTask::regression) {
        in_dim = 1;
        xs.resize(n);
        ys.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            xs[i] = rng.uniform(-1.0, 1.0);
        }
        for (std::uint64_t i = 0; i < n; ++i) {
            ys[i] = std::sin(3.0 * xs[i]) + cfg.noise * rng.gaussian();
        }
    } else {
        // Two interleaved crescents, generated analytically.
        in_dim = 2;
        xs.resize(2 * n);
        ys.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            const double t = rng.uniform(0.0, 3.141592653589793);
            const bool second = (i % 2) == 1;
            double px = second ? 1.0 - std::cos(t) : std::cos(t);
            double py = second ? 0.5 - std::sin(t) : std::sin(t);
            px += cfg.noise * rng.gaussian();
            py += cfg.noise * rng.gaussian();
            xs[2 * i] = px;
            xs[2 * i + 1] = py;
            ys[i] = second ? 1.0 : 0.0;
        }
    }

    const LossKind loss =
        cfg.task == ToyTask::regression ? LossKind::mse : LossKind::binary_cross_entropy;
    ToyModel model = make_toy_model({in_dim, cfg.hidden, 1}, rng);

    const AdamConfig acfg = adam_config_for(cfg.optimizer, cfg.learning_rate, cfg.epsilon,
                                            cfg.lambda, cfg.bits);
    std::vector<AdamState> states;
    std::vector<DenseTensor*> params;
    for (auto& w : model.weights) params.push_back(&w);
    for (auto& b : model.biases) params.push_back(&b);
    for (const DenseTensor* p : params) states.push_back(init_adam_state(p->shape, acfg));

    std::vector<double> curve;
    curve.reserve(cfg.epochs + 1);
    curve.push_back(mlp_backward(model, xs, ys, n, loss).loss);

    std::vector<std::uint64_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    const std::uint64_t batches = n / cfg.batch_size;
    for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates reshuffle each epoch.
        for (std::uint64_t i = n - 1; i > 0; --i) {
            std::swap(order[i], order[rng.below(i + 1)]);
        }
        for (std::uint64_t b = 0; b < batches; ++b) {
            std::vector<double> bx(cfg.batch_size * in_dim), by(cfg.batch_size);
            for (std::uint64_t k = 0; k < cfg.batch_size; ++k) {
                const std::uint64_t idx = order[b * cfg.batch_size + k];
                for (std::uint64_t d = 0; d < in_dim; ++d) {
                    bx[k * in_dim + d] = xs[idx * in_dim + d];
                }
                by[k] = ys[idx];
            }
            Gradients grads = mlp_backward(model, bx, by, cfg.batch_size, loss);

            for (std::size_t p = 0; p < params.size(); ++p) {
                DenseTensor& grad = p < model.weights.size()
                                        ? grads.weights[p]
                                        : grads.biases[p - model.weights.size()];
                if (cfg.optimizer == OptimizerKind::sgd) {
                    sgd_step(*params[p], grad, cfg.learning_rate);
                } else {
                    optimizer_step(*params[p], grad, states[p], acfg);
                }
            }
        }
        curve.push_back(mlp_backward(model, xs, ys, n, loss).loss);
    }
    return curve;
}

}  // namespace piquant
