// Command-line surface for the rotation codec: file quantization, error
// statistics, precision grids, coefficient ablation, benchmarks, and
// trajectory emission. Data goes to stdout (or --out, written atomically);
// diagnostics go to stderr.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "piquant/bench_tasks.hpp"
#include "piquant/container_io.hpp"
#include "piquant/error_lab.hpp"
#include "piquant/errors.hpp"
#include "piquant/optimizers.hpp"
#include "piquant/tensor_quant.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitFormat = 2;
constexpr int kExitBoundViolated = 3;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// stdout by default; --out goes through a temp file and a rename so a
// failure never leaves a partial artifact.
void emit(const std::string& data, const std::string& out_path) {
    if (out_path.empty()) {
        std::fwrite(data.data(), 1, data.size(), stdout);
        return;
    }
    const std::filesystem::path path(out_path);
    std::random_device rd;
    const std::filesystem::path tmp =
        path.parent_path() / (path.filename().string() + ".tmp" + std::to_string(rd() % 1000000));
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw piquant::IoError("cannot open " + tmp.string());
        f.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!f) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw piquant::IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code rm;
        std::filesystem::remove(tmp, rm);
        throw piquant::IoError("rename to " + out_path + " failed");
    }
}

std::vector<int> parse_lambda_list(const std::string& list) {
    std::vector<int> lambdas;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        lambdas.push_back(std::stoi(item));
    }
    if (lambdas.empty()) throw piquant::ConfigError("empty lambda list");
    return lambdas;
}

piquant::OptimizerKind parse_optimizer(const std::string& name) {
    if (name == "sgd") return piquant::OptimizerKind::sgd;
    if (name == "adam") return piquant::OptimizerKind::adam;
    if (name == "pi_adam") return piquant::OptimizerKind::pi_adam;
    if (name == "linear_adam") return piquant::OptimizerKind::linear_adam;
    throw piquant::ConfigError("unknown optimizer: " + name);
}

struct CommonArgs {
    std::string out;
    int lambda = 2;
    std::uint64_t seed = 42;
};

int cmd_quantize(const std::string& in, const std::string& out, int lambda,
                 const std::string& pack) {
    const piquant::PrecisionConfig cfg = piquant::PrecisionConfig::make(lambda);
    const piquant::PackMode mode =
        pack == "group" ? piquant::PackMode::group_packed : piquant::PackMode::byte_aligned;
    const piquant::DenseTensor t = piquant::read_dense(in);
    piquant::QuantizedTensor q = piquant::quantize_tensor(t, cfg, mode);
    piquant::write_quantized(out, q);

    const piquant::PackedCodes packed = piquant::pack_codes(q.codes, cfg, mode);
    nlohmann::json summary = {
        {"schema", "piquant.quantize.v1"},
        {"elements", q.original_len},
        {"lambda", lambda},
        {"pack_mode", pack},
        {"scale_w", q.scale_w},
        {"bits_per_param",
         q.original_len == 0
             ? 0.0
             : static_cast<double>(packed.bit_length) / static_cast<double>(q.original_len)},
        {"max_err_bound", piquant::pointwise_error_bound(cfg) * q.scale_w},
    };
    std::cout << summary.dump(2) << '\n';
    return kExitOk;
}

int cmd_dequantize(const std::string& in, const std::string& out) {
    const piquant::QuantizedTensor q = piquant::read_quantized(in);
    const piquant::DenseTensor t = piquant::dequantize_tensor(q);
    piquant::write_dense(out, t);
    nlohmann::json summary = {
        {"schema", "piquant.dequantize.v1"},
        {"elements", t.size()},
        {"lambda", q.lambda},
    };
    std::cout << summary.dump(2) << '\n';
    return kExitOk;
}

int cmd_stats(const std::string& dist_name, std::uint64_t n, const std::string& lambda_list,
              std::uint64_t seed, const std::string& out) {
    const piquant::Distribution dist = dist_name == "gaussian"
                                           ? piquant::Distribution::gaussian
                                           : piquant::Distribution::uniform;
    std::string csv = "lambda,dist,n,mean_x,mean_y,max,bound\n";
    bool bound_ok = true;
    for (int lambda : parse_lambda_list(lambda_list)) {
        const piquant::PrecisionConfig cfg = piquant::PrecisionConfig::make(lambda);
        const piquant::ErrorStats s = piquant::empirical_error_stats(dist, n, cfg, seed);
        csv += std::to_string(lambda);
        csv += ',';
        csv += piquant::distribution_name(dist);
        csv += ',' + std::to_string(n);
        csv += ',' + format_double(s.mean_abs_err_x);
        csv += ',' + format_double(s.mean_abs_err_y);
        csv += ',' + format_double(s.max_abs_err);
        csv += ',' + format_double(s.bound_eq14);
        csv += '\n';

        const double slack_bound = s.bound_eq14 * 2.0;
        const bool ok = s.mean_abs_err_x <= slack_bound && s.mean_abs_err_y <= slack_bound;
        bound_ok = bound_ok && ok;
        std::cerr << "mean-bound lambda=" << lambda << ": "
                  << (ok ? "PASS" : "FAIL") << " (mean_x=" << s.mean_abs_err_x
                  << ", mean_y=" << s.mean_abs_err_y << ", bound*2=" << slack_bound
                  << ")\n";
    }
    emit(csv, out);
    return bound_ok ? kExitOk : kExitBoundViolated;
}

int cmd_grid(int lambda, std::uint32_t resolution, const std::string& out) {
    const piquant::PrecisionConfig cfg = piquant::PrecisionConfig::make(lambda);
    const piquant::GridReport report = piquant::error_grid(cfg, resolution);
    std::string csv = "cell_x,cell_y,mean_err,density\n";
    for (std::uint32_t cy = 0; cy < resolution; ++cy) {
        for (std::uint32_t cx = 0; cx < resolution; ++cx) {
            const std::size_t idx = static_cast<std::size_t>(cy) * resolution + cx;
            csv += std::to_string(cx) + ',' + std::to_string(cy) + ',' +
                   format_double(report.mean_err[idx]) + ',' +
                   std::to_string(report.density[idx]) + '\n';
        }
    }
    emit(csv, out);
    return kExitOk;
}

int cmd_ablation(std::uint64_t n, std::uint64_t seed, int lambda, const std::string& out) {
    std::string csv = "variant,dist,n,mean_err\n";
    for (const auto& row : piquant::pibar_ablation(n, seed, lambda)) {
        csv += row.variant;
        csv += ',';
        csv += piquant::distribution_name(row.distribution);
        csv += ',' + std::to_string(row.sample_count);
        csv += ',' + format_double(row.mean_err);
        csv += '\n';
    }
    emit(csv, out);
    return kExitOk;
}

int cmd_trajectory(double theta_max, std::uint64_t n, int lambda, const std::string& out) {
    const piquant::PrecisionConfig cfg = piquant::PrecisionConfig::make(lambda);
    std::string csv = "theta,x,y\n";
    for (const auto& s : piquant::trajectory_samples(theta_max, n, cfg)) {
        csv += format_double(s.theta) + ',' + format_double(s.x) + ',' +
               format_double(s.y) + '\n';
    }
    emit(csv, out);
    return kExitOk;
}

int cmd_himmelblau(const std::string& optimizer, int lambda, int bits,
                   const std::string& start, std::uint64_t steps, double lr,
                   std::uint64_t seed, const std::string& out) {
    piquant::DescentConfig cfg;
    cfg.optimizer = parse_optimizer(optimizer);
    cfg.lambda = lambda;
    cfg.bits = bits;
    cfg.learning_rate = lr;
    cfg.steps = steps;

    std::vector<std::pair<double, double>> starts;
    if (start.empty()) {
        starts = piquant::default_descent_starts();
    } else {
        const auto comma = start.find(',');
        if (comma == std::string::npos) {
            throw piquant::ConfigError("--start expects \"x,y\"");
        }
        starts.emplace_back(std::stod(start.substr(0, comma)),
                            std::stod(start.substr(comma + 1)));
    }

    std::string csv = "step,x,y,f,optimizer,start_id\n";
    for (std::size_t s = 0; s < starts.size(); ++s) {
        const piquant::DescentRun run =
            piquant::run_descent(cfg, starts[s].first, starts[s].second, seed);
        for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
            const auto& pt = run.trajectory[i];
            csv += std::to_string(i) + ',' + format_double(pt.x) + ',' +
                   format_double(pt.y) + ',' + format_double(pt.f) + ',' +
                   run.optimizer_id + ',' + std::to_string(s) + '\n';
        }
        if (run.diverged) {
            std::cerr << "descent from start " << s << " diverged\n";
        }
    }
    emit(csv, out);
    return kExitOk;
}

int cmd_train_toy(const std::string& task_name, const std::string& optimizer, int lambda,
                  int bits, std::uint64_t epochs, std::uint64_t seed, double lr,
                  const std::string& out) {
    piquant::TrainConfig cfg;
    cfg.task = task_name == "classification" ? piquant::ToyTask::classification
                                             : piquant::ToyTask::regression;
    cfg.optimizer = parse_optimizer(optimizer);
    cfg.lambda = lambda;
    cfg.bits = bits;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;

    const std::vector<double> curve = piquant::train_toy(cfg, seed);
    std::string csv = "epoch,loss,optimizer,lambda,seed\n";
    const std::string opt_id = optimizer + (cfg.optimizer == piquant::OptimizerKind::pi_adam
                                                ? "_l" + std::to_string(lambda)
                                                : "");
    for (std::size_t e = 0; e < curve.size(); ++e) {
        csv += std::to_string(e) + ',' + format_double(curve[e]) + ',' + opt_id + ',' +
               std::to_string(lambda) + ',' + std::to_string(seed) + '\n';
    }
    emit(csv, out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pi-quant rotation codec toolbox"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "cap OpenMP worker count (0 = runtime default)");

    // quantize
    auto* quantize = app.add_subcommand("quantize", "dense .pqtd -> quantized .piqt");
    std::string q_in, q_out, q_pack = "byte";
    int q_lambda = 2;
    quantize->add_option("input", q_in, ".pqtd input path")->required();
    quantize->add_option("output", q_out, ".piqt output path")->required();
    quantize->add_option("--lambda", q_lambda, "digit budget, 1..4 (default 2)");
    quantize->add_option("--pack", q_pack, "byte | group (default byte)")
        ->check(CLI::IsMember({"byte", "group"}));

    // dequantize
    auto* dequantize = app.add_subcommand("dequantize", "quantized .piqt -> dense .pqtd");
    std::string d_in, d_out;
    dequantize->add_option("input", d_in, ".piqt input path")->required();
    dequantize->add_option("output", d_out, ".pqtd output path")->required();

    // stats
    auto* stats = app.add_subcommand(
        "stats", "roundtrip error statistics; CSV lambda,dist,n,mean_x,mean_y,max,bound; "
                 "exit 3 if a mean exceeds 2x the average-error bound");
    std::string s_dist = "uniform", s_lambdas = "1,2,3,4", s_out;
    std::uint64_t s_n = 100000, s_seed = 42;
    stats->add_option("--dist", s_dist, "uniform | gaussian (default uniform)")
        ->check(CLI::IsMember({"uniform", "gaussian"}));
    stats->add_option("--n", s_n, "sample count (default 100000)");
    stats->add_option("--lambda-list", s_lambdas, "comma-separated lambdas (default 1,2,3,4)");
    stats->add_option("--seed", s_seed, "RNG seed (default 42)");
    stats->add_option("--out", s_out, "write CSV here instead of stdout");

    // grid
    auto* grid = app.add_subcommand(
        "grid", "per-cell error/density over [-1,1]^2; CSV cell_x,cell_y,mean_err,density");
    int g_lambda = 2;
    std::uint32_t g_res = 64;
    std::string g_out;
    grid->add_option("--lambda", g_lambda, "digit budget (default 2)");
    grid->add_option("--res", g_res, "cells per axis, >= 16 (default 64)");
    grid->add_option("--out", g_out, "write CSV here instead of stdout");

    // ablation
    auto* ablation = app.add_subcommand(
        "ablation", "coefficient ablation; CSV variant,dist,n,mean_err");
    std::uint64_t a_n = 100000, a_seed = 42;
    int a_lambda = 3;
    std::string a_out;
    ablation->add_option("--n", a_n, "sample count (default 100000)");
    ablation->add_option("--seed", a_seed, "RNG seed (default 42)");
    ablation->add_option("--lambda", a_lambda, "digit budget for the variants (default 3)");
    ablation->add_option("--out", a_out, "write CSV here instead of stdout");

    // trajectory
    auto* trajectory = app.add_subcommand(
        "trajectory", "rotation curve samples; CSV theta,x,y");
    double t_theta_max = 628.3185307179587;
    std::uint64_t t_n = 100000;
    int t_lambda = 2;
    std::string t_out;
    trajectory->add_option("--theta-max", t_theta_max,
                           "end of the sampled range in radians (default 2*pi*100)");
    trajectory->add_option("--n", t_n, "sample count, >= 2 (default 100000)");
    trajectory->add_option("--lambda", t_lambda, "digit budget (default 2)");
    trajectory->add_option("--out", t_out, "write CSV here instead of stdout");

    // himmelblau
    auto* himmelblau = app.add_subcommand(
        "himmelblau", "descent benchmark; CSV step,x,y,f,optimizer,start_id");
    std::string h_optimizer = "adam", h_start, h_out;
    int h_lambda = 2, h_bits = 8;
    std::uint64_t h_steps = 2000, h_seed = 42;
    double h_lr = 0.01;
    himmelblau->add_option("--optimizer", h_optimizer, "sgd | adam | pi_adam | linear_adam");
    himmelblau->add_option("--lambda", h_lambda, "pi_adam digit budget (default 2)");
    himmelblau->add_option("--bits", h_bits, "linear_adam width (default 8)");
    himmelblau->add_option("--start", h_start, "\"x,y\" start (default: the four standard starts)");
    himmelblau->add_option("--steps", h_steps, "step count (default 2000)");
    himmelblau->add_option("--lr", h_lr, "learning rate (default 0.01)");
    himmelblau->add_option("--seed", h_seed, "RNG seed (default 42)");
    himmelblau->add_option("--out", h_out, "write CSV here instead of stdout");

    // train-toy
    auto* train = app.add_subcommand(
        "train-toy", "toy training benchmark; CSV epoch,loss,optimizer,lambda,seed");
    std::string tt_task = "regression", tt_optimizer = "adam", tt_out;
    int tt_lambda = 2, tt_bits = 8;
    std::uint64_t tt_epochs = 300, tt_seed = 1;
    double tt_lr = 1e-3;
    train->add_option("--task", tt_task, "regression | classification")
        ->check(CLI::IsMember({"regression", "classification"}));
    train->add_option("--optimizer", tt_optimizer, "sgd | adam | pi_adam | linear_adam");
    train->add_option("--lambda", tt_lambda, "pi_adam digit budget (default 2)");
    train->add_option("--bits", tt_bits, "linear_adam width (default 8)");
    train->add_option("--epochs", tt_epochs, "epoch count (default 300)");
    train->add_option("--seed", tt_seed, "RNG seed (default 1)");
    train->add_option("--lr", tt_lr, "learning rate (default 1e-3)");
    train->add_option("--out", tt_out, "write CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help / --version
        }
        std::cerr << e.what() << '\n';
        return kExitFormat;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (quantize->parsed()) return cmd_quantize(q_in, q_out, q_lambda, q_pack);
        if (dequantize->parsed()) return cmd_dequantize(d_in, d_out);
        if (stats->parsed()) return cmd_stats(s_dist, s_n, s_lambdas, s_seed, s_out);
        if (grid->parsed()) return cmd_grid(g_lambda, g_res, g_out);
        if (ablation->parsed()) return cmd_ablation(a_n, a_seed, a_lambda, a_out);
        if (trajectory->parsed()) return cmd_trajectory(t_theta_max, t_n, t_lambda, t_out);
        if (himmelblau->parsed())
            return cmd_himmelblau(h_optimizer, h_lambda, h_bits, h_start, h_steps, h_lr,
                                  h_seed, h_out);
        if (train->parsed())
            return cmd_train_toy(tt_task, tt_optimizer, tt_lambda, tt_bits, tt_epochs,
                                 tt_seed, tt_lr, tt_out);
    } catch (const piquant::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const piquant::FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return kExitFormat;
    } catch (const piquant::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitFormat;
    } catch (const piquant::DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kExitFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFormat;
    }
    return kExitFormat;
}
