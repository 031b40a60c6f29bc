#include "piquant/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "piquant/container_io.hpp"
#include "piquant/errors.hpp"

namespace piquant {

namespace {

void check_step_inputs(const DenseTensor& params, const DenseTensor& grads) {
    if (params.shape != grads.shape) {
        throw DomainError("parameter/gradient shape mismatch");
    }
    for (double g : grads.values) {
        if (!std::isfinite(g)) throw DomainError("non-finite gradient");
    }
}

// Algorithm core shared by every storage backend. `m` and `v` hold the
// restored moments on entry and the fresh biased moments on exit; `t` is the
// post-increment step counter.
void adam_arithmetic(std::vector<double>& params, const std::vector<double>& grads,
                     std::vector<double>& m, std::vector<double>& v, std::uint64_t t,
                     const AdamConfig& cfg) {
    const double b1 = cfg.beta1;
    const double b2 = cfg.beta2;
    const double m_corr = 1.0 - std::pow(b1, static_cast<double>(t));
    const double v_corr = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        const double m_hat = m[i] / m_corr;
        const double v_hat = v[i] / v_corr;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

DenseTensor zeros_like(const std::vector<std::uint64_t>& shape) {
    DenseTensor t;
    t.shape = shape;
    std::uint64_t n = 1;
    for (std::uint64_t d : shape) n *= d;
    t.values.assign(n, 0.0);
    return t;
}

DenseTensor restore_moment(const MomentState& s) {
    if (const auto* dense = std::get_if<DenseTensor>(&s)) return *dense;
    if (const auto* pi = std::get_if<QuantizedTensor>(&s)) return dequantize_tensor(*pi);
    return linear_dequantize(std::get<LinearQuantTensor>(s));
}

}  // namespace

LinearQuantTensor linear_quantize(const DenseTensor& t, int bits) {
    if (bits < 2 || bits > 16) {
        throw ConfigError("linear_quantize: bits must be in [2, 16]");
    }
    for (double v : t.values) {
        if (!std::isfinite(v)) throw DomainError("linear_quantize: non-finite value");
    }

    LinearQuantTensor q;
    q.bits = bits;
    q.original_len = t.size();
    q.shape = t.shape;
    q.codes.resize(t.size());
    if (t.size() == 0) return q;

    const auto [lo_it, hi_it] = std::minmax_element(t.values.begin(), t.values.end());
    q.lo = *lo_it;
    q.hi = *hi_it;
    if (q.lo == q.hi) {
        // Degenerate range: every value is lo, all codes stay 0.
        return q;
    }

    const double levels = static_cast<double>((1u << bits) - 1);
    const double scale = levels / (q.hi - q.lo);
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        const double c = std::round((t.values[i] - q.lo) * scale);
        q.codes[i] = static_cast<std::uint32_t>(std::clamp(c, 0.0, levels));
    }
    return q;
}

DenseTensor linear_dequantize(const LinearQuantTensor& q) {
    DenseTensor t;
    t.shape = q.shape;
    t.values.resize(q.original_len);
    if (q.codes.size() != q.original_len) {
        throw FormatError("linear_dequantize: code count mismatch");
    }
    const double levels = static_cast<double>((1u << q.bits) - 1);
    const double step = q.hi > q.lo ? (q.hi - q.lo) / levels : 0.0;
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        t.values[i] = q.lo + static_cast<double>(q.codes[i]) * step;
    }
    return t;
}

AdamState init_adam_state(const std::vector<std::uint64_t>& shape, const AdamConfig& cfg) {
    AdamState state;
    const DenseTensor zeros = zeros_like(shape);
    switch (cfg.quant_mode) {
        case QuantMode::none:
            state.m_state = zeros;
            state.v_state = zeros;
            break;
        case QuantMode::pi_quant:
            if (cfg.identity_codec) {
                state.m_state = zeros;
                state.v_state = zeros;
            } else {
                const PrecisionConfig pc = PrecisionConfig::make(cfg.lambda);
                state.m_state = quantize_tensor(zeros, pc);
                state.v_state = quantize_tensor(zeros, pc);
            }
            break;
        case QuantMode::linear_quant:
            state.m_state = linear_quantize(zeros, cfg.bits);
            state.v_state = linear_quantize(zeros, cfg.bits);
            break;
    }
    return state;
}

void adam_step(DenseTensor& params, const DenseTensor& grads, AdamState& state,
               const AdamConfig& cfg) {
    check_step_inputs(params, grads);
    auto* m = std::get_if<DenseTensor>(&state.m_state);
    auto* v = std::get_if<DenseTensor>(&state.v_state);
    if (m == nullptr || v == nullptr) {
        throw DomainError("adam_step: state does not hold dense moments");
    }
    state.t += 1;
    adam_arithmetic(params.values, grads.values, m->values, v->values, state.t, cfg);
}

void pi_adam_step(DenseTensor& params, const DenseTensor& grads, AdamState& state,
                  const AdamConfig& cfg) {
    check_step_inputs(params, grads);
    state.t += 1;

    DenseTensor m = restore_moment(state.m_state);
    DenseTensor v = restore_moment(state.v_state);
    // The codec can return slightly negative values near zero; the square
    // root needs v >= 0.
    for (double& x : v.values) x = std::max(x, 0.0);

    adam_arithmetic(params.values, grads.values, m.values, v.values, state.t, cfg);

    if (cfg.identity_codec) {
        state.m_state = std::move(m);
        state.v_state = std::move(v);
    } else {
        const PrecisionConfig pc = PrecisionConfig::make(cfg.lambda);
        state.m_state = quantize_tensor(m, pc);
        state.v_state = quantize_tensor(v, pc);
    }
}

void linear_adam_step(DenseTensor& params, const DenseTensor& grads, AdamState& state,
                      const AdamConfig& cfg) {
    check_step_inputs(params, grads);
    state.t += 1;

    DenseTensor m = restore_moment(state.m_state);
    DenseTensor v = restore_moment(state.v_state);
    for (double& x : v.values) x = std::max(x, 0.0);

    adam_arithmetic(params.values, grads.values, m.values, v.values, state.t, cfg);

    state.m_state = linear_quantize(m, cfg.bits);
    state.v_state = linear_quantize(v, cfg.bits);
}

void optimizer_step(DenseTensor& params, const DenseTensor& grads, AdamState& state,
                    const AdamConfig& cfg) {
    switch (cfg.quant_mode) {
        case QuantMode::none: adam_step(params, grads, state, cfg); break;
        case QuantMode::pi_quant: pi_adam_step(params, grads, state, cfg); break;
        case QuantMode::linear_quant: linear_adam_step(params, grads, state, cfg); break;
    }
}

void sgd_step(DenseTensor& params, const DenseTensor& grads, double learning_rate) {
    check_step_inputs(params, grads);
    for (std::size_t i = 0; i < params.values.size(); ++i) {
        params.values[i] -= learning_rate * grads.values[i];
    }
}

void save_adam_state(const std::filesystem::path& stem, const AdamState& state,
                     const AdamConfig& cfg) {
    const auto* m = std::get_if<QuantizedTensor>(&state.m_state);
    const auto* v = std::get_if<QuantizedTensor>(&state.v_state);
    if (m == nullptr || v == nullptr) {
        throw DomainError("save_adam_state: only pi_quant states are persisted");
    }
    write_quantized(stem.string() + ".m.piqt", *m);
    write_quantized(stem.string() + ".v.piqt", *v);

    nlohmann::json manifest = {
        {"schema", "piquant.adam_state.v1"},
        {"t", state.t},
        {"config",
         {{"learning_rate", cfg.learning_rate},
          {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},
          {"epsilon", cfg.epsilon},
          {"quant_mode", "pi_quant"},
          {"lambda", cfg.lambda}}},
    };
    std::ofstream out(stem.string() + ".json");
    if (!out) throw IoError("cannot open manifest for writing");
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("manifest write failed");
}

std::pair<AdamState, AdamConfig> load_adam_state(const std::filesystem::path& stem) {
    std::ifstream in(stem.string() + ".json");
    if (!in) throw IoError("cannot open manifest " + stem.string() + ".json");
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad manifest: ") + e.what());
    }
    if (manifest.value("schema", "") != "piquant.adam_state.v1") {
        throw FormatError("unknown manifest schema");
    }

    AdamConfig cfg;
    cfg.quant_mode = QuantMode::pi_quant;
    const auto& jc = manifest.at("config");
    cfg.learning_rate = jc.at("learning_rate").get<double>();
    cfg.beta1 = jc.at("beta1").get<double>();
    cfg.beta2 = jc.at("beta2").get<double>();
    cfg.epsilon = jc.at("epsilon").get<double>();
    cfg.lambda = jc.at("lambda").get<int>();

    AdamState state;
    state.t = manifest.at("t").get<std::uint64_t>();
    state.m_state = read_quantized(stem.string() + ".m.piqt");
    state.v_state = read_quantized(stem.string() + ".v.piqt");
    return {std::move(state), cfg};
}

}  // namespace piquant
