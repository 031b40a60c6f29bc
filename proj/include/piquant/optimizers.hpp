#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>

#include "piquant/tensor_quant.hpp"

namespace piquant {

enum class QuantMode : std::uint8_t {
    none = 0,          // dense moments
    pi_quant = 1,      // rotation-coded moments at `lambda`
    linear_quant = 2,  // uniform min/max grid at `bits`
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    QuantMode quant_mode = QuantMode::none;
    int lambda = 2;  // pi_quant digit budget
    int bits = 8;    // linear_quant width
    // Stores the moments dense while exercising the restore/quantize path;
    // the result must match adam_step bit for bit.
    bool identity_codec = false;
};

// Uniform quantizer over [lo, hi] with 2^bits levels.
struct LinearQuantTensor {
    int bits = 8;
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t original_len = 0;
    std::vector<std::uint64_t> shape;
    std::vector<std::uint32_t> codes;
};

LinearQuantTensor linear_quantize(const DenseTensor& t, int bits);
DenseTensor linear_dequantize(const LinearQuantTensor& q);

using MomentState = std::variant<DenseTensor, QuantizedTensor, LinearQuantTensor>;

struct AdamState {
    std::uint64_t t = 0;
    MomentState m_state;
    MomentState v_state;
};

// Moments start as Quant(0) in the configured representation.
AdamState init_adam_state(const std::vector<std::uint64_t>& shape, const AdamConfig& cfg);

// One Adam step with dense moments (quant_mode = none).
void adam_step(DenseTensor& params, const DenseTensor& grads, AdamState& state,
               const AdamConfig& cfg);

// One Adam step with rotation-coded moments: restore both, run the exact
// adam_step arithmetic in binary64, re-quantize both. Restored v is clamped
// to >= 0 before the square root.
void pi_adam_step(DenseTensor& params, const DenseTensor& grads, AdamState& state,
                  const AdamConfig& cfg);

// Same protocol with the uniform quantizer, fresh min/max each step.
void linear_adam_step(DenseTensor& params, const DenseTensor& grads, AdamState& state,
                      const AdamConfig& cfg);

// Dispatches on cfg.quant_mode.
void optimizer_step(DenseTensor& params, const DenseTensor& grads, AdamState& state,
                    const AdamConfig& cfg);

void sgd_step(DenseTensor& params, const DenseTensor& grads, double learning_rate);

// Persists a pi_quant state as <stem>.m.piqt, <stem>.v.piqt and a JSON
// manifest <stem>.json holding {t, config}.
void save_adam_state(const std::filesystem::path& stem, const AdamState& state,
                     const AdamConfig& cfg);
std::pair<AdamState, AdamConfig> load_adam_state(const std::filesystem::path& stem);

}  // namespace piquant
