#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "piquant/rotation_codec.hpp"

namespace piquant {

// Row-major dense tensor of binary64 values.
struct DenseTensor {
    std::vector<std::uint64_t> shape;
    std::vector<double> values;

    static DenseTensor from_values(std::vector<double> v) {
        DenseTensor t;
        t.shape = {v.size()};
        t.values = std::move(v);
        return t;
    }

    std::uint64_t size() const { return values.size(); }
};

enum class PackMode : std::uint8_t {
    byte_aligned = 0,   // each code in the smallest whole number of bytes
    group_packed = 1,   // groups of G codes as one radix-10^(2*lambda) integer
};

// Persisted form of a tensor: one code per parameter pair plus a scale.
struct QuantizedTensor {
    int lambda = 0;
    double scale_w = 0.0;
    std::uint64_t original_len = 0;
    bool padded = false;
    std::vector<std::uint64_t> shape;
    std::vector<RotationCode> codes;  // length ceil(original_len / 2)
    PackMode pack_mode = PackMode::byte_aligned;
};

struct SplitTensor {
    std::vector<double> x;  // first ceil(n/2) elements
    std::vector<double> y;  // remainder, zero-padded to the same length
    bool padded = false;
};

// Contiguous halves: first half becomes the real part, second half the
// imaginary part; a single trailing zero pads odd lengths.
SplitTensor split_tensor(const DenseTensor& t);

// Scale by w = max|t|, encode every pair. w = 0 emits the canonical
// origin code for every pair. OpenMP-parallel over pairs; output is
// bit-identical to the serial variant.
QuantizedTensor quantize_tensor(const DenseTensor& t, const PrecisionConfig& cfg,
                                PackMode pack_mode = PackMode::byte_aligned);

// Reference implementation, kept for tests and benchmarks.
QuantizedTensor quantize_tensor_serial(const DenseTensor& t, const PrecisionConfig& cfg,
                                       PackMode pack_mode = PackMode::byte_aligned);

// Decode every code, rescale, concatenate the halves, drop padding.
DenseTensor dequantize_tensor(const QuantizedTensor& q);
DenseTensor dequantize_tensor_serial(const QuantizedTensor& q);

struct PackedCodes {
    PackMode mode = PackMode::byte_aligned;
    std::uint32_t group_size = 0;  // codes per group (group_packed only)
    std::uint64_t bit_length = 0;
    std::vector<std::uint8_t> payload;
};

// Largest G with 10^(2*lambda*G) < 2^128, so a group fits one accumulator.
std::uint32_t default_group_size(int lambda);

// Exact bit width of a group of `count` codes, i.e. bits of 10^(2*lambda*count) - 1.
std::uint32_t group_bit_width(int lambda, std::uint32_t count);

PackedCodes pack_codes(std::span<const RotationCode> codes, const PrecisionConfig& cfg,
                       PackMode mode);

// Inverse of pack_codes; `count` is the expected number of codes.
std::vector<RotationCode> unpack_codes(const PackedCodes& packed, std::uint64_t count,
                                       const PrecisionConfig& cfg);

}  // namespace piquant
