#pragma once

#include <filesystem>

#include "piquant/tensor_quant.hpp"

namespace piquant {

// Dense tensor container (.pqtd): magic "PQTD", version u8=1, dtype u8
// (0 = binary64), rank u8, dims u64 each, then the values little-endian.
void write_dense(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor read_dense(const std::filesystem::path& path);

// Quantized container (.piqt): magic "PIQT", version u8=1, lambda u8,
// pack_mode u8, padded u8, group_size u16, rank u8, dims u64 each,
// original_len u64, scale_w binary64, payload_bit_length u64, payload.
void write_quantized(const std::filesystem::path& path, const QuantizedTensor& q);
QuantizedTensor read_quantized(const std::filesystem::path& path);

}  // namespace piquant
