#include "piquant/tensor_quant.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "piquant/errors.hpp"

namespace piquant {

namespace {

using u128 = unsigned __int128;

// Parallel pair loops only pay off past this size; the cutoff does not
// change results, only scheduling.
constexpr std::uint64_t kParallelCutoff = 1 << 12;

void check_finite(const DenseTensor& t) {
    for (double v : t.values) {
        if (!std::isfinite(v)) {
            throw DomainError("tensor contains a non-finite value");
        }
    }
}

double max_abs(std::span<const double> v) {
    double w = 0.0;
#pragma omp parallel for reduction(max : w) if (v.size() >= kParallelCutoff)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(v.size()); ++i) {
        w = std::max(w, std::fabs(v[i]));
    }
    return w;
}

template <bool Parallel>
QuantizedTensor quantize_impl(const DenseTensor& t, const PrecisionConfig& cfg,
                              PackMode pack_mode) {
    check_finite(t);

    QuantizedTensor q;
    q.lambda = cfg.lambda;
    q.original_len = t.size();
    q.shape = t.shape;
    q.pack_mode = pack_mode;

    const std::uint64_t n = t.size();
    const std::uint64_t half = (n + 1) / 2;
    q.padded = (n % 2) != 0;
    q.codes.resize(half);
    if (n == 0) return q;

    const double w = max_abs(t.values);
    q.scale_w = w;
    if (w == 0.0) {
        // Any code restores to zero after scaling; the origin code keeps
        // the container canonical.
        const RotationCode zero_code = encode_pair({0.0, 0.0}, cfg);
        std::fill(q.codes.begin(), q.codes.end(), zero_code);
        return q;
    }

    const double* vals = t.values.data();
    // Divide rather than multiply by 1/w so |x| <= 1 holds exactly at the max.
#pragma omp parallel for schedule(static) if (Parallel && half >= kParallelCutoff)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(half); ++i) {
        const double x = vals[i] / w;
        const std::uint64_t j = half + static_cast<std::uint64_t>(i);
        const double y = j < n ? vals[j] / w : 0.0;
        q.codes[i] = encode_pair({x, y}, cfg);
    }
    return q;
}

template <bool Parallel>
DenseTensor dequantize_impl(const QuantizedTensor& q) {
    const PrecisionConfig cfg = PrecisionConfig::make(q.lambda);
    const std::uint64_t n = q.original_len;
    const std::uint64_t half = (n + 1) / 2;
    if (q.codes.size() != half) {
        throw FormatError("dequantize: expected " + std::to_string(half) +
                          " codes, got " + std::to_string(q.codes.size()));
    }
    for (RotationCode c : q.codes) {
        if (c >= cfg.code_modulus) {
            throw FormatError("dequantize: code out of range");
        }
    }

    DenseTensor t;
    t.shape = q.shape;
    t.values.resize(n);
    double* out = t.values.data();
    const double w = q.scale_w;

#pragma omp parallel for schedule(static) if (Parallel && half >= kParallelCutoff)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(half); ++i) {
        const PlanarPoint p = decode_code(q.codes[i], cfg);
        out[i] = p.x * w;
        const std::uint64_t j = half + static_cast<std::uint64_t>(i);
        if (j < n) out[j] = p.y * w;
    }
    return t;
}

std::uint32_t bytes_per_code(int lambda) {
    switch (lambda) {
        case 1: return 1;   // codes < 100
        case 2: return 2;   // codes < 10^4
        default: return 4;  // codes < 10^8
    }
}

class BitWriter {
public:
    void put(u128 v, std::uint32_t count) {
        while (count > 0) {
            const std::uint32_t offset = nbits_ & 7;
            if (offset == 0) bytes_.push_back(0);
            const std::uint32_t take = std::min(8 - offset, count);
            const std::uint8_t mask = static_cast<std::uint8_t>((1u << take) - 1);
            bytes_.back() |= static_cast<std::uint8_t>((static_cast<std::uint64_t>(v) & mask) << offset);
            v >>= take;
            nbits_ += take;
            count -= take;
        }
    }

    std::uint64_t bit_length() const { return nbits_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t nbits_ = 0;
};

class BitReader {
public:
    BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_length)
        : bytes_(bytes), bit_length_(bit_length) {}

    u128 get(std::uint32_t count) {
        if (pos_ + count > bit_length_) {
            throw FormatError("packed payload truncated");
        }
        u128 out = 0;
        std::uint32_t got = 0;
        while (got < count) {
            const std::uint32_t offset = pos_ & 7;
            const std::uint32_t take = std::min(8 - offset, count - got);
            const std::uint8_t byte = bytes_[pos_ >> 3];
            const std::uint8_t mask = static_cast<std::uint8_t>((1u << take) - 1);
            out |= static_cast<u128>((byte >> offset) & mask) << got;
            pos_ += take;
            got += take;
        }
        return out;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::uint64_t bit_length_ = 0;
    std::uint64_t pos_ = 0;
};

u128 radix_pow(std::uint64_t radix, std::uint32_t exp) {
    u128 v = 1;
    for (std::uint32_t i = 0; i < exp; ++i) v *= radix;
    return v;
}

}  // namespace

SplitTensor split_tensor(const DenseTensor& t) {
    check_finite(t);
    const std::uint64_t n = t.size();
    const std::uint64_t half = (n + 1) / 2;
    SplitTensor s;
    s.padded = (n % 2) != 0;
    s.x.assign(t.values.begin(), t.values.begin() + half);
    s.y.assign(t.values.begin() + half, t.values.end());
    s.y.resize(half, 0.0);
    return s;
}

QuantizedTensor quantize_tensor(const DenseTensor& t, const PrecisionConfig& cfg,
                                PackMode pack_mode) {
    return quantize_impl<true>(t, cfg, pack_mode);
}

QuantizedTensor quantize_tensor_serial(const DenseTensor& t, const PrecisionConfig& cfg,
                                       PackMode pack_mode) {
    return quantize_impl<false>(t, cfg, pack_mode);
}

DenseTensor dequantize_tensor(const QuantizedTensor& q) {
    return dequantize_impl<true>(q);
}

DenseTensor dequantize_tensor_serial(const QuantizedTensor& q) {
    return dequantize_impl<false>(q);
}

std::uint32_t default_group_size(int lambda) {
    switch (lambda) {
        case 1: return 19;
        case 2: return 9;
        case 3: return 6;
        case 4: return 4;
        default: throw ConfigError("lambda must be in [1, 4]");
    }
}

std::uint32_t group_bit_width(int lambda, std::uint32_t count) {
    const std::uint64_t radix = PrecisionConfig::make(lambda).code_modulus;
    u128 max_value = radix_pow(radix, count) - 1;
    std::uint32_t bits = 0;
    while (max_value > 0) {
        max_value >>= 1;
        ++bits;
    }
    return bits;
}

PackedCodes pack_codes(std::span<const RotationCode> codes, const PrecisionConfig& cfg,
                       PackMode mode) {
    for (RotationCode c : codes) {
        if (c >= cfg.code_modulus) {
            throw FormatError("pack_codes: code out of range");
        }
    }

    PackedCodes packed;
    packed.mode = mode;

    if (mode == PackMode::byte_aligned) {
        const std::uint32_t bpc = bytes_per_code(cfg.lambda);
        packed.payload.reserve(codes.size() * bpc);
        for (RotationCode c : codes) {
            for (std::uint32_t b = 0; b < bpc; ++b) {
                packed.payload.push_back(static_cast<std::uint8_t>(c >> (8 * b)));
            }
        }
        packed.bit_length = static_cast<std::uint64_t>(codes.size()) * bpc * 8;
        return packed;
    }

    const std::uint32_t group = default_group_size(cfg.lambda);
    packed.group_size = group;
    BitWriter writer;
    for (std::uint64_t start = 0; start < codes.size(); start += group) {
        const std::uint32_t count =
            static_cast<std::uint32_t>(std::min<std::uint64_t>(group, codes.size() - start));
        u128 value = 0;
        for (std::uint32_t i = count; i-- > 0;) {
            value = value * cfg.code_modulus + codes[start + i];
        }
        writer.put(value, group_bit_width(cfg.lambda, count));
    }
    packed.bit_length = writer.bit_length();
    packed.payload = writer.take();
    return packed;
}

std::vector<RotationCode> unpack_codes(const PackedCodes& packed, std::uint64_t count,
                                       const PrecisionConfig& cfg) {
    std::vector<RotationCode> codes;
    codes.reserve(count);

    if (packed.mode == PackMode::byte_aligned) {
        const std::uint32_t bpc = bytes_per_code(cfg.lambda);
        if (packed.payload.size() < count * bpc) {
            throw FormatError("byte-aligned payload truncated");
        }
        for (std::uint64_t i = 0; i < count; ++i) {
            std::uint64_t c = 0;
            for (std::uint32_t b = 0; b < bpc; ++b) {
                c |= static_cast<std::uint64_t>(packed.payload[i * bpc + b]) << (8 * b);
            }
            if (c >= cfg.code_modulus) {
                throw FormatError("unpacked code out of range");
            }
            codes.push_back(c);
        }
        return codes;
    }

    const std::uint32_t group =
        packed.group_size != 0 ? packed.group_size : default_group_size(cfg.lambda);
    if (packed.payload.size() * 8 < packed.bit_length) {
        throw FormatError("packed payload shorter than its declared bit length");
    }
    BitReader reader(packed.payload, packed.bit_length);
    for (std::uint64_t start = 0; start < count; start += group) {
        const std::uint32_t take =
            static_cast<std::uint32_t>(std::min<std::uint64_t>(group, count - start));
        u128 value = reader.get(group_bit_width(cfg.lambda, take));
        for (std::uint32_t i = 0; i < take; ++i) {
            const std::uint64_t c = static_cast<std::uint64_t>(value % cfg.code_modulus);
            if (c >= cfg.code_modulus) {
                throw FormatError("unpacked code out of range");
            }
            codes.push_back(c);
            value /= cfg.code_modulus;
        }
        if (value != 0) {
            throw FormatError("packed group has residue bits set");
        }
    }
    return codes;
}

}  // namespace piquant
