#include "piquant/container_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <memory>
#include <random>
#include <string>

#include "piquant/errors.hpp"

namespace piquant {

namespace {

constexpr char kDenseMagic[4] = {'P', 'Q', 'T', 'D'};
constexpr char kQuantMagic[4] = {'P', 'I', 'Q', 'T'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kDtypeFloat64 = 0;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

class Writer {
public:
    explicit Writer(std::FILE* f) : f_(f) {}

    void bytes(const void* data, std::size_t n) {
        if (std::fwrite(data, 1, n, f_) != n) {
            throw IoError("short write");
        }
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u16(std::uint16_t v) {
        std::uint8_t b[2] = {std::uint8_t(v), std::uint8_t(v >> 8)};
        bytes(b, 2);
    }
    void u64(std::uint64_t v) {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = std::uint8_t(v >> (8 * i));
        bytes(b, 8);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

private:
    std::FILE* f_;
};

class Reader {
public:
    explicit Reader(std::FILE* f) : f_(f) {}

    void bytes(void* data, std::size_t n) {
        if (std::fread(data, 1, n, f_) != n) {
            throw FormatError("file truncated");
        }
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint16_t u16() {
        std::uint8_t b[2];
        bytes(b, 2);
        return std::uint16_t(b[0] | (b[1] << 8));
    }
    std::uint64_t u64() {
        std::uint8_t b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    bool at_eof() {
        const int c = std::fgetc(f_);
        if (c == EOF) return true;
        std::ungetc(c, f_);
        return false;
    }

private:
    std::FILE* f_;
};

// Write-to-temp then rename, so a failure never leaves a partial file
// at the destination.
template <typename Fn>
void atomic_write(const std::filesystem::path& path, Fn&& body) {
    std::random_device rd;
    const std::filesystem::path tmp =
        path.parent_path() /
        (path.filename().string() + ".tmp" + std::to_string(rd() % 1000000));

    {
        FilePtr f(std::fopen(tmp.c_str(), "wb"));
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        Writer w(f.get());
        try {
            body(w);
        } catch (...) {
            f.reset();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw;
        }
        if (std::fflush(f.get()) != 0) {
            f.reset();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("flush failed for " + tmp.string());
        }
    }

    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code rm;
        std::filesystem::remove(tmp, rm);
        throw IoError("rename to " + path.string() + " failed: " + ec.message());
    }
}

FilePtr open_for_read(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open " + path.string());
    return f;
}

void expect_magic(Reader& r, const char (&magic)[4], const char* kind) {
    char m[4];
    r.bytes(m, 4);
    if (std::memcmp(m, magic, 4) != 0) {
        throw FormatError(std::string("bad magic, not a ") + kind + " file");
    }
}

std::uint64_t checked_element_count(const std::vector<std::uint64_t>& dims) {
    std::uint64_t n = 1;
    for (std::uint64_t d : dims) {
        if (d != 0 && n > UINT64_MAX / d) throw FormatError("dimension overflow");
        n *= d;
    }
    return n;
}

}  // namespace

void write_dense(const std::filesystem::path& path, const DenseTensor& t) {
    if (checked_element_count(t.shape) != t.size()) {
        throw FormatError("shape does not match value count");
    }
    atomic_write(path, [&](Writer& w) {
        w.bytes(kDenseMagic, 4);
        w.u8(kVersion);
        w.u8(kDtypeFloat64);
        w.u8(static_cast<std::uint8_t>(t.shape.size()));
        for (std::uint64_t d : t.shape) w.u64(d);
        for (double v : t.values) w.f64(v);
    });
}

DenseTensor read_dense(const std::filesystem::path& path) {
    FilePtr f = open_for_read(path);
    Reader r(f.get());
    expect_magic(r, kDenseMagic, "dense tensor");
    if (r.u8() != kVersion) throw FormatError("unsupported dense container version");
    if (r.u8() != kDtypeFloat64) throw FormatError("unsupported dtype");

    DenseTensor t;
    const std::uint8_t rank = r.u8();
    t.shape.resize(rank);
    for (auto& d : t.shape) d = r.u64();
    const std::uint64_t n = checked_element_count(t.shape);
    t.values.resize(n);
    for (auto& v : t.values) v = r.f64();
    if (!r.at_eof()) throw FormatError("trailing bytes after dense payload");
    return t;
}

void write_quantized(const std::filesystem::path& path, const QuantizedTensor& q) {
    const PrecisionConfig cfg = PrecisionConfig::make(q.lambda);
    const PackedCodes packed = pack_codes(q.codes, cfg, q.pack_mode);

    atomic_write(path, [&](Writer& w) {
        w.bytes(kQuantMagic, 4);
        w.u8(kVersion);
        w.u8(static_cast<std::uint8_t>(q.lambda));
        w.u8(static_cast<std::uint8_t>(q.pack_mode));
        w.u8(q.padded ? 1 : 0);
        w.u16(static_cast<std::uint16_t>(packed.group_size));
        w.u8(static_cast<std::uint8_t>(q.shape.size()));
        for (std::uint64_t d : q.shape) w.u64(d);
        w.u64(q.original_len);
        w.f64(q.scale_w);
        w.u64(packed.bit_length);
        w.bytes(packed.payload.data(), packed.payload.size());
    });
}

QuantizedTensor read_quantized(const std::filesystem::path& path) {
    FilePtr f = open_for_read(path);
    Reader r(f.get());
    expect_magic(r, kQuantMagic, "quantized tensor");
    if (r.u8() != kVersion) throw FormatError("unsupported quantized container version");

    QuantizedTensor q;
    q.lambda = r.u8();
    if (q.lambda < 1 || q.lambda > 4) throw FormatError("lambda out of range in header");
    const std::uint8_t mode = r.u8();
    if (mode > 1) throw FormatError("unknown pack mode");
    q.pack_mode = static_cast<PackMode>(mode);
    q.padded = r.u8() != 0;

    PackedCodes packed;
    packed.mode = q.pack_mode;
    packed.group_size = r.u16();

    const std::uint8_t rank = r.u8();
    q.shape.resize(rank);
    for (auto& d : q.shape) d = r.u64();
    q.original_len = r.u64();
    q.scale_w = r.f64();
    packed.bit_length = r.u64();

    const std::uint64_t payload_bytes = (packed.bit_length + 7) / 8;
    packed.payload.resize(payload_bytes);
    r.bytes(packed.payload.data(), payload_bytes);
    if (!r.at_eof()) throw FormatError("trailing bytes after quantized payload");

    const PrecisionConfig cfg = PrecisionConfig::make(q.lambda);
    const std::uint64_t code_count = (q.original_len + 1) / 2;
    q.codes = unpack_codes(packed, code_count, cfg);

    if (q.padded != ((q.original_len % 2) != 0)) {
        throw FormatError("padded flag inconsistent with element count");
    }
    return q;
}

}  // namespace piquant
